use std::collections::BTreeMap;
use std::fmt;

use super::CorpusError;

/// Landis–Koch interpretation bands for κ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AgreementBand {
    Poor,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl AgreementBand {
    /// κ < 0 poor; [0, .2] slight; (.2, .4] fair; (.4, .6] moderate; (.6, .8] substantial; above almost perfect.
    pub fn of(kappa: f64) -> AgreementBand {
        if kappa < 0.0 {
            AgreementBand::Poor
        } else if kappa <= 0.2 {
            AgreementBand::Slight
        } else if kappa <= 0.4 {
            AgreementBand::Fair
        } else if kappa <= 0.6 {
            AgreementBand::Moderate
        } else if kappa <= 0.8 {
            AgreementBand::Substantial
        } else {
            AgreementBand::AlmostPerfect
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgreementBand::Poor => "poor",
            AgreementBand::Slight => "slight",
            AgreementBand::Fair => "fair",
            AgreementBand::Moderate => "moderate",
            AgreementBand::Substantial => "substantial",
            AgreementBand::AlmostPerfect => "almost perfect",
        }
    }
}

impl fmt::Display for AgreementBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub value: f64,
    pub band: AgreementBand,
    pub observed: f64,
    pub expected: f64,
}

/// Cohen's κ between two label sequences over any shared finite label set.
///
/// When both annotators use a single identical label throughout, chance
/// agreement is 1 and the ratio is 0/0; κ is reported as 1 in that case.
pub fn cohens_kappa<T: Ord + Clone>(a: &[T], b: &[T]) -> Result<Kappa, CorpusError> {
    if a.len() != b.len() {
        return Err(CorpusError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(CorpusError::EmptyAnnotations);
    }
    let n = a.len() as f64;
    let mut margins: BTreeMap<&T, (usize, usize)> = BTreeMap::new();
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        margins.entry(x).or_default().0 += 1;
        margins.entry(y).or_default().1 += 1;
        if x == y {
            agree += 1;
        }
    }
    let observed = agree as f64 / n;
    let expected: f64 = margins
        .values()
        .map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n))
        .sum();
    let value = if (1.0 - expected).abs() < f64::EPSILON {
        1.0
    } else {
        (observed - expected) / (1.0 - expected)
    };
    Ok(Kappa {
        value,
        band: AgreementBand::of(value),
        observed,
        expected,
    })
}
