//! Per-feature significance filtering against the binary label.
//!
//! Each column is split into its fraud and not-fraud values and compared with
//! a two-sample test; the feature is kept iff `p < alpha`.

pub mod ks;
pub mod welch;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ks::{kolmogorov_sf, ks_statistic, ks_two_sample, KsResult};
pub use welch::{welch_t_test, WelchResult};

use crate::corpus::{Label, LabeledSet};
use crate::features::FeatureMatrix;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("Welch's test needs at least two observations per sample")]
    TooFewObservations,
    #[error("t distribution: {0}")]
    Distribution(String),
    #[error("selection needs both classes; only {0} present")]
    SingleClass(Label),
    #[error("row {0:?} has no label")]
    Unlabeled(String),
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("feature {name:?}: {source}")]
    Feature { name: String, source: Box<SelectError> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SelectionTest {
    #[default]
    Ks,
    Welch,
}

impl SelectionTest {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionTest::Ks => "ks",
            SelectionTest::Welch => "welch",
        }
    }
}

impl fmt::Display for SelectionTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionTest {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ks" => Ok(SelectionTest::Ks),
            "welch" | "t" | "t-test" => Ok(SelectionTest::Welch),
            _ => Err(format!("unknown test {s:?} (ks|welch)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTestRecord {
    pub name: String,
    /// KS D or Welch t.
    pub statistic: f64,
    pub p_value: f64,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionMask {
    pub test: SelectionTest,
    pub alpha: f64,
    pub records: Vec<FeatureTestRecord>,
}

impl SelectionMask {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_kept(&self) -> usize {
        self.records.iter().filter(|r| r.kept).count()
    }

    pub fn kept_indices(&self) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kept)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn kept_names(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter(|r| r.kept)
            .map(|r| r.name.as_str())
            .collect()
    }

    /// Kept columns, or the single column with the smallest p-value (lowest
    /// index on ties) when nothing passes, so a model always has an input.
    pub fn kept_or_best(&self) -> Vec<usize> {
        let kept = self.kept_indices();
        if !kept.is_empty() || self.records.is_empty() {
            return kept;
        }
        let best = self
            .records
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.p_value.total_cmp(&b.p_value).then(i.cmp(j)))
            .map(|(i, _)| i)
            .expect("nonempty");
        vec![best]
    }

    /// The same tests re-thresholded at another level.
    pub fn at_alpha(&self, alpha: f64) -> SelectionMask {
        SelectionMask {
            test: self.test,
            alpha,
            records: self
                .records
                .iter()
                .map(|r| FeatureTestRecord {
                    kept: r.p_value < alpha,
                    ..r.clone()
                })
                .collect(),
        }
    }

    /// CSV with columns `name,statistic,p_value,kept`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["name", "statistic", "p_value", "kept"])?;
        for r in &self.records {
            w.write_record([
                r.name.clone(),
                r.statistic.to_string(),
                r.p_value.to_string(),
                r.kept.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Tests every column of `matrix` restricted to `rows`, labelled by `labels`
/// (parallel to `rows`).
pub fn select_rows(
    matrix: &FeatureMatrix,
    rows: &[usize],
    labels: &[Label],
    test: SelectionTest,
    alpha: f64,
) -> Result<SelectionMask, SelectError> {
    if rows.len() != labels.len() {
        return Err(SelectError::LengthMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let fraud: Vec<usize> = rows
        .iter()
        .zip(labels)
        .filter(|(_, l)| l.is_fraud())
        .map(|(r, _)| *r)
        .collect();
    let not: Vec<usize> = rows
        .iter()
        .zip(labels)
        .filter(|(_, l)| !l.is_fraud())
        .map(|(r, _)| *r)
        .collect();
    if fraud.is_empty() {
        return Err(SelectError::SingleClass(Label::NotFraud));
    }
    if not.is_empty() {
        return Err(SelectError::SingleClass(Label::Fraud));
    }
    let records = (0..matrix.n_cols())
        .into_par_iter()
        .map(|col| {
            let xs: Vec<f64> = fraud.iter().map(|&r| matrix.get(r, col)).collect();
            let ys: Vec<f64> = not.iter().map(|&r| matrix.get(r, col)).collect();
            let (statistic, p_value) = match test {
                SelectionTest::Ks => ks_two_sample(&xs, &ys).map(|r| (r.d_statistic, r.p_value)),
                SelectionTest::Welch => welch_t_test(&xs, &ys).map(|r| (r.t, r.p_value)),
            }
            .map_err(|e| SelectError::Feature {
                name: matrix.names()[col].clone(),
                source: Box::new(e),
            })?;
            Ok(FeatureTestRecord {
                name: matrix.names()[col].clone(),
                statistic,
                p_value,
                kept: p_value < alpha,
            })
        })
        .collect::<Result<Vec<_>, SelectError>>()?;
    Ok(SelectionMask {
        test,
        alpha,
        records,
    })
}

/// Tests every column over the matrix rows, labels looked up by campaign id.
pub fn select_significant(
    matrix: &FeatureMatrix,
    labels: &LabeledSet,
    test: SelectionTest,
    alpha: f64,
) -> Result<SelectionMask, SelectError> {
    let mut row_labels = Vec::with_capacity(matrix.n_rows());
    for id in matrix.ids() {
        row_labels.push(labels.get(id).ok_or_else(|| SelectError::Unlabeled(id.clone()))?);
    }
    let rows: Vec<usize> = (0..matrix.n_rows()).collect();
    select_rows(matrix, &rows, &row_labels, test, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn labelled(n_per_class: usize) -> (Vec<String>, LabeledSet) {
        let ids: Vec<String> = (0..2 * n_per_class).map(|i| format!("c{i:04}")).collect();
        let labels = LabeledSet::new(
            ids.iter()
                .enumerate()
                .map(|(i, id)| (id.clone(), if i < n_per_class { Label::Fraud } else { Label::NotFraud }))
                .collect(),
        );
        (ids, labels)
    }

    #[test]
    fn constant_and_label_features() {
        let (ids, labels) = labelled(10);
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![3.0, if i < 10 { 1.0 } else { 0.0 }]).collect();
        let m = FeatureMatrix::from_rows(ids, vec!["const".to_string(), "label".to_string()].into(), rows).unwrap();
        let mask = select_significant(&m, &labels, SelectionTest::Ks, 0.05).unwrap();
        assert_eq!(mask.records[0].statistic, 0.0);
        assert!(!mask.records[0].kept);
        assert_eq!(mask.records[1].statistic, 1.0);
        assert!(mask.records[1].kept);
        assert_eq!(mask.kept_names(), vec!["label"]);
        let welch = select_significant(&m, &labels, SelectionTest::Welch, 0.05).unwrap();
        assert_eq!(welch.kept_names(), vec!["label"]);
    }

    #[test]
    fn single_class_rejected() {
        let ids: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        let labels = LabeledSet::new(ids.iter().map(|i| (i.clone(), Label::Fraud)).collect());
        let m = FeatureMatrix::from_rows(ids, vec!["f".to_string()].into(), vec![vec![1.0]; 4]).unwrap();
        assert!(matches!(
            select_significant(&m, &labels, SelectionTest::Ks, 0.05),
            Err(SelectError::SingleClass(_))
        ));
    }

    #[test]
    fn fallback_picks_lowest_p() {
        let mask = SelectionMask {
            test: SelectionTest::Ks,
            alpha: 0.05,
            records: [0.4, 0.2, 0.2, 0.9]
                .iter()
                .enumerate()
                .map(|(i, &p)| FeatureTestRecord {
                    name: format!("f{i}"),
                    statistic: 0.1,
                    p_value: p,
                    kept: false,
                })
                .collect(),
        };
        assert_eq!(mask.kept_or_best(), vec![1]);
    }

    #[test]
    fn kept_set_shrinks_with_alpha() {
        let (ids, labels) = labelled(40);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|i| {
                (0..30)
                    .map(|j| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z + if i < 40 { j as f64 * 0.03 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let names: Vec<String> = (0..30).map(|j| format!("f{j}")).collect();
        let m = FeatureMatrix::from_rows(ids, names.into(), rows).unwrap();
        let mask = select_significant(&m, &labels, SelectionTest::Ks, 0.2).unwrap();
        let mut previous = mask.kept_indices();
        for alpha in [0.1, 0.05, 0.01, 0.001] {
            let k = mask.at_alpha(alpha).kept_indices();
            assert!(k.iter().all(|i| previous.contains(i)));
            previous = k;
        }
        let fresh = select_significant(&m, &labels, SelectionTest::Ks, 0.01).unwrap();
        assert_eq!(fresh, mask.at_alpha(0.01));
    }

    #[test]
    fn csv_export() {
        let mask = SelectionMask {
            test: SelectionTest::Ks,
            alpha: 0.05,
            records: vec![FeatureTestRecord {
                name: "read.ari".into(),
                statistic: 0.5,
                p_value: 0.01,
                kept: true,
            }],
        };
        let mut out = Vec::new();
        mask.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "name,statistic,p_value,kept\nread.ari,0.5,0.01,true\n");
    }
}
