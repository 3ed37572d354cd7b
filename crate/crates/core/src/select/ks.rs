//! Two-sample Kolmogorov–Smirnov test.

use serde::{Deserialize, Serialize};

use super::SelectError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

fn sorted(sample: &[f64]) -> Result<Vec<f64>, SelectError> {
    if sample.is_empty() {
        return Err(SelectError::EmptySample);
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(SelectError::NonFinite);
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Supremum distance between the two empirical CDFs, evaluated at every
/// pooled unique value.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> Result<f64, SelectError> {
    let (x, y) = (sorted(x)?, sorted(y)?);
    Ok(statistic_sorted(&x, &y))
}

fn statistic_sorted(x: &[f64], y: &[f64]) -> f64 {
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() || j < y.len() {
        let v = match (x.get(i), y.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    d
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
///
/// Small arguments use the Jacobi-theta form
/// `1 - sqrt(2 pi)/lambda * sum exp(-(2k-1)^2 pi^2 / (8 lambda^2))`, larger
/// ones the alternating series `2 sum (-1)^(j-1) exp(-2 j^2 lambda^2)`. Both
/// stop once a term drops below 1e-10.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    const EPS: f64 = 1e-10;
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.18 {
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for k in 1.. {
            let m = (2 * k - 1) as f64;
            let term = (-m * m * c).exp();
            sum += term;
            if term < EPS {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum
    } else {
        let mut sum = 0.0;
        for j in 1.. {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term < EPS {
                break;
            }
        }
        2.0 * sum
    };
    p.clamp(0.0, 1.0)
}

/// KS test with the asymptotic p-value at `lambda = D * sqrt(n1 n2 / (n1 + n2))`.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult, SelectError> {
    let (xs, ys) = (sorted(x)?, sorted(y)?);
    Ok(ks_sorted(&xs, &ys))
}

pub(crate) fn ks_sorted(x: &[f64], y: &[f64]) -> KsResult {
    let d = statistic_sorted(x, y);
    let (n1, n2) = (x.len(), y.len());
    let en = (n1 as f64 * n2 as f64) / (n1 + n2) as f64;
    KsResult {
        d_statistic: d,
        p_value: kolmogorov_sf(d * en.sqrt()),
        n1,
        n2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_d(x: &[f64], y: &[f64]) -> f64 {
        let ecdf = |s: &[f64], t: f64| s.iter().filter(|v| **v <= t).count() as f64 / s.len() as f64;
        x.iter()
            .chain(y)
            .map(|&t| (ecdf(x, t) - ecdf(y, t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn reference_cases() {
        let r = ks_two_sample(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap();
        assert_eq!((r.d_statistic, r.p_value), (0.0, 1.0));
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(ks_statistic(&[1.0, 3.0], &[2.0, 4.0]).unwrap(), 0.5);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
        assert!(ks_two_sample(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn kolmogorov_branches_agree_at_switch() {
        // The two series are the same function; compare them at the switch point.
        let lambda = 1.18;
        let below = kolmogorov_sf(lambda - 1e-12);
        let above = kolmogorov_sf(lambda);
        assert!((below - above).abs() < 1e-9);
        // Known values of the Kolmogorov distribution.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.2239) - 0.10).abs() < 1e-4);
        assert!((kolmogorov_sf(0.5) - 0.9639).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            x in proptest::collection::vec(-5i32..5, 1..20),
            y in proptest::collection::vec(-5i32..5, 1..20),
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let r = ks_two_sample(&x, &y).unwrap();
            prop_assert!((r.d_statistic - brute_d(&x, &y)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&r.p_value));
            prop_assert_eq!(r.d_statistic, ks_two_sample(&y, &x).unwrap().d_statistic);
            prop_assert_eq!(r.p_value, ks_two_sample(&y, &x).unwrap().p_value);
        }

        #[test]
        fn invariant_under_increasing_maps(
            x in proptest::collection::vec(-3.0f64..3.0, 1..30),
            y in proptest::collection::vec(-3.0f64..3.0, 1..30),
            a in 0.1f64..10.0,
            b in -10.0f64..10.0,
        ) {
            let d = ks_statistic(&x, &y).unwrap();
            let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            let ey: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            prop_assert_eq!(ks_statistic(&ex, &ey).unwrap(), d);
            let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let ay: Vec<f64> = y.iter().map(|v| a * v + b).collect();
            prop_assert_eq!(ks_statistic(&ax, &ay).unwrap(), d);
        }
    }
}
