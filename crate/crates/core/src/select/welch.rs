//! Welch's unequal-variance t-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::SelectError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

fn mean_var(s: &[f64]) -> (f64, f64) {
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided Welch test. When both samples have zero variance the statistic
/// is 0 (equal means, p = 1) or infinite (p = 0).
pub fn welch_t_test(x: &[f64], y: &[f64]) -> Result<WelchResult, SelectError> {
    if x.len() < 2 || y.len() < 2 {
        return Err(SelectError::TooFewObservations);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(SelectError::NonFinite);
    }
    let (mx, vx) = mean_var(x);
    let (my, vy) = mean_var(y);
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (ax, ay) = (vx / nx, vy / ny);
    let se2 = ax + ay;
    if se2 == 0.0 {
        return Ok(if mx == my {
            WelchResult {
                t: 0.0,
                df: nx + ny - 2.0,
                p_value: 1.0,
            }
        } else {
            WelchResult {
                t: if mx > my { f64::INFINITY } else { f64::NEG_INFINITY },
                df: nx + ny - 2.0,
                p_value: 0.0,
            }
        });
    }
    let t = (mx - my) / se2.sqrt();
    let df = se2 * se2 / (ax * ax / (nx - 1.0) + ay * ay / (ny - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| SelectError::Distribution(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok(WelchResult { t, df, p_value: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identical_samples() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let r = welch_t_test(&x, &x).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_value, 1.0);
        let c = welch_t_test(&[3.0, 3.0], &[3.0, 3.0, 3.0]).unwrap();
        assert_eq!((c.t, c.p_value), (0.0, 1.0));
        let c = welch_t_test(&[3.0, 3.0], &[4.0, 4.0]).unwrap();
        assert_eq!((c.t, c.p_value), (f64::NEG_INFINITY, 0.0));
    }

    #[test]
    fn hand_computed_statistic() {
        // x: mean 2, var 1; y: mean 5, var 4 -> se^2 = 1/3 + 4/3, t = -3 / sqrt(5/3).
        let r = welch_t_test(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((r.t - (-3.0 / (5.0f64 / 3.0).sqrt())).abs() < 1e-12);
        let df = (25.0 / 9.0) / ((1.0 / 9.0) / 2.0 + (16.0 / 9.0) / 2.0);
        assert!((r.df - df).abs() < 1e-12);
    }

    #[test]
    fn antisymmetric() {
        let x = [0.3, 1.2, -0.7, 2.2, 0.9];
        let y = [1.1, 2.4, 3.3, 0.2];
        let a = welch_t_test(&x, &y).unwrap();
        let b = welch_t_test(&y, &x).unwrap();
        assert_eq!(a.t, -b.t);
        assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn large_shift_agrees_with_permutation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x: Vec<f64> = (0..30).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 10.0).collect();
        let r = welch_t_test(&x, &y).unwrap();
        assert!(r.p_value < 1e-6, "{}", r.p_value);
        // Permutation oracle: no relabelling reaches the observed mean gap.
        let observed = (y.iter().sum::<f64>() - x.iter().sum::<f64>()).abs() / 30.0;
        let mut pooled: Vec<f64> = x.iter().chain(&y).copied().collect();
        let mut extreme = 0;
        for _ in 0..5000 {
            pooled.shuffle(&mut rng);
            let gap = (pooled[30..].iter().sum::<f64>() - pooled[..30].iter().sum::<f64>()).abs() / 30.0;
            if gap >= observed {
                extreme += 1;
            }
        }
        assert_eq!(extreme, 0);
    }

    #[test]
    fn errors() {
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
        assert!(welch_t_test(&[1.0, f64::INFINITY], &[1.0, 2.0]).is_err());
    }
}
