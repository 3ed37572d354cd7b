//! Gaussian naive Bayes with a variance floor of `1e-9` times the largest
//! feature variance.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;

const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// Indexed by [`Label::index`].
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl GaussianNb {
    pub fn fit(x: &[f64], d: usize, y: &[Label]) -> GaussianNb {
        let n = y.len();
        let mut overall_var: f64 = 0.0;
        for f in 0..d {
            let col: Vec<f64> = (0..n).map(|i| x[i * d + f]).collect();
            let m = col.iter().sum::<f64>() / n as f64;
            overall_var = overall_var.max(col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64);
        }
        let eps = VAR_SMOOTHING * overall_var;
        let mut mean = [vec![0.0; d], vec![0.0; d]];
        let mut var = [vec![0.0; d], vec![0.0; d]];
        let mut counts = [0usize; 2];
        for l in y {
            counts[l.index()] += 1;
        }
        for c in 0..2 {
            let rows: Vec<usize> = (0..n).filter(|&i| y[i].index() == c).collect();
            for f in 0..d {
                let m = rows.iter().map(|&i| x[i * d + f]).sum::<f64>() / rows.len().max(1) as f64;
                let v = rows.iter().map(|&i| (x[i * d + f] - m).powi(2)).sum::<f64>() / rows.len().max(1) as f64;
                mean[c][f] = m;
                var[c][f] = v + eps;
            }
        }
        let log_prior = [
            (counts[0] as f64 / n as f64).ln(),
            (counts[1] as f64 / n as f64).ln(),
        ];
        GaussianNb { log_prior, mean, var }
    }

    fn joint_log_likelihood(&self, row: &[f64], c: usize) -> f64 {
        let mut ll = self.log_prior[c];
        for ((x, m), v) in row.iter().zip(&self.mean[c]).zip(&self.var[c]) {
            if *v > 0.0 {
                ll -= 0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m).powi(2) / v);
            }
        }
        ll
    }

    /// Posterior probability of fraud.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let a = self.joint_log_likelihood(row, Label::NotFraud.index());
        let b = self.joint_log_likelihood(row, Label::Fraud.index());
        let m = a.max(b);
        let (ea, eb) = ((a - m).exp(), (b - m).exp());
        eb / (ea + eb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

    fn gaussian_classes(n: usize, seed: u64) -> (Vec<f64>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pos = Normal::new(2.0, 1.0).unwrap();
        let neg = Normal::new(-2.0, 1.0).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let fraud = i % 2 == 0;
            let dist = if fraud { pos } else { neg };
            x.push(dist.sample(&mut rng));
            y.push(if fraud { Label::Fraud } else { Label::NotFraud });
        }
        (x, y)
    }

    #[test]
    fn accuracy_near_bayes_rate() {
        let (x, y) = gaussian_classes(2000, 1);
        let nb = GaussianNb::fit(&x, 1, &y);
        let (tx, ty) = gaussian_classes(2000, 2);
        let correct = tx
            .iter()
            .zip(&ty)
            .filter(|(v, l)| (nb.predict_row(&[**v]) >= 0.5) == l.is_fraud())
            .count();
        let acc = correct as f64 / 2000.0;
        let bayes = StatNormal::new(0.0, 1.0).unwrap().cdf(2.0);
        assert!((acc - bayes).abs() <= 0.02, "accuracy {acc} vs Bayes {bayes}");
    }

    #[test]
    fn argmax_invariant_to_affine_rescaling() {
        let (x, y) = gaussian_classes(400, 3);
        let (tx, _) = gaussian_classes(200, 4);
        let nb = GaussianNb::fit(&x, 1, &y);
        let scaled: Vec<f64> = x.iter().map(|v| 7.5 * v - 3.0).collect();
        let nb2 = GaussianNb::fit(&scaled, 1, &y);
        for v in tx {
            assert_eq!(nb.predict_row(&[v]) >= 0.5, nb2.predict_row(&[7.5 * v - 3.0]) >= 0.5);
        }
    }
}
