//! Per-feature standardisation fitted on training rows.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Mean and population standard deviation per column of a row-major
    /// `n x d` block. Columns with (numerically) zero spread get scale 1.
    pub fn fit(x: &[f64], d: usize) -> Self {
        let n = x.len().checked_div(d).unwrap_or(0);
        let mut mean = vec![0.0; d];
        for row in x.chunks_exact(d.max(1)) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n.max(1) as f64;
        }
        let mut var = vec![0.0; d];
        for row in x.chunks_exact(d.max(1)) {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n.max(1) as f64).sqrt();
                if sd <= 1e-12 * m.abs().max(1.0) {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let d = self.mean.len();
        x.chunks_exact(d.max(1)).flat_map(|r| self.transform_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_unit_variance() {
        let x = [1.0, 10.0, 2.0, 10.0, 3.0, 10.0];
        let s = Standardizer::fit(&x, 2);
        assert_eq!(s.mean, vec![2.0, 10.0]);
        assert_eq!(s.scale[1], 1.0);
        let t = s.transform(&x);
        let sd = (2.0f64 / 3.0).sqrt();
        assert!((t[0] + 1.0 / sd).abs() < 1e-12);
        assert_eq!(t[1], 0.0);
    }

    #[test]
    fn near_constant_column_is_not_blown_up() {
        let x = [0.1, 0.1, 0.1];
        let s = Standardizer::fit(&x, 1);
        assert_eq!(s.scale, vec![1.0]);
    }
}
