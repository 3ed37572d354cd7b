//! k-nearest neighbours on standardised features, Euclidean distance.
//! Distance ties go to the lower campaign id.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub d: usize,
    pub x: Vec<f64>,
    pub y: Vec<Label>,
    pub ids: Vec<String>,
}

impl Knn {
    pub fn fit(x: &[f64], d: usize, y: &[Label], ids: &[String], k: usize) -> Knn {
        Knn {
            k,
            d,
            x: x.to_vec(),
            y: y.to_vec(),
            ids: ids.to_vec(),
        }
    }

    /// Fraction of fraud among the `k` nearest training rows.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .x
            .chunks_exact(self.d.max(1))
            .enumerate()
            .map(|(i, r)| (r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| self.ids[a.1].cmp(&self.ids[b.1])));
        let k = self.k.clamp(1, dist.len());
        dist[..k].iter().filter(|(_, i)| self.y[*i].is_fraud()).count() as f64 / k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Fraud as F, NotFraud as N};

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("id{i}")).collect()
    }

    #[test]
    fn one_nn_recovers_training_labels() {
        let x = [0.0, 0.0, 1.0, 0.5, 3.0, 1.0, 2.0, 2.0];
        let y = [F, N, N, F];
        let m = Knn::fit(&x, 2, &y, &ids(4), 1);
        for (row, l) in x.chunks(2).zip(y) {
            assert_eq!(m.predict_row(row), l.as_f64());
        }
    }

    #[test]
    fn tie_vote_is_half() {
        let x = [1.0, 2.0, 3.0, 4.0, 100.0];
        let y = [F, N, F, N, F];
        let m = Knn::fit(&x, 1, &y, &ids(5), 4);
        assert_eq!(m.predict_row(&[2.5]), 0.5);
    }

    #[test]
    fn equal_distance_prefers_lower_id() {
        let x = [-1.0, 1.0];
        let y = [N, F];
        let m = Knn::fit(&x, 1, &y, &["b".to_string(), "a".to_string()], 1);
        assert_eq!(m.predict_row(&[0.0]), 1.0);
    }
}
