//! Discrete AdaBoost (SAMME, two classes) over depth-1 weighted stumps.
//!
//! Each round fits a Gini stump on the current weights; its vote is
//! `alpha = ln((1 - err) / err)`. Boosting stops early when a stump is no
//! better than chance (`err >= 0.5`, stump discarded) or perfect (`err = 0`,
//! kept with a capped vote). The fraud probability is the logistic of twice
//! the normalised margin, `sigmoid(2 * sum(alpha h) / sum(alpha))` with `h = +-1`.

use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use crate::corpus::Label;

const MIN_ERROR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<(DecisionTree, f64)>,
    /// Fraud share of the training set, used only if no stump was kept.
    pub prior: f64,
}

fn vote(stump: &DecisionTree, row: &[f64]) -> f64 {
    if stump.predict_row(row) > 0.5 {
        1.0
    } else {
        -1.0
    }
}

impl AdaBoost {
    pub fn fit(x: &[f64], d: usize, y: &[Label], n_rounds: usize) -> AdaBoost {
        let n = y.len();
        let mut w = vec![1.0 / n as f64; n];
        let mut stumps = Vec::new();
        let params = TreeParams {
            max_depth: Some(1),
            ..TreeParams::default()
        };
        for _ in 0..n_rounds {
            let stump = DecisionTree::fit_weighted(x, d, y, &w, params, None);
            let miss: Vec<bool> = (0..n)
                .map(|i| (vote(&stump, &x[i * d..(i + 1) * d]) > 0.0) != y[i].is_fraud())
                .collect();
            let total: f64 = w.iter().sum();
            let err = miss.iter().zip(&w).filter(|(m, _)| **m).map(|(_, w)| w).sum::<f64>() / total;
            if err >= 0.5 {
                break;
            }
            let e = err.max(MIN_ERROR);
            let alpha = ((1.0 - e) / e).ln();
            stumps.push((stump, alpha));
            if err <= 0.0 {
                break;
            }
            for (wi, m) in w.iter_mut().zip(&miss) {
                if *m {
                    *wi *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            for wi in &mut w {
                *wi /= s;
            }
        }
        let prior = y.iter().filter(|l| l.is_fraud()).count() as f64 / n.max(1) as f64;
        AdaBoost { stumps, prior }
    }

    /// `sum(alpha h) / sum(alpha)` in [-1, 1].
    pub fn margin(&self, row: &[f64]) -> f64 {
        let total: f64 = self.stumps.iter().map(|(_, a)| a).sum();
        self.stumps.iter().map(|(s, a)| a * vote(s, row)).sum::<f64>() / total
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        if self.stumps.is_empty() {
            return self.prior;
        }
        1.0 / (1.0 + (-2.0 * self.margin(row)).exp())
    }

    /// Training error of the first `rounds` stumps.
    pub fn training_error(&self, x: &[f64], d: usize, y: &[Label], rounds: usize) -> f64 {
        let used = &self.stumps[..rounds.min(self.stumps.len())];
        let wrong = y
            .iter()
            .enumerate()
            .filter(|(i, l)| {
                let row = &x[i * d..(i + 1) * d];
                let m: f64 = used.iter().map(|(s, a)| a * vote(s, row)).sum();
                (m > 0.0) != l.is_fraud()
            })
            .count();
        wrong as f64 / y.len() as f64
    }
}
