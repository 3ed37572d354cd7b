//! Threshold metrics and ROC AUC.

use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::corpus::Label;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Metrics {
    pub const NAMES: [&'static str; 5] = ["accuracy", "precision", "recall", "f1", "auc"];

    pub fn values(&self) -> [f64; 5] {
        [self.accuracy, self.precision, self.recall, self.f1, self.auc]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Self::NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values()[i])
    }
}

fn check(labels: &[Label], scores: &[f64]) -> Result<(usize, usize), LearnError> {
    if labels.len() != scores.len() {
        return Err(LearnError::LengthMismatch {
            expected: labels.len(),
            found: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(LearnError::NonFinite);
    }
    let pos = labels.iter().filter(|l| l.is_fraud()).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(LearnError::SingleClass);
    }
    Ok((pos, neg))
}

/// Mann–Whitney form: (concordant pairs + half the tied pairs) / (P * N).
pub fn roc_auc(labels: &[Label], scores: &[f64]) -> Result<f64, LearnError> {
    let (pos, neg) = check(labels, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut neg_below = 0.0f64;
    let mut concordant = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut p, mut n) = (0.0, 0.0);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]].is_fraud() {
                p += 1.0;
            } else {
                n += 1.0;
            }
            j += 1;
        }
        concordant += p * (neg_below + 0.5 * n);
        neg_below += n;
        i = j;
    }
    Ok(concordant / (pos as f64 * neg as f64))
}

/// ROC curve points `(fpr, tpr)` from the highest threshold down, one point per distinct score.
pub fn roc_curve(labels: &[Label], scores: &[f64]) -> Result<Vec<(f64, f64)>, LearnError> {
    let (pos, neg) = check(labels, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]].is_fraud() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(points)
}

/// Trapezoidal area under [`roc_curve`].
pub fn roc_auc_trapezoid(labels: &[Label], scores: &[f64]) -> Result<f64, LearnError> {
    let pts = roc_curve(labels, scores)?;
    Ok(pts
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum())
}

/// Fraud is predicted when `score >= threshold`. Undefined ratios are 0.
pub fn evaluate_metrics(labels: &[Label], scores: &[f64], threshold: f64) -> Result<Metrics, LearnError> {
    let auc = roc_auc(labels, scores)?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (l, &s) in labels.iter().zip(scores) {
        match (l.is_fraud(), s >= threshold) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fn_ += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy: ratio(tp + tn, labels.len()),
        precision,
        recall,
        f1,
        auc,
        tp,
        fp,
        tn,
        fn_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Fraud as F, NotFraud as N};

    fn brute_auc(labels: &[Label], scores: &[f64]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, li) in labels.iter().enumerate() {
            for (j, lj) in labels.iter().enumerate() {
                if li.is_fraud() && !lj.is_fraud() {
                    den += 1.0;
                    num += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn perfect_scores() {
        let m = evaluate_metrics(&[F, F, N, N], &[0.9, 0.8, 0.2, 0.1], 0.5).unwrap();
        assert_eq!(m.values(), [1.0; 5]);
    }

    #[test]
    fn total_inversion() {
        let m = evaluate_metrics(&[F, N], &[0.4, 0.6], 0.5).unwrap();
        assert_eq!(m.accuracy, 0.0);
        assert_eq!(m.auc, 0.0);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn concordant_pairs_by_hand() {
        // Pairs (pos, neg): (0.9,0.5) (0.9,0.1) (0.4,0.1) concordant, (0.4,0.5) not -> 3/4.
        assert_eq!(roc_auc(&[F, F, N, N], &[0.9, 0.4, 0.5, 0.1]).unwrap(), 0.75);
        assert_eq!(roc_auc(&[F, N, F, N], &[0.3; 4]).unwrap(), 0.5);
        assert!(matches!(roc_auc(&[F, F], &[0.1, 0.2]), Err(LearnError::SingleClass)));
    }

    #[test]
    fn threshold_is_inclusive() {
        let m = evaluate_metrics(&[F, N], &[0.5, 0.49], 0.5).unwrap();
        assert_eq!((m.tp, m.tn), (1, 1));
    }

    proptest! {
        #[test]
        fn auc_identities(
            data in proptest::collection::vec((any::<bool>(), 0u8..20), 2..60),
        ) {
            let mut labels: Vec<Label> = data.iter().map(|(f, _)| if *f { F } else { N }).collect();
            labels[0] = F;
            labels[1] = N;
            let scores: Vec<f64> = data.iter().map(|(_, s)| f64::from(*s) / 19.0).collect();
            let a = roc_auc(&labels, &scores).unwrap();
            prop_assert!((a - brute_auc(&labels, &scores)).abs() < 1e-12);
            prop_assert!((a - roc_auc_trapezoid(&labels, &scores).unwrap()).abs() < 1e-12);
            let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp()).collect();
            prop_assert_eq!(roc_auc(&labels, &transformed).unwrap(), a);
            let m = evaluate_metrics(&labels, &scores, 0.5).unwrap();
            let hamming = labels.iter().zip(&scores).filter(|(l, s)| l.is_fraud() != (**s >= 0.5)).count();
            prop_assert!((m.accuracy - (1.0 - hamming as f64 / labels.len() as f64)).abs() < 1e-12);
            for v in m.values() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
