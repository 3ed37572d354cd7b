//! Balanced under-sampling and stratified train/test splitting.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::corpus::{Label, LabeledSet};

/// Train and test entries, each sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<(String, Label)>,
    pub test: Vec<(String, Label)>,
}

impl Split {
    pub fn train_ids(&self) -> Vec<&str> {
        self.train.iter().map(|(id, _)| id.as_str()).collect()
    }

    pub fn test_ids(&self) -> Vec<&str> {
        self.test.iter().map(|(id, _)| id.as_str()).collect()
    }
}

/// Per-class train count for a balanced pool of `m` per class. At least one
/// row of each class lands on each side.
pub fn train_count(m: usize, train_fraction: f64) -> usize {
    ((m as f64 * train_fraction).round() as usize).clamp(1, m - 1)
}

/// The minority class is kept whole, the majority down-sampled without
/// replacement to the same size, and each class split `train_fraction` /
/// `1 - train_fraction`.
pub fn balanced_split(labeled: &LabeledSet, train_fraction: f64, rng: &mut ChaCha8Rng) -> Result<Split, HarnessError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(HarnessError::Config(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let mut fraud: Vec<&str> = Vec::new();
    let mut not: Vec<&str> = Vec::new();
    for (id, l) in labeled.entries() {
        if l.is_fraud() {
            fraud.push(id);
        } else {
            not.push(id);
        }
    }
    if fraud.len() < 2 || not.len() < 2 {
        return Err(HarnessError::Degenerate(format!(
            "need at least 2 campaigns per class, have {} fraud and {} not fraud",
            fraud.len(),
            not.len()
        )));
    }
    let m = fraud.len().min(not.len());
    let k = train_count(m, train_fraction);
    let mut train = Vec::with_capacity(2 * k);
    let mut test = Vec::with_capacity(2 * (m - k));
    for (members, label) in [(&mut fraud, Label::Fraud), (&mut not, Label::NotFraud)] {
        members.shuffle(rng);
        members.truncate(m);
        train.extend(members[..k].iter().map(|id| (id.to_string(), label)));
        test.extend(members[k..].iter().map(|id| (id.to_string(), label)));
    }
    train.sort();
    test.sort();
    Ok(Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::collections::HashSet;

    fn set(fraud: usize, not: usize) -> LabeledSet {
        LabeledSet::new(
            (0..fraud)
                .map(|i| (format!("f{i:03}"), Label::Fraud))
                .chain((0..not).map(|i| (format!("n{i:03}"), Label::NotFraud)))
                .collect(),
        )
    }

    fn count(v: &[(String, Label)], l: Label) -> usize {
        v.iter().filter(|(_, x)| *x == l).count()
    }

    #[test]
    fn minority_kept_majority_undersampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = balanced_split(&set(10, 30), 0.7, &mut rng).unwrap();
        assert_eq!(s.train.len() + s.test.len(), 20);
        let fraud: HashSet<&str> = s.train.iter().chain(&s.test).filter(|(_, l)| l.is_fraud()).map(|(i, _)| i.as_str()).collect();
        assert_eq!(fraud.len(), 10);
    }

    #[test]
    fn stratified_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = balanced_split(&set(10, 10), 0.7, &mut rng).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (14, 6));
        assert_eq!((count(&s.train, Label::Fraud), count(&s.train, Label::NotFraud)), (7, 7));
        assert_eq!((count(&s.test, Label::Fraud), count(&s.test, Label::NotFraud)), (3, 3));
        let train: HashSet<&String> = s.train.iter().map(|(i, _)| i).collect();
        assert!(s.test.iter().all(|(i, _)| !train.contains(i)));
    }

    #[test]
    fn seeded_splits_repeat_and_differ() {
        let data = set(200, 200);
        let a = balanced_split(&data, 0.7, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = balanced_split(&data, 0.7, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        let splits: HashSet<Vec<(String, Label)>> = (0..50)
            .map(|s| balanced_split(&data, 0.7, &mut ChaCha8Rng::seed_from_u64(s)).unwrap().train)
            .collect();
        assert_eq!(splits.len(), 50);
    }

    #[test]
    fn tiny_class_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(balanced_split(&set(1, 10), 0.7, &mut rng).is_err());
        assert!(balanced_split(&set(5, 5), 1.0, &mut rng).is_err());
    }
}
