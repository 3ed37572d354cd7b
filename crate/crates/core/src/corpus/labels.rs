use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AnnotationScore, Corpus, CorpusError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    NotFraud = 0,
    Fraud = 1,
}

impl Label {
    pub fn is_fraud(self) -> bool {
        self == Label::Fraud
    }

    pub fn as_f64(self) -> f64 {
        if self.is_fraud() {
            1.0
        } else {
            0.0
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Fraud => "fraud",
            Label::NotFraud => "not-fraud",
        })
    }
}

/// How fraud-scale scores are grouped into binary labels.
///
/// | score | Label I | Label II | Label III |
/// |-------|---------|----------|-----------|
/// | 0     | drop    | drop     | drop      |
/// | 1     | fraud   | fraud    | train fraud |
/// | 2     | fraud   | drop     | test fraud  |
/// | 3     | drop    | drop     | drop      |
/// | 4     | not     | drop     | test not    |
/// | 5     | not     | not      | train not   |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelSetup {
    LabelI,
    LabelII,
    LabelIII,
}

/// Role a score plays under a setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    Drop,
    Train(Label),
    Test(Label),
}

impl LabelSetup {
    pub fn assign(self, score: u8) -> Assignment {
        use Assignment::*;
        use Label::*;
        match (self, score) {
            (LabelSetup::LabelI, 1 | 2) => Train(Fraud),
            (LabelSetup::LabelI, 4 | 5) => Train(NotFraud),
            (LabelSetup::LabelII | LabelSetup::LabelIII, 1) => Train(Fraud),
            (LabelSetup::LabelII | LabelSetup::LabelIII, 5) => Train(NotFraud),
            (LabelSetup::LabelIII, 2) => Test(Fraud),
            (LabelSetup::LabelIII, 4) => Test(NotFraud),
            _ => Drop,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelSetup::LabelI => "I",
            LabelSetup::LabelII => "II",
            LabelSetup::LabelIII => "III",
        }
    }
}

impl fmt::Display for LabelSetup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label {}", self.as_str())
    }
}

impl FromStr for LabelSetup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        let key = key.trim_start_matches("label").trim_start_matches(['-', '_', ' ']);
        match key {
            "i" | "1" => Ok(LabelSetup::LabelI),
            "ii" | "2" => Ok(LabelSetup::LabelII),
            "iii" | "3" => Ok(LabelSetup::LabelIII),
            _ => Err(format!("unknown label setup {s:?} (expected I, II or III)")),
        }
    }
}

/// Binary labels for a subset of corpus ids, sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSet {
    entries: Vec<(String, Label)>,
    dropped: Vec<String>,
}

impl LabeledSet {
    pub fn new(mut entries: Vec<(String, Label)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|a, b| a.0 == b.0);
        Self {
            entries,
            dropped: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[(String, Label)] {
        &self.entries
    }

    /// Ids excluded by the setup.
    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<Label> {
        self.entries
            .binary_search_by(|(e, _)| e.as_str().cmp(id))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn count(&self, label: Label) -> usize {
        self.entries.iter().filter(|(_, l)| *l == label).count()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    /// Keeps only ids satisfying `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&str) -> bool) -> LabeledSet {
        LabeledSet {
            entries: self
                .entries
                .iter()
                .filter(|(id, _)| keep(id))
                .cloned()
                .collect(),
            dropped: self.dropped.clone(),
        }
    }
}

/// Result of applying a setup: one labelled set, or a train/test pair for Label III.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grouping {
    Single(LabeledSet),
    Transfer { train: LabeledSet, test: LabeledSet },
}

impl Grouping {
    /// The training-side set (the only set for Label I/II).
    pub fn train(&self) -> &LabeledSet {
        match self {
            Grouping::Single(s) => s,
            Grouping::Transfer { train, .. } => train,
        }
    }

    pub fn test(&self) -> Option<&LabeledSet> {
        match self {
            Grouping::Single(_) => None,
            Grouping::Transfer { test, .. } => Some(test),
        }
    }
}

pub fn apply_label_setup(
    corpus: &Corpus,
    scores: &BTreeMap<String, AnnotationScore>,
    setup: LabelSetup,
) -> Result<Grouping, CorpusError> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut dropped = Vec::new();
    for c in corpus.campaigns() {
        let score = scores
            .get(&c.id)
            .ok_or_else(|| CorpusError::MissingScore(c.id.clone()))?;
        match setup.assign(score.score) {
            Assignment::Drop => dropped.push(c.id.clone()),
            Assignment::Train(l) => train.push((c.id.clone(), l)),
            Assignment::Test(l) => test.push((c.id.clone(), l)),
        }
    }
    dropped.sort();
    let mut train = LabeledSet::new(train);
    match setup {
        LabelSetup::LabelIII => {
            let mut test = LabeledSet::new(test);
            test.dropped = dropped.clone();
            train.dropped = dropped;
            Ok(Grouping::Transfer { train, test })
        }
        _ => {
            train.dropped = dropped;
            Ok(Grouping::Single(train))
        }
    }
}
