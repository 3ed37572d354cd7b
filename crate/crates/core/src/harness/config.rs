//! Experiment configuration and its `key=value` file form.
//!
//! ```text
//! # comments and blank lines are ignored
//! label_setup = II
//! classifier = forest:n_trees=200
//! modality = ensemble
//! iterations = 200
//! seed = 42
//! ```

use std::fmt;
use std::str::FromStr;

use super::HarnessError;
use crate::corpus::LabelSetup;
use crate::features::FeatureGroup;
use crate::image::Aggregation;
use crate::learn::ClassifierKind;
use crate::select::{SelectionTest, DEFAULT_ALPHA};
use crate::text::TfidfConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Text,
    Image,
    Ensemble,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Image => "image",
            Modality::Ensemble => "ensemble",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" => Ok(Modality::Text),
            "image" => Ok(Modality::Image),
            "ensemble" | "both" => Ok(Modality::Ensemble),
            _ => Err(format!("unknown modality {s:?} (text|image|ensemble)")),
        }
    }
}

/// Where the significance mask is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMode {
    /// On each training fold; vocabulary is refit per fold as well.
    #[default]
    LeakFree,
    /// Once on every labelled campaign, vocabulary included.
    Paper,
    /// No filtering.
    Off,
}

impl SelectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMode::LeakFree => "leak-free",
            SelectionMode::Paper => "paper",
            SelectionMode::Off => "off",
        }
    }
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "leak-free" | "leakfree" | "fold" => Ok(SelectionMode::LeakFree),
            "paper" | "full-dataset" | "full" => Ok(SelectionMode::Paper),
            "off" | "none" => Ok(SelectionMode::Off),
            _ => Err(format!("unknown selection mode {s:?} (leak-free|paper|off)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub label_setup: LabelSetup,
    pub classifier: ClassifierKind,
    pub modality: Modality,
    /// `None` means 1000 for the MLP and 2000 otherwise.
    pub iterations: Option<usize>,
    pub train_fraction: f64,
    pub seed: u64,
    pub selection: SelectionMode,
    pub test: SelectionTest,
    pub alpha: f64,
    pub ablation_groups: Vec<FeatureGroup>,
    pub aggregation: Aggregation,
    pub tfidf: TfidfConfig,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            label_setup: LabelSetup::LabelI,
            classifier: ClassifierKind::RandomForest(Default::default()),
            modality: Modality::Text,
            iterations: None,
            train_fraction: 0.7,
            seed: 0,
            selection: SelectionMode::LeakFree,
            test: SelectionTest::Ks,
            alpha: DEFAULT_ALPHA,
            ablation_groups: FeatureGroup::ALL.to_vec(),
            aggregation: Aggregation::Mean,
            tfidf: TfidfConfig::default(),
            threads: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| HarnessError::Config(format!("{key}: {e}")))
}

impl ExperimentConfig {
    pub fn iterations(&self) -> usize {
        self.iterations.unwrap_or(match self.classifier {
            ClassifierKind::Mlp(_) => 1000,
            _ => 2000,
        })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.iterations() == 0 {
            return Err(HarnessError::Config("iterations must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(HarnessError::Config(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(HarnessError::Config(format!("alpha {} outside (0, 1]", self.alpha)));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "label_setup" => self.label_setup = parse(key, value)?,
            "classifier" => self.classifier = parse(key, value)?,
            "modality" => self.modality = parse(key, value)?,
            "iterations" => {
                self.iterations = if value == "default" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "train_fraction" => self.train_fraction = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "selection" => self.selection = parse(key, value)?,
            "test" => self.test = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "ablation_groups" => {
                self.ablation_groups = if value == "all" {
                    FeatureGroup::ALL.to_vec()
                } else {
                    value
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| parse(key, s))
                        .collect::<Result<_, _>>()?
                }
            }
            "aggregation" => self.aggregation = parse(key, value)?,
            "min_df" => self.tfidf.min_df = parse(key, value)?,
            "max_terms" => {
                self.tfidf.max_terms = if value == "none" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "threads" => self.threads = Some(parse(key, value)?),
            other => return Err(HarnessError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a `key=value` file on top of the defaults.
    pub fn parse(text: &str) -> Result<ExperimentConfig, HarnessError> {
        let mut config = ExperimentConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key=value", n + 1)))?;
            config
                .set(k, v)
                .map_err(|e| HarnessError::Config(format!("line {}: {e}", n + 1)))?;
        }
        config.validate()?;
        Ok(config)
    }

    /// The configuration as `key=value` pairs; [`ExperimentConfig::parse`] reads them back.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let groups: Vec<&str> = self.ablation_groups.iter().map(|g| g.as_str()).collect();
        let aggregation = match self.aggregation {
            Aggregation::Mean => "mean",
            Aggregation::PrimaryOnly => "primary-only",
        };
        let mut pairs = vec![
            ("label_setup", self.label_setup.as_str().to_string()),
            ("classifier", self.classifier.to_string()),
            ("modality", self.modality.to_string()),
            ("iterations", self.iterations.map_or("default".to_string(), |n| n.to_string())),
            ("train_fraction", self.train_fraction.to_string()),
            ("seed", self.seed.to_string()),
            ("selection", self.selection.to_string()),
            ("test", self.test.to_string()),
            ("alpha", self.alpha.to_string()),
            ("ablation_groups", groups.join(",")),
            ("aggregation", aggregation.to_string()),
            ("min_df", self.tfidf.min_df.to_string()),
            ("max_terms", self.tfidf.max_terms.map_or("none".to_string(), |n| n.to_string())),
        ];
        if let Some(t) = self.threads {
            pairs.push(("threads", t.to_string()));
        }
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}
