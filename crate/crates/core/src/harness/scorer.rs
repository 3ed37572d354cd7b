//! A fitted scorer for new campaigns: per-modality models trained on every
//! labelled training campaign, the vocabulary they were built with, and the
//! ensemble rule.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Modality, SelectionMode};
use super::data::{ExperimentData, ModalitySource};
use super::ensemble::ensemble_combine;
use super::seeds::{derived_seed, Purpose};
use super::HarnessError;
use crate::corpus::{Campaign, Label, LabeledSet};
use crate::features::{FeatureNames, FeatureVector};
use crate::image::{assemble_image_features, image_feature_names, Aggregation};
use crate::learn::{fit_classifier, ClassifierSpec, Model};
use crate::select::select_rows;
use crate::text::{assemble_text_features, TextFeaturizer, TfidfVocabulary};

pub const SCORER_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextScorer {
    pub model: Model,
    pub vocabulary: TfidfVocabulary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scorer {
    pub format_version: u32,
    pub config: Vec<(String, String)>,
    pub aggregation: Aggregation,
    pub text: Option<TextScorer>,
    pub image: Option<Model>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub text: Option<f64>,
    pub image: Option<f64>,
    /// Mean of the available modality probabilities.
    pub fraud_probability: f64,
}

/// Selects columns on `ids` (unless selection is off) and fits the classifier.
fn fit_side(
    source: &ModalitySource,
    labels: &LabeledSet,
    config: &ExperimentConfig,
    purpose: Purpose,
) -> Result<(Model, Option<TfidfVocabulary>), HarnessError> {
    let rows: Vec<(&str, Label)> = labels
        .entries()
        .iter()
        .filter(|(id, _)| source.contains(id))
        .map(|(id, l)| (id.as_str(), *l))
        .collect();
    let ids: Vec<&str> = rows.iter().map(|r| r.0).collect();
    let y: Vec<Label> = rows.iter().map(|r| r.1).collect();
    let vocab = source.fit_vocabulary(&ids)?;
    let (fit, _) = source.fold(&ids, &[], &[])?;
    let fit = match config.selection {
        SelectionMode::Off => fit,
        _ => {
            let idx: Vec<usize> = (0..fit.n_rows()).collect();
            let cols = select_rows(&fit, &idx, &y, config.test, config.alpha)?.kept_or_best();
            fit.select_columns(&cols)
        }
    };
    let spec = ClassifierSpec::new(config.classifier, derived_seed(config.seed, 0, purpose));
    Ok((fit_classifier(&spec, &fit, &y)?, vocab))
}

/// Projects the full vector onto the model's columns and scores it.
fn predict(model: &Model, v: &FeatureVector) -> Result<f64, HarnessError> {
    let target: FeatureNames = model.feature_names().to_vec().into();
    Ok(model.predict_proba(&v.project(&target)?)?)
}

impl Scorer {
    /// Fits the modalities `config.modality` asks for on the training side of
    /// `data`'s grouping.
    pub fn fit(config: &ExperimentConfig, data: &ExperimentData) -> Result<Scorer, HarnessError> {
        config.validate()?;
        let labels = data.grouping.train();
        let (want_text, want_image) = match config.modality {
            Modality::Text => (true, false),
            Modality::Image => (false, true),
            Modality::Ensemble => (true, true),
        };
        let text = match (&data.text, want_text) {
            (Some(src), true) => {
                let (model, vocab) = fit_side(src, labels, config, Purpose::Text)?;
                let vocabulary = vocab.ok_or(HarnessError::MissingInput("campaign text"))?;
                Some(TextScorer { model, vocabulary })
            }
            (None, true) => return Err(HarnessError::MissingInput("text feature")),
            _ => None,
        };
        let image = match (&data.image, want_image) {
            (Some(src), true) => Some(fit_side(src, labels, config, Purpose::Image)?.0),
            (None, true) => return Err(HarnessError::MissingInput("image feature")),
            _ => None,
        };
        Ok(Scorer {
            format_version: SCORER_FORMAT_VERSION,
            config: config.to_pairs(),
            aggregation: config.aggregation,
            text,
            image,
        })
    }

    /// Scores one campaign. Image scoring needs `sidecars`; a campaign without
    /// images is scored on text alone.
    pub fn score(
        &self,
        campaign: &Campaign,
        featurizer: &TextFeaturizer,
        sidecars: Option<&Path>,
    ) -> Result<Score, HarnessError> {
        let text = match &self.text {
            Some(t) => {
                let v = assemble_text_features(campaign, featurizer, &t.vocabulary)?;
                Some(predict(&t.model, &v)?)
            }
            None => None,
        };
        let image = match (&self.image, sidecars) {
            (Some(model), Some(dir)) => {
                let agg = assemble_image_features(campaign, dir, self.aggregation)?;
                match agg.values {
                    Some(values) => {
                        let names: FeatureNames = image_feature_names().into();
                        let v = FeatureVector::new(names, values)?;
                        Some(predict(model, &v)?)
                    }
                    None => None,
                }
            }
            (Some(_), None) if self.text.is_none() => return Err(HarnessError::MissingInput("sidecar directory")),
            _ => None,
        };
        Ok(Score {
            text,
            image,
            fraud_probability: ensemble_combine(text, image)?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scorer serialises")
    }

    pub fn from_json(json: &str) -> Result<Scorer, HarnessError> {
        let mut s: Scorer = serde_json::from_str(json).map_err(|e| HarnessError::Config(format!("scorer file: {e}")))?;
        if s.format_version != SCORER_FORMAT_VERSION {
            return Err(HarnessError::Config(format!("unsupported scorer format {}", s.format_version)));
        }
        if let Some(t) = s.text.take() {
            let model = Model::from_json(&serde_json::to_string(&t.model).expect("model serialises"))?;
            s.text = Some(TextScorer {
                model,
                vocabulary: t.vocabulary.reindexed(),
            });
        }
        if let Some(m) = s.image.take() {
            s.image = Some(Model::from_json(&serde_json::to_string(&m).expect("model serialises"))?);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabelSetup;
    use crate::learn::ClassifierKind;
    use crate::synth::{generate, SynthConfig};

    #[test]
    fn scorer_round_trips_and_separates_classes() {
        let synth = generate(&SynthConfig {
            n_per_class: 30,
            filler_vocabulary: 300,
            filler_words: 30,
            ..SynthConfig::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (_, sidecars) = synth.write(dir.path()).unwrap();
        let featurizer = TextFeaturizer::offline();
        let data = ExperimentData::from_corpus(
            &synth.corpus,
            LabelSetup::LabelII,
            &featurizer,
            Some(&sidecars),
            Aggregation::Mean,
            Default::default(),
        )
        .unwrap();
        let config = ExperimentConfig {
            label_setup: LabelSetup::LabelII,
            classifier: ClassifierKind::GaussianNb,
            modality: Modality::Ensemble,
            ..ExperimentConfig::default()
        };
        let scorer = Scorer::fit(&config, &data).unwrap();
        let back = Scorer::from_json(&scorer.to_json()).unwrap();
        assert_eq!(back, scorer);
        let fraud = synth.corpus.campaigns().iter().find(|c| synth.corpus.scores()[&c.id].score == 1).unwrap();
        let not = synth.corpus.campaigns().iter().find(|c| synth.corpus.scores()[&c.id].score == 5).unwrap();
        let s_fraud = back.score(fraud, &featurizer, Some(&sidecars)).unwrap();
        let s_not = back.score(not, &featurizer, Some(&sidecars)).unwrap();
        assert!(s_fraud.fraud_probability > 0.5 && s_not.fraud_probability < 0.5);
        assert_eq!(
            s_fraud.fraud_probability,
            (s_fraud.text.unwrap() + s_fraud.image.unwrap()) / 2.0
        );
        let text_only = back.score(fraud, &featurizer, None).unwrap();
        assert_eq!(text_only.fraud_probability, s_fraud.text.unwrap());
    }
}
