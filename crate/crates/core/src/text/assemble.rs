//! Concatenation of the five text families into one named vector.
//!
//! The first four families do not depend on any fitted state, so the harness
//! computes them once per campaign ([`TextFeaturizer::base_matrix`]) and only
//! recomputes the TF-IDF block when the vocabulary is refit.

use std::sync::Arc;

use rayon::prelude::*;

use super::form::{form_descriptors, FormDescriptorVector, FORM_DIM};
use super::ner::{ner_counts, EntityTagger, NerCountVector, RuleTagger};
use super::readability::{readability_profile, ReadabilityProfile};
use super::sentiment::{sentiment_tone, LexiconSentiment, SentimentProvider, SentimentToneProfile};
use super::tfidf::{tfidf_transform, TfidfVocabulary};
use super::TextError;
use crate::corpus::Campaign;
use crate::features::{FeatureMatrix, FeatureNames, FeatureVector};

/// Width of the vocabulary-independent part: 12 + 14 + 255 + 18.
pub const BASE_DIM: usize = 12 + ReadabilityProfile::NAMES.len() + FORM_DIM + 18;

pub fn base_feature_names() -> Vec<String> {
    let mut names = SentimentToneProfile::feature_names();
    names.extend(ReadabilityProfile::NAMES.iter().map(|n| format!("read.{n}")));
    names.extend(FormDescriptorVector::feature_names());
    names.extend(NerCountVector::feature_names());
    names
}

pub fn text_feature_names(vocab: &TfidfVocabulary) -> Vec<String> {
    let mut names = base_feature_names();
    names.extend(vocab.feature_names());
    names
}

#[derive(Clone)]
pub struct TextFeaturizer {
    sentiment: Arc<dyn SentimentProvider>,
    tagger: Arc<dyn EntityTagger>,
}

impl std::fmt::Debug for TextFeaturizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TextFeaturizer")
            .field("sentiment", &self.sentiment.name())
            .field("tagger", &self.tagger.name())
            .finish()
    }
}

impl Default for TextFeaturizer {
    fn default() -> Self {
        Self::offline()
    }
}

impl TextFeaturizer {
    pub fn new(sentiment: Arc<dyn SentimentProvider>, tagger: Arc<dyn EntityTagger>) -> Self {
        Self { sentiment, tagger }
    }

    /// Bundled lexicon and rule-based tagger; no network access.
    pub fn offline() -> Self {
        Self::new(Arc::new(LexiconSentiment::bundled().clone()), Arc::new(RuleTagger))
    }

    pub fn provider_names(&self) -> (String, String) {
        (self.sentiment.name(), self.tagger.name())
    }

    /// The 299 vocabulary-independent features of one text.
    pub fn base_features(&self, text: &str) -> Result<Vec<f64>, TextError> {
        let mut out = Vec::with_capacity(BASE_DIM);
        out.extend(sentiment_tone(text, self.sentiment.as_ref())?.to_vec());
        out.extend(readability_profile(text)?.to_vec());
        out.extend(form_descriptors(text).to_vec());
        out.extend(ner_counts(text, self.tagger.as_ref())?.to_vec());
        debug_assert_eq!(out.len(), BASE_DIM);
        Ok(out)
    }

    /// Base features for every campaign, rows in input order.
    pub fn base_matrix(&self, campaigns: &[Campaign]) -> Result<FeatureMatrix, TextError> {
        let rows = campaigns
            .par_iter()
            .map(|c| {
                self.base_features(&c.description).map_err(|e| TextError::Campaign {
                    id: c.id.clone(),
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ids = campaigns.iter().map(|c| c.id.clone()).collect();
        Ok(FeatureMatrix::from_rows(ids, base_feature_names().into(), rows)
            .expect("base rows have BASE_DIM columns"))
    }
}

/// Dense TF-IDF block for the given documents.
pub fn tfidf_matrix<S: AsRef<str> + Sync>(vocab: &TfidfVocabulary, ids: Vec<String>, docs: &[S]) -> FeatureMatrix {
    let dim = vocab.len();
    let rows: Vec<Vec<f64>> = docs
        .par_iter()
        .map(|d| tfidf_transform(vocab, d.as_ref()).to_dense(dim))
        .collect();
    FeatureMatrix::from_rows(ids, vocab.feature_names().into(), rows).expect("one row per document")
}

/// Full text vector of one campaign: sentiment | readability | form | NER | TF-IDF.
pub fn assemble_text_features(
    campaign: &Campaign,
    featurizer: &TextFeaturizer,
    vocab: &TfidfVocabulary,
) -> Result<FeatureVector, TextError> {
    let mut values = featurizer.base_features(&campaign.description)?;
    values.extend(tfidf_transform(vocab, &campaign.description).to_dense(vocab.len()));
    let names: FeatureNames = text_feature_names(vocab).into();
    Ok(FeatureVector::new(names, values).expect("names match values"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_campaign;
    use crate::features::FeatureGroup;
    use crate::text::tfidf::{tfidf_fit, TfidfConfig};
    use std::collections::HashSet;

    fn campaign(id: &str, description: &str) -> Campaign {
        let line = serde_json::json!({
            "id": id,
            "platform": "GoFundMe",
            "title": "t",
            "description": description,
            "category": "medical",
            "created_at": "2020-01-01T00:00:00Z",
        });
        parse_campaign(&line.to_string()).unwrap()
    }

    fn fixture() -> (Vec<Campaign>, TfidfVocabulary) {
        let cs = vec![
            campaign("a", "John needs surgery at the hospital in Texas. Please help us pay the bills!"),
            campaign("b", "Our family lost everything in the fire. Every donation helps us rebuild our home."),
        ];
        let docs: Vec<&str> = cs.iter().map(|c| c.description.as_str()).collect();
        let vocab = tfidf_fit(&docs, TfidfConfig::default()).unwrap();
        (cs, vocab)
    }

    #[test]
    fn names_are_stable_and_prefixed() {
        let (cs, vocab) = fixture();
        let f = TextFeaturizer::offline();
        let a = assemble_text_features(&cs[0], &f, &vocab).unwrap();
        let b = assemble_text_features(&cs[1], &f, &vocab).unwrap();
        assert_eq!(a.names(), b.names());
        assert_eq!(a.len(), 12 + 14 + 255 + 18 + vocab.len());
        let unique: HashSet<&String> = a.names().iter().collect();
        assert_eq!(unique.len(), a.len());
        for n in a.names().iter() {
            let g = FeatureGroup::of(n).unwrap_or_else(|| panic!("{n} has no group"));
            assert!(g.is_text());
        }
    }

    #[test]
    fn assembly_is_pure() {
        let (cs, vocab) = fixture();
        let f = TextFeaturizer::offline();
        let a = assemble_text_features(&cs[0], &f, &vocab).unwrap();
        let b = assemble_text_features(&cs[0], &f, &vocab).unwrap();
        let bits = |v: &FeatureVector| v.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn base_matrix_matches_single_assembly() {
        let (cs, vocab) = fixture();
        let f = TextFeaturizer::offline();
        let base = f.base_matrix(&cs).unwrap();
        let docs: Vec<&str> = cs.iter().map(|c| c.description.as_str()).collect();
        let tf = tfidf_matrix(&vocab, base.ids().to_vec(), &docs);
        let full = base.hstack(&tf).unwrap();
        for (i, c) in cs.iter().enumerate() {
            let v = assemble_text_features(c, &f, &vocab).unwrap();
            assert_eq!(full.row(i), v.values());
            assert_eq!(&full.names()[..], &v.names()[..]);
        }
    }
}
