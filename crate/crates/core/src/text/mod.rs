//! Text-modality features computed from a campaign description.
//!
//! Five families are concatenated in a fixed order, each under its own name
//! prefix: sentiment and tone (`sent.`), readability (`read.`), word form
//! (`form.`), named-entity counts (`ner.`) and TF-IDF weights (`tfidf.`).
//! All families share the tokenizer in [`tokenize`].

pub mod assemble;
pub mod form;
pub mod http;
pub mod ner;
pub mod readability;
pub mod sentiment;
pub mod tfidf;
pub mod tokenize;

pub use assemble::{assemble_text_features, tfidf_matrix, TextFeaturizer, BASE_DIM};
pub use form::{form_descriptors, FormDescriptorVector};
pub use ner::{ner_counts, EntityTagger, EntityType, NerCountVector, RuleTagger};
pub use readability::{readability_profile, ReadabilityProfile};
pub use sentiment::{sentiment_tone, LexiconSentiment, SentimentProvider, SentimentToneProfile};
pub use tfidf::{tfidf_fit, tfidf_transform, TfidfConfig, TfidfVocabulary};

use thiserror::Error;

/// Failure of an external (or pluggable) sentiment or NER provider.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider request failed: {0}")]
    Http(String),
    #[error("provider returned HTTP status {0}")]
    Status(u16),
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("provider cache: {0}")]
    Cache(String),
    #[error("missing credential: environment variable {0} is not set")]
    MissingCredential(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("text contains no word tokens")]
    NoWords,
    #[error("text contains no sentences")]
    NoSentences,
    #[error("TF-IDF needs at least one document")]
    EmptyCorpus,
    #[error("campaign {id}: {source}")]
    Campaign { id: String, source: Box<TextError> },
    #[error(transparent)]
    Provider(#[from] ProviderError),
}
