//! Publication-time fraud scoring for crowdfunding campaigns.
//!
//! The crate is organised along the pipeline a campaign travels through:
//!
//! * [`corpus`]: campaign records, annotation scores, label setups and
//!   inter-annotator agreement.
//! * [`text`]: the five text-feature families (sentiment/tone, readability,
//!   named entities, word form, TF-IDF) and their assembly into one vector.
//! * [`image`]: per-image sidecar vectors and their per-campaign aggregate.
//! * [`select`]: two-sample significance filtering (Kolmogorov–Smirnov, Welch).
//! * [`learn`]: from-scratch classifiers and evaluation metrics.
//! * [`harness`]: balanced resampling experiments, the text+image ensemble,
//!   ablations, figure tables and reports.
//! * [`synth`]: a seeded generator of labelled campaigns with sidecars, used
//!   for smoke runs and the acceptance suite.

pub mod corpus;
pub mod features;
pub mod harness;
pub mod image;
pub mod learn;
pub mod select;
pub mod synth;
pub mod text;

pub use corpus::{Campaign, Corpus, Label, LabelSetup, LabeledSet};
pub use features::{FeatureGroup, FeatureMatrix, FeatureVector};
