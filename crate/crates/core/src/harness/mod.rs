//! Experiment protocols built on the feature, selection and learning layers.
//!
//! Every iteration draws its randomness from generators derived from the
//! master seed and the iteration index (see [`seeds`]), runs independently,
//! and results are collected in iteration order, so a run is reproducible
//! regardless of how many worker threads execute it.

pub mod ablation;
pub mod config;
pub mod data;
pub mod distribution;
pub mod ensemble;
pub mod experiment;
pub mod figures;
pub mod report;
pub mod scorer;
pub mod seeds;
pub mod split;

use thiserror::Error;

pub use ablation::{run_ablation, AblationRow, AblationTable};
pub use config::{ExperimentConfig, Modality, SelectionMode};
pub use data::{ExperimentData, ModalitySource, TextSource};
pub use distribution::MetricsDistribution;
pub use ensemble::ensemble_combine;
pub use experiment::{
    run_all_modalities, run_ensemble_experiment, run_experiment, run_label3, run_modality_experiment, ExperimentRun, IterationRecord,
};
pub use figures::{export_figure_data, FigureInput, FigureKind, FigureTable};
pub use report::{hash_dir, hash_file, read_samples_csv, samples_csv, sha256_hex, summary_csv, write_report, Manifest};
pub use scorer::{Score, Scorer, TextScorer};
pub use seeds::{derived_seed, iteration_rng, Purpose};
pub use split::{balanced_split, Split};

use crate::corpus::CorpusError;
use crate::features::FeatureError;
use crate::image::ImageError;
use crate::learn::LearnError;
use crate::select::SelectError;
use crate::text::TextError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("labels: {0}")]
    Degenerate(String),
    #[error("no features left for {0}")]
    NoFeatures(String),
    #[error("{0} input is required for this operation")]
    MissingInput(&'static str),
    #[error("ensemble needs at least one probability")]
    NoProbability,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
