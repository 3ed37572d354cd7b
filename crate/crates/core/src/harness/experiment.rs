//! Balanced resampling experiments.
//!
//! One iteration: draw a balanced split, build each modality's features for
//! the training rows (vocabulary and significance mask fitted there in
//! leak-free mode), fit the classifier, score the test rows, and compute
//! metrics. In the ensemble the two modality probabilities are averaged; test
//! campaigns without images keep their text probability.

use std::borrow::Cow;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Modality, SelectionMode};
use super::data::{ExperimentData, ModalitySource};
use super::distribution::MetricsDistribution;
use super::ensemble::ensemble_combine;
use super::seeds::{derived_seed, iteration_rng, Purpose};
use super::split::balanced_split;
use super::HarnessError;
use crate::corpus::{Grouping, Label, LabelSetup, LabeledSet};
use crate::features::FeatureGroup;
use crate::learn::{evaluate_metrics, fit_classifier, ClassifierSpec, Metrics, DEFAULT_THRESHOLD};
use crate::select::select_rows;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub metrics: Metrics,
    pub n_train: usize,
    pub n_test: usize,
    /// Columns the text model was trained on.
    pub text_features: Option<usize>,
    pub image_features: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub name: String,
    pub config: ExperimentConfig,
    pub records: Vec<IterationRecord>,
    pub distribution: MetricsDistribution,
}

/// A modality ready for iterations: the source (materialised over all
/// labelled campaigns in paper mode) and, in paper mode, the global mask.
struct Prepared<'a> {
    source: Cow<'a, ModalitySource>,
    global_mask: Option<Vec<usize>>,
    exclude: &'a [FeatureGroup],
}

fn label_rows(source: &ModalitySource, labels: &LabeledSet) -> Vec<(String, Label)> {
    labels
        .entries()
        .iter()
        .filter(|(id, _)| source.contains(id))
        .cloned()
        .collect()
}

fn prepare<'a>(
    source: Option<&'a ModalitySource>,
    exclude: &'a [FeatureGroup],
    all_labels: &LabeledSet,
    config: &ExperimentConfig,
) -> Result<Option<Prepared<'a>>, HarnessError> {
    let Some(source) = source else { return Ok(None) };
    if !source.has_columns(exclude) {
        return Ok(None);
    }
    if config.selection != SelectionMode::Paper {
        return Ok(Some(Prepared {
            source: Cow::Borrowed(source),
            global_mask: None,
            exclude,
        }));
    }
    let rows = label_rows(source, all_labels);
    let ids: Vec<&str> = rows.iter().map(|(id, _)| id.as_str()).collect();
    let global = source.materialize(&ids, exclude)?;
    let labels: Vec<Label> = rows.iter().map(|(_, l)| *l).collect();
    let idx: Vec<usize> = (0..labels.len()).collect();
    let mask = select_rows(global.base(), &idx, &labels, config.test, config.alpha)?;
    Ok(Some(Prepared {
        source: Cow::Owned(global),
        global_mask: Some(mask.kept_or_best()),
        exclude,
    }))
}

/// Probabilities for `test` (None where the modality lacks the campaign) and
/// the number of columns used.
fn score_modality(
    prep: &Prepared<'_>,
    train: &[(String, Label)],
    test: &[(String, Label)],
    config: &ExperimentConfig,
    seed: u64,
) -> Result<(Vec<Option<f64>>, usize), HarnessError> {
    let train: Vec<&(String, Label)> = train.iter().filter(|(id, _)| prep.source.contains(id)).collect();
    let fraud = train.iter().filter(|(_, l)| l.is_fraud()).count();
    if fraud == 0 || fraud == train.len() {
        return Err(HarnessError::Degenerate("a training fold lacks one class".into()));
    }
    let train_ids: Vec<&str> = train.iter().map(|(id, _)| id.as_str()).collect();
    let labels: Vec<Label> = train.iter().map(|(_, l)| *l).collect();
    let present: Vec<usize> = (0..test.len()).filter(|&i| prep.source.contains(&test[i].0)).collect();
    let test_ids: Vec<&str> = present.iter().map(|&i| test[i].0.as_str()).collect();
    let (fit, apply) = prep.source.fold(&train_ids, &test_ids, prep.exclude)?;
    let cols = match (&prep.global_mask, config.selection) {
        (Some(mask), _) => mask.clone(),
        (None, SelectionMode::Off) => (0..fit.n_cols()).collect(),
        (None, _) => {
            let rows: Vec<usize> = (0..fit.n_rows()).collect();
            select_rows(&fit, &rows, &labels, config.test, config.alpha)?.kept_or_best()
        }
    };
    if cols.is_empty() {
        return Err(HarnessError::NoFeatures("a training fold".into()));
    }
    let fit = fit.select_columns(&cols);
    let apply = apply.select_columns(&cols);
    let model = fit_classifier(&ClassifierSpec::new(config.classifier, seed), &fit, &labels)?;
    let probs = model.predict_matrix(&apply)?;
    let mut out = vec![None; test.len()];
    for (&i, p) in present.iter().zip(probs) {
        out[i] = Some(p);
    }
    Ok((out, cols.len()))
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match threads {
        None => Ok(job()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(job))
            .map_err(|e| HarnessError::Config(e.to_string())),
    }
}

fn run_protocol_split(
    config: &ExperimentConfig,
    data: &ExperimentData,
    exclude: &[FeatureGroup],
    split_out: bool,
) -> Result<Vec<ExperimentRun>, HarnessError> {
    config.validate()?;
    match (&data.grouping, config.label_setup) {
        (Grouping::Transfer { .. }, LabelSetup::LabelIII) | (Grouping::Single(_), LabelSetup::LabelI | LabelSetup::LabelII) => {}
        _ => {
            return Err(HarnessError::Config(format!(
                "data was grouped for a different setup than {}",
                config.label_setup
            )))
        }
    }
    let all_labels = data.all_labels();
    let (want_text, want_image) = match config.modality {
        Modality::Text => (true, false),
        Modality::Image => (false, true),
        Modality::Ensemble => (true, true),
    };
    if want_text && data.text.is_none() {
        return Err(HarnessError::MissingInput("text feature"));
    }
    if want_image && data.image.is_none() {
        return Err(HarnessError::MissingInput("image feature"));
    }
    let text = if want_text {
        prepare(data.text.as_ref(), exclude, &all_labels, config)?
    } else {
        None
    };
    let image = if want_image {
        prepare(data.image.as_ref(), exclude, &all_labels, config)?
    } else {
        None
    };
    // Campaigns eligible for splitting: those the leading modality can score.
    let lead = match (&text, &image) {
        (Some(t), _) => t,
        (None, Some(i)) => i,
        (None, None) => {
            return Err(HarnessError::NoFeatures(format!(
                "{} after removing {:?}",
                config.modality,
                exclude.iter().map(|g| g.as_str()).collect::<Vec<_>>()
            )))
        }
    };
    let pool = LabeledSet::new(label_rows(&lead.source, data.grouping.train()));
    let fixed_test: Option<Vec<(String, Label)>> = match data.grouping.test() {
        Some(test) => {
            let rows = label_rows(&lead.source, test);
            let fraud = rows.iter().filter(|(_, l)| l.is_fraud()).count();
            if fraud == 0 || fraud == rows.len() {
                return Err(HarnessError::Degenerate("the transfer test set needs both classes".into()));
            }
            Some(rows)
        }
        None => None,
    };
    let iterations = config.iterations();
    let ensemble = text.is_some() && image.is_some();
    let run_one = |it: usize| -> Result<Scored, HarnessError> {
        let mut rng = iteration_rng(config.seed, it, Purpose::Split);
        let split = balanced_split(&pool, config.train_fraction, &mut rng)?;
        let test = fixed_test.as_ref().unwrap_or(&split.test);
        let mut out = Scored {
            labels: test.iter().map(|(_, l)| *l).collect(),
            n_train: split.train.len(),
            text: None,
            image: None,
        };
        if let Some(t) = &text {
            out.text = Some(score_modality(t, &split.train, test, config, derived_seed(config.seed, it, Purpose::Text))?);
        }
        if let Some(i) = &image {
            match score_modality(i, &split.train, test, config, derived_seed(config.seed, it, Purpose::Image)) {
                Ok(scored) => out.image = Some(scored),
                // Too few training campaigns with images: the ensemble keeps text scores.
                Err(HarnessError::Degenerate(_)) if ensemble && !split_out => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    };
    let scored = in_pool(config.threads, || {
        (0..iterations)
            .into_par_iter()
            .map(run_one)
            .collect::<Result<Vec<_>, HarnessError>>()
    })??;
    let mut name = format!("{}/{}", config.classifier.name(), config.modality);
    let mut suffix = String::new();
    if !exclude.is_empty() {
        let groups: Vec<&str> = exclude.iter().map(|g| g.as_str()).collect();
        suffix = format!("/-{}", groups.join(",-"));
        name.push_str(&suffix);
    }
    let build = |name: String, config: ExperimentConfig, side: Side| -> Result<ExperimentRun, HarnessError> {
        let mut records = Vec::with_capacity(scored.len());
        for (it, s) in scored.iter().enumerate() {
            records.push(s.record(it, side)?);
        }
        let distribution = MetricsDistribution::new(records.iter().map(|r| r.metrics).collect());
        Ok(ExperimentRun {
            name,
            config,
            records,
            distribution,
        })
    };
    let mut runs = Vec::new();
    if split_out && ensemble {
        for (modality, side) in [(Modality::Text, Side::Text), (Modality::Image, Side::Image)] {
            let cfg = ExperimentConfig {
                modality,
                ..config.clone()
            };
            runs.push(build(format!("{}/{modality}{suffix}", config.classifier.name()), cfg, side)?);
        }
    }
    runs.push(build(name, config.clone(), Side::Combined)?);
    Ok(runs)
}

#[derive(Debug, Clone, Copy)]
enum Side {
    Text,
    Image,
    Combined,
}

/// Per-modality probabilities of one iteration's test rows.
struct Scored {
    labels: Vec<Label>,
    n_train: usize,
    text: Option<(Vec<Option<f64>>, usize)>,
    image: Option<(Vec<Option<f64>>, usize)>,
}

impl Scored {
    fn record(&self, iteration: usize, side: Side) -> Result<IterationRecord, HarnessError> {
        let text = self.text.as_ref();
        let image = self.image.as_ref();
        let mut labels = Vec::with_capacity(self.labels.len());
        let mut scores = Vec::with_capacity(self.labels.len());
        for (k, &label) in self.labels.iter().enumerate() {
            let t = text.and_then(|(p, _)| p[k]);
            let i = image.and_then(|(p, _)| p[k]);
            let score = match side {
                Side::Text => t,
                Side::Image => i,
                Side::Combined => Some(ensemble_combine(t, i)?),
            };
            if let Some(s) = score {
                labels.push(label);
                scores.push(s);
            }
        }
        let metrics = evaluate_metrics(&labels, &scores, DEFAULT_THRESHOLD)?;
        Ok(IterationRecord {
            iteration,
            metrics,
            n_train: self.n_train,
            n_test: labels.len(),
            text_features: match side {
                Side::Image => None,
                _ => text.map(|(_, n)| *n),
            },
            image_features: match side {
                Side::Text => None,
                _ => image.map(|(_, n)| *n),
            },
        })
    }
}

/// Runs `config` with the groups in `exclude` removed.
pub(crate) fn run_protocol(
    config: &ExperimentConfig,
    data: &ExperimentData,
    exclude: &[FeatureGroup],
) -> Result<ExperimentRun, HarnessError> {
    Ok(run_protocol_split(config, data, exclude, false)?.pop().expect("one run"))
}

/// Text, image and ensemble runs scored on the same splits and seeds, so the
/// two modality models are fitted once per iteration. The image run is
/// evaluated on the test campaigns that have images. Equals three separate
/// runs when every labelled campaign has at least one image.
pub fn run_all_modalities(config: &ExperimentConfig, data: &ExperimentData) -> Result<[ExperimentRun; 3], HarnessError> {
    let config = ExperimentConfig {
        modality: Modality::Ensemble,
        ..config.clone()
    };
    let runs = run_protocol_split(&config, data, &[], true)?;
    runs.try_into()
        .map_err(|_| HarnessError::MissingInput("text and image feature"))
}

/// Runs `config` as written (modality, label setup).
pub fn run_experiment(config: &ExperimentConfig, data: &ExperimentData) -> Result<ExperimentRun, HarnessError> {
    run_protocol(config, data, &[])
}

/// One modality on its own.
pub fn run_modality_experiment(
    config: &ExperimentConfig,
    data: &ExperimentData,
    modality: Modality,
) -> Result<ExperimentRun, HarnessError> {
    let config = ExperimentConfig {
        modality,
        ..config.clone()
    };
    run_protocol(&config, data, &[])
}

/// Text and image models on a shared split, probabilities averaged.
pub fn run_ensemble_experiment(config: &ExperimentConfig, data: &ExperimentData) -> Result<ExperimentRun, HarnessError> {
    run_modality_experiment(config, data, Modality::Ensemble)
}

/// Trains on balanced folds of the {1, 5} campaigns and tests every
/// iteration on all {2, 4} campaigns.
pub fn run_label3(config: &ExperimentConfig, data: &ExperimentData) -> Result<ExperimentRun, HarnessError> {
    if data.grouping.test().is_none() {
        return Err(HarnessError::Config("Label III needs data grouped with the Label III setup".into()));
    }
    let config = ExperimentConfig {
        label_setup: LabelSetup::LabelIII,
        ..config.clone()
    };
    run_protocol(&config, data, &[])
}
