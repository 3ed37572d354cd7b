//! From-scratch classifiers and evaluation metrics.
//!
//! Every classifier returns a fraud probability. KNN and the MLP see
//! features standardised with training-set statistics; the tree family and
//! naive Bayes consume raw values. A fitted [`Model`] remembers the feature
//! names it was trained on and refuses input with a different schema.

pub mod adaboost;
pub mod forest;
pub mod knn;
pub mod metrics;
pub mod mlp;
pub mod naive_bayes;
pub mod standardize;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adaboost::AdaBoost;
pub use forest::{ForestParams, MaxFeatures, RandomForest};
pub use knn::Knn;
pub use metrics::{evaluate_metrics, roc_auc, roc_auc_trapezoid, Metrics, DEFAULT_THRESHOLD};
pub use mlp::{Mlp, MlpConfig};
pub use naive_bayes::GaussianNb;
pub use standardize::Standardizer;
pub use tree::{DecisionTree, TreeParams};

use crate::corpus::Label;
use crate::features::{schema_hash, FeatureMatrix, FeatureVector};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("no training rows")]
    Empty,
    #[error("non-finite feature value")]
    NonFinite,
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("feature schema {found} does not match the model's schema {expected}")]
    SchemaMismatch { expected: String, found: String },
    #[error("invalid classifier spec: {0}")]
    InvalidSpec(String),
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClassifierKind {
    Knn { k: usize },
    GaussianNb,
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    AdaBoost { n_rounds: usize },
    Mlp(MlpConfig),
}

impl ClassifierKind {
    pub const NAMES: [&'static str; 6] = ["knn", "naive-bayes", "tree", "forest", "adaboost", "mlp"];

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Knn { .. } => "knn",
            ClassifierKind::GaussianNb => "naive-bayes",
            ClassifierKind::DecisionTree(_) => "tree",
            ClassifierKind::RandomForest(_) => "forest",
            ClassifierKind::AdaBoost { .. } => "adaboost",
            ClassifierKind::Mlp(_) => "mlp",
        }
    }

    /// Default hyperparameters of each kind.
    pub fn all_defaults() -> Vec<ClassifierKind> {
        Self::NAMES.iter().map(|n| n.parse().expect("known name")).collect()
    }

    pub fn standardizes(&self) -> bool {
        matches!(self, ClassifierKind::Knn { .. } | ClassifierKind::Mlp(_))
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad value {v:?} for {key}"))
        }
        fn depth(v: &str) -> Result<Option<usize>, String> {
            if v == "none" {
                Ok(None)
            } else {
                num("max_depth", v).map(Some)
            }
        }
        match (self, key) {
            (ClassifierKind::Knn { k }, "k") => *k = num(key, value)?,
            (ClassifierKind::DecisionTree(p), "max_depth") => p.max_depth = depth(value)?,
            (ClassifierKind::DecisionTree(p), "min_leaf") => p.min_leaf = num(key, value)?,
            (ClassifierKind::RandomForest(p), "n_trees") => p.n_trees = num(key, value)?,
            (ClassifierKind::RandomForest(p), "bootstrap") => p.bootstrap = num(key, value)?,
            (ClassifierKind::RandomForest(p), "max_depth") => p.max_depth = depth(value)?,
            (ClassifierKind::RandomForest(p), "min_leaf") => p.min_leaf = num(key, value)?,
            (ClassifierKind::RandomForest(p), "max_features") => {
                p.max_features = match value {
                    "sqrt" => MaxFeatures::Sqrt,
                    "all" => MaxFeatures::All,
                    n => MaxFeatures::Count(num(key, n)?),
                }
            }
            (ClassifierKind::AdaBoost { n_rounds }, "n_rounds") => *n_rounds = num(key, value)?,
            (ClassifierKind::Mlp(c), "epochs") => c.epochs = num(key, value)?,
            (ClassifierKind::Mlp(c), "lr") => c.lr = num(key, value)?,
            (ClassifierKind::Mlp(c), "momentum") => c.momentum = num(key, value)?,
            (ClassifierKind::Mlp(c), "weight_decay") => c.weight_decay = num(key, value)?,
            (ClassifierKind::Mlp(c), "batch_size") => c.batch_size = num(key, value)?,
            (ClassifierKind::Mlp(c), "noise_std") => c.noise_std = num(key, value)?,
            (ClassifierKind::Mlp(c), "hidden") => c.hidden = Some(num(key, value)?),
            (kind, _) => return Err(format!("{} has no parameter {key:?}", kind.name())),
        }
        Ok(())
    }
}

/// `name` or `name:key=value,key=value`, e.g. `forest:n_trees=50,max_features=all`.
impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let mut kind = match name.trim().to_ascii_lowercase().as_str() {
            "knn" | "k-nn" => ClassifierKind::Knn { k: 5 },
            "naive-bayes" | "nb" | "gaussian-nb" => ClassifierKind::GaussianNb,
            "tree" | "decision-tree" | "dt" => ClassifierKind::DecisionTree(TreeParams::default()),
            "forest" | "random-forest" | "rf" => ClassifierKind::RandomForest(ForestParams::default()),
            "adaboost" | "ada" => ClassifierKind::AdaBoost { n_rounds: 100 },
            "mlp" => ClassifierKind::Mlp(MlpConfig::default()),
            other => return Err(format!("unknown classifier {other:?} (one of {})", Self::NAMES.join(", "))),
        };
        for pair in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {pair:?}"))?;
            kind.set(k.trim(), v.trim())?;
        }
        Ok(kind)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let depth = |d: Option<usize>| d.map_or("none".to_string(), |d| d.to_string());
        match self {
            ClassifierKind::Knn { k } => write!(f, "knn:k={k}"),
            ClassifierKind::GaussianNb => write!(f, "naive-bayes"),
            ClassifierKind::DecisionTree(p) => {
                write!(f, "tree:max_depth={},min_leaf={}", depth(p.max_depth), p.min_leaf)
            }
            ClassifierKind::RandomForest(p) => {
                let mf = match p.max_features {
                    MaxFeatures::Sqrt => "sqrt".to_string(),
                    MaxFeatures::All => "all".to_string(),
                    MaxFeatures::Count(n) => n.to_string(),
                };
                write!(
                    f,
                    "forest:n_trees={},max_features={mf},bootstrap={},max_depth={},min_leaf={}",
                    p.n_trees,
                    p.bootstrap,
                    depth(p.max_depth),
                    p.min_leaf
                )
            }
            ClassifierKind::AdaBoost { n_rounds } => write!(f, "adaboost:n_rounds={n_rounds}"),
            ClassifierKind::Mlp(c) => write!(
                f,
                "mlp:epochs={},lr={},momentum={},weight_decay={},batch_size={},noise_std={}",
                c.epochs, c.lr, c.momentum, c.weight_decay, c.batch_size, c.noise_std
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Params {
    Knn(Knn),
    GaussianNb(GaussianNb),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    AdaBoost(AdaBoost),
    Mlp(Mlp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub format_version: u32,
    pub spec: ClassifierSpec,
    feature_names: Vec<String>,
    schema_hash: String,
    standardizer: Option<Standardizer>,
    params: Params,
}

pub fn fit_classifier(spec: &ClassifierSpec, train: &FeatureMatrix, labels: &[Label]) -> Result<Model, LearnError> {
    if labels.len() != train.n_rows() {
        return Err(LearnError::LengthMismatch {
            expected: train.n_rows(),
            found: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(LearnError::Empty);
    }
    if labels.iter().all(|l| l.is_fraud()) || labels.iter().all(|l| !l.is_fraud()) {
        return Err(LearnError::SingleClass);
    }
    let d = train.n_cols();
    let mut x: Vec<f64> = train.rows().flat_map(|r| r.iter().copied()).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    let standardizer = spec.kind.standardizes().then(|| Standardizer::fit(&x, d));
    if let Some(s) = &standardizer {
        x = s.transform(&x);
    }
    let params = match spec.kind {
        ClassifierKind::Knn { k } => {
            if k == 0 {
                return Err(LearnError::InvalidSpec("k must be at least 1".into()));
            }
            Params::Knn(Knn::fit(&x, d, labels, train.ids(), k))
        }
        ClassifierKind::GaussianNb => Params::GaussianNb(GaussianNb::fit(&x, d, labels)),
        ClassifierKind::DecisionTree(p) => Params::DecisionTree(DecisionTree::fit(&x, d, labels, p)),
        ClassifierKind::RandomForest(p) => {
            if p.n_trees == 0 {
                return Err(LearnError::InvalidSpec("n_trees must be at least 1".into()));
            }
            Params::RandomForest(RandomForest::fit(&x, d, labels, p, spec.seed))
        }
        ClassifierKind::AdaBoost { n_rounds } => Params::AdaBoost(AdaBoost::fit(&x, d, labels, n_rounds)),
        ClassifierKind::Mlp(c) => Params::Mlp(Mlp::fit(&x, d, labels, &c, spec.seed)),
    };
    let feature_names = train.names().to_vec();
    Ok(Model {
        format_version: MODEL_FORMAT_VERSION,
        spec: *spec,
        schema_hash: schema_hash(&feature_names),
        feature_names,
        standardizer,
        params,
    })
}

impl Model {
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn schema_hash(&self) -> &str {
        &self.schema_hash
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    fn check_schema(&self, names: &[String]) -> Result<(), LearnError> {
        if names != self.feature_names.as_slice() {
            return Err(LearnError::SchemaMismatch {
                expected: self.schema_hash.clone(),
                found: schema_hash(names),
            });
        }
        Ok(())
    }

    fn predict_raw(&self, row: &[f64]) -> f64 {
        let owned;
        let row = match &self.standardizer {
            Some(s) => {
                owned = s.transform_row(row);
                &owned[..]
            }
            None => row,
        };
        let p = match &self.params {
            Params::Knn(m) => m.predict_row(row),
            Params::GaussianNb(m) => m.predict_row(row),
            Params::DecisionTree(m) => m.predict_row(row),
            Params::RandomForest(m) => m.predict_row(row),
            Params::AdaBoost(m) => m.predict_row(row),
            Params::Mlp(m) => m.predict_row(row),
        };
        p.clamp(0.0, 1.0)
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> Result<f64, LearnError> {
        self.check_schema(&x.names()[..])?;
        if x.values().iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite);
        }
        Ok(self.predict_raw(x.values()))
    }

    /// Fraud probability of every row.
    pub fn predict_matrix(&self, m: &FeatureMatrix) -> Result<Vec<f64>, LearnError> {
        self.check_schema(&m.names()[..])?;
        m.rows()
            .map(|r| {
                if r.iter().any(|v| !v.is_finite()) {
                    Err(LearnError::NonFinite)
                } else {
                    Ok(self.predict_raw(r))
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialises")
    }

    pub fn from_json(json: &str) -> Result<Model, LearnError> {
        let m: Model = serde_json::from_str(json).map_err(|e| LearnError::Format(e.to_string()))?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(LearnError::Format(format!("unsupported format version {}", m.format_version)));
        }
        if schema_hash(&m.feature_names) != m.schema_hash {
            return Err(LearnError::Format("schema hash does not match feature names".into()));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureNames;

    fn toy() -> (FeatureMatrix, Vec<Label>) {
        let names: FeatureNames = vec!["a".to_string(), "b".to_string()].into();
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64, if i % 2 == 0 { 1.0 } else { -1.0 } * (i as f64).sqrt()])
            .collect();
        let labels = (0..20).map(|i| if i >= 10 { Label::Fraud } else { Label::NotFraud }).collect();
        let ids = (0..20).map(|i| format!("c{i:02}")).collect();
        (FeatureMatrix::from_rows(ids, names, rows).unwrap(), labels)
    }

    #[test]
    fn every_kind_fits_and_predicts_in_unit_interval() {
        let (m, y) = toy();
        for kind in ClassifierKind::all_defaults() {
            let model = fit_classifier(&ClassifierSpec::new(kind, 7), &m, &y).unwrap();
            for p in model.predict_matrix(&m).unwrap() {
                assert!((0.0..=1.0).contains(&p), "{kind}");
            }
        }
    }

    #[test]
    fn schema_mismatch_is_refused() {
        let (m, y) = toy();
        let model = fit_classifier(&ClassifierSpec::new(ClassifierKind::GaussianNb, 0), &m, &y).unwrap();
        let other: FeatureNames = vec!["b".to_string(), "a".to_string()].into();
        let v = FeatureVector::new(other, vec![1.0, 2.0]).unwrap();
        assert!(matches!(model.predict_proba(&v), Err(LearnError::SchemaMismatch { .. })));
        let ok = m.vector(3);
        assert!(model.predict_proba(&ok).is_ok());
    }

    #[test]
    fn single_class_and_nan_rejected() {
        let (m, _) = toy();
        let spec = ClassifierSpec::new(ClassifierKind::GaussianNb, 0);
        assert_eq!(fit_classifier(&spec, &m, &[Label::Fraud; 20]), Err(LearnError::SingleClass));
        let bad = FeatureMatrix::from_rows(
            vec!["x".into(), "y".into()],
            vec!["a".to_string()].into(),
            vec![vec![f64::NAN], vec![1.0]],
        )
        .unwrap();
        assert_eq!(
            fit_classifier(&spec, &bad, &[Label::Fraud, Label::NotFraud]),
            Err(LearnError::NonFinite)
        );
    }

    #[test]
    fn json_round_trip() {
        let (m, y) = toy();
        for kind in ClassifierKind::all_defaults() {
            let model = fit_classifier(&ClassifierSpec::new(kind, 3), &m, &y).unwrap();
            let back = Model::from_json(&model.to_json()).unwrap();
            assert_eq!(back.predict_matrix(&m).unwrap(), model.predict_matrix(&m).unwrap());
        }
        let (m, y) = toy();
        let model = fit_classifier(&ClassifierSpec::new(ClassifierKind::GaussianNb, 3), &m, &y).unwrap();
        let tampered = model.to_json().replace("\"a\"", "\"z\"");
        assert!(Model::from_json(&tampered).is_err());
    }

    #[test]
    fn kind_strings() {
        let k: ClassifierKind = "forest:n_trees=3,max_features=all,bootstrap=false".parse().unwrap();
        assert_eq!(
            k,
            ClassifierKind::RandomForest(ForestParams {
                n_trees: 3,
                max_features: MaxFeatures::All,
                bootstrap: false,
                ..ForestParams::default()
            })
        );
        for kind in ClassifierKind::all_defaults() {
            assert_eq!(kind.to_string().parse::<ClassifierKind>().unwrap(), kind);
        }
        assert!("svm".parse::<ClassifierKind>().is_err());
        assert!("knn:depth=3".parse::<ClassifierKind>().is_err());
        let ClassifierKind::Mlp(c) = "mlp".parse().unwrap() else { panic!() };
        assert_eq!(c, MlpConfig::default());
        assert_eq!(c.noise_std, 0.1f64.sqrt());
    }
}
