//! Feature sources for the two modalities and the labelled data an
//! experiment runs on.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::HarnessError;
use crate::corpus::{Corpus, Grouping, LabelSetup, LabeledSet};
use crate::features::{FeatureGroup, FeatureMatrix};
use crate::image::{image_matrix, Aggregation};
use crate::text::{tfidf_fit, tfidf_matrix, TextFeaturizer, TfidfConfig, TfidfVocabulary};

/// A per-campaign feature table. Text sources also keep the descriptions so
/// the TF-IDF block can be fitted on whichever rows a fold trains on.
#[derive(Debug, Clone)]
pub struct ModalitySource {
    matrix: FeatureMatrix,
    docs: Option<Vec<String>>,
    tfidf: TfidfConfig,
    index: HashMap<String, usize>,
}

pub type TextSource = ModalitySource;

fn index_of(m: &FeatureMatrix) -> HashMap<String, usize> {
    m.ids().iter().enumerate().map(|(i, id)| (id.clone(), i)).collect()
}

impl ModalitySource {
    /// A fixed matrix, used as is.
    pub fn matrix(matrix: FeatureMatrix) -> Self {
        Self {
            index: index_of(&matrix),
            matrix,
            docs: None,
            tfidf: TfidfConfig::default(),
        }
    }

    /// Vocabulary-independent text features plus the documents (parallel to the rows).
    pub fn text(base: FeatureMatrix, docs: Vec<String>, tfidf: TfidfConfig) -> Self {
        assert_eq!(base.n_rows(), docs.len(), "one document per row");
        Self {
            index: index_of(&base),
            matrix: base,
            docs: Some(docs),
            tfidf,
        }
    }

    pub fn from_campaigns(
        featurizer: &TextFeaturizer,
        campaigns: &[crate::corpus::Campaign],
        tfidf: TfidfConfig,
    ) -> Result<Self, HarnessError> {
        let base = featurizer.base_matrix(campaigns)?;
        let docs = campaigns.iter().map(|c| c.description.clone()).collect();
        Ok(Self::text(base, docs, tfidf))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn ids(&self) -> &[String] {
        self.matrix.ids()
    }

    pub fn has_text(&self) -> bool {
        self.docs.is_some()
    }

    /// The fixed (non-TF-IDF) columns.
    pub fn base(&self) -> &FeatureMatrix {
        &self.matrix
    }

    pub fn tfidf_config(&self) -> TfidfConfig {
        self.tfidf
    }

    fn rows(&self, ids: &[&str]) -> Result<Vec<usize>, HarnessError> {
        ids.iter()
            .map(|id| {
                self.index
                    .get(*id)
                    .copied()
                    .ok_or_else(|| HarnessError::Degenerate(format!("campaign {id:?} has no features")))
            })
            .collect()
    }

    fn base_columns(&self, exclude: &[FeatureGroup]) -> Vec<usize> {
        self.matrix
            .columns_where(|n| FeatureGroup::of(n).is_none_or(|g| !exclude.contains(&g)))
    }

    fn uses_tfidf(&self, exclude: &[FeatureGroup]) -> bool {
        self.docs.is_some() && !exclude.contains(&FeatureGroup::Tfidf)
    }

    /// Whether anything is left after removing `exclude`.
    pub fn has_columns(&self, exclude: &[FeatureGroup]) -> bool {
        self.uses_tfidf(exclude) || !self.base_columns(exclude).is_empty()
    }

    /// Vocabulary fitted on the documents of `ids`.
    pub fn fit_vocabulary(&self, ids: &[&str]) -> Result<Option<TfidfVocabulary>, HarnessError> {
        let Some(docs) = &self.docs else { return Ok(None) };
        let rows = self.rows(ids)?;
        let chosen: Vec<&str> = rows.iter().map(|&r| docs[r].as_str()).collect();
        Ok(Some(tfidf_fit(&chosen, self.tfidf)?))
    }

    fn assemble(
        &self,
        ids: &[&str],
        cols: &[usize],
        vocab: Option<&TfidfVocabulary>,
    ) -> Result<FeatureMatrix, HarnessError> {
        let rows = self.rows(ids)?;
        let base = self.matrix.submatrix(&rows, cols);
        match (vocab, &self.docs) {
            (Some(v), Some(docs)) => {
                let chosen: Vec<&str> = rows.iter().map(|&r| docs[r].as_str()).collect();
                let tf = tfidf_matrix(v, base.ids().to_vec(), &chosen);
                Ok(base.hstack(&tf)?)
            }
            _ => Ok(base),
        }
    }

    /// Feature matrices for the `fit` and `apply` campaigns with the groups
    /// in `exclude` removed. Any vocabulary is fitted on `fit` only.
    pub fn fold(
        &self,
        fit: &[&str],
        apply: &[&str],
        exclude: &[FeatureGroup],
    ) -> Result<(FeatureMatrix, FeatureMatrix), HarnessError> {
        let cols = self.base_columns(exclude);
        let vocab = if self.uses_tfidf(exclude) {
            self.fit_vocabulary(fit)?
        } else {
            None
        };
        Ok((
            self.assemble(fit, &cols, vocab.as_ref())?,
            self.assemble(apply, &cols, vocab.as_ref())?,
        ))
    }

    /// A fixed source over `ids` whose vocabulary is fitted on those same
    /// campaigns.
    pub fn materialize(&self, ids: &[&str], exclude: &[FeatureGroup]) -> Result<ModalitySource, HarnessError> {
        let (m, _) = self.fold(ids, &[], exclude)?;
        Ok(ModalitySource::matrix(m))
    }
}

/// Labels plus the feature sources of one corpus.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub grouping: Grouping,
    pub text: Option<ModalitySource>,
    pub image: Option<ModalitySource>,
    /// Labelled campaigns without any image.
    pub missing_images: Vec<String>,
}

impl ExperimentData {
    pub fn new(grouping: Grouping, text: Option<ModalitySource>, image: Option<ModalitySource>) -> Self {
        Self {
            grouping,
            text,
            image,
            missing_images: Vec::new(),
        }
    }

    /// Every labelled campaign, training and test side.
    pub fn all_labels(&self) -> LabeledSet {
        match &self.grouping {
            Grouping::Single(s) => s.clone(),
            Grouping::Transfer { train, test } => {
                LabeledSet::new(train.entries().iter().chain(test.entries()).cloned().collect())
            }
        }
    }

    /// Features for the campaigns `setup` keeps. Image features are loaded
    /// only when a sidecar directory is given.
    pub fn from_corpus(
        corpus: &Corpus,
        setup: LabelSetup,
        featurizer: &TextFeaturizer,
        sidecars: Option<&Path>,
        aggregation: Aggregation,
        tfidf: TfidfConfig,
    ) -> Result<Self, HarnessError> {
        let grouping = corpus.labels(setup)?;
        let mut data = ExperimentData::new(grouping, None, None);
        let labelled: HashSet<String> = data.all_labels().ids().map(str::to_string).collect();
        let campaigns: Vec<_> = corpus
            .campaigns()
            .iter()
            .filter(|c| labelled.contains(&c.id))
            .cloned()
            .collect();
        data.text = Some(ModalitySource::from_campaigns(featurizer, &campaigns, tfidf)?);
        if let Some(dir) = sidecars {
            let table = image_matrix(&campaigns, dir, aggregation)?;
            data.missing_images = table.missing;
            data.image = Some(ModalitySource::matrix(table.matrix));
        }
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureNames;

    fn source() -> ModalitySource {
        let names: FeatureNames = vec!["read.words".to_string(), "sent.emotion.joy".to_string()].into();
        let ids: Vec<String> = (0..4).map(|i| format!("c{i}")).collect();
        let rows = (0..4).map(|i| vec![i as f64, 0.5]).collect();
        let base = FeatureMatrix::from_rows(ids, names, rows).unwrap();
        let docs = vec![
            "alpha beta gamma".to_string(),
            "alpha beta delta".to_string(),
            "alpha epsilon zeta".to_string(),
            "omega omega omega".to_string(),
        ];
        ModalitySource::text(base, docs, TfidfConfig::default())
    }

    #[test]
    fn vocabulary_fits_on_fit_rows_only() {
        let s = source();
        let (fit, apply) = s.fold(&["c0", "c1"], &["c2", "c3"], &[]).unwrap();
        let names: Vec<&str> = fit.names().iter().map(String::as_str).collect();
        assert_eq!(names, ["read.words", "sent.emotion.joy", "tfidf.alpha", "tfidf.beta"]);
        assert_eq!(apply.names(), fit.names());
        assert_eq!(apply.row(1), &[3.0, 0.5, 0.0, 0.0]);
        assert_eq!(apply.row(0)[2], 1.0);
    }

    #[test]
    fn exclusion_removes_groups() {
        let s = source();
        let (fit, _) = s.fold(&["c0", "c1"], &["c2"], &[FeatureGroup::Tfidf, FeatureGroup::Sentiment]).unwrap();
        let names: Vec<&str> = fit.names().iter().map(String::as_str).collect();
        assert_eq!(names, ["read.words"]);
        assert!(!s.has_columns(&[FeatureGroup::Tfidf, FeatureGroup::Sentiment, FeatureGroup::Readability]));
        assert!(s.fold(&["c0", "zz"], &[], &[]).is_err());
    }
}
