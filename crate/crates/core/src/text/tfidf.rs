//! TF-IDF over lowercased unigrams.
//!
//! Weights are `tf * (ln((1 + N) / (1 + df)) + 1)` with raw term counts,
//! then L2-normalised. Terms seen in fewer than `min_df` training documents
//! are dropped. Vocabulary order is lexicographic so feature names are stable.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{tokenize, TextError};

pub const DEFAULT_MIN_DF: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfidfConfig {
    pub min_df: usize,
    /// Keep only the `n` terms with the highest document frequency
    /// (ties broken lexicographically).
    pub max_terms: Option<usize>,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        Self {
            min_df: DEFAULT_MIN_DF,
            max_terms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfVocabulary {
    terms: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TfidfVocabulary {
    fn from_parts(terms: Vec<String>, df: Vec<usize>, n_docs: usize) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            terms,
            df,
            n_docs,
            index,
        }
    }

    /// Rebuilds the lookup index after deserialisation.
    pub fn reindexed(self) -> Self {
        Self::from_parts(self.terms, self.df, self.n_docs)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn df(&self, term: &str) -> Option<usize> {
        self.position(term).map(|i| self.df[i])
    }

    pub fn position(&self, term: &str) -> Option<usize> {
        if self.index.len() == self.terms.len() {
            self.index.get(term).copied()
        } else {
            self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
        }
    }

    pub fn idf(&self, i: usize) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.df[i] as f64)).ln() + 1.0
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.terms.iter().map(|t| format!("tfidf.{t}")).collect()
    }
}

pub fn tfidf_fit<S: AsRef<str>>(docs: &[S], config: TfidfConfig) -> Result<TfidfVocabulary, TextError> {
    if docs.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        let unique: HashSet<String> = tokenize::lower_words(doc.as_ref()).into_iter().collect();
        for term in unique {
            *df.entry(term).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = df
        .into_iter()
        .filter(|(_, d)| *d >= config.min_df.max(1))
        .collect();
    if let Some(limit) = config.max_terms {
        if kept.len() > limit {
            kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            kept.truncate(limit);
            kept.sort_by(|a, b| a.0.cmp(&b.0));
        }
    }
    let (terms, dfs) = kept.into_iter().unzip();
    Ok(TfidfVocabulary::from_parts(terms, dfs, docs.len()))
}

/// Sparse TF-IDF weights, indices ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn tfidf_transform(vocab: &TfidfVocabulary, text: &str) -> SparseVector {
    let mut tf: BTreeMap<usize, usize> = BTreeMap::new();
    for w in tokenize::lower_words(text) {
        if let Some(i) = vocab.position(&w) {
            *tf.entry(i).or_default() += 1;
        }
    }
    let mut v = SparseVector {
        indices: Vec::with_capacity(tf.len()),
        values: Vec::with_capacity(tf.len()),
    };
    for (i, count) in tf {
        v.indices.push(i);
        v.values.push(count as f64 * vocab.idf(i));
    }
    let norm = v.norm();
    if norm > 0.0 {
        for x in &mut v.values {
            *x /= norm;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_terms() -> TfidfConfig {
        TfidfConfig {
            min_df: 1,
            max_terms: None,
        }
    }

    #[test]
    fn direct_counts() {
        let v = tfidf_fit(&["a b", "a c"], all_terms()).unwrap();
        assert_eq!(v.terms(), ["a", "b", "c"]);
        assert_eq!(v.df("a"), Some(2));
        assert_eq!(v.df("b"), Some(1));
        assert_eq!(v.df("c"), Some(1));
        let v2 = tfidf_fit(&["a b", "a c"], TfidfConfig::default()).unwrap();
        assert_eq!(v2.terms(), ["a"]);
    }

    #[test]
    fn empty_corpus_rejected() {
        let docs: [&str; 0] = [];
        assert_eq!(tfidf_fit(&docs, all_terms()), Err(TextError::EmptyCorpus));
    }

    #[test]
    fn smoothing_by_hand() {
        let v = tfidf_fit(&["a b", "a c"], all_terms()).unwrap();
        // idf(a) = ln(3/3) + 1 = 1; one term so the normalised weight is 1.
        assert_eq!(v.idf(0), 1.0);
        let w = tfidf_transform(&v, "a");
        assert_eq!(w.indices, vec![0]);
        assert_eq!(w.values, vec![1.0]);
        // "a b": a -> 1, b -> ln(3/2) + 1, then normalised.
        let w = tfidf_transform(&v, "a b");
        let b = (1.5f64).ln() + 1.0;
        let n = (1.0 + b * b).sqrt();
        assert!((w.values[0] - 1.0 / n).abs() < 1e-15);
        assert!((w.values[1] - b / n).abs() < 1e-15);
    }

    #[test]
    fn oov_only_is_zero() {
        let v = tfidf_fit(&["a b", "a c"], all_terms()).unwrap();
        assert_eq!(tfidf_transform(&v, "zzz qqq"), SparseVector::default());
    }

    #[test]
    fn max_terms_keeps_most_frequent() {
        let v = tfidf_fit(
            &["x y z", "x y", "x w", "w q"],
            TfidfConfig {
                min_df: 1,
                max_terms: Some(3),
            },
        )
        .unwrap();
        // df: x=3, w=2, y=2, q=1, z=1.
        assert_eq!(v.terms(), ["w", "x", "y"]);
    }

    fn random_corpus(seed: u64, n: usize) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let len = rng.random_range(1..30);
                (0..len)
                    .map(|_| format!("w{}", rng.random_range(0..60)))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    }

    #[test]
    fn df_matches_hashmap_recount() {
        let docs = random_corpus(7, 100);
        let v = tfidf_fit(&docs, all_terms()).unwrap();
        let mut oracle: HashMap<String, usize> = HashMap::new();
        for d in &docs {
            let mut seen = HashSet::new();
            for w in d.split(' ') {
                if seen.insert(w) {
                    *oracle.entry(w.to_string()).or_default() += 1;
                }
            }
        }
        assert_eq!(v.len(), oracle.len());
        for (term, df) in &oracle {
            assert_eq!(v.df(term), Some(*df), "{term}");
        }
    }

    #[test]
    fn depends_on_corpus_only_through_counts() {
        let mut docs = random_corpus(11, 40);
        let v1 = tfidf_fit(&docs, TfidfConfig::default()).unwrap();
        docs.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
        let v2 = tfidf_fit(&docs, TfidfConfig::default()).unwrap();
        for d in &docs {
            assert_eq!(tfidf_transform(&v1, d), tfidf_transform(&v2, d));
        }
    }

    #[test]
    fn serde_round_trip_reindexes() {
        let v = tfidf_fit(&random_corpus(5, 20), TfidfConfig::default()).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        let back: TfidfVocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(tfidf_transform(&back, "w1 w2 w3"), tfidf_transform(&v, "w1 w2 w3"));
        assert_eq!(back.reindexed(), v);
    }

    proptest! {
        #[test]
        fn nonzero_output_has_unit_norm(seed in 0u64..500, doc in "[a-e ]{0,40}") {
            let mut docs = random_corpus(seed, 10);
            docs.push("a b c d e".into());
            docs.push("a b c d e".into());
            let v = tfidf_fit(&docs, TfidfConfig::default()).unwrap();
            let w = tfidf_transform(&v, &doc);
            if !w.values.is_empty() {
                prop_assert!((w.norm() - 1.0).abs() < 1e-9);
            }
            prop_assert!(w.values.iter().all(|x| *x >= 0.0));
        }
    }
}
