//! Named, ordered feature vectors and matrices shared by every stage.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Ordered feature names. Shared between a matrix and the vectors cut from it.
pub type FeatureNames = Arc<[String]>;

/// Hex SHA-256 over the newline-joined feature names.
pub fn schema_hash(names: &[String]) -> String {
    let mut hasher = Sha256::new();
    for name in names {
        hasher.update(name.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("row {row} has {found} values, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{rows} rows but {ids} ids")]
    IdCount { rows: usize, ids: usize },
    #[error("feature name {0:?} appears more than once")]
    DuplicateName(String),
    #[error("feature {0:?} is not present")]
    UnknownFeature(String),
    #[error("matrices cover different campaign ids")]
    IdMismatch,
}

/// One campaign's features, tied to the name list that describes them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    names: FeatureNames,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(names: FeatureNames, values: Vec<f64>) -> Result<Self, FeatureError> {
        if names.len() != values.len() {
            return Err(FeatureError::RowLength {
                row: 0,
                expected: names.len(),
                found: values.len(),
            });
        }
        Ok(Self { names, values })
    }

    pub fn names(&self) -> &FeatureNames {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    /// Reorders/subsets this vector onto `target` names.
    pub fn project(&self, target: &FeatureNames) -> Result<FeatureVector, FeatureError> {
        if Arc::ptr_eq(&self.names, target) || self.names[..] == target[..] {
            return Ok(FeatureVector {
                names: Arc::clone(target),
                values: self.values.clone(),
            });
        }
        let index: HashMap<&str, usize> = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let values = target
            .iter()
            .map(|n| {
                index
                    .get(n.as_str())
                    .map(|&i| self.values[i])
                    .ok_or_else(|| FeatureError::UnknownFeature(n.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FeatureVector {
            names: Arc::clone(target),
            values,
        })
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Dense row-major matrix: one row per campaign id, one column per named feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    ids: Vec<String>,
    names: FeatureNames,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(
        ids: Vec<String>,
        names: FeatureNames,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, FeatureError> {
        if ids.len() != rows.len() {
            return Err(FeatureError::IdCount {
                rows: rows.len(),
                ids: ids.len(),
            });
        }
        check_unique(&names)?;
        let width = names.len();
        let mut data = Vec::with_capacity(rows.len() * width);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != width {
                return Err(FeatureError::RowLength {
                    row,
                    expected: width,
                    found: values.len(),
                });
            }
            data.extend(values);
        }
        Ok(Self { ids, names, data })
    }

    pub fn from_flat(
        ids: Vec<String>,
        names: FeatureNames,
        data: Vec<f64>,
    ) -> Result<Self, FeatureError> {
        check_unique(&names)?;
        if data.len() != ids.len() * names.len() {
            return Err(FeatureError::RowLength {
                row: 0,
                expected: ids.len() * names.len(),
                found: data.len(),
            });
        }
        Ok(Self { ids, names, data })
    }

    pub fn empty(names: FeatureNames) -> Self {
        Self {
            ids: Vec::new(),
            names,
            data: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn names(&self) -> &FeatureNames {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_cols();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        self.rows().map(|r| r[col]).collect()
    }

    pub fn vector(&self, row: usize) -> FeatureVector {
        FeatureVector {
            names: Arc::clone(&self.names),
            values: self.row(row).to_vec(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Map from campaign id to row index.
    pub fn id_index(&self) -> HashMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect()
    }

    /// Copy of the given rows and columns, in the order given.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> FeatureMatrix {
        let names: FeatureNames = if cols.len() == self.n_cols() && cols.iter().enumerate().all(|(i, &c)| i == c) {
            Arc::clone(&self.names)
        } else {
            cols.iter().map(|&c| self.names[c].clone()).collect()
        };
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        FeatureMatrix {
            ids: rows.iter().map(|&r| self.ids[r].clone()).collect(),
            names,
            data,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let cols: Vec<usize> = (0..self.n_cols()).collect();
        self.submatrix(rows, &cols)
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let rows: Vec<usize> = (0..self.n_rows()).collect();
        self.submatrix(&rows, cols)
    }

    /// Indices of columns whose names satisfy `keep`.
    pub fn columns_where(&self, mut keep: impl FnMut(&str) -> bool) -> Vec<usize> {
        self.names
            .iter()
            .enumerate()
            .filter(|(_, n)| keep(n))
            .map(|(i, _)| i)
            .collect()
    }

    /// Side-by-side concatenation; both matrices must list the same ids in the same order.
    pub fn hstack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
        if self.ids != other.ids {
            return Err(FeatureError::IdMismatch);
        }
        let names: FeatureNames = self
            .names
            .iter()
            .chain(other.names.iter())
            .cloned()
            .collect();
        check_unique(&names)?;
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        for i in 0..self.n_rows() {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(FeatureMatrix {
            ids: self.ids.clone(),
            names,
            data,
        })
    }

    /// Writes `id,<names...>` CSV.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = Vec::with_capacity(self.n_cols() + 1);
        header.push("id".to_string());
        header.extend(self.names.iter().cloned());
        out.write_record(&header)?;
        for (i, id) in self.ids.iter().enumerate() {
            let mut record = Vec::with_capacity(self.n_cols() + 1);
            record.push(id.clone());
            record.extend(self.row(i).iter().map(|v| v.to_string()));
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`FeatureMatrix::write_csv`].
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<FeatureMatrix, String> {
        let mut input = csv::Reader::from_reader(reader);
        let header = input.headers().map_err(|e| e.to_string())?.clone();
        let names: FeatureNames = header.iter().skip(1).map(str::to_string).collect();
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (line, record) in input.records().enumerate() {
            let record = record.map_err(|e| e.to_string())?;
            let mut fields = record.iter();
            ids.push(fields.next().unwrap_or_default().to_string());
            for field in fields {
                let v: f64 = field
                    .parse()
                    .map_err(|_| format!("row {}: bad number {field:?}", line + 1))?;
                data.push(v);
            }
        }
        FeatureMatrix::from_flat(ids, names, data).map_err(|e| e.to_string())
    }
}

fn check_unique(names: &[String]) -> Result<(), FeatureError> {
    let mut seen = std::collections::HashSet::with_capacity(names.len());
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(FeatureError::DuplicateName(n.clone()));
        }
    }
    Ok(())
}

/// The nine feature groups used for ablation. Membership is decided by name prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureGroup {
    Tfidf,
    Sentiment,
    Ner,
    WordShape,
    Readability,
    Appearance,
    Objects,
    ImageEmotion,
    Faces,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 9] = [
        FeatureGroup::Tfidf,
        FeatureGroup::Sentiment,
        FeatureGroup::Ner,
        FeatureGroup::WordShape,
        FeatureGroup::Readability,
        FeatureGroup::Appearance,
        FeatureGroup::Objects,
        FeatureGroup::ImageEmotion,
        FeatureGroup::Faces,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            FeatureGroup::Tfidf => "tfidf.",
            FeatureGroup::Sentiment => "sent.",
            FeatureGroup::Ner => "ner.",
            FeatureGroup::WordShape => "form.",
            FeatureGroup::Readability => "read.",
            FeatureGroup::Appearance => "img.appearance.",
            FeatureGroup::Objects => "img.semantic.",
            FeatureGroup::ImageEmotion => "img.emotion.",
            FeatureGroup::Faces => "img.faces",
        }
    }

    /// Group owning a feature name, if any.
    pub fn of(name: &str) -> Option<FeatureGroup> {
        Self::ALL.into_iter().find(|g| name.starts_with(g.prefix()))
    }

    pub fn is_text(self) -> bool {
        matches!(
            self,
            FeatureGroup::Tfidf
                | FeatureGroup::Sentiment
                | FeatureGroup::Ner
                | FeatureGroup::WordShape
                | FeatureGroup::Readability
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::Tfidf => "tfidf",
            FeatureGroup::Sentiment => "sentiment",
            FeatureGroup::Ner => "ner",
            FeatureGroup::WordShape => "word-shape",
            FeatureGroup::Readability => "readability",
            FeatureGroup::Appearance => "appearance",
            FeatureGroup::Objects => "objects",
            FeatureGroup::ImageEmotion => "image-emotion",
            FeatureGroup::Faces => "faces",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|g| g.as_str() == key)
            .ok_or_else(|| format!("unknown feature group {s:?}"))
    }
}
