//! Tables behind the figures: per-label emotion bars, ranked terms and
//! object classes, face-count histograms and metric box plots.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::distribution::{quantile_sorted, MetricsDistribution};
use super::HarnessError;
use crate::corpus::{Label, LabeledSet};
use crate::features::FeatureMatrix;
use crate::learn::Metrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    TextEmotions,
    ImageEmotions,
    WordImportance,
    ObjectPrevalence,
    FaceHistogram,
    MetricsBoxes,
}

impl FigureKind {
    pub const ALL: [FigureKind; 6] = [
        FigureKind::TextEmotions,
        FigureKind::ImageEmotions,
        FigureKind::WordImportance,
        FigureKind::ObjectPrevalence,
        FigureKind::FaceHistogram,
        FigureKind::MetricsBoxes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureKind::TextEmotions => "text-emotions",
            FigureKind::ImageEmotions => "image-emotions",
            FigureKind::WordImportance => "word-importance",
            FigureKind::ObjectPrevalence => "object-prevalence",
            FigureKind::FaceHistogram => "face-histogram",
            FigureKind::MetricsBoxes => "metrics-boxes",
        }
    }
}

impl fmt::Display for FigureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == key)
            .ok_or_else(|| format!("unknown figure kind {s:?}"))
    }
}

/// What the exporters read. Only the inputs a kind needs must be present.
#[derive(Debug, Clone, Copy)]
pub struct FigureInput<'a> {
    pub labels: &'a LabeledSet,
    pub text: Option<&'a FeatureMatrix>,
    pub image: Option<&'a FeatureMatrix>,
    pub runs: &'a [(String, MetricsDistribution)],
    /// Rows per side for the ranked tables.
    pub top: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl FigureTable {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-label means of the columns whose name starts with `prefix`, in column order.
pub fn class_means(m: &FeatureMatrix, labels: &LabeledSet, prefix: &str) -> Vec<(String, f64, f64)> {
    let cols = m.columns_where(|n| n.starts_with(prefix));
    let mut sums = vec![[0.0f64; 2]; cols.len()];
    let mut counts = [0usize; 2];
    for (r, id) in m.ids().iter().enumerate() {
        let Some(l) = labels.get(id) else { continue };
        let k = if l.is_fraud() { 0 } else { 1 };
        counts[k] += 1;
        for (s, &c) in sums.iter_mut().zip(&cols) {
            s[k] += m.get(r, c);
        }
    }
    cols.iter()
        .zip(sums)
        .map(|(&c, s)| {
            let mean = |k: usize| if counts[k] == 0 { 0.0 } else { s[k] / counts[k] as f64 };
            (m.names()[c].clone(), mean(0), mean(1))
        })
        .collect()
}

fn emotion_table(m: &FeatureMatrix, labels: &LabeledSet, prefix: &str) -> FigureTable {
    let mut t = FigureTable::new(&["feature", "fraud_mean", "not_fraud_mean", "difference"]);
    for (name, f, n) in class_means(m, labels, prefix) {
        t.rows.push(vec![
            name.trim_start_matches(prefix).to_string(),
            f.to_string(),
            n.to_string(),
            (f - n).to_string(),
        ]);
    }
    t
}

/// Features ranked by between-class mean difference, top `top` per side.
fn ranked_table(m: &FeatureMatrix, labels: &LabeledSet, prefix: &str, top: usize) -> FigureTable {
    let means = class_means(m, labels, prefix);
    let mut t = FigureTable::new(&["side", "rank", "feature", "fraud_mean", "not_fraud_mean", "difference"]);
    for (side, sign) in [("fraud", 1.0), ("not-fraud", -1.0)] {
        let mut v: Vec<&(String, f64, f64)> = means.iter().filter(|(_, f, n)| sign * (f - n) > 0.0).collect();
        v.sort_by(|a, b| (sign * (b.1 - b.2)).total_cmp(&(sign * (a.1 - a.2))).then(a.0.cmp(&b.0)));
        for (rank, (name, f, n)) in v.into_iter().take(top).enumerate() {
            t.rows.push(vec![
                side.to_string(),
                (rank + 1).to_string(),
                name.trim_start_matches(prefix).to_string(),
                f.to_string(),
                n.to_string(),
                (f - n).to_string(),
            ]);
        }
    }
    t
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    quantile_sorted(values, 0.5)
}

/// Per-label face values (campaign means) keyed by label.
pub fn face_values(m: &FeatureMatrix, labels: &LabeledSet) -> BTreeMap<Label, Vec<f64>> {
    let mut out: BTreeMap<Label, Vec<f64>> = BTreeMap::new();
    if let Some(c) = m.column_index("img.faces") {
        for (r, id) in m.ids().iter().enumerate() {
            if let Some(l) = labels.get(id) {
                out.entry(l).or_default().push(m.get(r, c));
            }
        }
    }
    out
}

fn face_table(m: &FeatureMatrix, labels: &LabeledSet) -> FigureTable {
    let mut t = FigureTable::new(&["label", "faces", "campaigns", "label_mean", "label_median"]);
    for (label, mut values) in face_values(m, labels).into_iter().rev() {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let med = median(&mut values);
        let mut bins: Vec<(f64, usize)> = Vec::new();
        for v in &values {
            match bins.last_mut() {
                Some((b, n)) if b == v => *n += 1,
                _ => bins.push((*v, 1)),
            }
        }
        for (faces, n) in bins {
            t.rows.push(vec![
                label.to_string(),
                faces.to_string(),
                n.to_string(),
                mean.to_string(),
                med.to_string(),
            ]);
        }
    }
    t
}

fn boxes_table(runs: &[(String, MetricsDistribution)]) -> FigureTable {
    let mut t = FigureTable::new(&["run", "metric", "min", "q1", "median", "q3", "max", "mean"]);
    for (name, d) in runs {
        if d.is_empty() {
            continue;
        }
        for metric in Metrics::NAMES {
            let q = d.quartiles(metric);
            t.rows.push(vec![
                name.clone(),
                metric.to_string(),
                q.min.to_string(),
                q.q1.to_string(),
                q.median.to_string(),
                q.q3.to_string(),
                q.max.to_string(),
                d.mean(metric).to_string(),
            ]);
        }
    }
    t
}

pub fn export_figure_data(kind: FigureKind, input: &FigureInput<'_>) -> Result<FigureTable, HarnessError> {
    let text = || input.text.ok_or(HarnessError::MissingInput("text feature"));
    let image = || input.image.ok_or(HarnessError::MissingInput("image feature"));
    Ok(match kind {
        FigureKind::TextEmotions => emotion_table(text()?, input.labels, "sent."),
        FigureKind::ImageEmotions => emotion_table(image()?, input.labels, "img.emotion."),
        FigureKind::WordImportance => ranked_table(text()?, input.labels, "tfidf.", input.top),
        FigureKind::ObjectPrevalence => ranked_table(image()?, input.labels, "img.semantic.", input.top),
        FigureKind::FaceHistogram => face_table(image()?, input.labels),
        FigureKind::MetricsBoxes => {
            if input.runs.is_empty() {
                return Err(HarnessError::MissingInput("experiment run"));
            }
            boxes_table(input.runs)
        }
    })
}
