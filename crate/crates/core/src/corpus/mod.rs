//! Campaign records, ingestion from JSON lines, label setups and annotator agreement.
//!
//! A corpus file holds one campaign per line. Required keys are `id`,
//! `platform`, `title`, `description`, `category`, `created_at` (RFC 3339)
//! and `score` (the consensus fraud-scale value, 0–5). Optional keys are
//! `goal_minor` + `goal_currency`, `duration_days`, `images`, `metadata` and
//! `annotations` (per-annotator scores). Any other key is kept in `metadata`.
//!
//! Platform metadata (money raised, donors, social counts, geo-tags) is stored
//! but never reaches feature assembly: only the description and the images
//! exist at publication time.

mod agreement;
mod labels;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub use agreement::{cohens_kappa, AgreementBand, Kappa};
pub use labels::{apply_label_setup, Assignment, Grouping, Label, LabelSetup, LabeledSet};

use crate::text::tokenize;

/// Minimum number of word tokens for a description to be usable.
pub const MIN_DESCRIPTION_WORDS: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate campaign id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("no annotation score for campaign {0:?}")]
    MissingScore(String),
    #[error("annotation sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("annotation sequences are empty")]
    EmptyAnnotations,
    #[error("annotator {0:?} has no score for campaign {1:?}")]
    MissingAnnotation(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Platform {
    GoFundMe,
    MightyCause,
    Fundly,
    Fundrazr,
    Indiegogo,
    Other,
}

impl Platform {
    pub fn parse(raw: &str) -> Platform {
        let key: String = raw
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_lowercase();
        match key.as_str() {
            "gofundme" => Platform::GoFundMe,
            "mightycause" => Platform::MightyCause,
            "fundly" => Platform::Fundly,
            "fundrazr" => Platform::Fundrazr,
            "indiegogo" => Platform::Indiegogo,
            _ => Platform::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Platform::GoFundMe => "GoFundMe",
            Platform::MightyCause => "MightyCause",
            Platform::Fundly => "Fundly",
            Platform::Fundrazr => "Fundrazr",
            Platform::Indiegogo => "Indiegogo",
            Platform::Other => "Other",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Currency amount in integer minor units (cents) with an ISO 4217 code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Money {
    pub minor: i64,
    pub currency: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub id: String,
    pub platform: Platform,
    pub title: String,
    pub description: String,
    pub category: String,
    pub created_at: DateTime<FixedOffset>,
    pub duration_days: Option<f64>,
    pub goal: Option<Money>,
    /// Image references, relative to the corpus' image root.
    pub images: Vec<String>,
    /// Remaining platform fields plus any unknown record keys.
    pub metadata: BTreeMap<String, Value>,
}

/// One fraud-scale judgement: 0 invalid, 1 fraud … 5 not fraud.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationScore {
    pub score: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotator_id: Option<String>,
}

impl AnnotationScore {
    pub fn consensus(score: u8) -> Self {
        Self {
            score,
            annotator_id: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    MissingDescription,
    InsufficientText,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::MissingDescription => "missing description",
            SkipReason::InsufficientText => "insufficient text",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRecord {
    pub line: usize,
    pub id: String,
    pub reason: SkipReason,
}

/// Campaigns retained at ingestion with their consensus scores. Immutable after load.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    campaigns: Vec<Campaign>,
    scores: BTreeMap<String, AnnotationScore>,
    annotations: BTreeMap<String, Vec<AnnotationScore>>,
    skipped: Vec<SkippedRecord>,
}

impl Corpus {
    /// Builds a corpus from already-validated parts. Ids must be unique.
    pub fn from_parts(
        campaigns: Vec<Campaign>,
        scores: BTreeMap<String, AnnotationScore>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for (line, c) in campaigns.iter().enumerate() {
            if !seen.insert(c.id.clone()) {
                return Err(CorpusError::DuplicateId {
                    line: line + 1,
                    id: c.id.clone(),
                });
            }
        }
        Ok(Self {
            campaigns,
            scores,
            annotations: BTreeMap::new(),
            skipped: Vec::new(),
        })
    }

    pub fn campaigns(&self) -> &[Campaign] {
        &self.campaigns
    }

    pub fn len(&self) -> usize {
        self.campaigns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.campaigns.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Campaign> {
        self.campaigns.iter().find(|c| c.id == id)
    }

    pub fn scores(&self) -> &BTreeMap<String, AnnotationScore> {
        &self.scores
    }

    pub fn skipped(&self) -> &[SkippedRecord] {
        &self.skipped
    }

    /// Per-annotator scores keyed by campaign id (only for records that carry them).
    pub fn annotations(&self) -> &BTreeMap<String, Vec<AnnotationScore>> {
        &self.annotations
    }

    /// Groups the corpus' consensus scores under `setup`.
    pub fn labels(&self, setup: LabelSetup) -> Result<Grouping, CorpusError> {
        apply_label_setup(self, &self.scores, setup)
    }

    /// Cohen's κ between two annotators over the campaigns both scored.
    pub fn annotator_agreement(&self, first: &str, second: &str) -> Result<Kappa, CorpusError> {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (id, entries) in &self.annotations {
            let find = |who: &str| {
                entries
                    .iter()
                    .find(|s| s.annotator_id.as_deref() == Some(who))
                    .map(|s| s.score)
            };
            match (find(first), find(second)) {
                (Some(x), Some(y)) => {
                    a.push(x);
                    b.push(y);
                }
                (None, Some(_)) => return Err(CorpusError::MissingAnnotation(first.into(), id.clone())),
                (Some(_), None) => return Err(CorpusError::MissingAnnotation(second.into(), id.clone())),
                (None, None) => {}
            }
        }
        cohens_kappa(&a, &b)
    }

    /// Writes the retained campaigns back out as JSON lines.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for c in &self.campaigns {
            let record = campaign_to_record(
                c,
                self.scores.get(&c.id),
                self.annotations.get(&c.id).map(Vec::as_slice),
            );
            serde_json::to_writer(&mut out, &Value::Object(record))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Reads a JSON-lines corpus. Records whose description is missing or too
/// short are skipped and listed in [`Corpus::skipped`]; structural problems
/// abort with the offending line number.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_corpus(BufReader::new(file)).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::default();
    let mut seen = HashSet::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: PathBuf::new(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = parse_record(&line, line_no)?;
        if !seen.insert(parsed.id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: parsed.id,
            });
        }
        match parsed.outcome {
            Ok(campaign) => {
                corpus
                    .scores
                    .insert(campaign.id.clone(), AnnotationScore::consensus(parsed.score));
                if !parsed.annotations.is_empty() {
                    corpus.annotations.insert(campaign.id.clone(), parsed.annotations);
                }
                corpus.campaigns.push(campaign);
            }
            Err(reason) => corpus.skipped.push(SkippedRecord {
                line: line_no,
                id: parsed.id,
                reason,
            }),
        }
    }
    Ok(corpus)
}

/// Whether a description carries enough text for every extractor.
pub fn has_usable_text(description: &str) -> bool {
    tokenize::words(description).len() >= MIN_DESCRIPTION_WORDS
        && tokenize::has_sentence_terminator(description)
}

struct ParsedRecord {
    id: String,
    score: u8,
    annotations: Vec<AnnotationScore>,
    outcome: Result<Campaign, SkipReason>,
}

fn parse_record(line: &str, line_no: usize) -> Result<ParsedRecord, CorpusError> {
    let malformed = |message: String| CorpusError::Malformed {
        line: line_no,
        message,
    };
    let value: Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    let Value::Object(mut map) = value else {
        return Err(malformed("record is not a JSON object".into()));
    };

    let take_string = |map: &mut Map<String, Value>, key: &str| -> Result<String, CorpusError> {
        match map.remove(key) {
            Some(Value::String(s)) => Ok(s),
            Some(_) => Err(malformed(format!("`{key}` must be a string"))),
            None => Err(malformed(format!("missing required key `{key}`"))),
        }
    };

    let id = take_string(&mut map, "id")?;
    if id.trim().is_empty() {
        return Err(malformed("`id` is empty".into()));
    }
    let platform_raw = take_string(&mut map, "platform")?;
    let title = take_string(&mut map, "title")?;
    let category = take_string(&mut map, "category")?;
    let created_raw = take_string(&mut map, "created_at")?;
    let created_at = DateTime::parse_from_rfc3339(&created_raw)
        .map_err(|e| malformed(format!("`created_at` is not RFC 3339: {e}")))?;
    let score = match map.remove("score") {
        Some(v) => parse_score(&v).ok_or_else(|| malformed("`score` must be an integer 0-5".into()))?,
        None => return Err(malformed("missing required key `score`".into())),
    };
    let description = match map.remove("description") {
        Some(Value::String(s)) => Some(s),
        Some(Value::Null) | None => None,
        Some(_) => return Err(malformed("`description` must be a string".into())),
    };

    let duration_days = match map.remove("duration_days") {
        None | Some(Value::Null) => None,
        Some(Value::Number(n)) => Some(
            n.as_f64()
                .ok_or_else(|| malformed("`duration_days` out of range".into()))?,
        ),
        Some(_) => return Err(malformed("`duration_days` must be a number".into())),
    };
    let goal_minor = map.remove("goal_minor");
    let goal_currency = map.remove("goal_currency");
    let goal = match (goal_minor, goal_currency) {
        (None | Some(Value::Null), None | Some(Value::Null)) => None,
        (Some(Value::Number(n)), Some(Value::String(code))) => Some(Money {
            minor: n
                .as_i64()
                .ok_or_else(|| malformed("`goal_minor` must be an integer".into()))?,
            currency: code,
        }),
        (Some(_), None | Some(Value::Null)) => {
            return Err(malformed("`goal_minor` given without `goal_currency`".into()))
        }
        _ => return Err(malformed("`goal_minor`/`goal_currency` have the wrong types".into())),
    };
    let images = match map.remove("images") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .into_iter()
            .map(|v| match v {
                Value::String(s) => Ok(s),
                _ => Err(malformed("`images` must list strings".into())),
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(malformed("`images` must be a list".into())),
    };
    let annotations = match map.remove("annotations") {
        None | Some(Value::Null) => Vec::new(),
        Some(v) => parse_annotations(v).ok_or_else(|| {
            malformed("`annotations` must list {\"annotator\": string, \"score\": 0-5}".into())
        })?,
    };

    let mut metadata: BTreeMap<String, Value> = match map.remove("metadata") {
        None | Some(Value::Null) => BTreeMap::new(),
        Some(Value::Object(m)) => m.into_iter().collect(),
        Some(_) => return Err(malformed("`metadata` must be an object".into())),
    };
    // Unknown keys are preserved rather than dropped.
    metadata.extend(map);
    let platform = Platform::parse(&platform_raw);
    if platform == Platform::Other && !platform_raw.eq_ignore_ascii_case("other") {
        metadata
            .entry("platform_name".to_string())
            .or_insert(Value::String(platform_raw));
    }

    let outcome = match description {
        None => Err(SkipReason::MissingDescription),
        Some(d) if d.trim().is_empty() => Err(SkipReason::MissingDescription),
        Some(d) if !has_usable_text(&d) => Err(SkipReason::InsufficientText),
        Some(description) => Ok(Campaign {
            id: id.clone(),
            platform,
            title,
            description,
            category,
            created_at,
            duration_days,
            goal,
            images,
            metadata,
        }),
    };
    Ok(ParsedRecord {
        id,
        score,
        annotations,
        outcome,
    })
}

fn parse_score(v: &Value) -> Option<u8> {
    v.as_u64().filter(|s| *s <= 5).map(|s| s as u8)
}

fn parse_annotations(v: Value) -> Option<Vec<AnnotationScore>> {
    let Value::Array(items) = v else { return None };
    items
        .into_iter()
        .map(|item| {
            let annotator = item.get("annotator")?.as_str()?.to_string();
            let score = parse_score(item.get("score")?)?;
            Some(AnnotationScore {
                score,
                annotator_id: Some(annotator),
            })
        })
        .collect()
}

fn campaign_to_record(
    c: &Campaign,
    score: Option<&AnnotationScore>,
    annotations: Option<&[AnnotationScore]>,
) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("id".into(), c.id.clone().into());
    m.insert("platform".into(), c.platform.as_str().into());
    m.insert("title".into(), c.title.clone().into());
    m.insert("description".into(), c.description.clone().into());
    m.insert("category".into(), c.category.clone().into());
    m.insert("created_at".into(), c.created_at.to_rfc3339().into());
    if let Some(s) = score {
        m.insert("score".into(), s.score.into());
    }
    if let Some(d) = c.duration_days {
        m.insert("duration_days".into(), d.into());
    }
    if let Some(goal) = &c.goal {
        m.insert("goal_minor".into(), goal.minor.into());
        m.insert("goal_currency".into(), goal.currency.clone().into());
    }
    if !c.images.is_empty() {
        m.insert(
            "images".into(),
            Value::Array(c.images.iter().cloned().map(Value::String).collect()),
        );
    }
    if let Some(list) = annotations {
        let items = list
            .iter()
            .map(|a| {
                serde_json::json!({
                    "annotator": a.annotator_id.clone().unwrap_or_default(),
                    "score": a.score,
                })
            })
            .collect();
        m.insert("annotations".into(), Value::Array(items));
    }
    if !c.metadata.is_empty() {
        m.insert(
            "metadata".into(),
            Value::Object(c.metadata.clone().into_iter().collect()),
        );
    }
    m
}

/// Serialises one campaign with its consensus score as a corpus line (no trailing newline).
pub fn campaign_record_line(campaign: &Campaign, score: u8) -> String {
    let record = campaign_to_record(campaign, Some(&AnnotationScore::consensus(score)), None);
    Value::Object(record).to_string()
}

/// Parses a single campaign record (the `score` key may be omitted).
pub fn parse_campaign(json: &str) -> Result<Campaign, CorpusError> {
    let mut value: Value = serde_json::from_str(json).map_err(|e| CorpusError::Malformed {
        line: 1,
        message: e.to_string(),
    })?;
    if let Value::Object(m) = &mut value {
        m.entry("score").or_insert(Value::from(0));
    }
    let parsed = parse_record(&value.to_string(), 1)?;
    parsed.outcome.map_err(|reason| CorpusError::Malformed {
        line: 1,
        message: reason.to_string(),
    })
}
