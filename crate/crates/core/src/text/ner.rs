//! Named-entity counts over the 18 OntoNotes entity types.
//!
//! Spans come from an [`EntityTagger`]; overlapping spans are resolved
//! longest-first (earlier start wins among equal lengths) before counting.
//! The built-in [`RuleTagger`] covers MONEY, DATE, CARDINAL and, through a
//! bundled gazetteer, PERSON, ORG and GPE. Everything else stays untagged.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::ProviderError;

const GAZETTEER: &str = include_str!("../../data/gazetteer.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityType {
    Person,
    Norp,
    Fac,
    Org,
    Gpe,
    Loc,
    Product,
    Event,
    WorkOfArt,
    Law,
    Language,
    Date,
    Time,
    Percent,
    Money,
    Quantity,
    Ordinal,
    Cardinal,
}

impl EntityType {
    pub const ALL: [EntityType; 18] = [
        EntityType::Person,
        EntityType::Norp,
        EntityType::Fac,
        EntityType::Org,
        EntityType::Gpe,
        EntityType::Loc,
        EntityType::Product,
        EntityType::Event,
        EntityType::WorkOfArt,
        EntityType::Law,
        EntityType::Language,
        EntityType::Date,
        EntityType::Time,
        EntityType::Percent,
        EntityType::Money,
        EntityType::Quantity,
        EntityType::Ordinal,
        EntityType::Cardinal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Person => "PERSON",
            EntityType::Norp => "NORP",
            EntityType::Fac => "FAC",
            EntityType::Org => "ORG",
            EntityType::Gpe => "GPE",
            EntityType::Loc => "LOC",
            EntityType::Product => "PRODUCT",
            EntityType::Event => "EVENT",
            EntityType::WorkOfArt => "WORK_OF_ART",
            EntityType::Law => "LAW",
            EntityType::Language => "LANGUAGE",
            EntityType::Date => "DATE",
            EntityType::Time => "TIME",
            EntityType::Percent => "PERCENT",
            EntityType::Money => "MONEY",
            EntityType::Quantity => "QUANTITY",
            EntityType::Ordinal => "ORDINAL",
            EntityType::Cardinal => "CARDINAL",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown entity type {s:?}"))
    }
}

/// A tagged byte range `[start, end)` of the input text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub label: EntityType,
    pub start: usize,
    pub end: usize,
}

pub trait EntityTagger: Send + Sync {
    /// Candidate spans; they may overlap.
    fn tag(&self, text: &str) -> Result<Vec<EntitySpan>, ProviderError>;

    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NerCountVector {
    counts: [u32; 18],
}

impl NerCountVector {
    pub fn counts(&self) -> &[u32; 18] {
        &self.counts
    }

    pub fn get(&self, t: EntityType) -> u32 {
        self.counts[t as usize]
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| f64::from(c)).collect()
    }

    pub fn feature_names() -> Vec<String> {
        EntityType::ALL.iter().map(|t| format!("ner.{t}")).collect()
    }
}

/// Drops overlapping spans, keeping the longest first.
pub fn resolve_overlaps(mut spans: Vec<EntitySpan>) -> Vec<EntitySpan> {
    spans.retain(|s| s.end > s.start);
    spans.sort_by(|a, b| {
        (b.end - b.start)
            .cmp(&(a.end - a.start))
            .then(a.start.cmp(&b.start))
            .then(a.label.cmp(&b.label))
    });
    let mut kept: Vec<EntitySpan> = Vec::new();
    for s in spans {
        if kept.iter().all(|k| s.end <= k.start || s.start >= k.end) {
            kept.push(s);
        }
    }
    kept.sort_by_key(|s| s.start);
    kept
}

pub fn ner_counts(text: &str, tagger: &dyn EntityTagger) -> Result<NerCountVector, ProviderError> {
    let spans = tagger.tag(text)?;
    for s in &spans {
        if s.end > text.len() || s.start > s.end {
            return Err(ProviderError::Malformed(format!(
                "span {}..{} outside text of {} bytes",
                s.start,
                s.end,
                text.len()
            )));
        }
    }
    let mut counts = [0u32; 18];
    for s in resolve_overlaps(spans) {
        counts[s.label as usize] += 1;
    }
    Ok(NerCountVector { counts })
}

struct Gazetteer {
    persons: HashSet<String>,
    gpe: HashSet<String>,
    orgs: HashSet<String>,
    org_keywords: HashSet<String>,
}

fn gazetteer() -> &'static Gazetteer {
    static GAZ: OnceLock<Gazetteer> = OnceLock::new();
    GAZ.get_or_init(|| {
        let mut g = Gazetteer {
            persons: HashSet::new(),
            gpe: HashSet::new(),
            orgs: HashSet::new(),
            org_keywords: HashSet::new(),
        };
        for line in GAZETTEER.lines() {
            if line.is_empty() || line.starts_with("##") {
                continue;
            }
            let Some((kind, phrase)) = line.split_once('\t') else {
                continue;
            };
            let phrase = phrase.trim().to_lowercase();
            match kind {
                "PERSON" => g.persons.insert(phrase),
                "GPE" => g.gpe.insert(phrase),
                "ORG" => g.orgs.insert(phrase),
                "ORG_KEYWORD" => g.org_keywords.insert(phrase),
                _ => false,
            };
        }
        g
    })
}

const WEEKDAYS: [&str; 7] = [
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
];
const MONTHS: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december",
];
const RELATIVE_DAYS: [&str; 3] = ["today", "yesterday", "tomorrow"];
const PERIOD_HEADS: [&str; 3] = ["last", "next", "this"];
const PERIODS: [&str; 5] = ["week", "month", "year", "weekend", "summer"];
const CURRENCY_WORDS: [&str; 10] = [
    "dollar", "dollars", "usd", "euro", "euros", "cents", "bucks", "pounds", "gbp", "eur",
];
const SCALE_WORDS: [&str; 5] = ["hundred", "thousand", "million", "billion", "k"];
const NUMBER_WORDS: [&str; 28] = [
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    "dozen",
];
const CONNECTORS: [&str; 4] = ["of", "the", "and", "for"];

#[derive(Debug)]
struct Token<'a> {
    start: usize,
    end: usize,
    core: &'a str,
    lower: String,
    /// A sentence boundary follows this token.
    ends_sentence: bool,
    /// No punctuation trails the core ("Smith" but not "Smith,").
    clean_end: bool,
}

fn tokens(text: &str) -> Vec<Token<'_>> {
    let raw = super::tokenize::raw_tokens(text);
    let mut out: Vec<Token<'_>> = Vec::with_capacity(raw.len());
    for (idx, (offset, tok)) in raw.iter().enumerate() {
        let is_edge = |c: char| !(c.is_alphanumeric() || matches!(c, '$' | '€' | '£' | '%'));
        let trimmed_start = tok.trim_start_matches(is_edge);
        let lead = tok.len() - trimmed_start.len();
        let core = trimmed_start.trim_end_matches(is_edge);
        let start = offset + lead;
        let end = start + core.len();
        let tail = tok.trim_end_matches(['"', '\'', ')', ']', '”', '’']);
        let mut ends_sentence = tail.ends_with(['.', '!', '?', '…']);
        if let Some((next_offset, _)) = raw.get(idx + 1) {
            if text[offset + tok.len()..*next_offset].contains('\n') {
                ends_sentence = true;
            }
        }
        if core.is_empty() {
            if ends_sentence {
                if let Some(prev) = out.last_mut() {
                    prev.ends_sentence = true;
                }
            }
            continue;
        }
        out.push(Token {
            start,
            end,
            core,
            lower: core.to_lowercase(),
            ends_sentence,
            clean_end: lead + core.len() == tok.len(),
        });
    }
    out
}

fn is_digit_number(s: &str) -> bool {
    let mut digits = 0;
    for c in s.chars() {
        if c.is_ascii_digit() {
            digits += 1;
        } else if !matches!(c, ',' | '.') {
            return false;
        }
    }
    digits > 0 && s.chars().next().is_some_and(|c| c.is_ascii_digit())
}

fn is_number_token(lower: &str) -> bool {
    is_digit_number(lower) || NUMBER_WORDS.contains(&lower) || SCALE_WORDS[..4].contains(&lower)
}

fn is_currency_amount(core: &str) -> bool {
    let mut chars = core.chars();
    matches!(chars.next(), Some('$' | '€' | '£'))
        && chars.as_str().chars().next().is_some_and(|c| c.is_ascii_digit())
}

fn is_capitalized(core: &str) -> bool {
    core.chars().next().is_some_and(char::is_uppercase)
}

/// Deterministic rule-based tagger used when no external model is configured.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleTagger;

impl RuleTagger {
    fn spans(&self, text: &str) -> Vec<EntitySpan> {
        let toks = tokens(text);
        let gaz = gazetteer();
        let mut spans = Vec::new();
        let span = |label, a: &Token<'_>, b: &Token<'_>| EntitySpan {
            label,
            start: a.start,
            end: b.end,
        };
        // Index of the last token reachable from `i` without crossing a sentence boundary.
        let can_extend = |i: usize| i + 1 < toks.len() && !toks[i].ends_sentence;

        let mut date_words = vec![false; toks.len()];
        for i in 0..toks.len() {
            let t = &toks[i];
            let l = t.lower.as_str();

            // MONEY: "$500", "$5 million", "500 dollars", "five hundred dollars".
            if is_currency_amount(t.core) {
                let mut j = i;
                while can_extend(j) && SCALE_WORDS.contains(&toks[j + 1].lower.as_str()) {
                    j += 1;
                }
                spans.push(span(EntityType::Money, t, &toks[j]));
            }
            if is_number_token(l) && (i == 0 || !can_extend(i - 1) || !is_number_token(&toks[i - 1].lower)) {
                let mut j = i;
                while can_extend(j) && is_number_token(&toks[j + 1].lower) {
                    j += 1;
                }
                if can_extend(j) && CURRENCY_WORDS.contains(&toks[j + 1].lower.as_str()) {
                    spans.push(span(EntityType::Money, t, &toks[j + 1]));
                } else {
                    spans.push(span(EntityType::Cardinal, t, &toks[j]));
                }
            }

            // DATE: weekdays, months (+ day, + year), relative days, "last week", years.
            let is_weekday = WEEKDAYS.contains(&l);
            let is_month = MONTHS.contains(&l) && is_capitalized(t.core);
            let month_ok = is_month
                && (l != "may"
                    || (can_extend(i) && is_digit_number(&toks[i + 1].lower))
                    || (i > 0 && can_extend(i - 1) && is_digit_number(&toks[i - 1].lower)));
            if is_weekday || month_ok {
                date_words[i] = true;
                let mut j = i;
                while can_extend(j) && j < i + 2 && is_digit_number(toks[j + 1].core) {
                    j += 1;
                }
                spans.push(span(EntityType::Date, t, &toks[j]));
            }
            if RELATIVE_DAYS.contains(&l) {
                spans.push(span(EntityType::Date, t, t));
            }
            if PERIOD_HEADS.contains(&l) && can_extend(i) && PERIODS.contains(&toks[i + 1].lower.as_str()) {
                spans.push(span(EntityType::Date, t, &toks[i + 1]));
            }
            if t.core.len() == 4 && t.core.chars().all(|c| c.is_ascii_digit()) {
                let year: u32 = t.core.parse().unwrap_or(0);
                if (1900..=2099).contains(&year) {
                    spans.push(span(EntityType::Date, t, t));
                }
            }
        }

        // Capitalised runs, classified through the gazetteer.
        let mut i = 0;
        while i < toks.len() {
            let starts_run = is_capitalized(toks[i].core) && !date_words[i] && toks[i].core != "I";
            if !starts_run {
                i += 1;
                continue;
            }
            let mut j = i;
            loop {
                if !can_extend(j) || !toks[j].clean_end {
                    break;
                }
                let next = &toks[j + 1];
                if is_capitalized(next.core) && !date_words[j + 1] {
                    j += 1;
                } else if CONNECTORS.contains(&next.lower.as_str())
                    && next.clean_end
                    && can_extend(j + 1)
                    && is_capitalized(toks[j + 2].core)
                    && !date_words[j + 2]
                {
                    j += 2;
                } else {
                    break;
                }
            }
            let sentence_initial = i == 0 || toks[i - 1].ends_sentence;
            let mut from = i;
            loop {
                if let Some(label) = classify_run(gaz, &toks[from..=j]) {
                    spans.push(span(label, &toks[from], &toks[j]));
                    break;
                }
                // A sentence-initial word may just be capitalised by position.
                if from == i && sentence_initial && j > i {
                    from += 1;
                    continue;
                }
                break;
            }
            i = j + 1;
        }
        spans
    }
}

fn classify_run(gaz: &Gazetteer, run: &[Token<'_>]) -> Option<EntityType> {
    let phrase: String = run
        .iter()
        .map(|t| t.lower.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    if run.len() > 1 && run.iter().any(|t| gaz.org_keywords.contains(&t.lower)) {
        return Some(EntityType::Org);
    }
    if gaz.gpe.contains(&phrase) {
        return Some(EntityType::Gpe);
    }
    if gaz.orgs.contains(&phrase) {
        return Some(EntityType::Org);
    }
    if gaz.persons.contains(&run[0].lower) {
        return Some(EntityType::Person);
    }
    None
}

impl EntityTagger for RuleTagger {
    fn tag(&self, text: &str) -> Result<Vec<EntitySpan>, ProviderError> {
        Ok(self.spans(text))
    }

    fn name(&self) -> String {
        "rules-v1".into()
    }
}

/// Spans as `(label, covered text)` pairs, mostly for diagnostics.
pub fn labelled_spans<'a>(text: &'a str, spans: &[EntitySpan]) -> Vec<(EntityType, &'a str)> {
    spans
        .iter()
        .map(|s| (s.label, &text[s.start..s.end]))
        .collect()
}

/// Counts per label of a resolved span list; used by HTTP adapters that return labels only.
pub fn count_labels(labels: &[EntityType]) -> HashMap<EntityType, usize> {
    let mut m = HashMap::new();
    for l in labels {
        *m.entry(*l).or_default() += 1;
    }
    m
}
