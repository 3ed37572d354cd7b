//! Orthographic form of the text: 20 named counters plus a frozen catalog of
//! 235 word shapes, 255 counts in total.
//!
//! A word shape maps uppercase to `X`, lowercase to `x`, digits to `9`, keeps
//! every other character, then collapses runs of the same symbol
//! ("Hello," -> "Xx,", "2019" -> "9"). Shapes missing from the catalog count
//! towards the `catch_all` counter instead.

use std::collections::HashMap;
use std::sync::OnceLock;

const SHAPE_CATALOG: &str = include_str!("../../data/word_shapes.txt");

pub const NAMED_COUNTERS: [&str; 20] = [
    "all_lower",
    "all_upper",
    "capitalized",
    "emoji",
    "exclamation_word",
    "apostrophe_word",
    "all_digit",
    "mixed_alnum",
    "quoted",
    "parenthesized",
    "ellipsis",
    "repeated_punctuation",
    "url_like",
    "hashtag",
    "mention",
    "currency_marked",
    "percent_marked",
    "hyphenated",
    "elongated",
    "catch_all",
];

pub const SHAPE_SLOTS: usize = 235;
pub const FORM_DIM: usize = NAMED_COUNTERS.len() + SHAPE_SLOTS;

const CATCH_ALL: usize = 19;

struct Catalog {
    shapes: Vec<String>,
    index: HashMap<String, usize>,
}

fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let shapes: Vec<String> = SHAPE_CATALOG
            .lines()
            .filter(|l| !l.is_empty() && !l.starts_with("##"))
            .map(str::to_string)
            .collect();
        assert_eq!(shapes.len(), SHAPE_SLOTS, "word-shape catalog must hold {SHAPE_SLOTS} shapes");
        let index = shapes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Catalog { shapes, index }
    })
}

/// The frozen shape catalog in slot order.
pub fn shape_catalog() -> &'static [String] {
    &catalog().shapes
}

/// Counts over the 255 form slots: named counters first, then catalog shapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormDescriptorVector {
    counts: Vec<u32>,
}

impl FormDescriptorVector {
    pub fn zeros() -> Self {
        Self {
            counts: vec![0; FORM_DIM],
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn named(&self, counter: &str) -> Option<u32> {
        NAMED_COUNTERS
            .iter()
            .position(|c| *c == counter)
            .map(|i| self.counts[i])
    }

    pub fn shape(&self, shape: &str) -> Option<u32> {
        catalog()
            .index
            .get(shape)
            .map(|i| self.counts[NAMED_COUNTERS.len() + i])
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| f64::from(c)).collect()
    }

    pub fn feature_names() -> Vec<String> {
        NAMED_COUNTERS
            .iter()
            .map(|c| format!("form.{c}"))
            .chain(catalog().shapes.iter().map(|s| format!("form.shape:{s}")))
            .collect()
    }
}

pub fn word_shape(token: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in token.chars() {
        let mapped = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() || (c.is_alphabetic() && !c.is_uppercase()) {
            'x'
        } else if c.is_numeric() {
            '9'
        } else {
            c
        };
        if last != Some(mapped) {
            out.push(mapped);
            last = Some(mapped);
        }
    }
    out
}

pub fn is_emoji(c: char) -> bool {
    matches!(
        c as u32,
        0x1F000..=0x1F2FF | 0x1F300..=0x1F5FF | 0x1F600..=0x1F64F | 0x1F680..=0x1F6FF
            | 0x1F900..=0x1F9FF | 0x1FA70..=0x1FAFF | 0x2600..=0x26FF | 0x2700..=0x27BF
    )
}

fn is_currency(c: char) -> bool {
    matches!(c, '$' | '€' | '£' | '¥' | '₹' | '₩' | '₽' | '¢' | '₱' | '₦')
}

fn joined_by(core: &[char], joiners: &[char]) -> bool {
    core.windows(3)
        .any(|w| joiners.contains(&w[1]) && w[0].is_alphanumeric() && w[2].is_alphanumeric())
}

fn counters_for(token: &str, counts: &mut [u32]) {
    let chars: Vec<char> = token.chars().collect();
    let core: Vec<char> = {
        let start = chars.iter().position(|c| c.is_alphanumeric());
        let end = chars.iter().rposition(|c| c.is_alphanumeric());
        match (start, end) {
            (Some(s), Some(e)) => chars[s..=e].to_vec(),
            _ => Vec::new(),
        }
    };
    let has_alnum = !core.is_empty();
    let has_letter = core.iter().any(|c| c.is_alphabetic());
    let has_upper = core.iter().any(|c| c.is_uppercase());
    let has_lower = core.iter().any(|c| c.is_lowercase());
    let has_digit = core.iter().any(|c| c.is_numeric());
    let mut bump = |i: usize, by: u32| counts[i] += by;

    if has_letter && !has_upper {
        bump(0, 1);
    }
    if has_letter && has_upper && !has_lower {
        bump(1, 1);
    }
    if core.first().is_some_and(|c| c.is_uppercase())
        && has_lower
        && !core[1..].iter().any(|c| c.is_uppercase())
    {
        bump(2, 1);
    }
    let emoji = chars.iter().filter(|c| is_emoji(**c)).count() as u32;
    if emoji > 0 {
        bump(3, emoji);
    }
    let trimmed: Vec<char> = {
        let mut t = chars.clone();
        while t.last().is_some_and(|c| matches!(c, '"' | '”' | '\'' | '’' | ')' | ']')) {
            t.pop();
        }
        t
    };
    if has_alnum && trimmed.last() == Some(&'!') {
        bump(4, 1);
    }
    if joined_by(&core, &['\'', '’']) {
        bump(5, 1);
    }
    if has_alnum && core.iter().all(|c| c.is_numeric()) {
        bump(6, 1);
    }
    if has_letter && has_digit {
        bump(7, 1);
    }
    if chars.first().is_some_and(|c| matches!(c, '"' | '“' | '‘' | '«' | '\''))
        || chars.last().is_some_and(|c| matches!(c, '"' | '”' | '»'))
    {
        bump(8, 1);
    }
    if chars.iter().any(|c| matches!(c, '(' | ')' | '[' | ']')) {
        bump(9, 1);
    }
    if token.contains("...") || token.contains('…') {
        bump(10, 1);
    }
    if chars
        .windows(2)
        .any(|w| matches!(w[0], '!' | '?') && matches!(w[1], '!' | '?'))
    {
        bump(11, 1);
    }
    let lower = token.to_lowercase();
    if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.") {
        bump(12, 1);
    }
    if chars.len() >= 2 && chars[0] == '#' && chars[1].is_alphanumeric() {
        bump(13, 1);
    }
    if chars.len() >= 2 && chars[0] == '@' && chars[1].is_alphanumeric() {
        bump(14, 1);
    }
    if chars.iter().any(|c| is_currency(*c)) {
        bump(15, 1);
    }
    if token.contains('%') {
        bump(16, 1);
    }
    if joined_by(&core, &['-']) {
        bump(17, 1);
    }
    if core
        .windows(3)
        .any(|w| w[0].is_alphabetic() && w[0] == w[1] && w[1] == w[2])
    {
        bump(18, 1);
    }
}

/// Form descriptors of `text`, counted over whitespace-separated tokens.
pub fn form_descriptors(text: &str) -> FormDescriptorVector {
    let cat = catalog();
    let mut v = FormDescriptorVector::zeros();
    for token in text.split_whitespace() {
        counters_for(token, &mut v.counts);
        match cat.index.get(&word_shape(token)) {
            Some(&slot) => v.counts[NAMED_COUNTERS.len() + slot] += 1,
            None => v.counts[CATCH_ALL] += 1,
        }
    }
    v
}
