//! Readability indices and the base counts they are built from.
//!
//! Characters are alphanumeric characters inside word tokens. Difficult words
//! for Dale–Chall are words outside the bundled familiar-word list (after
//! trying regular `-s`, `-es`, `-ed`, `-ing` inflections); numbers are never
//! difficult.

use std::collections::HashSet;
use std::sync::OnceLock;

use super::tokenize;
use super::TextError;

const FAMILIAR_WORDS: &str = include_str!("../../data/dale_chall_familiar.txt");

const FUNCTION_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "although", "am", "an", "and",
    "any", "are", "as", "at", "be", "because", "been", "before", "being", "below", "between",
    "both", "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each",
    "either", "every", "few", "for", "from", "further", "had", "has", "have", "having", "he",
    "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "if", "in", "into",
    "is", "it", "its", "itself", "just", "may", "me", "might", "mine", "more", "most", "must",
    "my", "myself", "neither", "no", "nor", "not", "of", "off", "on", "once", "only", "or",
    "other", "ought", "our", "ours", "ourselves", "out", "over", "own", "same", "shall", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "though", "through", "to",
    "too", "under", "until", "up", "upon", "us", "very", "was", "we", "were", "what", "when",
    "where", "whether", "which", "while", "who", "whom", "whose", "why", "will", "with",
    "within", "without", "would", "yet", "you", "your", "yours", "yourself", "yourselves",
];

const PERSONAL_PRONOUNS: &[&str] = &[
    "i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
    "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves",
];

fn familiar() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        FAMILIAR_WORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

fn is_familiar(lower: &str) -> bool {
    let set = familiar();
    if set.contains(lower) {
        return true;
    }
    let normalized = lower.replace('’', "'");
    if set.contains(normalized.as_str()) {
        return true;
    }
    ["s", "es", "ed", "d", "ing"].iter().any(|suffix| {
        lower
            .strip_suffix(suffix)
            .is_some_and(|stem| stem.len() >= 2 && set.contains(stem))
    })
}

fn is_difficult(word: &str) -> bool {
    if word.chars().all(|c| !c.is_alphabetic()) {
        return false;
    }
    !is_familiar(&word.to_lowercase())
}

/// Readability indices followed by base counts. Field order is the feature order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadabilityProfile {
    pub ari: f64,
    pub flesch_reading_ease: f64,
    pub flesch_kincaid_grade: f64,
    pub gunning_fog: f64,
    pub coleman_liau: f64,
    pub smog: f64,
    pub dale_chall: f64,
    pub characters: f64,
    pub words: f64,
    pub sentences: f64,
    pub syllables: f64,
    pub avg_syllables_per_word: f64,
    pub function_words: f64,
    pub personal_pronouns: f64,
}

impl ReadabilityProfile {
    pub const NAMES: [&'static str; 14] = [
        "ari",
        "flesch_reading_ease",
        "flesch_kincaid_grade",
        "gunning_fog",
        "coleman_liau",
        "smog",
        "dale_chall",
        "characters",
        "words",
        "sentences",
        "syllables",
        "avg_syllables_per_word",
        "function_words",
        "personal_pronouns",
    ];

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.ari,
            self.flesch_reading_ease,
            self.flesch_kincaid_grade,
            self.gunning_fog,
            self.coleman_liau,
            self.smog,
            self.dale_chall,
            self.characters,
            self.words,
            self.sentences,
            self.syllables,
            self.avg_syllables_per_word,
            self.function_words,
            self.personal_pronouns,
        ]
    }
}

pub fn readability_profile(text: &str) -> Result<ReadabilityProfile, TextError> {
    let words = tokenize::words(text);
    if words.is_empty() {
        return Err(TextError::NoWords);
    }
    let sentence_count = tokenize::sentence_spans(text).len();
    if sentence_count == 0 {
        return Err(TextError::NoSentences);
    }

    let mut characters = 0usize;
    let mut syllables = 0usize;
    let mut polysyllables = 0usize;
    let mut difficult = 0usize;
    let mut function_words = 0usize;
    let mut pronouns = 0usize;
    for w in &words {
        characters += w.chars().filter(|c| c.is_alphanumeric()).count();
        let s = tokenize::syllables(w);
        syllables += s;
        if s >= 3 {
            polysyllables += 1;
        }
        if is_difficult(w) {
            difficult += 1;
        }
        let lower = w.to_lowercase();
        if FUNCTION_WORDS.contains(&lower.as_str()) {
            function_words += 1;
        }
        if PERSONAL_PRONOUNS.contains(&lower.as_str()) {
            pronouns += 1;
        }
    }

    let n_words = words.len() as f64;
    let n_sent = sentence_count as f64;
    let chars_per_word = characters as f64 / n_words;
    let words_per_sentence = n_words / n_sent;
    let syllables_per_word = syllables as f64 / n_words;
    let difficult_pct = 100.0 * difficult as f64 / n_words;

    let ari = 4.71 * chars_per_word + 0.5 * words_per_sentence - 21.43;
    let flesch_reading_ease = 206.835 - 1.015 * words_per_sentence - 84.6 * syllables_per_word;
    let flesch_kincaid_grade = 0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59;
    let gunning_fog = 0.4 * (words_per_sentence + 100.0 * polysyllables as f64 / n_words);
    let letters_per_100 = 100.0 * chars_per_word;
    let sentences_per_100 = 100.0 * n_sent / n_words;
    let coleman_liau = 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8;
    let smog = 1.0430 * (polysyllables as f64 * 30.0 / n_sent).sqrt() + 3.1291;
    let mut dale_chall = 0.1579 * difficult_pct + 0.0496 * words_per_sentence;
    if difficult_pct > 5.0 {
        dale_chall += 3.6365;
    }

    Ok(ReadabilityProfile {
        ari,
        flesch_reading_ease,
        flesch_kincaid_grade,
        gunning_fog,
        coleman_liau,
        smog,
        dale_chall,
        characters: characters as f64,
        words: n_words,
        sentences: n_sent,
        syllables: syllables as f64,
        avg_syllables_per_word: syllables_per_word,
        function_words: function_words as f64,
        personal_pronouns: pronouns as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ari_on_hand_counts() {
        let p = readability_profile("The cat sat on the mat.").unwrap();
        assert_eq!(p.words, 6.0);
        assert_eq!(p.sentences, 1.0);
        assert_eq!(p.characters, 17.0);
        let expected = 4.71 * (17.0 / 6.0) + 0.5 * (6.0 / 1.0) - 21.43;
        assert!((p.ari - expected).abs() < 1e-12);
    }

    #[test]
    fn flesch_on_hand_counts() {
        // 6 one-syllable words in one sentence.
        let p = readability_profile("The cat sat on the mat.").unwrap();
        assert_eq!(p.syllables, 6.0);
        let fre = 206.835 - 1.015 * 6.0 - 84.6 * 1.0;
        assert!((p.flesch_reading_ease - fre).abs() < 1e-12);
        let fk = 0.39 * 6.0 + 11.8 - 15.59;
        assert!((p.flesch_kincaid_grade - fk).abs() < 1e-12);
        assert_eq!(p.function_words, 3.0);
        assert_eq!(p.personal_pronouns, 0.0);
        // Every word is familiar: no difficult-word adjustment.
        assert!((p.dale_chall - 0.0496 * 6.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_word_averages_its_syllables() {
        let text = format!("{}.", vec!["beautiful"; 20].join(" "));
        let p = readability_profile(&text).unwrap();
        assert_eq!(p.avg_syllables_per_word, tokenize::syllables("beautiful") as f64);
    }

    #[test]
    fn self_concatenation_keeps_ratios() {
        let text = "We need help paying for the kidney transplant. Please share our story with friends!";
        let once = readability_profile(text).unwrap();
        let twice = readability_profile(&format!("{text}\n{text}")).unwrap();
        assert_eq!(twice.words, 2.0 * once.words);
        assert!((twice.ari - once.ari).abs() < 1e-12);
        assert!((twice.flesch_reading_ease - once.flesch_reading_ease).abs() < 1e-12);
        assert!((twice.coleman_liau - once.coleman_liau).abs() < 1e-12);
    }

    #[test]
    fn dale_chall_adjusts_above_five_percent() {
        let p = readability_profile("Pneumonoultramicroscopic diagnosis requires extraordinary hospitalization.").unwrap();
        let pct = 100.0 * 5.0 / 5.0;
        let expected = 0.1579 * pct + 0.0496 * 5.0 + 3.6365;
        assert!((p.dale_chall - expected).abs() < 1e-9, "{}", p.dale_chall);
    }

    #[test]
    fn inflections_of_familiar_words_are_familiar() {
        assert!(is_familiar("dogs"));
        assert!(is_familiar("helped"));
        assert!(!is_difficult("2019"));
        assert!(is_difficult("chemotherapy"));
    }

    #[test]
    fn empty_text_is_an_error() {
        assert_eq!(readability_profile("  ?! "), Err(TextError::NoWords));
    }
}
