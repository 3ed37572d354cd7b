//! Emotion and tone scores.
//!
//! Scores come from a [`SentimentProvider`]. The default provider is an
//! offline lexicon: each category's score is the number of word tokens that
//! the lexicon maps to it divided by the total word count, clipped to [0, 1].

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{tokenize, ProviderError};

const BUNDLED_LEXICON: &str = include_str!("../../data/sentiment_lexicon.tsv");

pub const EMOTIONS: [&str; 5] = ["sadness", "joy", "fear", "disgust", "anger"];
pub const TONES: [&str; 7] = [
    "frustration",
    "satisfaction",
    "excitement",
    "politeness",
    "impoliteness",
    "sadness",
    "sympathy",
];

/// Five emotion probabilities and seven tone confidences, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SentimentToneProfile {
    pub emotions: [f64; 5],
    pub tones: [f64; 7],
}

impl SentimentToneProfile {
    pub fn feature_names() -> Vec<String> {
        EMOTIONS
            .iter()
            .map(|e| format!("sent.emotion.{e}"))
            .chain(TONES.iter().map(|t| format!("sent.tone.{t}")))
            .collect()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.emotions.iter().chain(self.tones.iter()).copied().collect()
    }

    pub fn emotion(&self, name: &str) -> Option<f64> {
        EMOTIONS.iter().position(|e| *e == name).map(|i| self.emotions[i])
    }

    pub fn tone(&self, name: &str) -> Option<f64> {
        TONES.iter().position(|t| *t == name).map(|i| self.tones[i])
    }

    /// Checks that all twelve values lie in [0, 1].
    pub fn validate(&self) -> Result<(), ProviderError> {
        for v in self.to_vec() {
            if !(0.0..=1.0).contains(&v) {
                return Err(ProviderError::Malformed(format!(
                    "score {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

pub trait SentimentProvider: Send + Sync {
    fn analyze(&self, text: &str) -> Result<SentimentToneProfile, ProviderError>;

    /// Short identifier recorded in run manifests.
    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    Emotion(usize),
    Tone(usize),
}

/// Word-count lexicon scorer.
#[derive(Debug, Clone)]
pub struct LexiconSentiment {
    entries: HashMap<String, Vec<Category>>,
}

impl LexiconSentiment {
    /// The lexicon shipped in `data/sentiment_lexicon.tsv`.
    pub fn bundled() -> &'static LexiconSentiment {
        static LEXICON: OnceLock<LexiconSentiment> = OnceLock::new();
        LEXICON.get_or_init(|| {
            LexiconSentiment::from_tsv(BUNDLED_LEXICON).expect("bundled lexicon is well formed")
        })
    }

    /// Parses `category<TAB>word` lines, e.g. `emotion.joy\thappy`. Lines starting with `##` are comments.
    pub fn from_tsv(source: &str) -> Result<Self, ProviderError> {
        let mut entries: HashMap<String, Vec<Category>> = HashMap::new();
        for (n, line) in source.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with("##") {
                continue;
            }
            let (cat, word) = line.split_once('\t').ok_or_else(|| {
                ProviderError::Malformed(format!("lexicon line {}: expected two columns", n + 1))
            })?;
            let category = parse_category(cat).ok_or_else(|| {
                ProviderError::Malformed(format!("lexicon line {}: unknown category {cat:?}", n + 1))
            })?;
            let slot = entries.entry(word.trim().to_lowercase()).or_default();
            if !slot.contains(&category) {
                slot.push(category);
            }
        }
        Ok(Self { entries })
    }

    pub fn score(&self, text: &str) -> SentimentToneProfile {
        let words = tokenize::lower_words(text);
        let mut profile = SentimentToneProfile::default();
        if words.is_empty() {
            return profile;
        }
        let mut emotion_hits = [0usize; 5];
        let mut tone_hits = [0usize; 7];
        for w in &words {
            if let Some(cats) = self.entries.get(w) {
                for c in cats {
                    match *c {
                        Category::Emotion(i) => emotion_hits[i] += 1,
                        Category::Tone(i) => tone_hits[i] += 1,
                    }
                }
            }
        }
        let total = words.len() as f64;
        for (slot, hits) in profile.emotions.iter_mut().zip(emotion_hits) {
            *slot = (hits as f64 / total).clamp(0.0, 1.0);
        }
        for (slot, hits) in profile.tones.iter_mut().zip(tone_hits) {
            *slot = (hits as f64 / total).clamp(0.0, 1.0);
        }
        profile
    }

    /// Words the lexicon maps to exactly one category, that category being `emotion.<name>`.
    pub fn words_only_in_emotion(&self, name: &str) -> Vec<&str> {
        let Some(idx) = EMOTIONS.iter().position(|e| *e == name) else {
            return Vec::new();
        };
        let mut out: Vec<&str> = self
            .entries
            .iter()
            .filter(|(_, cats)| cats.as_slice() == [Category::Emotion(idx)])
            .map(|(w, _)| w.as_str())
            .collect();
        out.sort_unstable();
        out
    }
}

fn parse_category(raw: &str) -> Option<Category> {
    let (family, name) = raw.trim().split_once('.')?;
    match family {
        "emotion" => EMOTIONS.iter().position(|e| *e == name).map(Category::Emotion),
        "tone" => TONES.iter().position(|t| *t == name).map(Category::Tone),
        _ => None,
    }
}

impl SentimentProvider for LexiconSentiment {
    fn analyze(&self, text: &str) -> Result<SentimentToneProfile, ProviderError> {
        Ok(self.score(text))
    }

    fn name(&self) -> String {
        "lexicon-v1".into()
    }
}

/// Front door used by feature assembly: calls the provider and validates its output.
pub fn sentiment_tone(
    text: &str,
    provider: &dyn SentimentProvider,
) -> Result<SentimentToneProfile, ProviderError> {
    let profile = provider.analyze(text)?;
    profile.validate()?;
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(SentimentToneProfile);

    impl SentimentProvider for Fixed {
        fn analyze(&self, _: &str) -> Result<SentimentToneProfile, ProviderError> {
            Ok(self.0)
        }
        fn name(&self) -> String {
            "fixed".into()
        }
    }

    struct Failing;

    impl SentimentProvider for Failing {
        fn analyze(&self, _: &str) -> Result<SentimentToneProfile, ProviderError> {
            Err(ProviderError::Status(401))
        }
        fn name(&self) -> String {
            "failing".into()
        }
    }

    #[test]
    fn joy_only_text_has_joy_as_strict_argmax() {
        let lex = LexiconSentiment::bundled();
        let joy_words = lex.words_only_in_emotion("joy");
        assert!(joy_words.len() >= 5);
        let text = format!("{}.", joy_words[..5].join(" "));
        let p = sentiment_tone(&text, lex).unwrap();
        // Oracle: every token is a joy hit, so joy = 5/5 and other emotions 0.
        assert_eq!(p.emotion("joy"), Some(1.0));
        for e in EMOTIONS.iter().filter(|e| **e != "joy") {
            assert!(p.emotion(e).unwrap() < 1.0);
        }
    }

    #[test]
    fn lexicon_score_matches_direct_count() {
        let lex = LexiconSentiment::from_tsv("emotion.fear\tscared\ntone.politeness\tplease\n").unwrap();
        let p = lex.score("Please help, we are scared and scared.");
        assert_eq!(p.emotion("fear"), Some(2.0 / 7.0));
        assert_eq!(p.tone("politeness"), Some(1.0 / 7.0));
    }

    #[test]
    fn no_hits_means_all_zero() {
        let p = LexiconSentiment::bundled().score("Xylophone quartz zebra.");
        assert_eq!(p, SentimentToneProfile::default());
    }

    #[test]
    fn provider_output_passes_through() {
        let fixed = SentimentToneProfile {
            emotions: [0.1, 0.2, 0.3, 0.4, 0.5],
            tones: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
        };
        assert_eq!(sentiment_tone("anything.", &Fixed(fixed)).unwrap(), fixed);
    }

    #[test]
    fn provider_failure_is_typed_not_zero_filled() {
        assert!(matches!(
            sentiment_tone("text.", &Failing),
            Err(ProviderError::Status(401))
        ));
        let bad = SentimentToneProfile {
            emotions: [1.5, 0.0, 0.0, 0.0, 0.0],
            tones: [0.0; 7],
        };
        assert!(sentiment_tone("text.", &Fixed(bad)).is_err());
    }

    #[test]
    fn malformed_lexicon_rejected() {
        assert!(LexiconSentiment::from_tsv("emotion.boredom\tmeh\n").is_err());
        assert!(LexiconSentiment::from_tsv("no tab here\n").is_err());
    }
}
