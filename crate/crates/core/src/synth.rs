//! Seeded generator of labelled campaigns with image sidecars.
//!
//! Fraud (score 1) and not-fraud (score 5) campaigns differ in exactly five
//! text markers and five image coordinates:
//!
//! * text: counts of all-uppercase words, exclamation-terminated words,
//!   hashtags, dollar amounts and elongated words, each drawn from
//!   `N(6, 1.5)` for not-fraud and shifted by `shift` standard deviations for
//!   fraud;
//! * image: one image per campaign, every sidecar value `N(0, 1)` except
//!   [`IMAGE_SIGNAL`] coordinates, which are shifted by `shift` for fraud.
//!
//! The rest of each description is filler drawn uniformly from a large
//! pseudo-word pool, giving a vocabulary of several thousand terms that carry
//! no label information. Optional score-2 and score-4 campaigns are copies of
//! the two distributions with extra noise, for the transfer protocol.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::corpus::{read_corpus, Corpus, CorpusError};
use crate::image::{write_sidecar, ImageError, ImageFeatures, APPEARANCE_DIM, EMOTION_DIM, SEMANTIC_DIM};

/// Form counters driven by the text markers.
pub const TEXT_SIGNAL: [&str; 5] = [
    "form.all_upper",
    "form.exclamation_word",
    "form.hashtag",
    "form.currency_marked",
    "form.elongated",
];

/// Shifted sidecar coordinates, as (block, index).
pub const IMAGE_SIGNAL: [(&str, usize); 5] = [
    ("emotion", 1),
    ("appearance", 10),
    ("appearance", 500),
    ("semantic", 3),
    ("semantic", 700),
];

/// Feature names of the shifted image coordinates.
pub fn image_signal_names() -> Vec<String> {
    IMAGE_SIGNAL
        .iter()
        .map(|&(block, i)| match block {
            "emotion" => format!("img.emotion.{}", crate::image::IMAGE_EMOTIONS[i]),
            "appearance" => format!("img.appearance.{i:04}"),
            _ => format!("img.semantic.{i:04}"),
        })
        .collect()
}

pub const MARKER_MEAN: f64 = 6.0;
pub const MARKER_SD: f64 = 1.5;

const UPPER: [&str; 8] = ["URGENT", "PLEASE", "HELP", "NOW", "TODAY", "ANYTHING", "DONATE", "SHARE"];
const EXCLAIM: [&str; 6] = ["thanks!", "hurry!", "wow!", "amazing!", "quickly!", "bless!"];
const HASHTAGS: [&str; 6] = ["#help", "#family", "#support", "#hope", "#miracle", "#givingback"];
const ELONGATED: [&str; 6] = ["sooo", "pleeease", "reallyyy", "veryyy", "thankkks", "nooow"];
const OPENERS: [&str; 8] = ["We", "Our", "This", "The", "My", "Your", "Every", "Any"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_per_class: usize,
    /// Score-2 and score-4 campaigns per class.
    pub n_intermediate_per_class: usize,
    pub seed: u64,
    /// Class separation in marker standard deviations.
    pub shift: f64,
    /// Standard-deviation multiplier for the score-2/4 copies.
    pub intermediate_noise: f64,
    pub filler_vocabulary: usize,
    pub filler_words: usize,
    pub images: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_per_class: 200,
            n_intermediate_per_class: 0,
            seed: 0,
            shift: 3.0,
            intermediate_noise: 1.5,
            filler_vocabulary: 12_000,
            filler_words: 100,
            images: true,
        }
    }
}

/// The generated campaigns plus one sidecar per campaign image, keyed by stem.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    pub jsonl: String,
    pub sidecars: Vec<(String, ImageFeatures)>,
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Pseudo-word `i`: three consonant-vowel syllables, unique for `i < 70^3`.
pub fn pseudo_word(i: usize) -> String {
    const C: &[u8] = b"bdfgklmnprstvz";
    const V: &[u8] = b"aeiou";
    let mut s = String::with_capacity(6);
    let mut k = i;
    for _ in 0..3 {
        let syl = k % (C.len() * V.len());
        k /= C.len() * V.len();
        s.push(C[syl / V.len()] as char);
        s.push(V[syl % V.len()] as char);
    }
    s
}

fn marker_count(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> usize {
    let d = Normal::new(mean, sd).expect("positive sd");
    d.sample(rng).round().max(0.0) as usize
}

fn description(rng: &mut ChaCha8Rng, fraud: bool, noise: f64, config: &SynthConfig) -> String {
    let mean = MARKER_MEAN + if fraud { config.shift * MARKER_SD } else { 0.0 };
    let sd = MARKER_SD * noise;
    let mut tokens: Vec<String> = Vec::new();
    for k in 0..5 {
        let n = marker_count(rng, mean, sd);
        for _ in 0..n {
            let t = match k {
                0 => UPPER[rng.random_range(0..UPPER.len())].to_string(),
                1 => EXCLAIM[rng.random_range(0..EXCLAIM.len())].to_string(),
                2 => HASHTAGS[rng.random_range(0..HASHTAGS.len())].to_string(),
                3 => format!("${}", rng.random_range(5..500) * 10),
                _ => ELONGATED[rng.random_range(0..ELONGATED.len())].to_string(),
            };
            tokens.push(t);
        }
    }
    for _ in 0..config.filler_words {
        tokens.push(pseudo_word(rng.random_range(0..config.filler_vocabulary)));
    }
    tokens.shuffle(rng);
    let mut text = String::new();
    for chunk in tokens.chunks(10) {
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(OPENERS[rng.random_range(0..OPENERS.len())]);
        for t in chunk {
            text.push(' ');
            text.push_str(t);
        }
        text.push('.');
    }
    text
}

fn sidecar(rng: &mut ChaCha8Rng, fraud: bool, noise: f64, config: &SynthConfig) -> ImageFeatures {
    let mut block = |n: usize| -> Vec<f32> {
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z as f32
            })
            .collect()
    };
    let mut f = ImageFeatures {
        emotion: block(EMOTION_DIM),
        appearance: block(APPEARANCE_DIM),
        semantic: block(SEMANTIC_DIM),
        faces: 0,
        extractor_version: "synthetic-1".into(),
    };
    f.faces = rng.random_range(0..4);
    for &(name, i) in &IMAGE_SIGNAL {
        let v = match name {
            "emotion" => &mut f.emotion[i],
            "appearance" => &mut f.appearance[i],
            _ => &mut f.semantic[i],
        };
        let shift = if fraud { config.shift } else { 0.0 };
        *v = (f64::from(*v) * noise + shift) as f32;
    }
    f
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut plan: Vec<(u8, bool, f64)> = Vec::new();
    for _ in 0..config.n_per_class {
        plan.push((1, true, 1.0));
        plan.push((5, false, 1.0));
    }
    for _ in 0..config.n_intermediate_per_class {
        plan.push((2, true, config.intermediate_noise));
        plan.push((4, false, config.intermediate_noise));
    }
    let mut jsonl = String::new();
    let mut sidecars = Vec::new();
    for (i, &(score, fraud, noise)) in plan.iter().enumerate() {
        let id = format!("syn-{i:05}");
        let text = description(&mut rng, fraud, noise, config);
        let images: Vec<String> = if config.images {
            sidecars.push((id.clone(), sidecar(&mut rng, fraud, noise, config)));
            vec![format!("{id}.jpg")]
        } else {
            Vec::new()
        };
        let record = serde_json::json!({
            "id": id,
            "platform": "gofundme",
            "title": format!("Campaign {i}"),
            "description": text,
            "category": "medical",
            "created_at": "2020-01-01T00:00:00Z",
            "score": score,
            "images": images,
            "goal_minor": 500_000,
            "goal_currency": "USD",
        });
        jsonl.push_str(&record.to_string());
        jsonl.push('\n');
    }
    let corpus = read_corpus(jsonl.as_bytes())?;
    Ok(SynthCorpus {
        corpus,
        jsonl,
        sidecars,
    })
}

impl SynthCorpus {
    /// Writes `corpus.jsonl` and `sidecars/<stem>.feat.json` under `dir`;
    /// returns (corpus path, sidecar directory).
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), SynthError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| SynthError::Io { path, source }
        };
        let side = dir.join("sidecars");
        fs::create_dir_all(&side).map_err(io(&side))?;
        let corpus = dir.join("corpus.jsonl");
        fs::write(&corpus, &self.jsonl).map_err(io(&corpus))?;
        for (stem, f) in &self.sidecars {
            write_sidecar(f, &side, stem)?;
        }
        Ok((corpus, side))
    }
}
