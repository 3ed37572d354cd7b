//! Image-modality features read from per-image sidecar files.
//!
//! An external extractor writes one `<image-stem>.feat.json` per image with
//! an 8-way emotion logit block, a 2048-d appearance vector, 1000 semantic
//! logits and a face count. A campaign's vector is the element-wise mean over
//! its images, laid out as `[emotion | appearance | semantic | faces]`
//! (3057 values). Campaigns without images are flagged missing.

use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Campaign;
use crate::features::FeatureMatrix;

pub const EMOTION_DIM: usize = 8;
pub const APPEARANCE_DIM: usize = 2048;
pub const SEMANTIC_DIM: usize = 1000;
pub const IMAGE_DIM: usize = EMOTION_DIM + APPEARANCE_DIM + SEMANTIC_DIM + 1;

const _: () = assert!(IMAGE_DIM == 3057);

pub const IMAGE_EMOTIONS: [&str; EMOTION_DIM] = [
    "amusement",
    "anger",
    "awe",
    "contentment",
    "disgust",
    "excitement",
    "fear",
    "sadness",
];

pub const SIDECAR_SUFFIX: &str = ".feat.json";

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid sidecar JSON: {message}")]
    Json { path: PathBuf, message: String },
    #[error("{block} block has {found} values, expected {expected}")]
    Dimension {
        block: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{block}[{index}] is not finite")]
    NonFinite { block: &'static str, index: usize },
    #[error("image {image} has no sidecar at {path}")]
    MissingSidecar { image: String, path: PathBuf },
    #[error("image reference {0:?} has no file stem")]
    BadReference(String),
}

/// One image's extractor output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageFeatures {
    pub emotion: Vec<f32>,
    pub appearance: Vec<f32>,
    pub semantic: Vec<f32>,
    pub faces: u32,
    pub extractor_version: String,
}

impl ImageFeatures {
    pub fn validate(&self) -> Result<(), ImageError> {
        for (block, values, expected) in [
            ("emotion", &self.emotion, EMOTION_DIM),
            ("appearance", &self.appearance, APPEARANCE_DIM),
            ("semantic", &self.semantic, SEMANTIC_DIM),
        ] {
            if values.len() != expected {
                return Err(ImageError::Dimension {
                    block,
                    expected,
                    found: values.len(),
                });
            }
            if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                return Err(ImageError::NonFinite { block, index });
            }
        }
        Ok(())
    }

    /// The 3057-value layout of a single image.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(IMAGE_DIM);
        out.extend(self.emotion.iter().map(|&v| f64::from(v)));
        out.extend(self.appearance.iter().map(|&v| f64::from(v)));
        out.extend(self.semantic.iter().map(|&v| f64::from(v)));
        out.push(f64::from(self.faces));
        out
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        let blocks = |f: &Self| {
            f.emotion
                .iter()
                .chain(&f.appearance)
                .chain(&f.semantic)
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        blocks(self)
            .cmp(&blocks(other))
            .then(self.faces.cmp(&other.faces))
    }
}

pub fn image_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(IMAGE_DIM);
    names.extend(IMAGE_EMOTIONS.iter().map(|e| format!("img.emotion.{e}")));
    names.extend((0..APPEARANCE_DIM).map(|i| format!("img.appearance.{i:04}")));
    names.extend((0..SEMANTIC_DIM).map(|i| format!("img.semantic.{i:04}")));
    names.push("img.faces".into());
    names
}

pub fn parse_sidecar(json: &str) -> Result<ImageFeatures, String> {
    let f: ImageFeatures = serde_json::from_str(json).map_err(|e| e.to_string())?;
    Ok(f)
}

pub fn load_sidecar(path: impl AsRef<Path>) -> Result<ImageFeatures, ImageError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let f = parse_sidecar(&text).map_err(|message| ImageError::Json {
        path: path.to_path_buf(),
        message,
    })?;
    f.validate()?;
    Ok(f)
}

/// `<dir>/<stem>.feat.json` for an image reference such as `photos/cover.jpg`.
pub fn sidecar_path(dir: &Path, image: &str) -> Result<PathBuf, ImageError> {
    let stem = Path::new(image)
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| ImageError::BadReference(image.to_string()))?;
    Ok(dir.join(format!("{stem}{SIDECAR_SUFFIX}")))
}

/// Validates and writes a sidecar atomically; returns its path.
pub fn write_sidecar(features: &ImageFeatures, dir: &Path, stem: &str) -> Result<PathBuf, ImageError> {
    features.validate()?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ImageError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(format!("{stem}{SIDECAR_SUFFIX}"));
    let tmp = dir.join(format!(".{stem}.{}.tmp", std::process::id()));
    let json = serde_json::to_string(features).expect("sidecar serialises");
    let mut file = fs::File::create(&tmp).map_err(io(&tmp))?;
    file.write_all(json.as_bytes()).map_err(io(&tmp))?;
    fs::rename(&tmp, &path).map_err(io(&path))?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Aggregation {
    #[default]
    Mean,
    /// Use only the first image in campaign order.
    PrimaryOnly,
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "primary" | "primary-only" => Ok(Aggregation::PrimaryOnly),
            _ => Err(format!("unknown aggregation {s:?} (mean|primary-only)")),
        }
    }
}

/// A campaign's aggregated image vector. `values` is `None` iff there are no images.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignImageVector {
    pub values: Option<Vec<f64>>,
    pub image_count: usize,
}

impl CampaignImageVector {
    pub fn is_missing(&self) -> bool {
        self.values.is_none()
    }
}

/// Element-wise mean over images (faces: mean count). Images are summed in a
/// canonical order so the result does not depend on the input order.
pub fn aggregate_campaign_images(features: &[ImageFeatures], mode: Aggregation) -> CampaignImageVector {
    if features.is_empty() {
        return CampaignImageVector {
            values: None,
            image_count: 0,
        };
    }
    let used: Vec<&ImageFeatures> = match mode {
        Aggregation::Mean => {
            let mut v: Vec<&ImageFeatures> = features.iter().collect();
            v.sort_by(|a, b| a.canonical_cmp(b));
            v
        }
        Aggregation::PrimaryOnly => vec![&features[0]],
    };
    let mut sum = vec![0.0f64; IMAGE_DIM];
    for f in &used {
        for (s, v) in sum.iter_mut().zip(f.to_vec()) {
            *s += v;
        }
    }
    let k = used.len() as f64;
    for s in &mut sum {
        *s /= k;
    }
    CampaignImageVector {
        values: Some(sum),
        image_count: features.len(),
    }
}

pub fn assemble_image_features(
    campaign: &Campaign,
    sidecar_dir: &Path,
    mode: Aggregation,
) -> Result<CampaignImageVector, ImageError> {
    let mut loaded = Vec::with_capacity(campaign.images.len());
    for image in &campaign.images {
        let path = sidecar_path(sidecar_dir, image)?;
        if !path.is_file() {
            return Err(ImageError::MissingSidecar {
                image: image.clone(),
                path,
            });
        }
        loaded.push(load_sidecar(&path)?);
    }
    Ok(aggregate_campaign_images(&loaded, mode))
}

/// Image matrix over the campaigns that have images, plus the ids flagged missing.
#[derive(Debug, Clone)]
pub struct ImageTable {
    pub matrix: FeatureMatrix,
    pub missing: Vec<String>,
    pub image_counts: Vec<usize>,
}

pub fn image_matrix(campaigns: &[Campaign], sidecar_dir: &Path, mode: Aggregation) -> Result<ImageTable, ImageError> {
    use rayon::prelude::*;
    let vectors = campaigns
        .par_iter()
        .map(|c| assemble_image_features(c, sidecar_dir, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut counts = Vec::new();
    let mut missing = Vec::new();
    for (c, v) in campaigns.iter().zip(vectors) {
        match v.values {
            Some(values) => {
                ids.push(c.id.clone());
                rows.push(values);
                counts.push(v.image_count);
            }
            None => missing.push(c.id.clone()),
        }
    }
    let matrix = FeatureMatrix::from_rows(ids, image_feature_names().into(), rows).expect("rows have IMAGE_DIM columns");
    Ok(ImageTable {
        matrix,
        missing,
        image_counts: counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(seed: u64, faces: u32) -> ImageFeatures {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut block = |n: usize| (0..n).map(|_| rng.random_range(-5.0f32..5.0)).collect::<Vec<_>>();
        ImageFeatures {
            emotion: block(EMOTION_DIM),
            appearance: block(APPEARANCE_DIM),
            semantic: block(SEMANTIC_DIM),
            faces,
            extractor_version: "test-1".into(),
        }
    }

    #[test]
    fn layout_is_3057() {
        let names = image_feature_names();
        assert_eq!(names.len(), 3057);
        assert_eq!(names[0], "img.emotion.amusement");
        assert_eq!(names[8], "img.appearance.0000");
        assert_eq!(names[2056], "img.semantic.0000");
        assert_eq!(names[3056], "img.faces");
    }

    #[test]
    fn sidecar_round_trip_is_exact_at_f32() {
        let dir = tempfile::tempdir().unwrap();
        let f = random_features(1, 2);
        let path = write_sidecar(&f, dir.path(), "cover").unwrap();
        assert_eq!(path.file_name().unwrap(), "cover.feat.json");
        let back = load_sidecar(&path).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn wrong_block_length_names_block() {
        let mut f = random_features(2, 0);
        f.appearance.pop();
        let err = f.validate().unwrap_err();
        assert!(matches!(
            err,
            ImageError::Dimension {
                block: "appearance",
                expected: 2048,
                found: 2047
            }
        ));
        assert!(err.to_string().contains("appearance"));
        let dir = tempfile::tempdir().unwrap();
        let mut short = random_features(3, 0);
        short.emotion.pop();
        assert!(write_sidecar(&short, dir.path(), "x").is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn overflowing_value_is_non_finite() {
        let mut f = random_features(4, 0);
        f.semantic[7] = 1.0;
        let json = serde_json::to_string(&f).unwrap().replacen("1.0", "1e300", 1);
        assert!(parse_sidecar(&json).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.feat.json");
        fs::write(&path, json).unwrap();
        assert!(matches!(load_sidecar(&path), Err(ImageError::Json { .. })));
    }

    #[test]
    fn aggregation_single_and_pair() {
        let a = random_features(5, 1);
        let b = random_features(6, 4);
        let one = aggregate_campaign_images(std::slice::from_ref(&a), Aggregation::Mean);
        assert_eq!(one.values.unwrap(), a.to_vec());
        let two = aggregate_campaign_images(&[a.clone(), b.clone()], Aggregation::Mean);
        let (va, vb) = (a.to_vec(), b.to_vec());
        let got = two.values.unwrap();
        for i in 0..IMAGE_DIM {
            assert_eq!(got[i], (va[i] + vb[i]) / 2.0, "coordinate {i}");
        }
        assert_eq!(got[IMAGE_DIM - 1], 2.5);
        let primary = aggregate_campaign_images(&[a.clone(), b], Aggregation::PrimaryOnly);
        assert_eq!(primary.values.unwrap(), va);
        assert_eq!(primary.image_count, 2);
    }

    #[test]
    fn no_images_is_missing() {
        let v = aggregate_campaign_images(&[], Aggregation::Mean);
        assert!(v.is_missing());
        assert_eq!(v.image_count, 0);
    }

    #[test]
    fn permutation_invariant_and_idempotent() {
        let fs: Vec<ImageFeatures> = (10..13).map(|s| random_features(s, s as u32)).collect();
        let base = aggregate_campaign_images(&fs, Aggregation::Mean);
        let rev: Vec<_> = fs.iter().rev().cloned().collect();
        assert_eq!(aggregate_campaign_images(&rev, Aggregation::Mean), base);
        let copies = vec![fs[0].clone(); 5];
        assert_eq!(
            aggregate_campaign_images(&copies, Aggregation::Mean).values,
            Some(fs[0].to_vec())
        );
    }
}
