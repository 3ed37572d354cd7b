//! CSV reports and the JSON run manifest.
//!
//! Reports contain no timestamps or host details, so two runs of the same
//! configuration on the same inputs write byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::distribution::MetricsDistribution;
use super::experiment::ExperimentRun;
use super::HarnessError;
use crate::learn::Metrics;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn hash_file(path: &Path) -> Result<String, HarnessError> {
    Ok(sha256_hex(&fs::read(path).map_err(io_err(path))?))
}

/// One hash over every file in `dir` ending in `suffix`: SHA-256 of the
/// sorted `name  hash` lines.
pub fn hash_dir(dir: &Path, suffix: &str) -> Result<String, HarnessError> {
    let mut lines = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if name.ends_with(suffix) {
            lines.push(format!("{name}  {}\n", hash_file(&path)?));
        }
    }
    lines.sort();
    Ok(sha256_hex(lines.concat().as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    /// Input name to SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Provider, vocabulary and other run facts.
    pub details: BTreeMap<String, String>,
    /// Output file name to SHA-256, filled by [`write_report`].
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            tool: "fundsentry".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            ..Self::default()
        }
    }
}

fn write_csv(header: Vec<String>, rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// One row per run: `run,label_setup,n,<metric>_mean,<metric>_std...`.
pub fn summary_csv(runs: &[ExperimentRun]) -> Vec<u8> {
    let mut header = vec!["run".to_string(), "label_setup".to_string(), "n".to_string()];
    for m in Metrics::NAMES {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_std"));
    }
    let rows = runs
        .iter()
        .map(|run| {
            let d = &run.distribution;
            let mut r = vec![
                run.name.clone(),
                run.config.label_setup.as_str().to_string(),
                d.len().to_string(),
            ];
            for m in Metrics::NAMES {
                r.push(d.mean(m).to_string());
                r.push(d.std(m).to_string());
            }
            r
        })
        .collect();
    write_csv(header, rows)
}

/// Every iteration of every run.
pub fn samples_csv(runs: &[ExperimentRun]) -> Vec<u8> {
    let header = [
        "run",
        "iteration",
        "accuracy",
        "precision",
        "recall",
        "f1",
        "auc",
        "tp",
        "fp",
        "tn",
        "fn",
        "n_train",
        "n_test",
        "text_features",
        "image_features",
    ]
    .map(String::from)
    .to_vec();
    let opt = |v: Option<usize>| v.map_or(String::new(), |n| n.to_string());
    let rows = runs
        .iter()
        .flat_map(|run| {
            run.records.iter().map(move |r| {
                let m = &r.metrics;
                vec![
                    run.name.clone(),
                    r.iteration.to_string(),
                    m.accuracy.to_string(),
                    m.precision.to_string(),
                    m.recall.to_string(),
                    m.f1.to_string(),
                    m.auc.to_string(),
                    m.tp.to_string(),
                    m.fp.to_string(),
                    m.tn.to_string(),
                    m.fn_.to_string(),
                    r.n_train.to_string(),
                    r.n_test.to_string(),
                    opt(r.text_features),
                    opt(r.image_features),
                ]
            })
        })
        .collect();
    write_csv(header, rows)
}

/// Reads a [`samples_csv`] table back into one distribution per run, runs in
/// order of first appearance.
pub fn read_samples_csv<R: std::io::Read>(reader: R) -> Result<Vec<(String, MetricsDistribution)>, HarnessError> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Config(format!("samples table lacks column {name:?}")))
    };
    let run_col = col("run")?;
    let metric_cols = Metrics::NAMES.iter().map(|m| col(m)).collect::<Result<Vec<_>, _>>()?;
    let count_cols = ["tp", "fp", "tn", "fn"].iter().map(|m| col(m)).collect::<Result<Vec<_>, _>>()?;
    let mut runs: Vec<(String, Vec<Metrics>)> = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let bad = |what: &str| HarnessError::Config(format!("samples row {}: bad {what}", line + 2));
        let mut v = [0.0f64; 5];
        for (slot, &c) in v.iter_mut().zip(&metric_cols) {
            *slot = record[c].parse().map_err(|_| bad(&headers[c]))?;
        }
        let mut n = [0usize; 4];
        for (slot, &c) in n.iter_mut().zip(&count_cols) {
            *slot = record[c].parse().map_err(|_| bad(&headers[c]))?;
        }
        let m = Metrics {
            accuracy: v[0],
            precision: v[1],
            recall: v[2],
            f1: v[3],
            auc: v[4],
            tp: n[0],
            fp: n[1],
            tn: n[2],
            fn_: n[3],
        };
        let name = &record[run_col];
        match runs.iter_mut().find(|(r, _)| r == name) {
            Some((_, samples)) => samples.push(m),
            None => runs.push((name.to_string(), vec![m])),
        }
    }
    Ok(runs
        .into_iter()
        .map(|(name, samples)| (name, MetricsDistribution::new(samples)))
        .collect())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Writes `summary.csv`, `samples.csv`, any extra files and `manifest.json`
/// into `dir`. Returns the manifest path.
pub fn write_report(
    dir: &Path,
    runs: &[ExperimentRun],
    extra: &[(String, Vec<u8>)],
    mut manifest: Manifest,
) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    if !runs.is_empty() {
        files.push(("summary.csv".into(), summary_csv(runs)));
        files.push(("samples.csv".into(), samples_csv(runs)));
    }
    files.extend(extra.iter().cloned());
    for (name, bytes) in &files {
        write_atomic(&dir.join(name), bytes)?;
        manifest.outputs.insert(name.clone(), sha256_hex(bytes));
    }
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
    json.push(b'\n');
    write_atomic(&path, &json)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dir_hash_ignores_other_files_and_order() {
        let a = tempfile::tempdir().unwrap();
        fs::write(a.path().join("x.feat.json"), "1").unwrap();
        fs::write(a.path().join("y.feat.json"), "2").unwrap();
        fs::write(a.path().join("notes.txt"), "z").unwrap();
        let b = tempfile::tempdir().unwrap();
        fs::write(b.path().join("y.feat.json"), "2").unwrap();
        fs::write(b.path().join("x.feat.json"), "1").unwrap();
        assert_eq!(hash_dir(a.path(), ".feat.json").unwrap(), hash_dir(b.path(), ".feat.json").unwrap());
        fs::write(b.path().join("x.feat.json"), "3").unwrap();
        assert_ne!(hash_dir(a.path(), ".feat.json").unwrap(), hash_dir(b.path(), ".feat.json").unwrap());
    }

    #[test]
    fn samples_table_reads_back() {
        let m = |auc: f64| Metrics {
            accuracy: 0.5,
            precision: 0.25,
            recall: 1.0,
            f1: 0.4,
            auc,
            tp: 1,
            fp: 3,
            tn: 0,
            fn_: 0,
        };
        let text = "run,iteration,accuracy,precision,recall,f1,auc,tp,fp,tn,fn\n\
                    rf/text,0,0.5,0.25,1,0.4,0.75,1,3,0,0\n\
                    rf/image,0,0.5,0.25,1,0.4,0.5,1,3,0,0\n\
                    rf/text,1,0.5,0.25,1,0.4,0.1,1,3,0,0\n";
        let runs = read_samples_csv(text.as_bytes()).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].0, "rf/text");
        assert_eq!(runs[0].1.samples, vec![m(0.75), m(0.1)]);
        assert_eq!(runs[1].1.samples, vec![m(0.5)]);
        assert!(read_samples_csv("run,auc\nx,1\n".as_bytes()).is_err());
    }

    #[test]
    fn manifest_lists_output_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_report(dir.path(), &[], &[("mask.csv".into(), b"a,b\n".to_vec())], Manifest::new("select", 1)).unwrap();
        let m: Manifest = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(m.outputs["mask.csv"], sha256_hex(b"a,b\n"));
        assert_eq!(m.seed, 1);
    }
}
