use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fundsentry::corpus::{load_corpus, parse_campaign, Corpus, Grouping};
use fundsentry::features::FeatureMatrix;
use fundsentry::harness::{
    export_figure_data, hash_dir, hash_file, read_samples_csv, run_ablation, run_all_modalities, run_experiment,
    write_report, ExperimentConfig, ExperimentData, ExperimentRun, FigureInput, FigureKind, Manifest, Modality,
    ModalitySource, Scorer,
};
use fundsentry::image::{image_matrix, SIDECAR_SUFFIX};
use fundsentry::select::select_rows;
use fundsentry::synth::{generate, SynthConfig};
use fundsentry::text::http::{HttpProviderConfig, HttpSentiment, HttpTagger};
use fundsentry::text::ner::{EntityTagger, RuleTagger};
use fundsentry::text::sentiment::{LexiconSentiment, SentimentProvider};
use fundsentry::text::TextFeaturizer;
use fundsentry::{Label, LabelSetup};

#[derive(Parser)]
#[command(name = "fundsentry", version, about = "Fraud scoring for crowdfunding campaigns from text and image cues")]
struct Cli {
    /// key=value file with experiment settings; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports and other outputs.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a corpus, report retained/skipped records and label counts.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Cohen's kappa between two annotators.
    Kappa {
        #[arg(long)]
        corpus: PathBuf,
        /// The two annotator ids; inferred when the corpus has exactly two.
        #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
        annotators: Option<Vec<String>>,
    },
    /// Write the assembled feature matrix of one modality.
    Features {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "text")]
        modality: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Significance-filter one modality's features over the labelled campaigns.
    Select {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "text")]
        modality: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Balanced resampling experiment; writes summary.csv, samples.csv and manifest.json.
    Experiment {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        /// text, image, ensemble, or all (the three on shared splits).
        #[arg(long)]
        modality: Option<String>,
    },
    /// Leave-one-feature-group-out ablation.
    Ablate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        modality: Option<String>,
        /// Comma-separated feature groups, or "all".
        #[arg(long)]
        groups: Option<String>,
    },
    /// Fit a scorer on every labelled training campaign and save it as scorer.json.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        modality: Option<String>,
    },
    /// Print the fraud probability of one campaign record.
    Score {
        /// A scorer written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// JSON file holding one campaign record.
        #[arg(long)]
        campaign: PathBuf,
        #[arg(long)]
        sidecars: Option<PathBuf>,
        /// Print the per-modality probabilities as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        providers: ProviderArgs,
    },
    /// Export the tables behind the figures.
    Figures {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        /// A figure kind or "all".
        #[arg(long, default_value = "all")]
        kind: String,
        /// samples.csv of earlier experiments, for metrics-boxes.
        #[arg(long)]
        samples: Vec<PathBuf>,
        /// Rows per side in the ranked tables.
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Generate a labelled synthetic corpus with image sidecars.
    Synth {
        #[arg(long, default_value_t = 200)]
        per_class: usize,
        /// Score-2 and score-4 campaigns per class.
        #[arg(long, default_value_t = 0)]
        intermediate: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3.0)]
        shift: f64,
        #[arg(long, default_value_t = 12_000)]
        filler_vocabulary: usize,
        #[arg(long)]
        no_images: bool,
    },
}

#[derive(Args, Clone)]
struct ProviderArgs {
    /// Sentiment/tone service URL; the bundled lexicon is used otherwise.
    #[arg(long)]
    sentiment_url: Option<String>,
    /// Entity tagger service URL; the rule-based tagger is used otherwise.
    #[arg(long)]
    ner_url: Option<String>,
    /// Environment variable holding the services' bearer token.
    #[arg(long)]
    token_env: Option<String>,
    /// Response cache directory for the services.
    #[arg(long)]
    provider_cache: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct DataArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Directory of <image-stem>.feat.json sidecars.
    #[arg(long)]
    sidecars: Option<PathBuf>,
    #[command(flatten)]
    providers: ProviderArgs,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    #[arg(long)]
    label_setup: Option<String>,
    /// Classifier, e.g. forest, mlp, knn:k=7, tree:max_depth=5.
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// leak-free, paper or off.
    #[arg(long)]
    selection: Option<String>,
    /// ks or welch.
    #[arg(long)]
    test: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    train_fraction: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Any other setting as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    extra: Vec<String>,
}

impl ProviderArgs {
    fn featurizer(&self) -> Result<TextFeaturizer> {
        let http = |url: &String| {
            let mut c = HttpProviderConfig::new(url.clone());
            c.token_env = self.token_env.clone();
            c.cache_dir = self.provider_cache.clone();
            c
        };
        let sentiment: Arc<dyn SentimentProvider> = match &self.sentiment_url {
            Some(url) => Arc::new(HttpSentiment::new(http(url))?),
            None => Arc::new(LexiconSentiment::bundled().clone()),
        };
        let tagger: Arc<dyn EntityTagger> = match &self.ner_url {
            Some(url) => Arc::new(HttpTagger::new(http(url))?),
            None => Arc::new(RuleTagger),
        };
        Ok(TextFeaturizer::new(sentiment, tagger))
    }
}

fn load_config(path: Option<&Path>, run: &RunArgs, modality: Option<&str>) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExperimentConfig::parse(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => ExperimentConfig::default(),
    };
    let flags = [
        ("label_setup", &run.label_setup),
        ("classifier", &run.classifier),
        ("iterations", &run.iterations),
        ("seed", &run.seed),
        ("selection", &run.selection),
        ("test", &run.test),
        ("alpha", &run.alpha),
        ("train_fraction", &run.train_fraction),
        ("threads", &run.threads),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, v)?;
        }
    }
    for kv in &run.extra {
        let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
        config.set(k, v)?;
    }
    if let Some(m) = modality {
        config.set("modality", m)?;
    }
    config.validate()?;
    Ok(config)
}

fn load(path: &Path) -> Result<Corpus> {
    load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn base_manifest(command: &str, config: Option<&ExperimentConfig>, data: Option<&DataArgs>) -> Result<Manifest> {
    let mut m = Manifest::new(command, config.map_or(0, |c| c.seed));
    if let Some(c) = config {
        m.config = c.to_pairs().into_iter().collect();
    }
    if let Some(d) = data {
        m.inputs.insert("corpus".into(), hash_file(&d.corpus)?);
        if let Some(dir) = &d.sidecars {
            m.inputs.insert("sidecars".into(), hash_dir(dir, SIDECAR_SUFFIX)?);
        }
        let p = &d.providers;
        m.details.insert("sentiment_provider".into(), p.sentiment_url.clone().unwrap_or("lexicon".into()));
        m.details.insert("ner_provider".into(), p.ner_url.clone().unwrap_or("rules".into()));
    }
    Ok(m)
}

fn experiment_data(data: &DataArgs, config: &ExperimentConfig, need_text: bool) -> Result<ExperimentData> {
    let corpus = load(&data.corpus)?;
    if need_text {
        let featurizer = data.providers.featurizer()?;
        Ok(ExperimentData::from_corpus(
            &corpus,
            config.label_setup,
            &featurizer,
            data.sidecars.as_deref(),
            config.aggregation,
            config.tfidf,
        )?)
    } else {
        let grouping = corpus.labels(config.label_setup)?;
        let labelled: BTreeSet<String> = ExperimentData::new(grouping.clone(), None, None)
            .all_labels()
            .ids()
            .map(str::to_string)
            .collect();
        let campaigns: Vec<_> = corpus.campaigns().iter().filter(|c| labelled.contains(&c.id)).cloned().collect();
        let dir = data.sidecars.as_deref().context("image features need --sidecars")?;
        let table = image_matrix(&campaigns, dir, config.aggregation)?;
        let mut d = ExperimentData::new(grouping, None, Some(ModalitySource::matrix(table.matrix)));
        d.missing_images = table.missing;
        Ok(d)
    }
}

/// The full matrix of `source` over every labelled campaign, any vocabulary
/// fitted on the training side only.
fn full_matrix(source: &ModalitySource, grouping: &Grouping) -> Result<FeatureMatrix> {
    let fit: Vec<&str> = grouping.train().ids().filter(|id| source.contains(id)).collect();
    let mut all: Vec<&str> = fit.clone();
    if let Some(test) = grouping.test() {
        all.extend(test.ids().filter(|id| source.contains(id)));
    }
    Ok(source.fold(&fit, &all, &[])?.1)
}

fn modality_source<'a>(data: &'a ExperimentData, modality: &str) -> Result<&'a ModalitySource> {
    match modality {
        "text" => data.text.as_ref().context("no text features"),
        "image" => data.image.as_ref().context("no image features; pass --sidecars"),
        other => bail!("--modality must be text or image, got {other:?}"),
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn print_runs(runs: &[ExperimentRun]) {
    println!("{:<32} {:>6} {:>18} {:>18} {:>18}", "run", "n", "auc", "accuracy", "f1");
    for r in runs {
        let d = &r.distribution;
        let cell = |m: &str| format!("{:.4} ± {:.4}", d.mean(m), d.std(m));
        println!("{:<32} {:>6} {:>18} {:>18} {:>18}", r.name, d.len(), cell("auc"), cell("accuracy"), cell("f1"));
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let out = cli.out.as_path();
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::Ingest { corpus } => {
            let c = load(&corpus)?;
            let mut by_score: BTreeMap<u8, usize> = BTreeMap::new();
            for s in c.scores().values() {
                *by_score.entry(s.score).or_default() += 1;
            }
            println!("retained {} campaigns, skipped {}", c.len(), c.skipped().len());
            let mut scores = csv::Writer::from_writer(Vec::new());
            scores.write_record(["score", "campaigns"])?;
            for (s, n) in &by_score {
                println!("  score {s}: {n}");
                scores.write_record([s.to_string(), n.to_string()])?;
            }
            let mut skipped = csv::Writer::from_writer(Vec::new());
            skipped.write_record(["line", "id", "reason"])?;
            for s in c.skipped() {
                skipped.write_record([s.line.to_string(), s.id.clone(), s.reason.to_string()])?;
            }
            let mut labels = csv::Writer::from_writer(Vec::new());
            labels.write_record(["setup", "train_fraud", "train_not_fraud", "test_fraud", "test_not_fraud", "dropped"])?;
            for setup in [LabelSetup::LabelI, LabelSetup::LabelII, LabelSetup::LabelIII] {
                let g = c.labels(setup)?;
                let count = |s: Option<&fundsentry::LabeledSet>, l: Label| s.map_or(0, |s| s.count(l));
                let row = [
                    setup.as_str().to_string(),
                    count(Some(g.train()), Label::Fraud).to_string(),
                    count(Some(g.train()), Label::NotFraud).to_string(),
                    count(g.test(), Label::Fraud).to_string(),
                    count(g.test(), Label::NotFraud).to_string(),
                    g.train().dropped().len().to_string(),
                ];
                println!(
                    "  Label {:<3} train {}/{} (fraud/not), test {}/{}, dropped {}",
                    row[0], row[1], row[2], row[3], row[4], row[5]
                );
                labels.write_record(&row)?;
            }
            let mut m = Manifest::new("ingest", 0);
            m.inputs.insert("corpus".into(), hash_file(&corpus)?);
            let files = vec![
                ("scores.csv".to_string(), scores.into_inner()?),
                ("skipped.csv".to_string(), skipped.into_inner()?),
                ("labels.csv".to_string(), labels.into_inner()?),
            ];
            write_report(out, &[], &files, m)?;
        }
        Command::Kappa { corpus, annotators } => {
            let c = load(&corpus)?;
            let (a, b) = match annotators {
                Some(v) => (v[0].clone(), v[1].clone()),
                None => {
                    let ids: BTreeSet<&str> = c
                        .annotations()
                        .values()
                        .flatten()
                        .filter_map(|s| s.annotator_id.as_deref())
                        .collect();
                    if ids.len() != 2 {
                        bail!("found {} annotators {:?}; pass --annotators FIRST SECOND", ids.len(), ids);
                    }
                    let mut it = ids.into_iter();
                    (it.next().unwrap().to_string(), it.next().unwrap().to_string())
                }
            };
            let k = c.annotator_agreement(&a, &b)?;
            println!("kappa={} band={} observed={} expected={} ({a} vs {b})", k.value, k.band, k.observed, k.expected);
        }
        Command::Features { data, modality, run } => {
            let config = load_config(config_path, &run, None)?;
            let d = experiment_data(&data, &config, modality == "text")?;
            let source = modality_source(&d, &modality)?;
            let matrix = full_matrix(source, &d.grouping)?;
            println!("{} campaigns x {} {modality} features", matrix.n_rows(), matrix.n_cols());
            if modality == "text" {
                let base = source.base().n_cols();
                println!("  {base} base + {} tf-idf", matrix.n_cols() - base);
            }
            let mut files = vec![(format!("features_{modality}.csv"), csv_bytes(|b| matrix.write_csv(b))?)];
            if !d.missing_images.is_empty() {
                println!("  {} labelled campaigns have no image", d.missing_images.len());
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["id"])?;
                for id in &d.missing_images {
                    w.write_record([id])?;
                }
                files.push(("missing_images.csv".into(), w.into_inner()?));
            }
            let mut m = base_manifest("features", Some(&config), Some(&data))?;
            m.details.insert(format!("{modality}_features"), matrix.n_cols().to_string());
            write_report(out, &[], &files, m)?;
        }
        Command::Select { data, modality, run } => {
            let config = load_config(config_path, &run, None)?;
            let d = experiment_data(&data, &config, modality == "text")?;
            let source = modality_source(&d, &modality)?;
            let train: Vec<(&str, Label)> = d
                .grouping
                .train()
                .entries()
                .iter()
                .filter(|(id, _)| source.contains(id))
                .map(|(id, l)| (id.as_str(), *l))
                .collect();
            let ids: Vec<&str> = train.iter().map(|t| t.0).collect();
            let labels: Vec<Label> = train.iter().map(|t| t.1).collect();
            let (matrix, _) = source.fold(&ids, &[], &[])?;
            let rows: Vec<usize> = (0..matrix.n_rows()).collect();
            let mask = select_rows(&matrix, &rows, &labels, config.test, config.alpha)?;
            println!(
                "{modality}: {} -> {} features significant at alpha={} ({} test, {} campaigns)",
                mask.len(),
                mask.n_kept(),
                config.alpha,
                config.test,
                ids.len()
            );
            let files = vec![(format!("mask_{modality}.csv"), csv_bytes(|b| mask.write_csv(b))?)];
            let mut m = base_manifest("select", Some(&config), Some(&data))?;
            m.details.insert("features".into(), mask.len().to_string());
            m.details.insert("kept".into(), mask.n_kept().to_string());
            write_report(out, &[], &files, m)?;
        }
        Command::Experiment { data, run, modality } => {
            let all = modality.as_deref() == Some("all");
            let config = load_config(config_path, &run, if all { Some("ensemble") } else { modality.as_deref() })?;
            let need_text = all || config.modality != Modality::Image;
            let d = experiment_data(&data, &config, need_text)?;
            let runs: Vec<ExperimentRun> = if all {
                run_all_modalities(&config, &d)?.into()
            } else {
                vec![run_experiment(&config, &d)?]
            };
            print_runs(&runs);
            let mut m = base_manifest("experiment", Some(&config), Some(&data))?;
            m.details.insert("missing_images".into(), d.missing_images.len().to_string());
            let path = write_report(out, &runs, &[], m)?;
            println!("report: {}", path.display());
        }
        Command::Ablate {
            data,
            run,
            modality,
            groups,
        } => {
            let mut config = load_config(config_path, &run, modality.as_deref())?;
            if let Some(g) = groups {
                config.set("ablation_groups", &g)?;
            }
            let d = experiment_data(&data, &config, config.modality != Modality::Image)?;
            let groups: Vec<_> = config
                .ablation_groups
                .iter()
                .copied()
                .filter(|g| match config.modality {
                    Modality::Text => g.is_text(),
                    Modality::Image => !g.is_text(),
                    Modality::Ensemble => true,
                })
                .collect();
            if groups.is_empty() {
                bail!("no ablation group belongs to the {} modality", config.modality);
            }
            let table = run_ablation(&config, &d, &groups)?;
            for row in &table.rows {
                println!(
                    "{:<14} auc {:.4} ± {:.4}  delta {:+.4}",
                    row.left_out.map_or("none", |g| g.as_str()),
                    row.run.distribution.mean("auc"),
                    row.run.distribution.std("auc"),
                    table.delta_auc(row)
                );
            }
            let files = vec![("ablation.csv".to_string(), csv_bytes(|b| table.write_csv(b))?)];
            write_report(out, &[], &files, base_manifest("ablate", Some(&config), Some(&data))?)?;
        }
        Command::Train { data, run, modality } => {
            let config = load_config(config_path, &run, modality.as_deref())?;
            let d = experiment_data(&data, &config, config.modality != Modality::Image)?;
            let scorer = Scorer::fit(&config, &d)?;
            let files = vec![("scorer.json".to_string(), scorer.to_json().into_bytes())];
            let path = write_report(out, &[], &files, base_manifest("train", Some(&config), Some(&data))?)?;
            println!("scorer: {}", out.join("scorer.json").display());
            println!("manifest: {}", path.display());
        }
        Command::Score {
            model,
            campaign,
            sidecars,
            json,
            providers,
        } => {
            let scorer = Scorer::from_json(
                &fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?,
            )?;
            let record = fs::read_to_string(&campaign).with_context(|| format!("reading {}", campaign.display()))?;
            let c = parse_campaign(record.trim())?;
            let score = scorer.score(&c, &providers.featurizer()?, sidecars.as_deref())?;
            if json {
                println!("{}", serde_json::to_string(&score)?);
            } else {
                println!("{}", score.fraud_probability);
            }
        }
        Command::Figures {
            data,
            run,
            kind,
            samples,
            top,
        } => {
            let config = load_config(config_path, &run, None)?;
            let kinds: Vec<FigureKind> = if kind == "all" {
                FigureKind::ALL.to_vec()
            } else {
                vec![kind.parse().map_err(anyhow::Error::msg)?]
            };
            let d = experiment_data(&data, &config, true)?;
            let labels = d.all_labels();
            let text = d.text.as_ref().map(|s| full_matrix(s, &d.grouping)).transpose()?;
            let image = d.image.as_ref().map(|s| full_matrix(s, &d.grouping)).transpose()?;
            let mut runs = Vec::new();
            for path in &samples {
                let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                runs.extend(read_samples_csv(f)?);
            }
            let input = FigureInput {
                labels: &labels,
                text: text.as_ref(),
                image: image.as_ref(),
                runs: &runs,
                top,
            };
            let mut files = Vec::new();
            for k in kinds {
                match export_figure_data(k, &input) {
                    Ok(table) => {
                        println!("{k}: {} rows", table.rows.len());
                        files.push((format!("figure_{k}.csv"), csv_bytes(|b| table.write_csv(b))?));
                    }
                    Err(e) if kind == "all" => println!("{k}: skipped ({e})"),
                    Err(e) => return Err(e.into()),
                }
            }
            write_report(out, &[], &files, base_manifest("figures", Some(&config), Some(&data))?)?;
        }
        Command::Synth {
            per_class,
            intermediate,
            seed,
            shift,
            filler_vocabulary,
            no_images,
        } => {
            let synth = generate(&SynthConfig {
                n_per_class: per_class,
                n_intermediate_per_class: intermediate,
                seed,
                shift,
                filler_vocabulary,
                images: !no_images,
                ..SynthConfig::default()
            })?;
            let (corpus, sidecars) = synth.write(out)?;
            println!("corpus: {} ({} campaigns)", corpus.display(), synth.corpus.len());
            if !no_images {
                println!("sidecars: {} ({} files)", sidecars.display(), synth.sidecars.len());
            }
        }
    }
    Ok(())
}
