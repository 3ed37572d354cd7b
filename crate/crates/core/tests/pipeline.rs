//! Cross-module checks on synthetic data: selection against an independent
//! KS oracle, the assembled text width, and experiment-level behaviour.

use fundsentry::corpus::Grouping;
use fundsentry::features::FeatureMatrix;
use fundsentry::harness::{run_all_modalities, run_experiment, ExperimentConfig, ExperimentData, ModalitySource};
use fundsentry::image::{image_feature_names, Aggregation};
use fundsentry::learn::ClassifierKind;
use fundsentry::select::{select_rows, SelectionTest};
use fundsentry::synth::{generate, SynthConfig};
use fundsentry::text::{TextFeaturizer, TfidfConfig};
use fundsentry::{Label, LabelSetup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn brute_d(x: &[f64], y: &[f64]) -> f64 {
    let ecdf = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
    x.iter().chain(y).map(|&t| (ecdf(x, t) - ecdf(y, t)).abs()).fold(0.0, f64::max)
}

/// Kolmogorov survival function by its alternating series.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let s: f64 = (1..200)
        .map(|k| {
            let k = k as f64;
            let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

#[test]
fn selection_keeps_the_shifted_features() {
    let n = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let labels: Vec<Label> = (0..2 * n).map(|i| if i < n { Label::Fraud } else { Label::NotFraud }).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|l| {
            (0..50)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    if j < 5 && l.is_fraud() {
                        z + 3.0
                    } else {
                        z
                    }
                })
                .collect()
        })
        .collect();
    let ids: Vec<String> = (0..2 * n).map(|i| format!("c{i}")).collect();
    let names: Vec<String> = (0..50).map(|j| format!("read.f{j:02}")).collect();
    let m = FeatureMatrix::from_rows(ids, names.into(), rows.clone()).unwrap();
    let all: Vec<usize> = (0..2 * n).collect();

    let mask = select_rows(&m, &all, &labels, SelectionTest::Ks, 0.05).unwrap();
    let en = (n * n) as f64 / (2 * n) as f64;
    let oracle: Vec<usize> = (0..50)
        .filter(|&j| {
            let x: Vec<f64> = rows[..n].iter().map(|r| r[j]).collect();
            let y: Vec<f64> = rows[n..].iter().map(|r| r[j]).collect();
            let d = brute_d(&x, &y);
            let rec = &mask.records[j];
            assert!((rec.statistic - d).abs() < 1e-12, "feature {j}: D {} vs {d}", rec.statistic);
            assert!((rec.p_value - kolmogorov_q(d * en.sqrt())).abs() < 1e-9);
            kolmogorov_q(d * en.sqrt()) < 0.05
        })
        .collect();
    let kept = mask.kept_indices();
    assert_eq!(kept, oracle);
    assert!((0..5).all(|j| kept.contains(&j)), "{kept:?}");
    // 45 null features at alpha 0.05: Binomial(45, 0.05) false positives.
    assert!(kept.len() - 5 <= 8, "{kept:?}");

    let welch = select_rows(&m, &all, &labels, SelectionTest::Welch, 0.05).unwrap();
    assert!((0..5).all(|j| welch.kept_indices().contains(&j)));
    assert!(welch.records[..5].iter().all(|r| r.p_value < 1e-20));
}

#[test]
fn synthetic_text_width_is_8341() {
    let synth = generate(&SynthConfig {
        images: false,
        ..SynthConfig::default()
    })
    .unwrap();
    let data = ExperimentData::from_corpus(
        &synth.corpus,
        LabelSetup::LabelII,
        &TextFeaturizer::offline(),
        None,
        Aggregation::Mean,
        TfidfConfig {
            max_terms: Some(8042),
            ..TfidfConfig::default()
        },
    )
    .unwrap();
    let text = data.text.as_ref().unwrap();
    let ids: Vec<&str> = data.grouping.train().ids().collect();
    let (m, _) = text.fold(&ids, &[], &[]).unwrap();
    assert_eq!(text.base().n_cols(), 299);
    assert_eq!(m.n_cols(), 8341);
    assert_eq!(m.n_rows(), 400);
}

fn small_synth(intermediate: usize) -> fundsentry::corpus::Corpus {
    generate(&SynthConfig {
        n_per_class: 60,
        n_intermediate_per_class: intermediate,
        filler_vocabulary: 400,
        filler_words: 40,
        images: false,
        ..SynthConfig::default()
    })
    .unwrap()
    .corpus
}

fn nb_config(setup: LabelSetup, iterations: usize) -> ExperimentConfig {
    ExperimentConfig {
        label_setup: setup,
        classifier: ClassifierKind::GaussianNb,
        iterations: Some(iterations),
        seed: 3,
        ..ExperimentConfig::default()
    }
}

#[test]
fn noise_images_do_not_sink_the_ensemble() {
    let corpus = small_synth(0);
    let data = ExperimentData::from_corpus(
        &corpus,
        LabelSetup::LabelII,
        &TextFeaturizer::offline(),
        None,
        Aggregation::Mean,
        TfidfConfig::default(),
    )
    .unwrap();
    let ids: Vec<String> = data.grouping.train().ids().map(str::to_string).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let names: Vec<String> = image_feature_names().into_iter().take(40).collect();
    let rows: Vec<Vec<f64>> = ids.iter().map(|_| (0..40).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    let noise = FeatureMatrix::from_rows(ids, names.into(), rows).unwrap();
    let data = ExperimentData::new(data.grouping.clone(), data.text, Some(ModalitySource::matrix(noise)));
    let [text, image, ensemble] = run_all_modalities(&nb_config(LabelSetup::LabelII, 40), &data).unwrap();
    let (t, i, e) = (
        text.distribution.mean("auc"),
        image.distribution.mean("auc"),
        ensemble.distribution.mean("auc"),
    );
    assert!(t > 0.95, "text {t}");
    assert!(i < 0.7, "image {i}");
    assert!(e >= 0.9 * t, "ensemble {e} vs text {t}");
}

#[test]
fn label3_tracks_label2() {
    let corpus = small_synth(60);
    let auc = |setup| {
        let data = ExperimentData::from_corpus(
            &corpus,
            setup,
            &TextFeaturizer::offline(),
            None,
            Aggregation::Mean,
            TfidfConfig::default(),
        )
        .unwrap();
        if setup == LabelSetup::LabelIII {
            let Grouping::Transfer { test, .. } = &data.grouping else {
                panic!("Label III has a held-out side")
            };
            assert_eq!(test.count(Label::Fraud), 60);
            assert_eq!(test.count(Label::NotFraud), 60);
        }
        run_experiment(&nb_config(setup, 30), &data).unwrap().distribution.mean("auc")
    };
    let (two, three) = (auc(LabelSetup::LabelII), auc(LabelSetup::LabelIII));
    assert!(two > 0.9, "{two}");
    assert!((two - three).abs() <= 0.1, "Label II {two} vs Label III {three}");
}
