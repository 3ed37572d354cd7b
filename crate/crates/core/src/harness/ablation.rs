//! Leave-one-group-out ablation.

use super::config::ExperimentConfig;
use super::data::ExperimentData;
use super::experiment::{run_protocol, ExperimentRun};
use super::HarnessError;
use crate::features::FeatureGroup;
use crate::learn::Metrics;

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    /// `None` for the full model.
    pub left_out: Option<FeatureGroup>,
    pub run: ExperimentRun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    /// Full model first, then one row per requested group.
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn full(&self) -> &ExperimentRun {
        &self.rows[0].run
    }

    /// Mean AUC of the row minus mean AUC of the full model.
    pub fn delta_auc(&self, row: &AblationRow) -> f64 {
        row.run.distribution.mean("auc") - self.full().distribution.mean("auc")
    }

    /// `left_out,n,<metric>_mean,<metric>_std...,delta_auc`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["left_out".to_string(), "n".to_string()];
        for m in Metrics::NAMES {
            header.push(format!("{m}_mean"));
            header.push(format!("{m}_std"));
        }
        header.push("delta_auc".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let d = &row.run.distribution;
            let mut rec = vec![
                row.left_out.map_or("none".to_string(), |g| g.as_str().to_string()),
                d.len().to_string(),
            ];
            for m in Metrics::NAMES {
                rec.push(d.mean(m).to_string());
                rec.push(d.std(m).to_string());
            }
            rec.push(self.delta_auc(row).to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reruns `config` once with everything and once per group with that group removed.
pub fn run_ablation(
    config: &ExperimentConfig,
    data: &ExperimentData,
    groups: &[FeatureGroup],
) -> Result<AblationTable, HarnessError> {
    if groups.is_empty() {
        return Err(HarnessError::Config("ablation needs at least one group".into()));
    }
    let mut rows = vec![AblationRow {
        left_out: None,
        run: run_protocol(config, data, &[])?,
    }];
    for &g in groups {
        rows.push(AblationRow {
            left_out: Some(g),
            run: run_protocol(config, data, &[g])?,
        });
    }
    Ok(AblationTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Grouping, Label, LabelSetup, LabeledSet};
    use crate::features::{FeatureMatrix, FeatureNames};
    use crate::harness::data::ModalitySource;
    use crate::learn::ClassifierKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn data() -> ExperimentData {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let ids: Vec<String> = (0..2 * n).map(|i| format!("c{i:03}")).collect();
        let labels = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), if i < n { Label::Fraud } else { Label::NotFraud }))
            .collect();
        let names: FeatureNames = vec!["read.signal".to_string(), "ner.noise".to_string()].into();
        let rows = (0..2 * n)
            .map(|i| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                vec![a + if i < n { 4.0 } else { 0.0 }, b]
            })
            .collect();
        ExperimentData::new(
            Grouping::Single(LabeledSet::new(labels)),
            Some(ModalitySource::matrix(FeatureMatrix::from_rows(ids, names, rows).unwrap())),
            None,
        )
    }

    #[test]
    fn one_row_per_group_plus_full() {
        let config = ExperimentConfig {
            label_setup: LabelSetup::LabelII,
            classifier: ClassifierKind::GaussianNb,
            iterations: Some(30),
            ..ExperimentConfig::default()
        };
        let t = run_ablation(&config, &data(), &[FeatureGroup::Ner, FeatureGroup::Readability]).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!(t.delta_auc(&t.rows[1]).abs() <= 0.02);
        assert!((t.rows[2].run.distribution.mean("auc") - 0.5).abs() <= 0.05);
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().starts_with("none,30,"));
        assert!(run_ablation(&config, &data(), &[]).is_err());
    }
}
