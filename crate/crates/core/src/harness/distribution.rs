//! Per-iteration metric samples and their summaries.

use serde::{Deserialize, Serialize};

use crate::learn::Metrics;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsDistribution {
    pub samples: Vec<Metrics>,
}

/// Five-number summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quartiles(values: &[f64]) -> Quartiles {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Quartiles {
        min: v[0],
        q1: quantile_sorted(&v, 0.25),
        median: quantile_sorted(&v, 0.5),
        q3: quantile_sorted(&v, 0.75),
        max: v[v.len() - 1],
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single sample.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

impl MetricsDistribution {
    pub fn new(samples: Vec<Metrics>) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples of one metric (see [`Metrics::NAMES`]).
    pub fn values(&self, metric: &str) -> Vec<f64> {
        self.samples
            .iter()
            .map(|m| m.get(metric).unwrap_or_else(|| panic!("unknown metric {metric}")))
            .collect()
    }

    pub fn mean(&self, metric: &str) -> f64 {
        mean(&self.values(metric))
    }

    pub fn std(&self, metric: &str) -> f64 {
        std_dev(&self.values(metric))
    }

    pub fn quartiles(&self, metric: &str) -> Quartiles {
        quartiles(&self.values(metric))
    }
}
