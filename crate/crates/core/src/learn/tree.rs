//! CART classification tree on weighted samples.
//!
//! Splits minimise the weighted Gini impurity of the children. The best split
//! is taken even when it does not lower impurity (this is what lets a tree
//! fit XOR). Candidate thresholds are midpoints between consecutive distinct
//! values; rows with `x <= threshold` go left. Equal gains keep the lower
//! feature index, then the lower threshold.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    /// Minimum number of distinct training rows in each leaf.
    pub min_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Weighted fraud fraction of the training rows that reached the leaf.
    Leaf { p: f64 },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

struct Builder<'a> {
    x: &'a [f64],
    d: usize,
    y: &'a [Label],
    w: &'a [f64],
    params: TreeParams,
    rng: Option<&'a mut ChaCha8Rng>,
    nodes: Vec<Node>,
}

fn gini(total: f64, pos: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let q = pos / total;
    2.0 * q * (1.0 - q)
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn value(&self, row: usize, f: usize) -> f64 {
        self.x[row * self.d + f]
    }

    fn is_constant(&self, rows: &[usize], f: usize) -> bool {
        let first = self.value(rows[0], f);
        rows.iter().all(|&r| self.value(r, f) == first)
    }

    fn candidate_features(&mut self, rows: &[usize]) -> Vec<usize> {
        let all = self.params.max_features.is_none_or(|m| m >= self.d);
        if all {
            return (0..self.d).collect();
        }
        let m = self.params.max_features.unwrap_or(self.d).max(1);
        let rng = self.rng.as_deref_mut().expect("feature subsampling needs an rng");
        let mut perm: Vec<usize> = (0..self.d).collect();
        perm.shuffle(rng);
        // Constant features do not count towards the budget.
        let mut chosen = Vec::with_capacity(m);
        for f in perm {
            if chosen.len() == m {
                break;
            }
            if !self.is_constant(rows, f) {
                chosen.push(f);
            }
        }
        chosen.sort_unstable();
        chosen
    }

    fn best_split_on(&self, rows: &[usize], f: usize, total: f64, pos: f64, parent: f64) -> Option<Candidate> {
        let mut sorted: Vec<(f64, usize)> = rows.iter().map(|&r| (self.value(r, f), r)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = sorted.len();
        let min_leaf = self.params.min_leaf.max(1);
        let (mut wl, mut pl) = (0.0, 0.0);
        let mut best: Option<Candidate> = None;
        for i in 0..n - 1 {
            let r = sorted[i].1;
            wl += self.w[r];
            if self.y[r].is_fraud() {
                pl += self.w[r];
            }
            let (a, b) = (sorted[i].0, sorted[i + 1].0);
            if a == b || i + 1 < min_leaf || n - i - 1 < min_leaf {
                continue;
            }
            let (wr, pr) = (total - wl, pos - pl);
            let child = (wl * gini(wl, pl) + wr * gini(wr, pr)) / total;
            let gain = parent - child;
            if best.as_ref().is_none_or(|c| gain > c.gain) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
        best
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let total: f64 = rows.iter().map(|&r| self.w[r]).sum();
        let pos: f64 = rows
            .iter()
            .filter(|&&r| self.y[r].is_fraud())
            .map(|&r| self.w[r])
            .sum();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { p: pos / total });
        let pure = pos == 0.0 || pos == total;
        let depth_capped = self.params.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || rows.len() < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let parent = gini(total, pos);
        let mut best: Option<Candidate> = None;
        for f in self.candidate_features(&rows) {
            if let Some(c) = self.best_split_on(&rows, f, total, pos, parent) {
                if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                    best = Some(c);
                }
            }
        }
        let Some(split) = best else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.value(r, split.feature) <= split.threshold);
        let left = self.build(left_rows, depth + 1);
        let right = self.build(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

impl DecisionTree {
    /// Fits on a row-major `n x d` block. Rows with zero weight are ignored.
    /// `rng` is only consulted when `max_features < d`.
    pub fn fit_weighted(
        x: &[f64],
        d: usize,
        y: &[Label],
        w: &[f64],
        params: TreeParams,
        rng: Option<&mut ChaCha8Rng>,
    ) -> DecisionTree {
        let rows: Vec<usize> = (0..y.len()).filter(|&r| w[r] > 0.0).collect();
        let mut b = Builder {
            x,
            d,
            y,
            w,
            params,
            rng,
            nodes: Vec::new(),
        };
        if rows.is_empty() {
            return DecisionTree {
                nodes: vec![Node::Leaf { p: 0.5 }],
            };
        }
        b.build(rows, 0);
        DecisionTree { nodes: b.nodes }
    }

    pub fn fit(x: &[f64], d: usize, y: &[Label], params: TreeParams) -> DecisionTree {
        Self::fit_weighted(x, d, y, &vec![1.0; y.len()], params, None)
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { p } => return *p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}
