//! One-hidden-layer perceptron: `d -> h (ReLU) -> 2`, softmax with negative
//! log-likelihood, trained by SGD with momentum and L2 weight decay.
//!
//! The update for every parameter `w` with gradient `g` is
//!
//! ```text
//! g <- g + weight_decay * w
//! buf <- momentum * buf + g
//! w <- w - lr * buf
//! ```
//!
//! Weights and biases start uniform in `+-1/sqrt(fan_in)`. Each training
//! sample is perturbed by Gaussian noise with standard deviation `noise_std`
//! before the forward pass. Parameters are flattened in the order
//! `W1 (h x d), b1 (h), W2 (2 x h), b2 (2)`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Hidden width; `None` uses the input dimension.
    pub hidden: Option<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub noise_std: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: None,
            epochs: 50,
            lr: 0.001,
            momentum: 0.9,
            weight_decay: 5e-4,
            batch_size: 1,
            noise_std: 0.1f64.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub d: usize,
    pub h: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    /// Mean training loss of each epoch.
    pub loss_trace: Vec<f64>,
}

struct Activations {
    z1: Vec<f64>,
    a1: Vec<f64>,
    /// Log-probabilities of (not fraud, fraud).
    logp: [f64; 2],
}

impl Mlp {
    pub fn init(d: usize, h: usize, rng: &mut ChaCha8Rng) -> Mlp {
        let mut uniform = |n: usize, fan_in: usize| {
            let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
            (0..n).map(|_| rng.random_range(-bound..bound)).collect::<Vec<f64>>()
        };
        let w1 = uniform(h * d, d);
        let b1 = uniform(h, d);
        let w2 = uniform(2 * h, h);
        let b2 = uniform(2, h);
        Mlp {
            d,
            h,
            w1,
            b1,
            w2,
            b2,
            loss_trace: Vec::new(),
        }
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn params(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let (a, rest) = p.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.b1.len());
        let (c, e) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2.copy_from_slice(e);
    }

    fn forward(&self, x: &[f64]) -> Activations {
        let mut z1 = self.b1.clone();
        for (j, z) in z1.iter_mut().enumerate() {
            let row = &self.w1[j * self.d..(j + 1) * self.d];
            *z += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        let a1: Vec<f64> = z1.iter().map(|v| v.max(0.0)).collect();
        let mut z2 = [self.b2[0], self.b2[1]];
        for (k, z) in z2.iter_mut().enumerate() {
            let row = &self.w2[k * self.h..(k + 1) * self.h];
            *z += row.iter().zip(&a1).map(|(w, v)| w * v).sum::<f64>();
        }
        let m = z2[0].max(z2[1]);
        let lse = m + ((z2[0] - m).exp() + (z2[1] - m).exp()).ln();
        Activations {
            z1,
            a1,
            logp: [z2[0] - lse, z2[1] - lse],
        }
    }

    /// Class probabilities `[not fraud, fraud]`.
    pub fn probabilities(&self, x: &[f64]) -> [f64; 2] {
        let a = self.forward(x);
        [a.logp[0].exp(), a.logp[1].exp()]
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.forward(x).logp[1].exp()
    }

    /// Adds the NLL gradient of one sample into `grad` (flattened order) and returns the loss.
    fn accumulate(&self, x: &[f64], y: Label, grad: &mut [f64]) -> f64 {
        let act = self.forward(x);
        let t = y.index();
        let loss = -act.logp[t];
        let dz2 = [
            act.logp[0].exp() - if t == 0 { 1.0 } else { 0.0 },
            act.logp[1].exp() - if t == 1 { 1.0 } else { 0.0 },
        ];
        let (gw1, rest) = grad.split_at_mut(self.w1.len());
        let (gb1, rest) = rest.split_at_mut(self.b1.len());
        let (gw2, gb2) = rest.split_at_mut(self.w2.len());
        for k in 0..2 {
            gb2[k] += dz2[k];
            for j in 0..self.h {
                gw2[k * self.h + j] += dz2[k] * act.a1[j];
            }
        }
        for j in 0..self.h {
            if act.z1[j] <= 0.0 {
                continue;
            }
            let dz1 = dz2[0] * self.w2[j] + dz2[1] * self.w2[self.h + j];
            gb1[j] += dz1;
            let row = &mut gw1[j * self.d..(j + 1) * self.d];
            for (g, v) in row.iter_mut().zip(x) {
                *g += dz1 * v;
            }
        }
        loss
    }

    /// Loss and analytic gradient of one sample, without weight decay.
    pub fn loss_and_gradient(&self, x: &[f64], y: Label) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.n_params()];
        let loss = self.accumulate(x, y, &mut grad);
        (loss, grad)
    }

    pub fn loss(&self, x: &[f64], y: Label) -> f64 {
        -self.forward(x).logp[y.index()]
    }

    fn sgd_step(&mut self, grad: &[f64], buf: &mut [f64], config: &MlpConfig) {
        let mut i = 0;
        for block in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            for w in block.iter_mut() {
                let g = grad[i] + config.weight_decay * *w;
                buf[i] = config.momentum * buf[i] + g;
                *w -= config.lr * buf[i];
                i += 1;
            }
        }
    }

    /// Trains on a row-major `n x d` block (expected to be standardised).
    pub fn fit(x: &[f64], d: usize, y: &[Label], config: &MlpConfig, seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = config.hidden.unwrap_or(d).max(1);
        let mut net = Mlp::init(d, h, &mut rng);
        let n = y.len();
        let noise = (config.noise_std > 0.0).then(|| Normal::new(0.0, config.noise_std).expect("finite std"));
        let mut order: Vec<usize> = (0..n).collect();
        let mut grad = vec![0.0; net.n_params()];
        let mut buf = vec![0.0; net.n_params()];
        let mut noisy = vec![0.0; d];
        let batch = config.batch_size.max(1);
        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(batch) {
                grad.fill(0.0);
                for &i in chunk {
                    noisy.copy_from_slice(&x[i * d..(i + 1) * d]);
                    if let Some(dist) = &noise {
                        for v in &mut noisy {
                            *v += dist.sample(&mut rng);
                        }
                    }
                    epoch_loss += net.accumulate(&noisy, y[i], &mut grad);
                }
                if chunk.len() > 1 {
                    let s = 1.0 / chunk.len() as f64;
                    grad.iter_mut().for_each(|g| *g *= s);
                }
                net.sgd_step(&grad, &mut buf, config);
            }
            net.loss_trace.push(epoch_loss / n.max(1) as f64);
        }
        net
    }
}
