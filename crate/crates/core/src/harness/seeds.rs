//! Seed splitting.
//!
//! Iteration `i` uses `ChaCha8Rng::seed_from_u64(master)` moved to stream
//! `16 * i + purpose`. Streams are independent keystreams of the same key, so
//! every (iteration, purpose) pair gets its own generator and no iteration's
//! draws depend on another's.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Split = 0,
    Text = 1,
    Image = 2,
    Final = 3,
}

pub fn iteration_rng(master: u64, iteration: usize, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(iteration as u64 * 16 + purpose as u64);
    rng
}

/// A 64-bit seed for a classifier, drawn from the purpose's stream.
pub fn derived_seed(master: u64, iteration: usize, purpose: Purpose) -> u64 {
    iteration_rng(master, iteration, purpose).next_u64()
}
