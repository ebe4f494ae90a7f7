//! Deterministic, order-independent sampling from product measures.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::measure1d::Measure1D;
use super::product::ProductMeasure;

/// Random stream dedicated to one (seed, coordinate, sample) triple.
pub fn coordinate_rng(seed: u64, coordinate: usize, sample: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(coordinate as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(sample as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

pub fn draw(mu: &Measure1D, seed: u64, coordinate: usize, sample: usize) -> f64 {
    mu.sample(&mut coordinate_rng(seed, coordinate, sample))
}

/// `count x depth` matrix; row `i`, column `n-1` holds coordinate `n` of sample `i`.
pub fn sample(mu: &ProductMeasure, depth: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count).into_par_iter().map(|i| (1..=depth).map(|n| draw(mu.at(n), seed, n, i)).collect()).collect()
}
