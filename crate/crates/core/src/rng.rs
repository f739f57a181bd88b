//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by SHA-256 of
//! `(master_seed, replica, tag)`, so adding a new stage tag never shifts the
//! draws of an existing stage and replicas can run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

pub fn stream(master_seed: u64, replica: u64, tag: &str) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(b"levytree-stream-v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update(replica.to_le_bytes());
    hasher.update((tag.len() as u64).to_le_bytes());
    hasher.update(tag.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

/// Uniform draw on (0, 1], safe to feed into `ln`.
pub fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Exponential first-arrival time of a clock with the given rate. A zero
/// rate never rings.
pub fn exponential<R: rand::Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u = open_unit(rng);
    if rate > 0.0 {
        -u.ln() / rate
    } else {
        f64::INFINITY
    }
}
