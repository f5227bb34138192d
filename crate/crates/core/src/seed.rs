//! Deterministic seeding.
//!
//! One master seed drives every random stream in a run. Each component gets
//! `master ^ fnv1a64(path)`, so adding a node never shifts the streams of
//! the nodes that already existed.

use std::hash::Hasher;

use fnv::FnvHasher;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stable 64-bit FNV-1a hash of a component path such as `edge/3/generator`.
pub fn path_hash(path: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(path.as_bytes());
    h.finish()
}

pub fn derive_seed(master: u64, path: &str) -> u64 {
    master ^ path_hash(path)
}

/// Portable RNG used everywhere a seed is consumed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
