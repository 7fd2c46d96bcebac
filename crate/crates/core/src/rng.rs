//! Seed derivation.
//!
//! One root seed fans out into independent, reproducible streams. Derivation
//! is a splitmix64 mix over the root and a list of tags, so adding a stream
//! never perturbs existing ones and the mapping is stable across platforms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Mix a root seed with a sequence of tags into a derived seed.
pub fn derive_seed(root: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(root);
    for &t in tags {
        s = splitmix64(s ^ splitmix64(t));
    }
    s
}

/// Hash a string tag so names can participate in seed derivation.
pub fn tag(name: &str) -> u64 {
    let mut s = 0xcbf29ce484222325u64; // FNV-1a
    for b in name.as_bytes() {
        s ^= *b as u64;
        s = s.wrapping_mul(0x100000001b3);
    }
    s
}

/// Deterministic stream for a derived seed.
pub fn stream(root: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, tags))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
