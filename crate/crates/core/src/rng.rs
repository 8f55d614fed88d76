//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator whose 32-byte key is
//! `SHA-256(seed as u64 little-endian || label as UTF-8)`. Distinct labels give
//! independent streams from one run seed, so e.g. adaptor initialisation does
//! not depend on how many shuffles happened before it.
//!
//! Uniform doubles use the top 53 bits of a `u64` draw; normals use the
//! Box-Muller transform with one normal returned per pair of uniforms.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

pub fn derive(seed: u64, label: &str) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw on `[0, 1)`.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw on `[low, high]`.
pub fn uniform_in(rng: &mut impl RngCore, low: f64, high: f64) -> f64 {
    low + (high - low) * uniform(rng)
}

pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    // 1 - u keeps the log argument in (0, 1].
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle<T>(rng: &mut impl Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}
