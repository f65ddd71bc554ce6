//! Counter-based randomness.
//!
//! Every random quantity is a pure function of `(seed, counter...)`, so
//! results do not depend on generation order or on how work is split
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a path of counters into a seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed), |acc, &p| mix64(acc ^ mix64(p)))
}

/// An independent generator for the stream identified by `path`.
pub fn stream_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}

/// Uniform on the open interval (0, 1), from 53 random bits.
#[inline]
pub fn counter_uniform(seed: u64, index: u64, lane: u64) -> f64 {
    let bits = derive_seed(seed, &[index, lane]) >> 11;
    (bits as f64 + 0.5) / (1u64 << 53) as f64
}

/// Standard normal variate for entry `index`, by Box-Muller.
pub fn counter_normal(seed: u64, index: u64) -> f64 {
    let u1 = counter_uniform(seed, index, 0);
    let u2 = counter_uniform(seed, index, 1);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
