//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a [`SeedStream`], a thin layer
//! over the SplitMix64 generator. The conversions from raw 64-bit outputs are
//! fixed here so that another implementation can replay the same draws:
//!
//! * `next_u64`: one SplitMix64 step (state += 0x9E3779B97F4A7C15, then the
//!   standard xor-shift-multiply finalizer).
//! * `next_f64`: `(next_u64 >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `below(n)`: `(next_u64 * n) >> 64` in 128-bit arithmetic, uniform on `0..n`.
//! * `gaussian`: Box-Muller with `u1 = 1 - next_f64()`, `u2 = next_f64()`,
//!   returning `sqrt(-2 ln u1) * cos(2 pi u2)`; the sine branch is discarded.
//!
//! Named sub-seeds let independent blocks (graph, partition, data, init)
//! draw from a single global seed without perturbing each other:
//! `sub_seed(global, name)` is the first SplitMix64 output from state
//! `global ^ fnv1a64(name)`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Deterministic random stream used throughout the crate.
#[derive(Debug, Clone)]
pub struct SeedStream {
    inner: SplitMix64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw on `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`. Returns 0 when `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform draw on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// In-place Fisher-Yates shuffle, walking from the last index down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// 64-bit FNV-1a hash of a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Derive the seed of a named block from the global seed.
pub fn sub_seed(global: u64, name: &str) -> u64 {
    SeedStream::new(global ^ fnv1a64(name.as_bytes())).next_u64()
}
