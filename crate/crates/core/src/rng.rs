//! Portable, seedable randomness.
//!
//! Every random draw in the crate goes through [`PortableRng`], a ChaCha20
//! stream keyed from a 64-bit seed. The key is the little-endian bytes of four
//! successive SplitMix64 outputs starting from the seed, and the ChaCha stream
//! id is 0. Child seeds come from [`RngSeed::derive`], which mixes the parent
//! seed with an index through SplitMix64 finalizers, so derived streams do not
//! depend on execution order.
//!
//! Continuous variates use explicit transforms of 53-bit uniforms so they can
//! be replayed outside Rust:
//!
//! * uniform: `(u64 >> 11) * 2^-53`, in `[0, 1)`
//! * normal: Box-Muller cosine branch, `sqrt(-2 ln u1) cos(2 pi u2)` with
//!   `u1 = 1 - uniform()` (so `u1` is in `(0, 1]`)
//! * exponential(1): `-ln(1 - uniform())`

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Child seed for stream `index`.
    pub fn derive(self, index: u64) -> RngSeed {
        RngSeed(mix64(self.0 ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))))
    }

    pub fn rng(self) -> PortableRng {
        PortableRng::new(self)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

pub struct PortableRng {
    inner: ChaCha20Rng,
}

impl PortableRng {
    pub fn new(seed: RngSeed) -> Self {
        let mut state = seed.0;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN_GAMMA);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        PortableRng {
            inner: ChaCha20Rng::from_seed(key),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }

    /// Uniform index in `0..bound`.
    pub fn index(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((self.uniform() * bound as f64) as usize).min(bound - 1)
    }

    /// `count` distinct indices from `0..n`, in draw order (partial Fisher-Yates).
    pub fn sample_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        let count = count.min(n);
        for i in 0..count {
            let j = i + self.index(n - i);
            idx.swap(i, j);
        }
        idx.truncate(count);
        idx
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        let n = items.len();
        for i in 0..n.saturating_sub(1) {
            let j = i + self.index(n - i);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngSeed(7).rng();
        let mut b = RngSeed(7).rng();
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let s = RngSeed(42);
        assert_ne!(s.derive(0), s.derive(1));
        assert_ne!(s.derive(0), s);
        assert_eq!(s.derive(3), s.derive(3));
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = RngSeed(1).rng();
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn normal_moments() {
        let mut r = RngSeed(3).rng();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| r.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.01, "{mean}");
        assert!((var - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn exponential_mean() {
        let mut r = RngSeed(5).rng();
        let n = 200_000;
        let m = (0..n).map(|_| r.exponential()).sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 0.01, "{m}");
    }

    #[test]
    fn sample_indices_distinct() {
        let mut r = RngSeed(9).rng();
        let mut idx = r.sample_indices(50, 30);
        idx.sort_unstable();
        idx.dedup();
        assert_eq!(idx.len(), 30);
        assert!(idx.iter().all(|&i| i < 50));
    }
}
