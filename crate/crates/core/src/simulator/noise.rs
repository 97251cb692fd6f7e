//! Counter-keyed Gaussian noise.
//!
//! Each path owns one ChaCha8 stream selected by `path_index` under a key
//! derived from the run seed. Every step consumes exactly two 64-bit words,
//! so the increments of step `n` sit at a fixed keystream offset and can be
//! regenerated from `(seed, path_index, step)` alone, independent of how
//! paths are scheduled.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::f64::consts::TAU;

/// Keystream words (32-bit) consumed per step.
const WORDS_PER_STEP: u128 = 4;

#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_index);
        NoiseStream { rng }
    }

    /// Positions the stream so the next draw is the one for `step`.
    pub fn at_step(seed: u64, path_index: u64, step: u64) -> Self {
        let mut s = Self::new(seed, path_index);
        s.rng.set_word_pos(step as u128 * WORDS_PER_STEP);
        s
    }

    /// Two independent standard normals (Box–Muller).
    #[inline]
    pub fn next_pair(&mut self) -> [f64; 2] {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        // (0, 1] so the log is finite
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        [r * c, r * s]
    }

    /// Wiener increment over `dt`, given `sqrt(dt)`.
    #[inline]
    pub fn increment(&mut self, sqrt_dt: f64) -> [f64; 2] {
        let [z0, z1] = self.next_pair();
        [z0 * sqrt_dt, z1 * sqrt_dt]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeking_matches_sequential_draws() {
        let mut seq = NoiseStream::new(99, 3);
        let draws: Vec<_> = (0..50).map(|_| seq.next_pair()).collect();
        for step in [0u64, 1, 17, 49] {
            let mut s = NoiseStream::at_step(99, 3, step);
            assert_eq!(s.next_pair(), draws[step as usize]);
        }
    }

    #[test]
    fn streams_differ_by_path_and_seed() {
        let a = NoiseStream::new(1, 0).next_pair();
        let b = NoiseStream::new(1, 1).next_pair();
        let c = NoiseStream::new(2, 0).next_pair();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn standard_normal_moments() {
        let mut s = NoiseStream::new(7, 0);
        let n = 200_000;
        let (mut m1, mut m2, mut cross) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let [x, y] = s.next_pair();
            m1 += x + y;
            m2 += x * x + y * y;
            cross += x * y;
        }
        let count = 2.0 * n as f64;
        let mean = m1 / count;
        let var = m2 / count;
        // 5-sigma bands
        assert!(mean.abs() < 5.0 / count.sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0 / count).sqrt());
        assert!((cross / n as f64).abs() < 5.0 / (n as f64).sqrt());
    }
}
