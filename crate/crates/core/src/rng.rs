//! Counter-based random streams.
//!
//! A stream is addressed by `(seed, stream_id)` and its position is a 128-bit
//! word counter, so any point of a run can be captured and replayed exactly.
//! Chains derive their stream ids from their logical coordinates (chain index,
//! role, block index, ...) with [`stream_id`], which keeps results independent
//! of how work is scheduled across threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::special::normal_quantile;

const TWO_POW_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Mixes a list of logical coordinates into a single stream id.
pub fn stream_id(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243f_6a88_85a3_08d3;
    for &p in parts {
        h = splitmix64(h ^ p.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    /// Stream for a tuple of logical coordinates under `seed`.
    pub fn for_coords(seed: u64, coords: &[u64]) -> Self {
        Self::new(seed, stream_id(coords))
    }

    /// Restores a stream at a saved counter position.
    pub fn at_counter(seed: u64, stream_id: u64, counter: u128) -> Self {
        let mut s = Self::new(seed, stream_id);
        s.inner.set_word_pos(counter);
        s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }

    /// Standard normal by inversion, so the draw is a monotone function of one uniform.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        ((self.inner.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_from_counter_is_exact() {
        let mut a = RngStream::new(7, 3);
        for _ in 0..37 {
            a.uniform();
        }
        let pos = a.counter();
        let tail: Vec<u64> = (0..10).map(|_| a.next_u64()).collect();
        let mut b = RngStream::at_counter(7, 3, pos);
        let replay: Vec<u64> = (0..10).map(|_| b.next_u64()).collect();
        assert_eq!(tail, replay);
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(1, stream_id(&[0, 1]));
        let mut b = RngStream::new(1, stream_id(&[1, 0]));
        let xa: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        assert_ne!(xa, xb);
    }

    #[test]
    fn uniform_is_open_and_centered() {
        let mut r = RngStream::new(11, 0);
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = r.uniform();
            assert!(u > 0.0 && u < 1.0);
            sum += u;
        }
        let mean = sum / n as f64;
        // sd of the mean is 1/sqrt(12 n)
        assert!((mean - 0.5).abs() < 4.0 / (12.0 * n as f64).sqrt());
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = RngStream::new(5, 5);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            seen[r.below(7) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
