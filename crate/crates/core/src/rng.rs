//! Deterministic, splittable random streams.
//!
//! A stream is identified by a root seed and a path of child indices. The
//! path is folded into a 256-bit ChaCha8 key, so splitting costs O(1) and the
//! output of a stream depends only on `(seed, path)`. Replica `r` of an
//! experiment always draws from `root.split(r)`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_key(parent: &[u64; 4], child: u64) -> [u64; 4] {
    let c = mix64(child.wrapping_add(GOLDEN));
    let mut out = [0u64; 4];
    let mut acc = c;
    for (i, word) in parent.iter().enumerate() {
        acc = mix64(acc ^ word.rotate_left(17 * i as u32 + 5)).wrapping_add(GOLDEN);
        out[i] = acc;
    }
    // Second pass so every output word depends on every parent word.
    for i in 0..4 {
        acc = mix64(acc ^ out[(i + 1) % 4]);
        out[i] ^= acc;
    }
    out
}

fn root_key(seed: u64) -> [u64; 4] {
    let mut s = seed;
    let mut key = [0u64; 4];
    for word in &mut key {
        s = s.wrapping_add(GOLDEN);
        *word = mix64(s);
    }
    key
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    path: Vec<u64>,
    key: [u64; 4],
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::from_key(seed, Vec::new(), root_key(seed))
    }

    /// Rebuild a stream from a recorded `(seed, path)`.
    pub fn from_path(seed: u64, path: &[u64]) -> Self {
        path.iter()
            .fold(Self::new(seed), |stream, &child| stream.split(child))
    }

    fn from_key(seed: u64, path: Vec<u64>, key: [u64; 4]) -> Self {
        let mut bytes = [0u8; 32];
        for (chunk, word) in bytes.chunks_exact_mut(8).zip(key.iter()) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        Self {
            seed,
            path,
            key,
            inner: ChaCha8Rng::from_seed(bytes),
        }
    }

    /// Child stream `child`; independent of the parent's current position.
    pub fn split(&self, child: u64) -> Self {
        let mut path = self.path.clone();
        path.push(child);
        Self::from_key(self.seed, path, derive_key(&self.key, child))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Uniform draw in the half-open interval (0, 1].
    #[inline]
    pub fn open01(&mut self) -> f64 {
        // 53 random mantissa bits, shifted off zero.
        ((self.inner.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [0, 1).
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_bit(&mut self) -> bool {
        self.inner.next_u64() >> 63 == 1
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Uniform integer in `0..bound` (bound > 0), by Lemire's multiply-shift
    /// with rejection.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.inner.next_u64();
            let m = (x as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn chi_square_uniform(rng: &mut RngStream, draws: usize, bins: usize) -> f64 {
        let mut counts = vec![0u64; bins];
        for _ in 0..draws {
            counts[(rng.unit() * bins as f64) as usize] += 1;
        }
        let expected = draws as f64 / bins as f64;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat)
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = RngStream::new(43);
        assert_ne!(RngStream::new(42).next_u64(), c.next_u64());
    }

    #[test]
    fn split_is_position_independent_and_replayable() {
        let root = RngStream::new(7);
        let mut advanced = root.clone();
        for _ in 0..10 {
            advanced.next_u64();
        }
        let mut a = root.split(3).split(1);
        let mut b = advanced.split(3).split(1);
        let mut c = RngStream::from_path(7, &[3, 1]);
        for _ in 0..100 {
            let x = a.next_u64();
            assert_eq!(x, b.next_u64());
            assert_eq!(x, c.next_u64());
        }
        assert_eq!(a.path(), &[3, 1]);
    }

    #[test]
    fn split_children_pass_uniformity_and_differ() {
        let root = RngStream::new(2024);
        let mut s0 = root.split(0);
        let mut s1 = root.split(1);
        assert!(chi_square_uniform(&mut s0, 1_000_000, 100) > 0.001);
        assert!(chi_square_uniform(&mut s1, 1_000_000, 100) > 0.001);

        // Paired draws from sibling streams are uncorrelated.
        let mut s0 = root.split(0);
        let mut s1 = root.split(1);
        let n = 200_000;
        let mut sxy = 0.0;
        for _ in 0..n {
            sxy += (s0.unit() - 0.5) * (s1.unit() - 0.5);
        }
        let corr = sxy / n as f64 * 12.0;
        assert!(corr.abs() < 5.0 / (n as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn below_and_open01_ranges() {
        let mut r = RngStream::new(1);
        let mut seen = [false; 7];
        for _ in 0..10_000 {
            let x = r.below(7);
            seen[x as usize] = true;
            let u = r.open01();
            assert!(u > 0.0 && u <= 1.0);
        }
        assert!(seen.iter().all(|&s| s));
    }
}
