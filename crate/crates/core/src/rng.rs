//! Seeded pseudo-random streams.
//!
//! The generator is xoshiro256** seeded through splitmix64, so a stream is
//! fully determined by its 64-bit seed and is reproducible across
//! implementations that follow the same published algorithms. Normal
//! variates use the polar Box–Muller method.

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of splitmix64. Used for seeding and for deriving child seeds.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th child stream of `parent_seed`.
///
/// Parallel consumers each take one child; the parent is never shared.
pub fn child_seed(parent_seed: u64, index: u64) -> u64 {
    let mut s = parent_seed ^ index.wrapping_mul(GOLDEN).rotate_left(17);
    splitmix64(&mut s)
}

/// What [`Rng::stream`] draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StreamKind {
    Uniform01,
    StdNormal,
    /// Bernoulli with success probability `p`, returned as 0.0 / 1.0.
    Bernoulli(f64),
}

/// xoshiro256** generator (period 2^256 − 1).
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    s: [u64; 4],
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng {
            seed,
            s,
            spare_normal: None,
        }
    }

    /// The seed this generator was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fresh generator for child stream `index`, see [`child_seed`].
    pub fn child(&self, index: u64) -> Rng {
        Rng::new(child_seed(self.seed, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [lo, hi).
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in 0..n. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Lemire's multiply-shift; the bias is below 2^-64 * n and ignored.
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal via the polar Box–Muller method.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * m);
                return u * m;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// `n` draws of the given kind.
    pub fn stream(&mut self, kind: StreamKind, n: usize) -> Result<Vec<f64>> {
        match kind {
            StreamKind::Uniform01 => Ok((0..n).map(|_| self.uniform()).collect()),
            StreamKind::StdNormal => Ok((0..n).map(|_| self.normal()).collect()),
            StreamKind::Bernoulli(p) => {
                check_probability(p)?;
                Ok((0..n)
                    .map(|_| if self.bernoulli(p) { 1.0 } else { 0.0 })
                    .collect())
            }
        }
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Index drawn from unnormalized nonnegative weights.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.uniform() * total;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        weights.len() - 1
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("probability {p} outside [0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = Rng::new(42).stream(StreamKind::Uniform01, 5).unwrap();
        let b = Rng::new(42).stream(StreamKind::Uniform01, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|u| (0.0..1.0).contains(u)));
    }

    #[test]
    fn bernoulli_degenerate() {
        let mut rng = Rng::new(1);
        let ones = rng.stream(StreamKind::Bernoulli(1.0), 100).unwrap();
        assert!(ones.iter().all(|&x| x == 1.0));
        let zeros = rng.stream(StreamKind::Bernoulli(0.0), 100).unwrap();
        assert!(zeros.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn bernoulli_rejects_bad_p() {
        let mut rng = Rng::new(1);
        assert!(matches!(
            rng.stream(StreamKind::Bernoulli(1.5), 3),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn normal_moments() {
        let n = 1_000_000;
        let z = Rng::new(7).stream(StreamKind::StdNormal, n).unwrap();
        let mean = z.iter().sum::<f64>() / n as f64;
        let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn children_differ() {
        let parent = Rng::new(3);
        let mut a = parent.child(0);
        let mut b = parent.child(1);
        assert_ne!(a.next_u64(), b.next_u64());
        assert_eq!(child_seed(3, 0), parent.child(0).seed());
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut v: Vec<usize> = (0..50).collect();
        Rng::new(9).shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
