//! Random number plumbing.
//!
//! Every run owns one [`SimRng`], a ChaCha8 stream seeded through
//! `SeedableRng::seed_from_u64`. Integer and float draws are derived here
//! rather than through `rand`'s distributions so that the mapping from raw
//! stream words to simulation decisions is fixed by this crate alone:
//!
//! * `below(n)`: Lemire's multiply-shift on one `u32`, with rejection.
//! * `coin()`: top bit of one `u32`.
//! * `unit()`: top 53 bits of one `u64`, scaled to `[0, 1)`.
//! * geometric gaps: `floor(ln(1 - unit()) / ln(1 - p))`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bits::BitString;

/// Source of raw random words. Everything the engine draws goes through the
/// provided methods, so a scripted implementation fully controls a step.
pub trait RandomSource {
    fn next_u32(&mut self) -> u32;
    fn next_u64(&mut self) -> u64;

    /// Uniform integer in `0..n`.
    fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        assert!(n <= u32::MAX as usize, "below() range too large: {n}");
        let n = n as u32;
        let mut m = u64::from(self.next_u32()) * u64::from(n);
        let mut low = m as u32;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = u64::from(self.next_u32()) * u64::from(n);
                low = m as u32;
            }
        }
        (m >> 32) as usize
    }

    fn coin(&mut self) -> bool {
        self.next_u32() >> 31 == 1
    }

    /// Uniform real in `[0, 1)`.
    fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.unit() < p
        }
    }

    /// Failures before the first success of a Bernoulli(`p`) sequence,
    /// for `0 < p < 1`.
    fn geometric_gap(&mut self, p: f64) -> usize {
        debug_assert!(p > 0.0 && p < 1.0);
        let u = 1.0 - self.unit();
        let gap = (u.ln() / (-p).ln_1p()).floor();
        if gap.is_finite() && gap < usize::MAX as f64 {
            gap as usize
        } else {
            usize::MAX
        }
    }
}

/// Flips each bit of `bits` at positions `>= start` independently with
/// probability `p`, scanning left to right. Returns the number of flips.
pub fn flip_bits<R: RandomSource + ?Sized>(
    bits: &mut BitString,
    start: usize,
    p: f64,
    rng: &mut R,
) -> usize {
    let len = bits.len();
    if p <= 0.0 || start >= len {
        return 0;
    }
    if p >= 1.0 {
        if start == 0 {
            bits.invert();
        } else {
            (start..len).for_each(|i| bits.flip(i));
        }
        return len - start;
    }
    let mut flipped = 0;
    let mut pos = start.saturating_add(rng.geometric_gap(p));
    while pos < len {
        bits.flip(pos);
        flipped += 1;
        pos = pos.saturating_add(1).saturating_add(rng.geometric_gap(p));
    }
    flipped
}

/// The per-run generator.
#[derive(Clone, Debug)]
pub struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn seed_from_u64(seed: u64) -> Self {
        SimRng(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl PartialEq for SimRng {
    fn eq(&self, other: &Self) -> bool {
        self.0.get_seed() == other.0.get_seed()
            && self.0.get_stream() == other.0.get_stream()
            && self.0.get_word_pos() == other.0.get_word_pos()
    }
}

impl RandomSource for SimRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
}

/// SplitMix64 finalizer; a bijection on `u64`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `ordinal`-th run under `master`.
pub fn derive_seed(master: u64, ordinal: u64) -> u64 {
    splitmix64(master.wrapping_add(ordinal.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}
