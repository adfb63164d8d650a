//! Packed bit sequences.
//!
//! Bits are stored little-endian within `u64` words: position `i` (0-based)
//! lives in `words[i / 64]` at bit `i % 64`. Bits past `len` are always zero,
//! so derived equality and hashing compare only the live bits.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

const WORD: usize = 64;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(WORD)),
            len: 0,
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = Self::new();
        for b in bits {
            out.push(b);
        }
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Flips every bit.
    pub fn invert(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.clear_tail();
    }

    #[inline]
    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        if value {
            let i = self.len - 1;
            self.words[i / WORD] |= 1u64 << (i % WORD);
        }
    }

    #[inline]
    pub fn pop(&mut self) -> Option<bool> {
        if self.len == 0 {
            return None;
        }
        let bit = self.get(self.len - 1);
        self.len -= 1;
        if self.len.is_multiple_of(WORD) {
            self.words.pop();
        } else {
            self.clear_tail();
        }
        Some(bit)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The 64 bits starting at `start`; positions past the end read as zero.
    #[inline]
    pub fn read_word(&self, start: usize) -> u64 {
        let idx = start / WORD;
        let shift = start % WORD;
        let lo = self.words.get(idx).copied().unwrap_or(0);
        if shift == 0 {
            lo
        } else {
            let hi = self.words.get(idx + 1).copied().unwrap_or(0);
            (lo >> shift) | (hi << (WORD - shift))
        }
    }

    /// Unsigned value of the first `n` bits read most-significant first.
    pub fn leading_value(&self, n: usize) -> u64 {
        assert!(n <= 63, "leading_value supports at most 63 bits, got {n}");
        assert!(n <= self.len, "need {n} bits, have {}", self.len);
        if n == 0 {
            return 0;
        }
        let mask = (1u64 << n) - 1;
        (self.read_word(0) & mask).reverse_bits() >> (WORD - n)
    }

    /// Copy of the bits from `offset` to the end.
    pub fn suffix(&self, offset: usize) -> BitString {
        assert!(offset <= self.len);
        let len = self.len - offset;
        let mut words: Vec<u64> = (0..len.div_ceil(WORD))
            .map(|k| self.read_word(offset + k * WORD))
            .collect();
        if !len.is_multiple_of(WORD) {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % WORD)) - 1;
            }
        }
        BitString { words, len }
    }

    /// Number of positions where `self[offset + i] == other[i]`, over the
    /// overlap `i < min(self.len - offset, other.len)`.
    pub fn count_matches(&self, offset: usize, other: &BitString) -> usize {
        let avail = self.len.saturating_sub(offset);
        let overlap = avail.min(other.len);
        let mut matches = 0usize;
        let mut k = 0;
        while k < overlap {
            let take = (overlap - k).min(WORD);
            let a = self.read_word(offset + k);
            let b = other.words[k / WORD];
            let mut same = !(a ^ b);
            if take < WORD {
                same &= (1u64 << take) - 1;
            }
            matches += same.count_ones() as usize;
            k += WORD;
        }
        matches
    }

    /// `head[0..cut]` followed by `tail[cut..]`; the result has `tail`'s length.
    pub fn splice(head: &BitString, tail: &BitString, cut: usize) -> BitString {
        assert!(cut <= head.len && cut <= tail.len);
        let mut out = tail.clone();
        let full = cut / WORD;
        out.words[..full].copy_from_slice(&head.words[..full]);
        let rem = cut % WORD;
        if rem != 0 {
            let mask = (1u64 << rem) - 1;
            out.words[full] = (head.words[full] & mask) | (tail.words[full] & !mask);
        }
        out
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitString::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "bit string has {other:?} at position {}",
                        i + 1
                    )))
                }
            }
        }
        Ok(out)
    }
}
