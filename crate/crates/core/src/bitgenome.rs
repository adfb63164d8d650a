//! Genomes: a mutation code followed by a phenotype region.
//!
//! The first `code_length` bits of a genome encode its own mutation rate as
//! an unsigned integer read most-significant bit first (the leftmost genome
//! bit is the high bit), divided by `2^code_length - 1`. Golden files depend
//! on this bit order.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rng::RandomSource;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Genome {
    pub code: BitString,
    /// Birth number of the child that introduced this genome; 0 for the
    /// initial population.
    pub birth_index: u64,
}

impl Genome {
    pub fn new(code: BitString, birth_index: u64) -> Self {
        Genome { code, birth_index }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.code.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Integer value of the mutation code.
    #[inline]
    pub fn code_value(&self, code_length: usize) -> u64 {
        assert!(
            self.code.len() >= code_length,
            "genome of length {} is shorter than the mutation code ({code_length})",
            self.code.len()
        );
        self.code.leading_value(code_length)
    }
}

/// Uniform random genome of `length` bits with birth index 0.
pub fn random_genome<R: RandomSource + ?Sized>(length: usize, rng: &mut R) -> Result<Genome> {
    if length == 0 {
        return Err(Error::InvalidArgument(
            "genome length must be at least 1".into(),
        ));
    }
    let mut code = BitString::with_capacity(length);
    for _ in 0..length {
        code.push(rng.coin());
    }
    Ok(Genome::new(code, 0))
}

/// Largest code value for a code of `code_length` bits.
#[inline]
pub fn max_code_value(code_length: usize) -> u64 {
    (1u64 << code_length) - 1
}

/// Mutation rate encoded by the first `code_length` bits, in `[0, 1]`.
#[inline]
pub fn decode_mutation_rate(g: &Genome, code_length: usize) -> f64 {
    g.code_value(code_length) as f64 / max_code_value(code_length) as f64
}

/// Bits after the mutation code; empty when the genome is exactly
/// `code_length` long.
pub fn phenotype(g: &Genome, code_length: usize) -> BitString {
    assert!(g.len() >= code_length);
    g.code.suffix(code_length)
}
