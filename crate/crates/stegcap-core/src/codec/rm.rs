//! Permutation-randomized wrapper around the stacked codebook.
//!
//! The encoder permutes the covertext, runs the base encoder, and undoes
//! the permutation; the decoder permutes the received block before the
//! base decoder. Types are permutation-invariant, so distortion and type
//! preservation carry over unchanged, and a uniformly drawn permutation
//! key makes the stegotext conditionally exchangeable given the
//! covertext.

use super::stacked::{ccc_encode, mpmi_decode, StackedCodebook};
use super::CodecError;
use crate::typestat::{Permutation, Sequence};
use rand::Rng;

/// Secret permutation key shared by encoder and decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RmKey {
    perm: Permutation,
}

impl RmKey {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: Permutation::identity(n),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            perm: Permutation::random(n, rng),
        }
    }

    pub fn from_permutation(perm: Permutation) -> Self {
        Self { perm }
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }
}

/// Encode in the permuted domain: undo the key permutation on the output
/// so the stegotext aligns with the original covertext positions.
pub fn rm_encode<R: Rng + ?Sized>(
    s: &Sequence,
    m: usize,
    cb: &StackedCodebook,
    key: &RmKey,
    rng: &mut R,
) -> Result<Sequence, CodecError> {
    let permuted = key.perm.apply(s)?;
    let (x, _) = ccc_encode(&permuted, m, cb, rng)?;
    Ok(key.perm.inverse().apply(&x)?)
}

/// Decode in the permuted domain.
pub fn rm_decode(y: &Sequence, cb: &StackedCodebook, key: &RmKey) -> Result<usize, CodecError> {
    let permuted = key.perm.apply(y)?;
    mpmi_decode(&permuted, cb)
}

/// Entropy rate of a uniform permutation key: log2(N!) / N bits per
/// symbol, which stays below log2 N for every N at least 2.
pub fn rm_key_entropy_rate(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let log_fact: f64 = (2..=n).map(|k| (k as f64).log2()).sum();
    log_fact / n as f64
}
