//! Executable code constructions: the stacked per-type binning codebook
//! with penalized-mutual-information decoding, its permutation-randomized
//! perfectly secure variant, and randomized nested linear codes for the
//! binary-Hamming case.

mod nested;
mod rm;
mod sbcb;
pub(crate) mod stacked;

pub use nested::{nested_decode, nested_encode, NestedLinearCode, MAX_NESTED_BLOCK};
pub use rm::{rm_decode, rm_encode, rm_key_entropy_rate, RmKey};
pub use sbcb::{codebook_debug_json, read_codebook, write_codebook};
pub use stacked::{build_stacked_codebook, ccc_encode, mpmi_decode, StackedCodebook, TypeArray};

use crate::channels::{ChannelError, DistortionMatrix, Pmf};
use crate::typestat::TypeError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Block lengths stay small enough that every covertext type is
/// enumerable and per-type conditional-type searches finish at a desk.
pub const MAX_BINARY_BLOCK: usize = 20;
pub const MAX_TERNARY_BLOCK: usize = 12;
/// Total codewords across all arrays; arrays scale as 2^(N(R+rho)).
pub const MAX_TOTAL_CODEWORDS: u128 = 1 << 22;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("bad codec parameters: {0}")]
    BadParams(String),
    #[error("scale cap exceeded: {0}")]
    Scale(String),
    #[error("codebook mismatch: {0}")]
    Mismatch(String),
    #[error("decode tie across message columns")]
    Tie,
    #[error("container format error: {0}")]
    Format(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parameters of the stacked-binning construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodecParams {
    pub n: usize,
    pub r: f64,
    pub l: usize,
    pub epsilon: f64,
    pub d1: f64,
    pub d: DistortionMatrix,
    pub p_s: Pmf,
    pub seed: u64,
}

impl CodecParams {
    pub fn validate(&self) -> Result<(), CodecError> {
        let q = self.p_s.alphabet_size();
        if q != self.d.alphabet_size() {
            return Err(CodecError::BadParams(format!(
                "source alphabet {q} does not match distortion matrix {}",
                self.d.alphabet_size()
            )));
        }
        if self.n < 1 {
            return Err(CodecError::BadParams("block length must be positive".into()));
        }
        if !(self.r >= 0.0) {
            return Err(CodecError::BadParams("rate must be nonnegative".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(CodecError::BadParams("depth slack must be positive".into()));
        }
        if !(self.d1 >= 0.0) {
            return Err(CodecError::BadParams(
                "embedding budget must be nonnegative".into(),
            ));
        }
        if self.l < 1 {
            return Err(CodecError::BadParams(
                "auxiliary alphabet must be nonempty".into(),
            ));
        }
        let cap = match q {
            2 => MAX_BINARY_BLOCK,
            3 => MAX_TERNARY_BLOCK,
            _ => {
                return Err(CodecError::Scale(format!(
                    "stacked codebooks support binary and ternary covertexts, got {q}"
                )))
            }
        };
        if self.n > cap {
            return Err(CodecError::Scale(format!(
                "block length {} exceeds the cap {cap} for alphabet size {q}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn alphabet_size(&self) -> usize {
        self.p_s.alphabet_size()
    }

    /// Number of message columns.
    pub fn message_count(&self) -> usize {
        ((self.n as f64 * self.r).exp2().ceil() as usize).max(1)
    }
}
