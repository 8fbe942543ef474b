//! Minimax solvers for embedder-versus-attacker information games.
//!
//! The embedder chooses a covert channel subject to an expected-distortion
//! budget (and, unless noted, exact preservation of the cover law); the
//! attacker then degrades the stego signal under its own budget. Payoffs
//! are mutual-information differences in bits. The inner minimization is
//! convex and solved to high accuracy; the outer maximization is not
//! concave, so solvers run multistart projected ascent and report a
//! certificate gap instead of pretending at global optimality.

mod ascent;
mod attack;
mod capacity;
mod exponent;
mod payoff;
mod project;

pub use capacity::{
    capacity_active, capacity_binary_hamming, capacity_no_cover, capacity_passive,
    capacity_pubwm, rd_bound, verify_no_loss_cyclic, NoLossReport,
};
pub use exponent::{exponent_active, exponent_curve, exponent_passive};

use crate::channels::{ChannelError, CondPmf, CovertChannel, DistortionMatrix, Pmf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_SOURCE_ALPHABET: usize = 8;
pub const MAX_AUX_ALPHABET: usize = 16;

/// Default convergence tolerance, in bits.
pub const DEFAULT_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("problem size not supported: {0}")]
    UnsupportedScale(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Everything a capacity or exponent run needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameConfig {
    pub p_s: Pmf,
    pub d: DistortionMatrix,
    pub d1: f64,
    pub d2: f64,
    pub l: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_multistarts")]
    pub multistarts: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iters() -> usize {
    200
}

fn default_multistarts() -> usize {
    16
}

impl GameConfig {
    pub fn new(p_s: Pmf, d: DistortionMatrix, d1: f64, d2: f64, l: usize) -> Self {
        GameConfig {
            p_s,
            d,
            d1,
            d2,
            l,
            tol: DEFAULT_TOL,
            max_iters: default_max_iters(),
            multistarts: default_multistarts(),
            seed: 0,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_multistarts(mut self, n: usize) -> Self {
        self.multistarts = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn alphabet_size(&self) -> usize {
        self.p_s.alphabet_size()
    }

    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        let q = self.p_s.alphabet_size();
        if q > MAX_SOURCE_ALPHABET {
            return Err(SolverError::UnsupportedScale(format!(
                "source alphabet {q} exceeds the cap of {MAX_SOURCE_ALPHABET}"
            )));
        }
        if self.l == 0 || self.l > MAX_AUX_ALPHABET {
            return Err(SolverError::BadConfig(format!(
                "auxiliary alphabet size {} must be in 1..={MAX_AUX_ALPHABET}",
                self.l
            )));
        }
        if self.d.alphabet_size() != q {
            return Err(SolverError::BadConfig(format!(
                "distortion matrix is {}-ary but the source is {q}-ary",
                self.d.alphabet_size()
            )));
        }
        if !(self.d1 >= 0.0) || !(self.d2 >= 0.0) {
            return Err(SolverError::BadConfig(
                "distortion budgets must be nonnegative".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(SolverError::BadConfig("tolerance must be positive".into()));
        }
        if self.multistarts == 0 || self.max_iters == 0 {
            return Err(SolverError::BadConfig(
                "multistarts and max_iters must be positive".into(),
            ));
        }
        if self.p_s.probs().iter().any(|&p| p <= 0.0) {
            return Err(SolverError::BadConfig(
                "source distribution must have full support; drop unused symbols first"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a capacity game.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameResult {
    /// Game value in bits per symbol; tiny negatives are clamped to zero.
    pub value: f64,
    /// The embedder strategy achieving `value` against `worst_attack`.
    pub best_covert: CovertChannel,
    /// The attacker strategy certifying the upper half of the gap.
    pub worst_attack: CondPmf,
    pub iterations: usize,
    pub converged: bool,
    /// Distance between the attacker-side and embedder-side bounds on the
    /// game value; `converged` implies this is at most the tolerance.
    pub certificate_gap: f64,
}

/// A sampled rate-to-exponent curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentCurve {
    pub rates: Vec<f64>,
    pub exponents: Vec<f64>,
    pub config: GameConfig,
}
