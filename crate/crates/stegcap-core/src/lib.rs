//! Discrete-alphabet toolkit for perfectly secure steganography.
//!
//! The crate is organized around the adversarial embedding game between a
//! steganographer, who rewrites an i.i.d. covertext under a distortion budget
//! while preserving its law exactly, and an attacker, who post-processes the
//! stegotext through a memoryless channel under a second distortion budget.
//!
//! * [`typestat`]: exact integer type (empirical distribution) machinery for
//!   finite sequences, including type-class enumeration and uniform sampling
//!   of conditional type-class fibers.
//! * [`channels`]: probability vectors, memoryless channels, covert channels
//!   with an auxiliary alphabet, distortion matrices, feasibility predicates,
//!   and the cyclic-shift constructions.
//! * [`gamesolver`]: capacity values (active / passive / public-watermarking
//!   / no-cover variants), random-coding error exponents, closed forms for
//!   the binary-Hamming case, and a rate-distortion upper bound.
//! * [`codec`]: stacked per-type binning codebooks with the max-penalized-
//!   mutual-information decoder, permutation-key randomization of a
//!   prototype code, and randomized nested linear codes.
//! * [`wardensim`]: Monte Carlo and exact-enumeration harnesses measuring
//!   decoding error and distributional security of the constructions.
//!
//! Hot loops (multistart solves, Monte Carlo trials, exhaustive
//! enumerations) run on rayon when the default `parallel` feature is on and
//! fall back to sequential execution when it is disabled. Results are
//! deterministic for a fixed seed either way.

pub mod channels;
pub mod codec;
pub mod exec;
pub mod gamesolver;
pub mod typestat;
pub mod wardensim;

pub use channels::{CondPmf, CovertChannel, DistortionMatrix, Pmf};
pub use codec::{CodecError, CodecParams, NestedLinearCode, RmKey, StackedCodebook};
pub use gamesolver::{GameConfig, GameResult, SolverError};
pub use typestat::{ConditionalType, EmpiricalPmf, JointType, Permutation, Sequence};
pub use wardensim::{AttackSpec, CodecHandle, SecurityReport, SimError, TrialReport};
