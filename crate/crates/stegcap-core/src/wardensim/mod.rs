//! Warden simulation and verification harnesses: attack channels applied
//! symbol by symbol, Monte Carlo decoding-error estimation with Wilson
//! intervals, exact stegotext-distribution audits, permutation-invariance
//! checks, and an empirical error-exponent regression.

mod equiv;
mod exact;

pub use equiv::{rm_equivalence_check, RmEquivalenceReport};
pub use exact::{exact_stego_distribution, sampled_stego_distribution, SecurityReport};

use crate::channels::{attack_feasible, ChannelError, CondPmf, DistortionMatrix, Pmf};
use crate::codec::{
    ccc_encode, mpmi_decode, nested_decode, nested_encode, rm_decode, rm_encode, CodecError,
    NestedLinearCode, RmKey, StackedCodebook,
};
use crate::exec;
use crate::typestat::{Sequence, TypeError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Exact enumeration iterates all block-length factorials worth of keys.
pub const MAX_EXACT_BLOCK: usize = 6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("state space exceeds the exact-enumeration cap: {0}")]
    Scale(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// What the warden does to the stegotext.
#[derive(Debug, Clone)]
pub enum AttackKind {
    /// y = x.
    Passive,
    /// Each symbol passes independently through the same channel.
    Memoryless(CondPmf),
}

#[derive(Debug, Clone)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub d2_declared: f64,
}

impl AttackSpec {
    pub fn passive() -> Self {
        Self {
            kind: AttackKind::Passive,
            d2_declared: 0.0,
        }
    }

    pub fn memoryless(law: CondPmf, d2_declared: f64) -> Self {
        Self {
            kind: AttackKind::Memoryless(law),
            d2_declared,
        }
    }

    /// Single-letter transition law; passive is the identity over q symbols.
    pub fn law(&self, q: usize) -> CondPmf {
        match &self.kind {
            AttackKind::Passive => CondPmf::identity(q),
            AttackKind::Memoryless(law) => law.clone(),
        }
    }

    /// Whether the declared budget actually admits this channel against
    /// the given stegotext marginal.
    pub fn feasible_against(&self, p_x: &Pmf, d: &DistortionMatrix) -> bool {
        match &self.kind {
            AttackKind::Passive => self.d2_declared >= 0.0,
            AttackKind::Memoryless(law) => attack_feasible(law, p_x, d, self.d2_declared),
        }
    }
}

/// Outcome of a Monte Carlo error run.
#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub trials: u64,
    pub errors: u64,
    pub p_e_hat: f64,
    pub wilson_ci_95: (f64, f64),
    pub seed: u64,
}

/// 95% Wilson score interval; better behaved than the Wald interval when
/// error counts are tiny.
pub fn wilson_interval_95(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl TrialReport {
    fn new(trials: u64, errors: u64, seed: u64) -> Self {
        Self {
            trials,
            errors,
            p_e_hat: if trials == 0 {
                0.0
            } else {
                errors as f64 / trials as f64
            },
            wilson_ci_95: wilson_interval_95(errors, trials),
            seed,
        }
    }
}

/// splitmix64 finalizer over (seed, index): per-trial generators do not
/// depend on scheduling order.
pub(crate) fn trial_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn sample_pmf<R: Rng + ?Sized>(p: &Pmf, rng: &mut R) -> usize {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &w) in p.probs().iter().enumerate() {
        acc += w;
        if r < acc {
            return i;
        }
    }
    p.alphabet_size() - 1
}

pub(crate) fn sample_iid<R: Rng + ?Sized>(p: &Pmf, n: usize, rng: &mut R) -> Sequence {
    let symbols = (0..n).map(|_| sample_pmf(p, rng) as u8).collect();
    Sequence::new(symbols, p.alphabet_size()).expect("drawn symbols fit the alphabet")
}

/// Runs the warden's channel over one block.
pub fn apply_attack<R: Rng + ?Sized>(
    x: &Sequence,
    spec: &AttackSpec,
    rng: &mut R,
) -> Result<Sequence, SimError> {
    match &spec.kind {
        AttackKind::Passive => Ok(x.clone()),
        AttackKind::Memoryless(law) => {
            if law.input_alphabet() != x.alphabet_size() {
                return Err(SimError::Unsupported(format!(
                    "attack expects {} input symbols, stegotext has {}",
                    law.input_alphabet(),
                    x.alphabet_size()
                )));
            }
            let out_q = law.output_alphabet();
            let symbols = x
                .symbols()
                .iter()
                .map(|&a| {
                    let row = Pmf::new(law.row(a as usize).to_vec()).expect("rows are laws");
                    sample_pmf(&row, rng) as u8
                })
                .collect();
            Ok(Sequence::new(symbols, out_q)?)
        }
    }
}

/// One end-to-end system under test: a codebook (bare or permutation
/// randomized) or a nested linear code with its covertext law.
#[derive(Debug, Clone)]
pub enum CodecHandle {
    /// Prototype run without any key; not secure on its own.
    Stacked(StackedCodebook),
    /// Fresh uniform permutation key per trial, shared by both ends.
    Rm(StackedCodebook),
    /// Fresh uniform coset-leader key per trial, shared by both ends.
    Nested { code: NestedLinearCode, p_s: Pmf },
}

impl CodecHandle {
    pub fn block_length(&self) -> usize {
        match self {
            CodecHandle::Stacked(cb) | CodecHandle::Rm(cb) => cb.params().n,
            CodecHandle::Nested { code, .. } => code.block_length(),
        }
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            CodecHandle::Stacked(cb) | CodecHandle::Rm(cb) => cb.params().alphabet_size(),
            CodecHandle::Nested { .. } => 2,
        }
    }

    pub fn message_count(&self) -> usize {
        match self {
            CodecHandle::Stacked(cb) | CodecHandle::Rm(cb) => cb.message_count(),
            CodecHandle::Nested { code, .. } => code.message_count(),
        }
    }

    pub fn covertext_law(&self) -> &Pmf {
        match self {
            CodecHandle::Stacked(cb) | CodecHandle::Rm(cb) => &cb.params().p_s,
            CodecHandle::Nested { p_s, .. } => p_s,
        }
    }

    /// Draw key, encode, attack, decode; true means the message came back
    /// wrong (ties and decode failures count as errors).
    fn run_trial<R: Rng + ?Sized>(
        &self,
        spec: &AttackSpec,
        rng: &mut R,
    ) -> Result<bool, SimError> {
        let n = self.block_length();
        let s = sample_iid(self.covertext_law(), n, rng);
        let m = rng.gen_range(0..self.message_count());
        match self {
            CodecHandle::Stacked(cb) => {
                let (x, _) = ccc_encode(&s, m, cb, rng)?;
                let y = apply_attack(&x, spec, rng)?;
                Ok(mpmi_decode(&y, cb).ok() != Some(m))
            }
            CodecHandle::Rm(cb) => {
                let key = RmKey::random(n, rng);
                let x = rm_encode(&s, m, cb, &key, rng)?;
                let y = apply_attack(&x, spec, rng)?;
                Ok(rm_decode(&y, cb, &key).ok() != Some(m))
            }
            CodecHandle::Nested { code, .. } => {
                let key = code.leader(rng.gen_range(0..code.coset_leaders().len()));
                let x = nested_encode(&s, m, code, &key)?;
                let y = apply_attack(&x, spec, rng)?;
                Ok(nested_decode(&y, code, &key).ok() != Some(m))
            }
        }
    }
}

/// Monte Carlo decoding-error estimate. Trials are independent, run in
/// parallel, and seeded per index, so the report depends only on
/// (handle, spec, trials, seed).
pub fn estimate_error_prob(
    handle: &CodecHandle,
    spec: &AttackSpec,
    trials: u64,
    seed: u64,
) -> Result<TrialReport, SimError> {
    let outcomes = exec::map_indexed(trials as usize, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
        handle.run_trial(spec, &mut rng)
    });
    let mut errors = 0u64;
    for o in outcomes {
        if o? {
            errors += 1;
        }
    }
    Ok(TrialReport::new(trials, errors, seed))
}

/// One block length's worth of evidence in an exponent regression.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentPoint {
    pub n: usize,
    pub report: TrialReport,
}

/// Least-squares fit of -log2(p_e) against N.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Slope interval from regressing the Wilson endpoints.
    pub slope_ci_95: (f64, f64),
    pub points: Vec<ExponentPoint>,
    /// Block lengths dropped because no errors were observed.
    pub excluded: Vec<usize>,
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = cov / var;
    (slope, my - slope * mx)
}

/// Estimates the empirical error exponent of a codec family by running
/// each block length under the same warden and regressing -log2 of the
/// error estimates on N. Block lengths with zero observed errors carry no
/// slope information and are excluded (and reported).
pub fn empirical_exponent(
    family: &[CodecHandle],
    spec: &AttackSpec,
    trials: u64,
    seed: u64,
) -> Result<ExponentFit, SimError> {
    if family.iter().any(|h| h.message_count() < 2) {
        return Err(SimError::Degenerate(
            "single-message codec has no decoding error to regress".into(),
        ));
    }
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for (i, handle) in family.iter().enumerate() {
        let report = estimate_error_prob(handle, spec, trials, trial_seed(seed, i as u64))?;
        let n = handle.block_length();
        if report.errors == 0 {
            excluded.push(n);
        } else {
            points.push(ExponentPoint { n, report });
        }
    }
    if points.len() < 3 {
        return Err(SimError::Degenerate(format!(
            "{} usable block lengths after exclusions, need 3",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| -p.report.p_e_hat.log2()).collect();
    let (slope, intercept) = ls_slope(&xs, &ys);
    // endpoint regressions: upper error bounds give the flattest line
    let lo_ys: Vec<f64> = points
        .iter()
        .map(|p| -p.report.wilson_ci_95.1.log2())
        .collect();
    let hi_ys: Vec<f64> = points
        .iter()
        .map(|p| -p.report.wilson_ci_95.0.log2())
        .collect();
    let (slope_lo, _) = ls_slope(&xs, &lo_ys);
    let (slope_hi, _) = ls_slope(&xs, &hi_ys);
    Ok(ExponentFit {
        slope,
        intercept,
        slope_ci_95: (slope_lo.min(slope_hi), slope_lo.max(slope_hi)),
        points,
        excluded,
    })
}
