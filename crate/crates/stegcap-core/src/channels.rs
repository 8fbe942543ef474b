//! Probability and channel algebra for the embedding game.
//!
//! The cast: a source law over a small alphabet, memoryless channels, covert
//! channels carrying an auxiliary message variable, and distortion matrices.
//! On top of those sit the feasibility predicates defining both players'
//! strategy sets and the payoff functional I(U;Y) - I(U;S).
//!
//! Feasibility is adjudicated with 1e-9 slack on both the equality
//! constraints (induced output law equals the source law) and the distortion
//! inequalities. Solver iterates live on those boundaries, so exact
//! comparisons would reject valid saddle points.
//!
//! All information quantities are in bits. Index arithmetic on cyclic
//! alphabets uses mathematical mod (result always in 0..q).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Input slack accepted when constructing distributions; constructors
/// canonicalize, so stored values sum to 1 at full precision.
const NORM_TOL: f64 = 1e-9;

/// Slack for feasibility predicates.
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("probabilities must be nonnegative, got {0}")]
    NegativeProb(f64),
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("distortion must vanish on the diagonal, d({0},{0}) = {1}")]
    DiagonalNotZero(usize, f64),
    #[error("distortion entries must be nonnegative, d({0},{1}) = {2}")]
    NegativeDistortion(usize, usize, f64),
    #[error("matrix rows must have equal length")]
    RaggedRows,
    #[error("operation requires a cyclic distortion matrix")]
    NotCyclic,
    #[error("auxiliary alphabet size {aux} does not divide output block {out}")]
    BadAuxSize { aux: usize, out: usize },
}

/// Mathematical mod, nonnegative for any integer input.
pub fn modq(a: i64, q: usize) -> usize {
    let q = q as i64;
    (((a % q) + q) % q) as usize
}

/// Shannon entropy of a probability vector in bits, with 0 log 0 = 0.
pub fn entropy_bits(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &x in p {
        if x > 0.0 {
            h -= x * x.log2();
        }
    }
    h.max(0.0)
}

/// h(p) = -p log2 p - (1-p) log2 (1-p).
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// D(p || q) in bits; +inf where p puts mass outside q's support.
pub fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).log2();
        }
    }
    d.max(0.0)
}

/// I(A;B) of a joint law stored row-major as joint[a * qb + b], in bits.
pub fn mutual_information_bits(joint: &[f64], qa: usize, qb: usize) -> f64 {
    debug_assert_eq!(joint.len(), qa * qb);
    let mut pa = vec![0.0; qa];
    let mut pb = vec![0.0; qb];
    for a in 0..qa {
        for b in 0..qb {
            pa[a] += joint[a * qb + b];
            pb[b] += joint[a * qb + b];
        }
    }
    let mut mi = 0.0;
    for a in 0..qa {
        for b in 0..qb {
            let j = joint[a * qb + b];
            if j > 0.0 {
                mi += j * (j / (pa[a] * pb[b])).log2();
            }
        }
    }
    mi.max(0.0)
}

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr", into = "PmfRepr")]
pub struct Pmf {
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PmfRepr {
    alphabet: usize,
    probs: Vec<f64>,
}

impl TryFrom<PmfRepr> for Pmf {
    type Error = ChannelError;
    fn try_from(repr: PmfRepr) -> Result<Self, ChannelError> {
        if repr.probs.len() != repr.alphabet {
            return Err(ChannelError::AlphabetMismatch {
                left: repr.alphabet,
                right: repr.probs.len(),
            });
        }
        Pmf::new(repr.probs)
    }
}

impl From<Pmf> for PmfRepr {
    fn from(p: Pmf) -> PmfRepr {
        PmfRepr {
            alphabet: p.probs.len(),
            probs: p.probs,
        }
    }
}

impl Pmf {
    /// Accepts entries down to -1e-9 and a total within 1e-9 of 1, then
    /// clamps and renormalizes so the stored vector sums to 1 exactly.
    pub fn new(probs: Vec<f64>) -> Result<Self, ChannelError> {
        if probs.is_empty() {
            return Err(ChannelError::EmptyAlphabet);
        }
        let mut probs = probs;
        for p in &mut probs {
            if *p < -NORM_TOL || !p.is_finite() {
                return Err(ChannelError::NegativeProb(*p));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(ChannelError::NotNormalized(sum));
        }
        for p in &mut probs {
            *p /= sum;
        }
        Ok(Self { probs })
    }

    pub fn uniform(q: usize) -> Self {
        Self {
            probs: vec![1.0 / q as f64; q],
        }
    }

    /// Binary law with P(1) = p.
    pub fn bernoulli(p: f64) -> Self {
        Self::new(vec![1.0 - p, p]).expect("bernoulli parameter outside [0,1]")
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.probs)
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.probs.len() as f64;
        self.probs.iter().all(|&p| (p - u).abs() <= FEAS_TOL)
    }
}

/// A memoryless channel: one output law per input symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CondPmfRepr", into = "CondPmfRepr")]
pub struct CondPmf {
    rows: Vec<f64>,
    input_alphabet: usize,
    output_alphabet: usize,
}

#[derive(Serialize, Deserialize)]
struct CondPmfRepr {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<CondPmfRepr> for CondPmf {
    type Error = ChannelError;
    fn try_from(repr: CondPmfRepr) -> Result<Self, ChannelError> {
        CondPmf::new(repr.rows)
    }
}

impl From<CondPmf> for CondPmfRepr {
    fn from(c: CondPmf) -> CondPmfRepr {
        CondPmfRepr {
            rows: (0..c.input_alphabet)
                .map(|x| c.row(x).to_vec())
                .collect(),
        }
    }
}

impl CondPmf {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ChannelError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(ChannelError::EmptyAlphabet);
        }
        let output_alphabet = rows[0].len();
        let input_alphabet = rows.len();
        let mut flat = Vec::with_capacity(input_alphabet * output_alphabet);
        for row in rows {
            if row.len() != output_alphabet {
                return Err(ChannelError::RaggedRows);
            }
            let row = Pmf::new(row)?;
            flat.extend_from_slice(row.probs());
        }
        Ok(Self {
            rows: flat,
            input_alphabet,
            output_alphabet,
        })
    }

    pub fn identity(q: usize) -> Self {
        let mut rows = vec![0.0; q * q];
        for x in 0..q {
            rows[x * q + x] = 1.0;
        }
        Self {
            rows,
            input_alphabet: q,
            output_alphabet: q,
        }
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn bsc(crossover: f64) -> Self {
        Self::new(vec![
            vec![1.0 - crossover, crossover],
            vec![crossover, 1.0 - crossover],
        ])
        .expect("crossover outside [0,1]")
    }

    pub fn uniform(input_alphabet: usize, output_alphabet: usize) -> Self {
        let p = 1.0 / output_alphabet as f64;
        Self {
            rows: vec![p; input_alphabet * output_alphabet],
            input_alphabet,
            output_alphabet,
        }
    }

    pub fn input_alphabet(&self) -> usize {
        self.input_alphabet
    }

    pub fn output_alphabet(&self) -> usize {
        self.output_alphabet
    }

    pub fn prob(&self, output: usize, input: usize) -> f64 {
        self.rows[input * self.output_alphabet + output]
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.rows[input * self.output_alphabet..(input + 1) * self.output_alphabet]
    }

    /// Law of the output when the input follows `p_in`.
    pub fn output_law(&self, p_in: &Pmf) -> Result<Pmf, ChannelError> {
        if p_in.alphabet_size() != self.input_alphabet {
            return Err(ChannelError::AlphabetMismatch {
                left: p_in.alphabet_size(),
                right: self.input_alphabet,
            });
        }
        let mut out = vec![0.0; self.output_alphabet];
        for x in 0..self.input_alphabet {
            let w = p_in.prob(x);
            for (o, &r) in out.iter_mut().zip(self.row(x)) {
                *o += w * r;
            }
        }
        Ok(Pmf { probs: out })
    }
}

/// A covert channel p(x, u | s): the embedder's joint choice of stegotext
/// symbol x and auxiliary symbol u given cover symbol s. The stegotext
/// alphabet equals the cover alphabet; pairs are flattened as x * L + u.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CovertRepr", into = "CovertRepr")]
pub struct CovertChannel {
    law: CondPmf,
    aux_alphabet: usize,
}

#[derive(Serialize, Deserialize)]
struct CovertRepr {
    rows: Vec<Vec<f64>>,
    aux_alphabet: usize,
}

impl TryFrom<CovertRepr> for CovertChannel {
    type Error = ChannelError;
    fn try_from(repr: CovertRepr) -> Result<Self, ChannelError> {
        CovertChannel::new(CondPmf::new(repr.rows)?, repr.aux_alphabet)
    }
}

impl From<CovertChannel> for CovertRepr {
    fn from(cc: CovertChannel) -> CovertRepr {
        CovertRepr {
            rows: (0..cc.law.input_alphabet)
                .map(|s| cc.law.row(s).to_vec())
                .collect(),
            aux_alphabet: cc.aux_alphabet,
        }
    }
}

impl CovertChannel {
    pub fn new(law: CondPmf, aux_alphabet: usize) -> Result<Self, ChannelError> {
        if aux_alphabet == 0 || law.output_alphabet != law.input_alphabet * aux_alphabet {
            return Err(ChannelError::BadAuxSize {
                aux: aux_alphabet,
                out: law.output_alphabet,
            });
        }
        Ok(Self { law, aux_alphabet })
    }

    /// Deterministic x = u = s.
    pub fn identity(q: usize) -> Self {
        let mut rows = vec![vec![0.0; q * q]; q];
        for (s, row) in rows.iter_mut().enumerate() {
            row[s * q + s] = 1.0;
        }
        Self::new(CondPmf::new(rows).unwrap(), q).unwrap()
    }

    /// Glues u = x on top of a plain embedding channel p(x|s).
    pub fn from_x_channel(x_given_s: &CondPmf) -> Self {
        let q = x_given_s.input_alphabet;
        let l = x_given_s.output_alphabet;
        let mut rows = vec![vec![0.0; q * l]; q];
        for s in 0..q {
            for x in 0..q.min(l) {
                // u = x requires the aux alphabet to cover the x alphabet
                rows[s][x * l + x] = x_given_s.prob(x, s);
            }
        }
        Self::new(CondPmf::new(rows).unwrap(), l).unwrap()
    }

    pub fn cover_alphabet(&self) -> usize {
        self.law.input_alphabet
    }

    pub fn aux_alphabet(&self) -> usize {
        self.aux_alphabet
    }

    pub fn law(&self) -> &CondPmf {
        &self.law
    }

    pub fn prob(&self, s: usize, x: usize, u: usize) -> f64 {
        self.law.prob(x * self.aux_alphabet + u, s)
    }

    /// Marginal embedding channel p(x|s).
    pub fn x_given_s(&self) -> CondPmf {
        let q = self.cover_alphabet();
        let mut rows = vec![0.0; q * q];
        for s in 0..q {
            for x in 0..q {
                for u in 0..self.aux_alphabet {
                    rows[s * q + x] += self.prob(s, x, u);
                }
            }
        }
        CondPmf {
            rows,
            input_alphabet: q,
            output_alphabet: q,
        }
    }

    /// Marginal auxiliary channel p(u|s).
    pub fn u_given_s(&self) -> CondPmf {
        let q = self.cover_alphabet();
        let l = self.aux_alphabet;
        let mut rows = vec![0.0; q * l];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    rows[s * l + u] += self.prob(s, x, u);
                }
            }
        }
        CondPmf {
            rows,
            input_alphabet: q,
            output_alphabet: l,
        }
    }
}

/// Per-letter distortion over cover x stego symbols. The cyclic flag records
/// whether every entry equals the first row at the index difference, which
/// is what the shift constructions require.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistortionRepr", into = "DistortionRepr")]
pub struct DistortionMatrix {
    d: Vec<f64>,
    q: usize,
    d_max: f64,
    cyclic: bool,
}

#[derive(Serialize, Deserialize)]
struct DistortionRepr {
    d: Vec<Vec<f64>>,
}

impl TryFrom<DistortionRepr> for DistortionMatrix {
    type Error = ChannelError;
    fn try_from(repr: DistortionRepr) -> Result<Self, ChannelError> {
        DistortionMatrix::new(repr.d)
    }
}

impl From<DistortionMatrix> for DistortionRepr {
    fn from(m: DistortionMatrix) -> DistortionRepr {
        DistortionRepr {
            d: (0..m.q)
                .map(|s| m.d[s * m.q..(s + 1) * m.q].to_vec())
                .collect(),
        }
    }
}

impl DistortionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ChannelError> {
        let q = rows.len();
        if q == 0 {
            return Err(ChannelError::EmptyAlphabet);
        }
        let mut d = Vec::with_capacity(q * q);
        for (s, row) in rows.iter().enumerate() {
            if row.len() != q {
                return Err(ChannelError::RaggedRows);
            }
            for (x, &v) in row.iter().enumerate() {
                if v < 0.0 || !v.is_finite() {
                    return Err(ChannelError::NegativeDistortion(s, x, v));
                }
                if s == x && v != 0.0 {
                    return Err(ChannelError::DiagonalNotZero(s, v));
                }
                d.push(v);
            }
        }
        let d_max = d.iter().cloned().fold(0.0, f64::max);
        let cyclic = (0..q).all(|i| {
            (0..q).all(|j| (d[i * q + j] - d[modq(j as i64 - i as i64, q)]).abs() <= 1e-12)
        });
        Ok(Self { d, q, d_max, cyclic })
    }

    pub fn hamming(q: usize) -> Self {
        let rows = (0..q)
            .map(|s| (0..q).map(|x| if s == x { 0.0 } else { 1.0 }).collect())
            .collect();
        Self::new(rows).unwrap()
    }

    /// Builds the cyclic matrix d(i,j) = row[(j - i) mod q].
    pub fn cyclic_from_row(row: &[f64]) -> Result<Self, ChannelError> {
        let q = row.len();
        let rows = (0..q)
            .map(|i| (0..q).map(|j| row[modq(j as i64 - i as i64, q)]).collect())
            .collect();
        Self::new(rows)
    }

    pub fn alphabet_size(&self) -> usize {
        self.q
    }

    pub fn get(&self, s: usize, x: usize) -> f64 {
        self.d[s * self.q + x]
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }
}

/// E d(S, X) under source `p_s` and embedding channel `p_x_given_s`.
pub fn expected_distortion(
    p_s: &Pmf,
    p_x_given_s: &CondPmf,
    d: &DistortionMatrix,
) -> Result<f64, ChannelError> {
    let q = p_s.alphabet_size();
    if p_x_given_s.input_alphabet != q || p_x_given_s.output_alphabet != d.q || d.q != q {
        return Err(ChannelError::AlphabetMismatch {
            left: q,
            right: p_x_given_s.output_alphabet,
        });
    }
    let mut total = 0.0;
    for s in 0..q {
        let w = p_s.prob(s);
        for x in 0..q {
            total += w * p_x_given_s.prob(x, s) * d.get(s, x);
        }
    }
    Ok(total)
}

/// Membership in the embedder's feasible set: expected distortion at most D1
/// and the induced stegotext law equal to the source law, both within 1e-9.
pub fn steg_feasible(p_x_given_s: &CondPmf, p_s: &Pmf, d: &DistortionMatrix, d1: f64) -> bool {
    let dist = expected_distortion(p_s, p_x_given_s, d).expect("incompatible alphabets");
    if dist > d1 + FEAS_TOL {
        return false;
    }
    let p_x = p_x_given_s.output_law(p_s).expect("incompatible alphabets");
    p_x.probs()
        .iter()
        .zip(p_s.probs())
        .all(|(&a, &b)| (a - b).abs() <= FEAS_TOL)
}

/// Membership in the attacker's feasible set: E d(X, Y) at most D2 + 1e-9
/// under stegotext law `p_x`.
pub fn attack_feasible(p_y_given_x: &CondPmf, p_x: &Pmf, d: &DistortionMatrix, d2: f64) -> bool {
    let dist = expected_distortion(p_x, p_y_given_x, d).expect("incompatible alphabets");
    dist <= d2 + FEAS_TOL
}

/// Joint law of (U, S), flattened as u * |S| + s, under source and covert
/// channel.
pub fn joint_us(p_s: &Pmf, cc: &CovertChannel) -> Vec<f64> {
    let q = cc.cover_alphabet();
    let l = cc.aux_alphabet();
    let mut joint = vec![0.0; l * q];
    for s in 0..q {
        let w = p_s.prob(s);
        for x in 0..q {
            for u in 0..l {
                joint[u * q + s] += w * cc.prob(s, x, u);
            }
        }
    }
    joint
}

/// Joint law of (U, Y), flattened as u * |Y| + y, under source, covert
/// channel, and attack, with the chain (U,S) -> X -> Y.
pub fn joint_uy(p_s: &Pmf, cc: &CovertChannel, attack: &CondPmf) -> Vec<f64> {
    let q = cc.cover_alphabet();
    let l = cc.aux_alphabet();
    let qy = attack.output_alphabet;
    let mut pxu = vec![0.0; q * l];
    for s in 0..q {
        let w = p_s.prob(s);
        for x in 0..q {
            for u in 0..l {
                pxu[x * l + u] += w * cc.prob(s, x, u);
            }
        }
    }
    let mut joint = vec![0.0; l * qy];
    for x in 0..q {
        for u in 0..l {
            let w = pxu[x * l + u];
            if w > 0.0 {
                for y in 0..qy {
                    joint[u * qy + y] += w * attack.prob(y, x);
                }
            }
        }
    }
    joint
}

/// Stegotext law induced by source and covert channel.
pub fn induced_x(p_s: &Pmf, cc: &CovertChannel) -> Pmf {
    let q = cc.cover_alphabet();
    let mut probs = vec![0.0; q];
    for s in 0..q {
        let w = p_s.prob(s);
        for x in 0..q {
            for u in 0..cc.aux_alphabet() {
                probs[x] += w * cc.prob(s, x, u);
            }
        }
    }
    Pmf { probs }
}

/// The game payoff I(U;Y) - I(U;S) in bits.
pub fn j_functional(
    p_s: &Pmf,
    cc: &CovertChannel,
    attack: &CondPmf,
) -> Result<f64, ChannelError> {
    let q = cc.cover_alphabet();
    if p_s.alphabet_size() != q || attack.input_alphabet != q {
        return Err(ChannelError::AlphabetMismatch {
            left: p_s.alphabet_size(),
            right: attack.input_alphabet,
        });
    }
    let l = cc.aux_alphabet();
    let i_uy = mutual_information_bits(&joint_uy(p_s, cc, attack), l, attack.output_alphabet);
    let i_us = mutual_information_bits(&joint_us(p_s, cc), l, q);
    Ok(i_uy - i_us)
}

/// Expands a covert channel with auxiliary size L into one of size q * L
/// that mixes all q cyclic shifts of it with equal weight. The new auxiliary
/// symbol q * v + i carries the original v together with the shift i.
///
/// Meaningful for a uniform source over a cyclic-distortion alphabet; under
/// those the output preserves expected distortion, induces a uniform
/// stegotext law, and satisfies p(U = q v + i) = p(V = v) / q.
pub fn cyclic_lift(cc: &CovertChannel, q: usize) -> Result<CovertChannel, ChannelError> {
    if cc.cover_alphabet() != q {
        return Err(ChannelError::AlphabetMismatch {
            left: cc.cover_alphabet(),
            right: q,
        });
    }
    let l = cc.aux_alphabet();
    let l_out = q * l;
    let mut rows = vec![vec![0.0; q * l_out]; q];
    for s in 0..q {
        for x in 0..q {
            for v in 0..l {
                for i in 0..q {
                    let xs = modq(x as i64 - i as i64, q);
                    let ss = modq(s as i64 - i as i64, q);
                    rows[s][x * l_out + (q * v + i)] = cc.prob(ss, xs, v) / q as f64;
                }
            }
        }
    }
    CovertChannel::new(CondPmf::new(rows)?, l_out)
}

/// Tests whether an attack is a cyclic-shift channel within budget: rows are
/// shifts of row 0, and the expected distortion it causes on any input law
/// (which for such channels is input-independent) is at most D2.
pub fn cyclic_attack_feasible(
    p_y_given_x: &CondPmf,
    d: &DistortionMatrix,
    d2: f64,
) -> Result<bool, ChannelError> {
    if !d.is_cyclic() {
        return Err(ChannelError::NotCyclic);
    }
    let q = d.alphabet_size();
    if p_y_given_x.input_alphabet != q || p_y_given_x.output_alphabet != q {
        return Err(ChannelError::AlphabetMismatch {
            left: p_y_given_x.input_alphabet,
            right: q,
        });
    }
    for x in 0..q {
        for y in 0..q {
            let shifted = p_y_given_x.prob(modq(y as i64 - x as i64, q), 0);
            if (p_y_given_x.prob(y, x) - shifted).abs() > FEAS_TOL {
                return Ok(false);
            }
        }
    }
    let dist: f64 = (0..q).map(|y| p_y_given_x.prob(y, 0) * d.get(0, y)).sum();
    Ok(dist <= d2 + FEAS_TOL)
}

/// Averages a channel with its q cyclic shifts. The result is always a
/// cyclic-shift channel; when the input channel met the attacker's budget
/// under a uniform stegotext law and cyclic distortion, the average stays
/// within the same budget.
pub fn shift_average_attack(p_y_given_x: &CondPmf, q: usize) -> CondPmf {
    assert_eq!(p_y_given_x.input_alphabet, q);
    assert_eq!(p_y_given_x.output_alphabet, q);
    let mut rows = vec![0.0; q * q];
    for x in 0..q {
        for y in 0..q {
            let mut acc = 0.0;
            for m in 0..q {
                acc += p_y_given_x.prob(
                    modq(y as i64 - m as i64, q),
                    modq(x as i64 - m as i64, q),
                );
            }
            rows[x * q + y] = acc / q as f64;
        }
    }
    CondPmf {
        rows,
        input_alphabet: q,
        output_alphabet: q,
    }
}
