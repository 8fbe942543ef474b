//! Stacked per-type binning codebooks and the penalized-mutual-information
//! decoder.
//!
//! One codeword array per covertext type. Each array's auxiliary type and
//! conditional types come from an exhaustive search over empirical
//! conditional types feasible at that covertext type (marginal preserved
//! exactly, distortion within budget at the count level), so every encode
//! preserves the covertext type and distortion bound by construction, not
//! by accident of sampling.

use super::{CodecError, CodecParams, MAX_TOTAL_CODEWORDS};
use crate::typestat::{
    enumerate_types, sample_conditional_type_class, type_of, ConditionalType, EmpiricalPmf,
    Sequence,
};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;

/// Codeword array for one covertext type, together with the optimized
/// empirical triple that encoding samples from.
#[derive(Debug, Clone)]
pub struct TypeArray {
    pub(crate) type_counts: Vec<u64>,
    pub(crate) rho: f64,
    pub(crate) i_us: f64,
    /// T*_U: counts over the auxiliary alphabet, summing to N.
    pub(crate) u_type: Vec<u64>,
    /// T*_{U|S}: per covertext symbol, counts over the auxiliary alphabet.
    pub(crate) us_rows: Vec<Vec<u64>>,
    /// T*_{X|US}: per (s, u) pair (index s*L + u), counts over stegotext
    /// symbols.
    pub(crate) xus_rows: Vec<Vec<u64>>,
    pub(crate) rows: usize,
    pub(crate) cols: usize,
    /// Row-major rows x cols codewords over the auxiliary alphabet.
    pub(crate) codewords: Vec<Sequence>,
}

impl TypeArray {
    pub fn type_counts(&self) -> &[u64] {
        &self.type_counts
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn i_us(&self) -> f64 {
        self.i_us
    }

    pub fn u_type(&self) -> &[u64] {
        &self.u_type
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn codeword(&self, row: usize, col: usize) -> &Sequence {
        &self.codewords[row * self.cols + col]
    }

    pub fn us_conditional(&self) -> ConditionalType {
        let l = self.u_type.len();
        ConditionalType::from_rows(self.us_rows.clone(), l).expect("stored rows are consistent")
    }

    pub fn xus_conditional(&self) -> ConditionalType {
        let q = self.type_counts.len();
        ConditionalType::from_rows(self.xus_rows.clone(), q).expect("stored rows are consistent")
    }
}

/// The full stack: one array per covertext type of length N.
#[derive(Debug, Clone)]
pub struct StackedCodebook {
    pub(crate) params: CodecParams,
    pub(crate) arrays: Vec<TypeArray>,
    pub(crate) index: HashMap<Vec<u64>, usize>,
}

impl StackedCodebook {
    pub(crate) fn assemble(params: CodecParams, arrays: Vec<TypeArray>) -> Self {
        let index = arrays
            .iter()
            .enumerate()
            .map(|(i, a)| (a.type_counts.clone(), i))
            .collect();
        Self {
            params,
            arrays,
            index,
        }
    }

    pub fn params(&self) -> &CodecParams {
        &self.params
    }

    pub fn arrays(&self) -> &[TypeArray] {
        &self.arrays
    }

    pub fn array_for_type(&self, t: &EmpiricalPmf) -> Option<&TypeArray> {
        self.index.get(t.counts()).map(|&i| &self.arrays[i])
    }

    pub fn message_count(&self) -> usize {
        self.params.message_count()
    }
}

/// Entropy in bits of counts/n.
fn entropy_of_counts(counts: impl Iterator<Item = u64>, n: u64) -> f64 {
    let n = n as f64;
    let mut h = 0.0;
    for c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h.max(0.0)
}

/// I(A;B) in bits of a joint count grid (rows x cols).
fn mi_of_counts(grid: &[u64], rows: usize, cols: usize) -> f64 {
    let n: u64 = grid.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let row_marg = (0..rows).map(|r| (0..cols).map(|c| grid[r * cols + c]).sum::<u64>());
    let col_marg = (0..cols).map(|c| (0..rows).map(|r| grid[r * cols + c]).sum::<u64>());
    let h_rows = entropy_of_counts(row_marg, n);
    let h_cols = entropy_of_counts(col_marg, n);
    let h_joint = entropy_of_counts(grid.iter().copied(), n);
    (h_rows + h_cols - h_joint).max(0.0)
}

/// All ways to split `n` into `cells` nonnegative counts. The first entry
/// puts everything in cell 0, so ties at the objective resolve to the
/// lowest-index cells (constant auxiliary symbol at zero budget).
fn compositions(n: u64, cells: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![0u64; cells];
    fn rec(cur: &mut Vec<u64>, pos: usize, left: u64, out: &mut Vec<Vec<u64>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for c in (0..=left).rev() {
            cur[pos] = c;
            rec(cur, pos + 1, left - c, out);
        }
    }
    rec(&mut cur, 0, n, &mut out);
    out
}

struct PerType {
    joint: Vec<u64>,
    i_ux: f64,
    i_us: f64,
}

/// Exhaustive maximization of empirical I(U;X) - I(U;S) over conditional
/// (x,u)-given-s count allocations with the covertext type as exact
/// stegotext marginal and count-level distortion within budget. First
/// maximizer in enumeration order wins ties.
fn optimize_type(
    counts: &[u64],
    q: usize,
    l: usize,
    d: &crate::channels::DistortionMatrix,
    d1: f64,
    n: u64,
) -> PerType {
    let cells = q * l;
    let budget = d1 * n as f64 + 1e-9;
    let mut comp_cache: HashMap<u64, Vec<Vec<u64>>> = HashMap::new();
    for &c in counts {
        comp_cache
            .entry(c)
            .or_insert_with(|| compositions(c, cells));
    }

    // joint grid indexed s*cells + x*l + u
    let mut best: Option<PerType> = None;
    let mut joint = vec![0u64; q * cells];
    let mut x_marg = vec![0u64; q];

    fn rec(
        a: usize,
        dist_so_far: f64,
        joint: &mut Vec<u64>,
        x_marg: &mut Vec<u64>,
        counts: &[u64],
        comp_cache: &HashMap<u64, Vec<Vec<u64>>>,
        q: usize,
        l: usize,
        d: &crate::channels::DistortionMatrix,
        budget: f64,
        best: &mut Option<PerType>,
    ) {
        let cells = q * l;
        if a == q {
            if x_marg != counts {
                return;
            }
            // I(U;X) from the (x,u) marginal grid, I(U;S) from (s,u)
            let mut m_xu = vec![0u64; cells];
            let mut m_su = vec![0u64; q * l];
            for s in 0..q {
                for x in 0..q {
                    for u in 0..l {
                        let c = joint[s * cells + x * l + u];
                        m_xu[x * l + u] += c;
                        m_su[s * l + u] += c;
                    }
                }
            }
            let i_ux = mi_of_counts(&m_xu, q, l);
            let i_us = mi_of_counts(&m_su, q, l);
            let obj = i_ux - i_us;
            let current = best.as_ref().map(|b| b.i_ux - b.i_us);
            if current.map_or(true, |c| obj > c + 1e-15) {
                *best = Some(PerType {
                    joint: joint.clone(),
                    i_ux,
                    i_us,
                });
            }
            return;
        }
        for comp in &comp_cache[&counts[a]] {
            let mut dist = dist_so_far;
            let mut ok = true;
            for x in 0..q {
                let row: u64 = (0..l).map(|u| comp[x * l + u]).sum();
                dist += row as f64 * d.get(a, x);
                x_marg[x] += row;
                if x_marg[x] > counts[x] {
                    ok = false;
                }
            }
            if ok && dist <= budget {
                joint[a * cells..(a + 1) * cells].copy_from_slice(comp);
                rec(
                    a + 1,
                    dist,
                    joint,
                    x_marg,
                    counts,
                    comp_cache,
                    q,
                    l,
                    d,
                    budget,
                    best,
                );
                for v in joint[a * cells..(a + 1) * cells].iter_mut() {
                    *v = 0;
                }
            }
            for x in 0..q {
                let row: u64 = (0..l).map(|u| comp[x * l + u]).sum();
                x_marg[x] -= row;
            }
        }
    }

    rec(
        0,
        0.0,
        &mut joint,
        &mut x_marg,
        counts,
        &comp_cache,
        q,
        l,
        d,
        budget,
        &mut best,
    );
    best.expect("x = s with a constant auxiliary symbol is always feasible")
}

/// Uniform draw from a type class: the canonical member shuffled.
fn sample_type_class<R: Rng + ?Sized>(counts: &[u64], rng: &mut R) -> Vec<u8> {
    let mut symbols = Vec::with_capacity(counts.iter().sum::<u64>() as usize);
    for (sym, &c) in counts.iter().enumerate() {
        symbols.extend(std::iter::repeat(sym as u8).take(c as usize));
    }
    symbols.shuffle(rng);
    symbols
}

/// Builds the full stack of codeword arrays, one per covertext type.
pub fn build_stacked_codebook<R: Rng + ?Sized>(
    params: &CodecParams,
    rng: &mut R,
) -> Result<StackedCodebook, CodecError> {
    params.validate()?;
    let q = params.alphabet_size();
    let l = params.l;
    let n = params.n;
    let cols = params.message_count();

    // size check before any drawing: rho <= log2(min(q,l)) + epsilon
    let rho_cap = (q.min(l) as f64).log2() + params.epsilon;
    let per_type_rows = (n as f64 * rho_cap).exp2().ceil() as u128;
    let type_count = enumerate_types(n as u64, q).len() as u128;
    if per_type_rows * cols as u128 * type_count > MAX_TOTAL_CODEWORDS {
        return Err(CodecError::Scale(format!(
            "codebook would store up to {} codewords (cap {MAX_TOTAL_CODEWORDS})",
            per_type_rows * cols as u128 * type_count
        )));
    }

    let mut arrays = Vec::new();
    for t in enumerate_types(n as u64, q) {
        let opt = optimize_type(t.counts(), q, l, &params.d, params.d1, n as u64);
        let cells = q * l;
        let mut u_type = vec![0u64; l];
        let mut us_rows = vec![vec![0u64; l]; q];
        let mut xus_rows = vec![vec![0u64; q]; q * l];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    let c = opt.joint[s * cells + x * l + u];
                    u_type[u] += c;
                    us_rows[s][u] += c;
                    xus_rows[s * l + u][x] += c;
                }
            }
        }
        let rho = opt.i_us + params.epsilon;
        let rows = ((n as f64 * rho).exp2().ceil() as usize).max(1);
        let mut codewords = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            codewords.push(Sequence::new(sample_type_class(&u_type, rng), l)?);
        }
        arrays.push(TypeArray {
            type_counts: t.counts().to_vec(),
            rho,
            i_us: opt.i_us,
            u_type,
            us_rows,
            xus_rows,
            rows,
            cols,
            codewords,
        });
    }
    Ok(StackedCodebook::assemble(params.clone(), arrays))
}

/// Conditional (u given s) count grid of a candidate codeword, compared
/// against the array's optimized rows.
pub(crate) fn u_conditional_matches(
    s: &Sequence,
    u: &Sequence,
    us_rows: &[Vec<u64>],
    l: usize,
) -> bool {
    let q = s.alphabet_size();
    let mut grid = vec![0u64; q * l];
    for (&a, &b) in s.symbols().iter().zip(u.symbols()) {
        grid[a as usize * l + b as usize] += 1;
    }
    (0..q).all(|a| (0..l).all(|b| grid[a * l + b] == us_rows[a][b]))
}

/// Encodes one block: pick a row of column m whose codeword has the
/// optimized conditional type given s, then draw the stegotext uniformly
/// from the optimized conditional fiber. The returned flag marks the
/// fallback draw taken when no row matches; the output is still a valid
/// stegotext.
pub fn ccc_encode<R: Rng + ?Sized>(
    s: &Sequence,
    m: usize,
    cb: &StackedCodebook,
    rng: &mut R,
) -> Result<(Sequence, bool), CodecError> {
    let params = cb.params();
    if s.len() != params.n || s.alphabet_size() != params.alphabet_size() {
        return Err(CodecError::Mismatch(format!(
            "covertext is {} symbols over alphabet {}, codebook wants {} over {}",
            s.len(),
            s.alphabet_size(),
            params.n,
            params.alphabet_size()
        )));
    }
    if m >= cb.message_count() {
        return Err(CodecError::Mismatch(format!(
            "message {m} out of range ({} columns)",
            cb.message_count()
        )));
    }
    let t = type_of(s);
    let array = cb
        .array_for_type(&t)
        .ok_or_else(|| CodecError::Mismatch("no array for the covertext type".into()))?;
    let l_aux = params.l;

    let matches: Vec<usize> = (0..array.rows)
        .filter(|&row| u_conditional_matches(s, array.codeword(row, m), &array.us_rows, l_aux))
        .collect();
    let (u, encoder_error) = if matches.is_empty() {
        let cond = array.us_conditional();
        (sample_conditional_type_class(&cond, s, rng)?, true)
    } else {
        let pick = matches[rng.gen_range(0..matches.len())];
        (array.codeword(pick, m).clone(), false)
    };

    let pair = Sequence::zip(s, &u)?;
    let xcond = array.xus_conditional();
    let x = sample_conditional_type_class(&xcond, &pair, rng)?;
    Ok((x, encoder_error))
}

/// Decodes by the penalized empirical mutual information rule: the score
/// of a codeword in the array for covertext type p is I(u;y) - rho(p),
/// maximized over every array and codeword; maximizers spanning more than
/// one message column are declared a tie.
pub fn mpmi_decode(y: &Sequence, cb: &StackedCodebook) -> Result<usize, CodecError> {
    let params = cb.params();
    if y.len() != params.n || y.alphabet_size() != params.alphabet_size() {
        return Err(CodecError::Mismatch(format!(
            "received block is {} symbols over alphabet {}, codebook wants {} over {}",
            y.len(),
            y.alphabet_size(),
            params.n,
            params.alphabet_size()
        )));
    }
    let q = params.alphabet_size();
    let l = params.l;
    let mut best = f64::NEG_INFINITY;
    let mut best_col: Option<usize> = None;
    let mut tie = false;
    let mut grid = vec![0u64; l * q];
    for array in cb.arrays() {
        for row in 0..array.rows {
            for col in 0..array.cols {
                let u = array.codeword(row, col);
                grid.iter_mut().for_each(|c| *c = 0);
                for (&a, &b) in u.symbols().iter().zip(y.symbols()) {
                    grid[a as usize * q + b as usize] += 1;
                }
                let score = mi_of_counts(&grid, l, q) - array.rho;
                if score > best + 1e-12 {
                    best = score;
                    best_col = Some(col);
                    tie = false;
                } else if (score - best).abs() <= 1e-12 && best_col != Some(col) {
                    tie = true;
                }
            }
        }
    }
    match best_col {
        Some(col) if !tie => Ok(col),
        Some(_) => Err(CodecError::Tie),
        None => Err(CodecError::Mismatch("empty codebook".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{DistortionMatrix, Pmf};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn avg_distortion(s: &Sequence, x: &Sequence, d: &DistortionMatrix) -> f64 {
        let total: f64 = s
            .symbols()
            .iter()
            .zip(x.symbols())
            .map(|(&a, &b)| d.get(a as usize, b as usize))
            .sum();
        total / s.len() as f64
    }

    fn params(n: usize, r: f64, l: usize, d1: f64) -> CodecParams {
        CodecParams {
            n,
            r,
            l,
            epsilon: 0.05,
            d1,
            d: DistortionMatrix::hamming(2),
            p_s: Pmf::uniform(2),
            seed: 7,
        }
    }

    #[test]
    fn zero_budget_forces_identity_stegotext() {
        let p = params(4, 0.0, 2, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let cb = build_stacked_codebook(&p, &mut rng).unwrap();
        for array in cb.arrays() {
            // x given (s,u) puts all mass on x = s
            for s in 0..2 {
                for u in 0..2 {
                    for x in 0..2 {
                        let c = array.xus_rows[s * 2 + u][x];
                        assert!(x == s || c == 0, "off-diagonal stegotext mass at {s},{u},{x}");
                    }
                }
            }
        }
        for idx in 0..16u64 {
            let s = Sequence::from_index(idx, 4, 2).unwrap();
            let (x, _) = ccc_encode(&s, 0, &cb, &mut rng).unwrap();
            assert_eq!(x.symbols(), s.symbols());
        }
    }

    #[test]
    fn swap_half_conditional_is_found_at_half_budget() {
        // type (2,2) at N=4, D1=0.5: u = x with x fresh-uniform given s
        // reaches I(u;x) - I(u;s) = 1 - 0 = 1, the maximum possible
        let p = params(4, 0.25, 2, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let cb = build_stacked_codebook(&p, &mut rng).unwrap();
        let t = EmpiricalPmf::new(vec![2, 2]).unwrap();
        let array = cb.array_for_type(&t).unwrap();
        let i_ux = {
            let mut m_xu = vec![0u64; 4];
            for s in 0..2 {
                for u in 0..2 {
                    for x in 0..2 {
                        m_xu[x * 2 + u] += array.xus_rows[s * 2 + u][x];
                    }
                }
            }
            mi_of_counts(&m_xu, 2, 2)
        };
        assert!((i_ux - array.i_us - 1.0).abs() < 1e-12);
        assert_eq!(array.i_us, 0.0);
        assert!((array.rho - 0.05).abs() < 1e-12);
    }

    #[test]
    fn every_codeword_has_the_optimized_type() {
        let p = params(5, 0.2, 2, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let cb = build_stacked_codebook(&p, &mut rng).unwrap();
        for array in cb.arrays() {
            for u in &array.codewords {
                assert_eq!(type_of(u).counts(), array.u_type());
            }
        }
    }

    #[test]
    fn encode_preserves_type_and_distortion_exactly() {
        let p = params(6, 0.2, 2, 0.34);
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let cb = build_stacked_codebook(&p, &mut rng).unwrap();
        for trial in 0..300u64 {
            let s = Sequence::from_index(trial % 64, 6, 2).unwrap();
            let m = (trial % 2) as usize;
            let (x, _) = ccc_encode(&s, m, &cb, &mut rng).unwrap();
            assert_eq!(type_of(&x).counts(), type_of(&s).counts());
            assert!(avg_distortion(&s, &x, &p.d) <= 0.34 + 1e-12);
        }
    }

    #[test]
    fn codeword_matching_the_received_block_wins() {
        // column 0 holds a codeword equal to y (score H(y) - rho, the
        // maximum), every other codeword is independent of y (score -rho)
        let array = TypeArray {
            type_counts: vec![2, 2],
            rho: 0.1,
            i_us: 0.0,
            u_type: vec![2, 2],
            us_rows: vec![vec![1, 1], vec![1, 1]],
            xus_rows: vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]],
            rows: 2,
            cols: 2,
            codewords: vec![
                Sequence::new(vec![0, 1, 0, 1], 2).unwrap(),
                Sequence::new(vec![0, 0, 1, 1], 2).unwrap(),
                Sequence::new(vec![0, 1, 1, 0], 2).unwrap(),
                Sequence::new(vec![1, 1, 0, 0], 2).unwrap(),
            ],
        };
        let p = params(4, 0.25, 2, 0.5);
        let cb = StackedCodebook::assemble(p, vec![array]);
        let y = Sequence::new(vec![0, 1, 0, 1], 2).unwrap();
        assert_eq!(mpmi_decode(&y, &cb).unwrap(), 0);
    }

    #[test]
    fn identical_codeword_in_two_columns_ties() {
        let u = Sequence::new(vec![0, 1, 0, 1], 2).unwrap();
        let array = TypeArray {
            type_counts: vec![2, 2],
            rho: 0.1,
            i_us: 0.0,
            u_type: vec![2, 2],
            us_rows: vec![vec![1, 1], vec![1, 1]],
            xus_rows: vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]],
            rows: 1,
            cols: 2,
            codewords: vec![u.clone(), u.clone()],
        };
        let p = params(4, 0.25, 2, 0.5);
        let cb = StackedCodebook::assemble(p, vec![array]);
        let y = Sequence::new(vec![0, 1, 0, 1], 2).unwrap();
        match mpmi_decode(&y, &cb) {
            Err(CodecError::Tie) => {}
            other => panic!("expected a tie, got {other:?}"),
        }
    }

    #[test]
    fn rate_zero_loopback_always_decodes() {
        // single message column: the decoder can only answer 0
        let p = params(6, 0.0, 2, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let cb = build_stacked_codebook(&p, &mut rng).unwrap();
        assert_eq!(cb.message_count(), 1);
        for idx in 0..64u64 {
            let s = Sequence::from_index(idx, 6, 2).unwrap();
            let (x, _) = ccc_encode(&s, 0, &cb, &mut rng).unwrap();
            assert_eq!(mpmi_decode(&x, &cb).unwrap(), 0);
        }
    }

    #[test]
    fn working_rate_loopback_mostly_decodes() {
        let p = params(8, 0.125, 2, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let cb = build_stacked_codebook(&p, &mut rng).unwrap();
        assert_eq!(cb.message_count(), 2);
        let mut ok = 0;
        let mut total = 0;
        for trial in 0..200u64 {
            let s = Sequence::from_index((trial * 37) % 256, 8, 2).unwrap();
            let m = (trial % 2) as usize;
            let (x, _) = ccc_encode(&s, m, &cb, &mut rng).unwrap();
            total += 1;
            if mpmi_decode(&x, &cb).ok() == Some(m) {
                ok += 1;
            }
        }
        assert!(
            ok * 2 > total,
            "noiseless loopback should beat guessing: {ok}/{total}"
        );
    }

    #[test]
    fn oversized_build_is_rejected() {
        let p = params(20, 1.0, 2, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        match build_stacked_codebook(&p, &mut rng) {
            Err(CodecError::Scale(_)) => {}
            other => panic!("expected scale error, got {other:?}"),
        }
    }
}
