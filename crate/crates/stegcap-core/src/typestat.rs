//! Exact method-of-types machinery over small discrete alphabets.
//!
//! Everything here works with integer occurrence counts, never floating
//! probabilities: two sequences have the same type iff their count vectors
//! are equal as integers, and codebook indexing depends on that being exact.
//! Entropies and mutual informations are reported in bits (log base 2).
//!
//! The canonical enumeration order for types is colexicographic on count
//! vectors (last coordinate varies slowest), so for binary length 2 the
//! order is (2,0), (1,1), (0,2). That order is load-bearing: array indices
//! derived from it must be reproducible across runs and versions.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

/// Symbols are stored as `u8`, so alphabets are capped at 256. Composite
/// alphabets built by [`Sequence::zip`] must also fit under this cap.
pub const MAX_ALPHABET: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("symbol {symbol} at position {index} is outside alphabet of size {alphabet_size}")]
    SymbolOutOfRange {
        index: usize,
        symbol: u8,
        alphabet_size: usize,
    },
    #[error("sequences must have length at least 1")]
    EmptySequence,
    #[error("alphabet size {0} is not in 1..={MAX_ALPHABET}")]
    BadAlphabet(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("conditioning counts do not match the type of the given sequence")]
    IncompatibleConditioning,
    #[error("permutation map is not a bijection on 0..n")]
    InvalidPermutation,
    #[error("count vector must be nonempty with positive total")]
    InvalidCounts,
    #[error("cannot parse symbol character {0:?}")]
    BadSymbolChar(char),
}

/// A finite sequence over the alphabet `{0, .., alphabet_size-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    symbols: Vec<u8>,
    alphabet_size: usize,
}

impl Sequence {
    pub fn new(symbols: Vec<u8>, alphabet_size: usize) -> Result<Self, TypeError> {
        if alphabet_size == 0 || alphabet_size > MAX_ALPHABET {
            return Err(TypeError::BadAlphabet(alphabet_size));
        }
        if symbols.is_empty() {
            return Err(TypeError::EmptySequence);
        }
        for (index, &symbol) in symbols.iter().enumerate() {
            if (symbol as usize) >= alphabet_size {
                return Err(TypeError::SymbolOutOfRange {
                    index,
                    symbol,
                    alphabet_size,
                });
            }
        }
        Ok(Self {
            symbols,
            alphabet_size,
        })
    }

    /// Parses a digit string such as `"0110"` (radix 36, so `"a"` is 10).
    pub fn parse(text: &str, alphabet_size: usize) -> Result<Self, TypeError> {
        let symbols = text
            .chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as u8)
                    .ok_or(TypeError::BadSymbolChar(c))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(symbols, alphabet_size)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length 1 is enforced at construction
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Big-endian base-q rank of the sequence among all q^N sequences.
    /// Panics on overflow; callers stay within q^N <= u64::MAX.
    pub fn to_index(&self) -> u64 {
        let q = self.alphabet_size as u64;
        self.symbols.iter().fold(0u64, |acc, &s| {
            acc.checked_mul(q)
                .and_then(|v| v.checked_add(s as u64))
                .expect("sequence index overflows u64")
        })
    }

    /// Inverse of [`Sequence::to_index`] for given length and alphabet.
    pub fn from_index(mut index: u64, n: usize, alphabet_size: usize) -> Result<Self, TypeError> {
        if alphabet_size == 0 || alphabet_size > MAX_ALPHABET {
            return Err(TypeError::BadAlphabet(alphabet_size));
        }
        if n == 0 {
            return Err(TypeError::EmptySequence);
        }
        let q = alphabet_size as u64;
        let mut symbols = vec![0u8; n];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % q) as u8;
            index /= q;
        }
        debug_assert_eq!(index, 0, "index exceeds alphabet_size^n");
        Self::new(symbols, alphabet_size)
    }

    /// Pairs two equal-length sequences into one over the product alphabet,
    /// symbol = a_i * |B| + b_i. One sampling routine then serves composite
    /// conditioning like (u, s).
    pub fn zip(a: &Sequence, b: &Sequence) -> Result<Sequence, TypeError> {
        if a.len() != b.len() {
            return Err(TypeError::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let q = a.alphabet_size * b.alphabet_size;
        if q > MAX_ALPHABET {
            return Err(TypeError::BadAlphabet(q));
        }
        let symbols = a
            .symbols
            .iter()
            .zip(&b.symbols)
            .map(|(&x, &y)| x * b.alphabet_size as u8 + y)
            .collect();
        Sequence::new(symbols, q)
    }
}

impl std::fmt::Display for Sequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &s in &self.symbols {
            match std::char::from_digit(s as u32, 36) {
                Some(c) => write!(f, "{c}")?,
                None => write!(f, "[{s}]")?,
            }
        }
        Ok(())
    }
}

/// Occurrence counts of each symbol in a length-N sequence. The implied
/// probabilities counts/N sum to exactly 1 in rational arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EmpiricalPmf {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalPmf {
    pub fn new(counts: Vec<u64>) -> Result<Self, TypeError> {
        let n: u64 = counts.iter().sum();
        if counts.is_empty() || n == 0 {
            return Err(TypeError::InvalidCounts);
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.counts[symbol] as f64 / self.n as f64
    }

    pub fn probs(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    /// Entropy of counts/N in bits, with 0 log 0 = 0.
    pub fn entropy(&self) -> f64 {
        entropy_of_counts(&self.counts, self.n)
    }
}

/// Pair-occurrence counts over X x Y, stored row-major by x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointType {
    counts: Vec<u64>,
    qx: usize,
    qy: usize,
    n: u64,
}

impl JointType {
    pub fn count(&self, x: usize, y: usize) -> u64 {
        self.counts[x * self.qy + y]
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn x_alphabet(&self) -> usize {
        self.qx
    }

    pub fn y_alphabet(&self) -> usize {
        self.qy
    }

    pub fn x_marginal(&self) -> EmpiricalPmf {
        let counts = (0..self.qx)
            .map(|x| (0..self.qy).map(|y| self.count(x, y)).sum())
            .collect();
        EmpiricalPmf { counts, n: self.n }
    }

    pub fn y_marginal(&self) -> EmpiricalPmf {
        let counts = (0..self.qy)
            .map(|y| (0..self.qx).map(|x| self.count(x, y)).sum())
            .collect();
        EmpiricalPmf { counts, n: self.n }
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_counts(&self.counts, self.n)
    }

    /// I(X;Y) of the joint type in bits; nonnegative, 0 iff it factorizes.
    pub fn mutual_information(&self) -> f64 {
        let value =
            self.x_marginal().entropy() + self.y_marginal().entropy() - self.entropy();
        value.max(0.0)
    }
}

/// Counts of output symbols within each conditioning-symbol position set.
/// Row a is defined (nonzero) only where the conditioning type has mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalType {
    counts: Vec<u64>,
    cond_counts: Vec<u64>,
    qy: usize,
}

impl ConditionalType {
    /// Builds from per-conditioning-symbol rows; conditioning totals are the
    /// row sums, so consistency holds by construction.
    pub fn from_rows(rows: Vec<Vec<u64>>, qy: usize) -> Result<Self, TypeError> {
        if rows.is_empty() || qy == 0 {
            return Err(TypeError::InvalidCounts);
        }
        let mut counts = Vec::with_capacity(rows.len() * qy);
        let mut cond_counts = Vec::with_capacity(rows.len());
        for row in &rows {
            if row.len() != qy {
                return Err(TypeError::LengthMismatch {
                    left: row.len(),
                    right: qy,
                });
            }
            cond_counts.push(row.iter().sum());
            counts.extend_from_slice(row);
        }
        Ok(Self {
            counts,
            cond_counts,
            qy,
        })
    }

    /// The identity conditional over a square alphabet: row a puts all of
    /// `cond_counts[a]` on output a.
    pub fn identity(cond_counts: &[u64]) -> Self {
        let q = cond_counts.len();
        let mut counts = vec![0u64; q * q];
        for (a, &c) in cond_counts.iter().enumerate() {
            counts[a * q + a] = c;
        }
        Self {
            counts,
            cond_counts: cond_counts.to_vec(),
            qy: q,
        }
    }

    pub fn count(&self, given: usize, y: usize) -> u64 {
        self.counts[given * self.qy + y]
    }

    pub fn row(&self, given: usize) -> &[u64] {
        &self.counts[given * self.qy..(given + 1) * self.qy]
    }

    pub fn conditioning_counts(&self) -> &[u64] {
        &self.cond_counts
    }

    pub fn conditioning_alphabet(&self) -> usize {
        self.cond_counts.len()
    }

    pub fn y_alphabet(&self) -> usize {
        self.qy
    }

    /// p(y | given); only defined where the conditioning count is positive.
    pub fn prob(&self, given: usize, y: usize) -> f64 {
        self.count(given, y) as f64 / self.cond_counts[given] as f64
    }

    /// Number of sequences whose conditional type w.r.t. a fixed conditioning
    /// sequence equals this one: a product of per-row multinomials.
    pub fn fiber_size(&self) -> u128 {
        (0..self.cond_counts.len())
            .map(|a| multinomial(self.row(a)))
            .product()
    }
}

/// Exact occurrence counts of `seq`.
pub fn type_of(seq: &Sequence) -> EmpiricalPmf {
    let mut counts = vec![0u64; seq.alphabet_size()];
    for &s in seq.symbols() {
        counts[s as usize] += 1;
    }
    EmpiricalPmf {
        counts,
        n: seq.len() as u64,
    }
}

/// Joint type of (x, y) and the conditional type of y given x.
pub fn joint_and_conditional_type(
    x: &Sequence,
    y: &Sequence,
) -> Result<(JointType, ConditionalType), TypeError> {
    if x.len() != y.len() {
        return Err(TypeError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let (qx, qy) = (x.alphabet_size(), y.alphabet_size());
    let mut counts = vec![0u64; qx * qy];
    for (&a, &b) in x.symbols().iter().zip(y.symbols()) {
        counts[a as usize * qy + b as usize] += 1;
    }
    let joint = JointType {
        counts: counts.clone(),
        qx,
        qy,
        n: x.len() as u64,
    };
    let cond = ConditionalType {
        counts,
        cond_counts: type_of(x).counts,
        qy,
    };
    Ok((joint, cond))
}

/// |T_t| = N! / prod counts!, computed exactly in u128 as a stepwise product
/// of binomials so no intermediate exceeds the final value times N.
pub fn type_class_size(t: &EmpiricalPmf) -> u128 {
    multinomial(t.counts())
}

fn multinomial(counts: &[u64]) -> u128 {
    let mut remaining: u64 = counts.iter().sum();
    let mut size: u128 = 1;
    for &c in counts {
        size = size
            .checked_mul(binomial(remaining, c))
            .expect("type class size overflows u128");
        remaining -= c;
    }
    size
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut value: u128 = 1;
    for i in 0..k {
        // exact at every step: value holds C(n, i+1) after the division
        value = value * (n - i) as u128 / (i + 1) as u128;
    }
    value
}

/// All count vectors of length `alphabet_size` summing to `n`, in ascending
/// colexicographic order.
pub fn enumerate_types(n: u64, alphabet_size: usize) -> Vec<EmpiricalPmf> {
    let mut out = Vec::new();
    let mut counts = vec![0u64; alphabet_size];
    fill_types(&mut counts, alphabet_size, n, &mut out);
    out
}

fn fill_types(counts: &mut Vec<u64>, pos: usize, left: u64, out: &mut Vec<EmpiricalPmf>) {
    if pos == 1 {
        counts[0] = left;
        out.push(EmpiricalPmf {
            counts: counts.clone(),
            n: counts.iter().sum(),
        });
        return;
    }
    for c in 0..=left {
        counts[pos - 1] = c;
        fill_types(counts, pos - 1, left - c, out);
    }
}

/// Entropy of the type of `seq` in bits.
pub fn empirical_entropy(seq: &Sequence) -> f64 {
    type_of(seq).entropy()
}

/// Mutual information of the joint type of (u, y) in bits.
pub fn empirical_mutual_information(u: &Sequence, y: &Sequence) -> Result<f64, TypeError> {
    let (joint, _) = joint_and_conditional_type(u, y)?;
    Ok(joint.mutual_information())
}

fn entropy_of_counts(counts: &[u64], n: u64) -> f64 {
    let n = n as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h.max(0.0)
}

/// Draws uniformly from the fiber of sequences whose conditional type given
/// `given` equals `target`. Within each conditioning symbol's position set a
/// canonical assignment is shuffled; independence across symbols makes every
/// fiber element equally likely.
pub fn sample_conditional_type_class<R: Rng + ?Sized>(
    target: &ConditionalType,
    given: &Sequence,
    rng: &mut R,
) -> Result<Sequence, TypeError> {
    check_conditioning(target, given)?;
    let mut symbols = vec![0u8; given.len()];
    for a in 0..target.conditioning_alphabet() {
        if target.cond_counts[a] == 0 {
            continue;
        }
        let mut block = canonical_row(target.row(a));
        block.shuffle(rng);
        scatter(&mut symbols, given, a as u8, &block);
    }
    Sequence::new(symbols, target.qy)
}

/// Every element of the fiber, as the cartesian product over conditioning
/// symbols of the multiset permutations of each row. Sizes grow fast; callers
/// keep N small (exact-enumeration paths cap N at 6).
pub fn enumerate_conditional_type_class(
    target: &ConditionalType,
    given: &Sequence,
) -> Result<Vec<Sequence>, TypeError> {
    check_conditioning(target, given)?;
    let mut fibers: Vec<Sequence> = vec![Sequence {
        symbols: vec![0u8; given.len()],
        alphabet_size: target.qy,
    }];
    for a in 0..target.conditioning_alphabet() {
        if target.cond_counts[a] == 0 {
            continue;
        }
        let arrangements = multiset_permutations(target.row(a));
        let mut next = Vec::with_capacity(fibers.len() * arrangements.len());
        for base in &fibers {
            for arr in &arrangements {
                let mut s = base.clone();
                scatter(&mut s.symbols, given, a as u8, arr);
                next.push(s);
            }
        }
        fibers = next;
    }
    Ok(fibers)
}

/// Every sequence with type `t`, in lexicographic symbol order.
pub fn enumerate_type_class(t: &EmpiricalPmf) -> Vec<Sequence> {
    multiset_permutations(t.counts())
        .into_iter()
        .map(|symbols| Sequence {
            symbols,
            alphabet_size: t.alphabet_size(),
        })
        .collect()
}

fn check_conditioning(target: &ConditionalType, given: &Sequence) -> Result<(), TypeError> {
    let given_type = type_of(given);
    if target.cond_counts.len() != given.alphabet_size()
        || target.cond_counts != given_type.counts
    {
        return Err(TypeError::IncompatibleConditioning);
    }
    Ok(())
}

fn canonical_row(row: &[u64]) -> Vec<u8> {
    let mut block = Vec::with_capacity(row.iter().sum::<u64>() as usize);
    for (y, &c) in row.iter().enumerate() {
        block.extend(std::iter::repeat(y as u8).take(c as usize));
    }
    block
}

fn scatter(symbols: &mut [u8], given: &Sequence, symbol: u8, block: &[u8]) {
    let mut it = block.iter();
    for (slot, &g) in symbols.iter_mut().zip(given.symbols()) {
        if g == symbol {
            *slot = *it.next().expect("conditioning count mismatch");
        }
    }
    debug_assert!(it.next().is_none());
}

fn multiset_permutations(counts: &[u64]) -> Vec<Vec<u8>> {
    let n: u64 = counts.iter().sum();
    let mut remaining = counts.to_vec();
    let mut prefix = Vec::with_capacity(n as usize);
    let mut out = Vec::new();
    fill_arrangements(&mut remaining, &mut prefix, n as usize, &mut out);
    out
}

fn fill_arrangements(
    remaining: &mut [u64],
    prefix: &mut Vec<u8>,
    n: usize,
    out: &mut Vec<Vec<u8>>,
) {
    if prefix.len() == n {
        out.push(prefix.clone());
        return;
    }
    for y in 0..remaining.len() {
        if remaining[y] > 0 {
            remaining[y] -= 1;
            prefix.push(y as u8);
            fill_arrangements(remaining, prefix, n, out);
            prefix.pop();
            remaining[y] += 1;
        }
    }
}

/// A permutation of positions 0..n. Applying it reads `out[i] = in[map(i)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self, TypeError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &i in &map {
            if i >= n || seen[i] {
                return Err(TypeError::InvalidPermutation);
            }
            seen[i] = true;
        }
        Ok(Self { map })
    }

    /// Uniform over all n! permutations (Fisher-Yates).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Self { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// apply(inverse) cancels apply in both orders.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0usize; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Self { map: inv }
    }

    /// apply(compose(p2, p1), s) == apply(p2, apply(p1, s)).
    pub fn compose(p2: &Permutation, p1: &Permutation) -> Self {
        debug_assert_eq!(p2.len(), p1.len());
        Self {
            map: p2.map.iter().map(|&i| p1.map[i]).collect(),
        }
    }

    pub fn apply(&self, seq: &Sequence) -> Result<Sequence, TypeError> {
        apply_permutation(seq, self)
    }

    /// All n! permutations; capped so exhaustive verifiers stay small.
    pub fn enumerate_all(n: usize) -> Vec<Permutation> {
        assert!(n <= 8, "exhaustive permutation enumeration capped at n=8");
        let mut out = Vec::new();
        let mut map: Vec<usize> = (0..n).collect();
        heap_permute(&mut map, n, &mut out);
        out
    }
}

fn heap_permute(map: &mut Vec<usize>, k: usize, out: &mut Vec<Permutation>) {
    if k <= 1 {
        out.push(Permutation { map: map.clone() });
        return;
    }
    for i in 0..k {
        heap_permute(map, k - 1, out);
        if k % 2 == 0 {
            map.swap(i, k - 1);
        } else {
            map.swap(0, k - 1);
        }
    }
}

/// Reorders `seq` by reading positions through the permutation; the type is
/// preserved exactly.
pub fn apply_permutation(seq: &Sequence, perm: &Permutation) -> Result<Sequence, TypeError> {
    if seq.len() != perm.len() {
        return Err(TypeError::LengthMismatch {
            left: seq.len(),
            right: perm.len(),
        });
    }
    let symbols = perm.map.iter().map(|&i| seq.symbols[i]).collect();
    Ok(Sequence {
        symbols,
        alphabet_size: seq.alphabet_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(text: &str, q: usize) -> Sequence {
        Sequence::parse(text, q).unwrap()
    }

    #[test]
    fn type_of_counts_symbols() {
        assert_eq!(type_of(&seq("0110", 2)).counts(), &[2, 2]);
        assert_eq!(type_of(&seq("0000", 2)).counts(), &[4, 0]);
        assert_eq!(type_of(&seq("01220", 3)).counts(), &[2, 1, 2]);
        let t = type_of(&seq("0110", 2));
        assert_eq!(t.probs(), vec![0.5, 0.5]);
    }

    #[test]
    fn joint_type_examples() {
        let (joint, cond) =
            joint_and_conditional_type(&seq("01", 2), &seq("01", 2)).unwrap();
        assert_eq!(joint.count(0, 0), 1);
        assert_eq!(joint.count(1, 1), 1);
        assert_eq!(joint.count(0, 1), 0);
        assert_eq!(cond, ConditionalType::identity(&[1, 1]));

        let (_, cond) = joint_and_conditional_type(&seq("00", 2), &seq("01", 2)).unwrap();
        assert_eq!(cond.prob(0, 0), 0.5);
        assert_eq!(cond.prob(0, 1), 0.5);

        let (joint, _) =
            joint_and_conditional_type(&seq("0011", 2), &seq("0101", 2)).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(joint.count(x, y), 1);
            }
        }
    }

    #[test]
    fn joint_type_rejects_length_mismatch() {
        let err = joint_and_conditional_type(&seq("01", 2), &seq("011", 2)).unwrap_err();
        assert_eq!(err, TypeError::LengthMismatch { left: 2, right: 3 });
    }

    #[test]
    fn type_class_sizes() {
        assert_eq!(type_class_size(&EmpiricalPmf::new(vec![2, 2]).unwrap()), 6);
        assert_eq!(type_class_size(&EmpiricalPmf::new(vec![4, 0]).unwrap()), 1);
        assert_eq!(
            type_class_size(&EmpiricalPmf::new(vec![1, 1, 1]).unwrap()),
            6
        );
    }

    #[test]
    fn type_class_size_matches_exhaustive_count() {
        for (q, max_n) in [(2usize, 8u64), (3, 8)] {
            for n in 1..=max_n {
                let mut census = std::collections::HashMap::new();
                for idx in 0..(q as u64).pow(n as u32) {
                    let s = Sequence::from_index(idx, n as usize, q).unwrap();
                    *census.entry(type_of(&s)).or_insert(0u128) += 1;
                }
                for (t, observed) in census {
                    assert_eq!(type_class_size(&t), observed);
                }
            }
        }
    }

    #[test]
    fn enumerate_types_colex_order() {
        let types = enumerate_types(2, 2);
        let counts: Vec<_> = types.iter().map(|t| t.counts().to_vec()).collect();
        assert_eq!(counts, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(enumerate_types(1, 2).len(), 2);
        assert_eq!(enumerate_types(4, 2).len(), 5);
    }

    #[test]
    fn type_class_sizes_partition_the_cube() {
        for (q, n) in [(2usize, 10u64), (3, 6), (4, 5)] {
            let total: u128 = enumerate_types(n, q)
                .iter()
                .map(type_class_size)
                .sum();
            assert_eq!(total, (q as u128).pow(n as u32));
        }
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(empirical_entropy(&seq("0011", 2)), 1.0);
        assert_eq!(empirical_entropy(&seq("0000", 2)), 0.0);
        let h = empirical_entropy(&seq("0001", 2));
        assert!((h - 0.8112781244591328).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let u = seq("0101", 2);
        assert_eq!(empirical_mutual_information(&u, &u).unwrap(), 1.0);
        let a = seq("0011", 2);
        let b = seq("0101", 2);
        assert_eq!(empirical_mutual_information(&a, &b).unwrap(), 0.0);
        assert_eq!(empirical_mutual_information(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn fiber_sampling_identity_and_forced_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let given = seq("0011", 2);
        let identity = ConditionalType::identity(&[2, 2]);
        let out = sample_conditional_type_class(&identity, &given, &mut rng).unwrap();
        assert_eq!(out, given);

        // all zeros map to 1 and all ones map to 0: the fiber is a single point
        let flip = ConditionalType::from_rows(vec![vec![0, 2], vec![2, 0]], 2).unwrap();
        let out = sample_conditional_type_class(&flip, &given, &mut rng).unwrap();
        assert_eq!(out, seq("1100", 2));
    }

    #[test]
    fn fiber_sampling_is_uniform_on_two_point_fiber() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let given = seq("00", 2);
        let half = ConditionalType::from_rows(vec![vec![1, 1], vec![0, 0]], 2).unwrap();
        let mut hits = [0u32; 2];
        for _ in 0..10_000 {
            let out = sample_conditional_type_class(&half, &given, &mut rng).unwrap();
            match out.symbols() {
                [0, 1] => hits[0] += 1,
                [1, 0] => hits[1] += 1,
                other => panic!("escaped the fiber: {other:?}"),
            }
        }
        // 4 sigma band around 5000 for Binomial(10^4, 1/2)
        let sigma = (10_000.0f64 * 0.25).sqrt();
        assert!((hits[0] as f64 - 5000.0).abs() < 4.0 * sigma, "{hits:?}");
    }

    #[test]
    fn fiber_sampling_is_uniform_on_larger_fiber() {
        // conditional type with rows (2,1) and (1,2): fiber size 3*3 = 9 <= 24
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let given = seq("000111", 2);
        let target = ConditionalType::from_rows(vec![vec![2, 1], vec![1, 2]], 2).unwrap();
        assert_eq!(target.fiber_size(), 9);
        let fiber = enumerate_conditional_type_class(&target, &given).unwrap();
        assert_eq!(fiber.len(), 9);

        let mut hits = std::collections::HashMap::new();
        let draws = 18_000;
        for _ in 0..draws {
            let out = sample_conditional_type_class(&target, &given, &mut rng).unwrap();
            *hits.entry(out).or_insert(0u32) += 1;
        }
        let expect = draws as f64 / 9.0;
        let sigma = (draws as f64 * (1.0 / 9.0) * (8.0 / 9.0)).sqrt();
        for member in &fiber {
            let h = *hits.get(member).unwrap_or(&0) as f64;
            assert!((h - expect).abs() < 4.0 * sigma, "{member}: {h}");
        }
    }

    #[test]
    fn fiber_enumeration_matches_size_and_membership() {
        let given = seq("0012", 3);
        let target =
            ConditionalType::from_rows(vec![vec![1, 1, 0], vec![0, 0, 1], vec![1, 0, 0]], 3)
                .unwrap();
        let fiber = enumerate_conditional_type_class(&target, &given).unwrap();
        assert_eq!(fiber.len() as u128, target.fiber_size());
        for member in &fiber {
            let (_, cond) = joint_and_conditional_type(&given, member).unwrap();
            assert_eq!(cond, target);
        }
    }

    #[test]
    fn incompatible_conditioning_is_rejected() {
        let given = seq("0011", 2);
        let bad = ConditionalType::from_rows(vec![vec![1, 0], vec![2, 0]], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            sample_conditional_type_class(&bad, &given, &mut rng).unwrap_err(),
            TypeError::IncompatibleConditioning
        );
    }

    #[test]
    fn permutation_examples() {
        let s = seq("012", 3);
        let id = Permutation::identity(3);
        assert_eq!(apply_permutation(&s, &id).unwrap(), s);
        let rev = Permutation::from_map(vec![2, 1, 0]).unwrap();
        assert_eq!(apply_permutation(&s, &rev).unwrap(), seq("210", 3));
    }

    #[test]
    fn permutation_composition_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..=8);
            let p1 = Permutation::random(n, &mut rng);
            let p2 = Permutation::random(n, &mut rng);
            let symbols: Vec<u8> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let s = Sequence::new(symbols, 4).unwrap();
            let two_step = p2.apply(&p1.apply(&s).unwrap()).unwrap();
            let one_step = Permutation::compose(&p2, &p1).apply(&s).unwrap();
            assert_eq!(two_step, one_step);
            let back = p1.inverse().apply(&p1.apply(&s).unwrap()).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn permutation_enumeration_is_complete() {
        let perms = Permutation::enumerate_all(4);
        assert_eq!(perms.len(), 24);
        let distinct: std::collections::HashSet<_> =
            perms.iter().map(|p| p.map().to_vec()).collect();
        assert_eq!(distinct.len(), 24);
    }

    #[test]
    fn zip_flattens_to_product_alphabet() {
        let a = seq("01", 2);
        let b = seq("21", 3);
        let z = Sequence::zip(&a, &b).unwrap();
        assert_eq!(z.symbols(), &[2, 4]);
        assert_eq!(z.alphabet_size(), 6);
    }

    #[test]
    fn index_round_trip() {
        for idx in 0..81 {
            let s = Sequence::from_index(idx, 4, 3).unwrap();
            assert_eq!(s.to_index(), idx);
        }
    }

    #[test]
    fn sequence_validation() {
        assert_eq!(
            Sequence::new(vec![], 2).unwrap_err(),
            TypeError::EmptySequence
        );
        assert!(matches!(
            Sequence::new(vec![2], 2).unwrap_err(),
            TypeError::SymbolOutOfRange { .. }
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_sequence(max_q: usize, max_n: usize) -> impl Strategy<Value = Sequence> {
            (2..=max_q, 1..=max_n).prop_flat_map(|(q, n)| {
                proptest::collection::vec(0..q as u8, n)
                    .prop_map(move |symbols| Sequence::new(symbols, q).unwrap())
            })
        }

        fn arb_pair(max_q: usize, max_n: usize) -> impl Strategy<Value = (Sequence, Sequence)> {
            (2..=max_q, 2..=max_q, 1..=max_n).prop_flat_map(|(qa, qb, n)| {
                (
                    proptest::collection::vec(0..qa as u8, n),
                    proptest::collection::vec(0..qb as u8, n),
                )
                    .prop_map(move |(a, b)| {
                        (
                            Sequence::new(a, qa).unwrap(),
                            Sequence::new(b, qb).unwrap(),
                        )
                    })
            })
        }

        proptest! {
            #[test]
            fn mi_is_entropy_sum_minus_joint((u, y) in arb_pair(4, 12)) {
                let (joint, _) = joint_and_conditional_type(&u, &y).unwrap();
                let direct = empirical_mutual_information(&u, &y).unwrap();
                let via_entropies =
                    empirical_entropy(&u) + empirical_entropy(&y) - joint.entropy();
                prop_assert!((direct - via_entropies.max(0.0)).abs() < 1e-12);
                prop_assert!(direct >= 0.0);
            }

            #[test]
            fn permutations_preserve_type(s in arb_sequence(4, 12), salt in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(salt);
                let p = Permutation::random(s.len(), &mut rng);
                let permuted = apply_permutation(&s, &p).unwrap();
                prop_assert_eq!(type_of(&permuted), type_of(&s));
            }

            #[test]
            fn sampled_fiber_member_has_target_type(
                (x, y) in arb_pair(3, 10),
                salt in any::<u64>(),
            ) {
                // derive a realizable target from (x, y) itself
                let (_, target) = joint_and_conditional_type(&x, &y).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(salt);
                let drawn = sample_conditional_type_class(&target, &x, &mut rng).unwrap();
                let (_, cond) = joint_and_conditional_type(&x, &drawn).unwrap();
                prop_assert_eq!(cond, target);
            }

            #[test]
            fn joint_marginals_match_types((x, y) in arb_pair(4, 12)) {
                let (joint, _) = joint_and_conditional_type(&x, &y).unwrap();
                prop_assert_eq!(joint.x_marginal(), type_of(&x));
                prop_assert_eq!(joint.y_marginal(), type_of(&y));
            }

            #[test]
            fn index_round_trips(s in arb_sequence(4, 12)) {
                let back =
                    Sequence::from_index(s.to_index(), s.len(), s.alphabet_size()).unwrap();
                prop_assert_eq!(back, s);
            }
        }
    }
}
