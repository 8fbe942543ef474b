//! Randomized nested linear codes for the binary-Hamming case.
//!
//! Words live in F_2^N as u64 bitmasks with position 0 at the most
//! significant of the low N bits, so numeric order on masks equals
//! lexicographic order on sequences. Messages are the cosets of the
//! source code C1 inside the channel code C2; the secret key ranges over
//! the minimum-weight coset leaders of C2 in the full space.

use super::CodecError;
use crate::typestat::Sequence;
use std::collections::HashMap;

/// Upper bound on block length: coset-leader search scans all 2^N words.
pub const MAX_NESTED_BLOCK: usize = 20;

fn seq_to_mask(s: &Sequence) -> Result<u64, CodecError> {
    if s.alphabet_size() != 2 {
        return Err(CodecError::Mismatch(
            "nested codes take binary sequences".into(),
        ));
    }
    let n = s.len();
    let mut mask = 0u64;
    for (i, &b) in s.symbols().iter().enumerate() {
        mask |= (b as u64) << (n - 1 - i);
    }
    Ok(mask)
}

fn mask_to_seq(mask: u64, n: usize) -> Sequence {
    let symbols = (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect();
    Sequence::new(symbols, 2).expect("bits are a valid binary sequence")
}

fn span(generators: &[u64], n: usize) -> Result<Vec<u64>, CodecError> {
    let limit = 1u64 << n;
    for &g in generators {
        if g >= limit {
            return Err(CodecError::BadParams(format!(
                "generator {g:#b} does not fit in {n} bits"
            )));
        }
    }
    let mut words = vec![0u64];
    for &g in generators {
        if words.contains(&g) {
            continue;
        }
        let mut next = words.clone();
        next.extend(words.iter().map(|&w| w ^ g));
        words = next;
    }
    words.sort_unstable();
    Ok(words)
}

/// A pair C1 within C2 of binary linear codes plus the coset leaders of
/// C2 in the full space, precomputed exhaustively.
#[derive(Debug, Clone)]
pub struct NestedLinearCode {
    n: usize,
    c2: Vec<u64>,
    c1: Vec<u64>,
    /// Numeric-minimum representative of each C1-coset inside C2,
    /// ascending; position is the message index.
    message_reps: Vec<u64>,
    rep_of_word: HashMap<u64, usize>,
    /// Minimum-weight (then numeric-minimum) leader of each C2-coset of
    /// the full space, in discovery order.
    coset_leaders: Vec<u64>,
}

impl NestedLinearCode {
    pub fn new(n: usize, gen2: &[u64], gen1: &[u64]) -> Result<Self, CodecError> {
        if n < 1 || n > MAX_NESTED_BLOCK {
            return Err(CodecError::BadParams(format!(
                "block length {n} outside 1..={MAX_NESTED_BLOCK}"
            )));
        }
        let c2 = span(gen2, n)?;
        let c1 = span(gen1, n)?;
        for &w in &c1 {
            if c2.binary_search(&w).is_err() {
                return Err(CodecError::BadParams(format!(
                    "source codeword {w:#b} lies outside the channel code"
                )));
            }
        }

        // messages: C1-cosets inside C2, keyed by numeric-min representative
        let mut message_reps: Vec<u64> = c2
            .iter()
            .map(|&w| c1.iter().map(|&c| w ^ c).min().expect("span is nonempty"))
            .collect();
        message_reps.sort_unstable();
        message_reps.dedup();
        let mut rep_of_word = HashMap::with_capacity(c2.len());
        for &w in &c2 {
            let rep = c1.iter().map(|&c| w ^ c).min().expect("span is nonempty");
            let idx = message_reps.binary_search(&rep).expect("rep is recorded");
            rep_of_word.insert(w, idx);
        }

        // coset leaders of C2 in F_2^n: sweep words by (weight, value),
        // marking each discovered coset
        let total = 1usize << n;
        let mut order: Vec<u64> = (0..total as u64).collect();
        order.sort_unstable_by_key(|&w| (w.count_ones(), w));
        let mut visited = vec![false; total];
        let mut coset_leaders = Vec::new();
        for &w in &order {
            if visited[w as usize] {
                continue;
            }
            coset_leaders.push(w);
            for &c in &c2 {
                visited[(w ^ c) as usize] = true;
            }
        }

        Ok(Self {
            n,
            c2,
            c1,
            message_reps,
            rep_of_word,
            coset_leaders,
        })
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn message_count(&self) -> usize {
        self.message_reps.len()
    }

    pub fn coset_leaders(&self) -> &[u64] {
        &self.coset_leaders
    }

    /// The idx-th coset leader as a key sequence.
    pub fn leader(&self, idx: usize) -> Sequence {
        mask_to_seq(self.coset_leaders[idx], self.n)
    }

    /// log2 |C2| / N.
    pub fn channel_code_rate(&self) -> f64 {
        (self.c2.len() as f64).log2() / self.n as f64
    }

    /// log2 |Omega_2| / N; equals 1 - channel_code_rate() exactly because
    /// the cosets partition the full space.
    pub fn key_entropy_rate(&self) -> f64 {
        (self.coset_leaders.len() as f64).log2() / self.n as f64
    }

    fn check_key(&self, key: &Sequence) -> Result<u64, CodecError> {
        if key.len() != self.n {
            return Err(CodecError::Mismatch(format!(
                "key length {} does not match block length {}",
                key.len(),
                self.n
            )));
        }
        let k = seq_to_mask(key)?;
        if !self.coset_leaders.contains(&k) {
            return Err(CodecError::BadParams(format!(
                "key {k:#b} is not a coset leader"
            )));
        }
        Ok(k)
    }

    /// Nearest member of the m-th C1-coset of C2, minimum Hamming distance
    /// with numeric-minimum tie break.
    fn quantize(&self, w: u64, m: usize) -> u64 {
        let rep = self.message_reps[m];
        self.c1
            .iter()
            .map(|&c| rep ^ c)
            .min_by_key(|&cand| ((cand ^ w).count_ones(), cand))
            .expect("coset is nonempty")
    }

    fn nearest_c2(&self, w: u64) -> u64 {
        self.c2
            .iter()
            .copied()
            .min_by_key(|&cand| ((cand ^ w).count_ones(), cand))
            .expect("code is nonempty")
    }
}

/// x = f0(m, s xor k) xor k: quantize the key-shifted covertext onto the
/// message's C1-coset of C2, then shift back. The output always lies in
/// C2 xor k.
pub fn nested_encode(
    s: &Sequence,
    m: usize,
    code: &NestedLinearCode,
    key: &Sequence,
) -> Result<Sequence, CodecError> {
    if s.len() != code.n {
        return Err(CodecError::Mismatch(format!(
            "covertext length {} does not match block length {}",
            s.len(),
            code.n
        )));
    }
    if m >= code.message_count() {
        return Err(CodecError::Mismatch(format!(
            "message {m} out of range ({} cosets)",
            code.message_count()
        )));
    }
    let k = code.check_key(key)?;
    let w = seq_to_mask(s)? ^ k;
    let f0 = code.quantize(w, m);
    Ok(mask_to_seq(f0 ^ k, code.n))
}

/// Shift by the key, decode to the nearest C2 word, output its C1-coset
/// index.
pub fn nested_decode(
    y: &Sequence,
    code: &NestedLinearCode,
    key: &Sequence,
) -> Result<usize, CodecError> {
    if y.len() != code.n {
        return Err(CodecError::Mismatch(format!(
            "received length {} does not match block length {}",
            y.len(),
            code.n
        )));
    }
    let k = code.check_key(key)?;
    let w = seq_to_mask(y)? ^ k;
    let hat = code.nearest_c2(w);
    Ok(code.rep_of_word[&hat])
}
