//! Checks that key randomization leaves decoding performance untouched:
//! for a memoryless attack and an i.i.d. source, the permuted system's
//! exact error probability equals the prototype's for every key.

use super::exact::encoder_cache;
use super::{AttackSpec, SimError, MAX_EXACT_BLOCK};
use crate::codec::{mpmi_decode, StackedCodebook};
use crate::typestat::{Permutation, Sequence};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RmEquivalenceReport {
    pub prototype_pe: f64,
    pub permuted_pe: Vec<f64>,
    pub max_abs_deviation: f64,
}

/// Exact block error probability of the permuted system for each key in
/// `perms`, against the identity-key prototype. Enumeration covers the
/// source, the encoder's internal draws, and the channel, so agreement
/// is checkable at 1e-12.
pub fn rm_equivalence_check(
    cb: &StackedCodebook,
    spec: &AttackSpec,
    perms: &[Permutation],
) -> Result<RmEquivalenceReport, SimError> {
    let n = cb.params().n;
    let q = cb.params().alphabet_size();
    if n > MAX_EXACT_BLOCK {
        return Err(SimError::Scale(format!(
            "exact enumeration caps the block length at {MAX_EXACT_BLOCK}, got {n}"
        )));
    }
    for perm in perms {
        if perm.len() != n {
            return Err(SimError::Unsupported(format!(
                "permutation length {} does not match the block length {n}",
                perm.len()
            )));
        }
    }
    let law = spec.law(q);
    if law.input_alphabet() != q || law.output_alphabet() != q {
        return Err(SimError::Unsupported(
            "the decoder expects the attack to preserve the alphabet".into(),
        ));
    }
    let cells = q.pow(n as u32);
    let digits: Vec<Vec<u8>> = (0..cells)
        .map(|i| {
            Sequence::from_index(i as u64, n, q)
                .expect("index below q^n")
                .symbols()
                .to_vec()
        })
        .collect();
    // ties and failures decode to None and always count as errors
    let decode_table: Vec<Option<usize>> = (0..cells)
        .map(|i| {
            let y = Sequence::from_index(i as u64, n, q).expect("index below q^n");
            mpmi_decode(&y, cb).ok()
        })
        .collect();
    let cache = encoder_cache(cb)?;
    let p = cb.params().p_s.probs().to_vec();
    let cols = cb.message_count();
    let m_w = 1.0 / cols as f64;

    let pe_for = |perm: &Permutation| -> f64 {
        let map = perm.map().to_vec();
        let inv_map = perm.inverse().map().to_vec();
        let mut x = vec![0u8; n];
        let mut sum = 0.0;
        let mut comp = 0.0;
        for s_sym in &digits {
            let p_s: f64 = s_sym.iter().map(|&d| p[d as usize]).product();
            let sp_idx = map
                .iter()
                .fold(0usize, |acc, &j| acc * q + s_sym[j] as usize);
            for (m, support) in cache[sp_idx].iter().enumerate() {
                for &(xp_idx, w) in support {
                    let xp = &digits[xp_idx as usize];
                    for (i, &j) in inv_map.iter().enumerate() {
                        x[i] = xp[j];
                    }
                    let base = p_s * m_w * w;
                    for y_sym in &digits {
                        let mut py = base;
                        for (i, &yi) in y_sym.iter().enumerate() {
                            py *= law.prob(yi as usize, x[i] as usize);
                            if py == 0.0 {
                                break;
                            }
                        }
                        if py == 0.0 {
                            continue;
                        }
                        let dec_idx = map
                            .iter()
                            .fold(0usize, |acc, &j| acc * q + y_sym[j] as usize);
                        if decode_table[dec_idx] != Some(m) {
                            let t = py - comp;
                            let fresh = sum + t;
                            comp = (fresh - sum) - t;
                            sum = fresh;
                        }
                    }
                }
            }
        }
        sum
    };

    let prototype_pe = pe_for(&Permutation::identity(n));
    let permuted_pe: Vec<f64> = perms.iter().map(&pe_for).collect();
    let max_abs_deviation = permuted_pe
        .iter()
        .map(|pe| (pe - prototype_pe).abs())
        .fold(0.0, f64::max);
    Ok(RmEquivalenceReport {
        prototype_pe,
        permuted_pe,
        max_abs_deviation,
    })
}
