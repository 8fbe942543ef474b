//! Exact stegotext-distribution audits. The encoder's internal draws
//! (row picks and fiber samples) are enumerated with exact weights, never
//! sampled, so the reported total variation is meaningful at 1e-12.

use super::{sample_iid, trial_seed, CodecHandle, SimError, MAX_EXACT_BLOCK};
use crate::codec::{
    ccc_encode, nested_encode, rm_encode, RmKey, StackedCodebook,
};
use crate::codec::stacked::u_conditional_matches;
use crate::exec;
use crate::typestat::{enumerate_conditional_type_class, type_of, Permutation, Sequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
}

/// How far the stegotext law sits from the covertext law.
#[derive(Debug, Clone, Serialize)]
pub struct SecurityReport {
    pub n: usize,
    pub tv_distance: f64,
    pub max_abs_gap: f64,
    pub method: Method,
    pub samples: Option<u64>,
}

/// i.i.d. product law over all q^n sequence indices, big-endian digit
/// order to match Sequence::to_index.
fn product_law(p: &[f64], n: usize) -> Vec<f64> {
    let mut law = vec![1.0];
    for _ in 0..n {
        let mut next = Vec::with_capacity(law.len() * p.len());
        for &w in &law {
            for &a in p {
                next.push(w * a);
            }
        }
        law = next;
    }
    law
}

/// Exact law of the stegotext index given (s, m), enumerating matching
/// rows and conditional-type fibers with their uniform weights.
pub(super) fn encoder_distribution(
    cb: &StackedCodebook,
    s: &Sequence,
    m: usize,
) -> Result<Vec<(u64, f64)>, SimError> {
    let t = type_of(s);
    let array = cb
        .array_for_type(&t)
        .ok_or_else(|| SimError::Degenerate("no array for the covertext type".into()))?;
    let l = cb.params().l;
    let xcond = array.xus_conditional();
    let mut acc: HashMap<u64, f64> = HashMap::new();
    let mut add_u = |u: &Sequence, w: f64| -> Result<(), SimError> {
        let pair = Sequence::zip(s, u)?;
        let fiber = enumerate_conditional_type_class(&xcond, &pair)?;
        let wx = w / fiber.len() as f64;
        for x in &fiber {
            *acc.entry(x.to_index()).or_insert(0.0) += wx;
        }
        Ok(())
    };
    let matches: Vec<usize> = (0..array.rows())
        .filter(|&row| u_conditional_matches(s, array.codeword(row, m), &array.us_rows, l))
        .collect();
    if matches.is_empty() {
        let us = array.us_conditional();
        let fiber_u = enumerate_conditional_type_class(&us, s)?;
        let wu = 1.0 / fiber_u.len() as f64;
        for u in &fiber_u {
            add_u(u, wu)?;
        }
    } else {
        let wr = 1.0 / matches.len() as f64;
        for &row in &matches {
            add_u(array.codeword(row, m), wr)?;
        }
    }
    let mut out: Vec<(u64, f64)> = acc.into_iter().collect();
    out.sort_unstable_by_key(|&(i, _)| i);
    Ok(out)
}

/// Encoder laws for every (covertext index, message); shared by the
/// security audit and the permutation-equivalence check.
pub(super) fn encoder_cache(
    cb: &StackedCodebook,
) -> Result<Vec<Vec<Vec<(u64, f64)>>>, SimError> {
    let n = cb.params().n;
    let q = cb.params().alphabet_size();
    let cells = q.pow(n as u32);
    let cols = cb.message_count();
    let mut cache = Vec::with_capacity(cells);
    for idx in 0..cells {
        let s = Sequence::from_index(idx as u64, n, q)?;
        let mut per_m = Vec::with_capacity(cols);
        for m in 0..cols {
            per_m.push(encoder_distribution(cb, &s, m)?);
        }
        cache.push(per_m);
    }
    Ok(cache)
}

fn check_exact_caps(n: usize, q: usize) -> Result<usize, SimError> {
    if n > MAX_EXACT_BLOCK {
        return Err(SimError::Scale(format!(
            "exact enumeration caps the block length at {MAX_EXACT_BLOCK}, got {n}"
        )));
    }
    Ok(q.pow(n as u32))
}

/// Exact distribution of the stegotext under the handle's key law, as a
/// dense vector over sequence indices.
pub(super) fn stego_distribution(handle: &CodecHandle) -> Result<Vec<f64>, SimError> {
    let n = handle.block_length();
    let q = handle.alphabet_size();
    let cells = check_exact_caps(n, q)?;
    let p_pow = product_law(handle.covertext_law().probs(), n);
    let cols = handle.message_count();

    match handle {
        CodecHandle::Stacked(cb) => {
            let cache = encoder_cache(cb)?;
            let mut dist = vec![0.0; cells];
            for (s_idx, per_m) in cache.iter().enumerate() {
                let base = p_pow[s_idx] / cols as f64;
                for support in per_m {
                    for &(x_idx, w) in support {
                        dist[x_idx as usize] += base * w;
                    }
                }
            }
            Ok(dist)
        }
        CodecHandle::Rm(cb) => {
            let cache = encoder_cache(cb)?;
            let digits: Vec<Vec<u8>> = (0..cells)
                .map(|i| {
                    Sequence::from_index(i as u64, n, q)
                        .expect("index below q^n")
                        .symbols()
                        .to_vec()
                })
                .collect();
            let perms = Permutation::enumerate_all(n);
            let inv_maps: Vec<Vec<usize>> = perms.iter().map(|p| p.inverse().map().to_vec()).collect();
            let maps: Vec<Vec<usize>> = perms.iter().map(|p| p.map().to_vec()).collect();
            let key_w = 1.0 / perms.len() as f64;
            let dist = exec::accumulate_indexed(perms.len(), cells, |pi, acc| {
                let map = &maps[pi];
                let inv = &inv_maps[pi];
                let mut permuted = vec![0u8; n];
                for (s_idx, s_sym) in digits.iter().enumerate() {
                    for (i, &j) in map.iter().enumerate() {
                        permuted[i] = s_sym[j];
                    }
                    let sp_idx = permuted
                        .iter()
                        .fold(0usize, |acc, &d| acc * q + d as usize);
                    let base = p_pow[s_idx] * key_w / cols as f64;
                    for support in &cache[sp_idx] {
                        for &(xp_idx, w) in support {
                            let xp = &digits[xp_idx as usize];
                            let mut x_idx = 0usize;
                            for &j in inv {
                                x_idx = x_idx * q + xp[j] as usize;
                            }
                            acc[x_idx] += base * w;
                        }
                    }
                }
            });
            Ok(dist)
        }
        CodecHandle::Nested { code, .. } => {
            let leaders = code.coset_leaders().len();
            let key_w = 1.0 / leaders as f64;
            let mut dist = vec![0.0; cells];
            for li in 0..leaders {
                let key = code.leader(li);
                for s_idx in 0..cells {
                    let s = Sequence::from_index(s_idx as u64, n, q)?;
                    let base = p_pow[s_idx] * key_w / cols as f64;
                    for m in 0..cols {
                        let x = nested_encode(&s, m, code, &key)?;
                        dist[x.to_index() as usize] += base;
                    }
                }
            }
            Ok(dist)
        }
    }
}

/// Compares the exact stegotext law against the i.i.d. covertext law.
pub fn exact_stego_distribution(handle: &CodecHandle) -> Result<SecurityReport, SimError> {
    let n = handle.block_length();
    let dist = stego_distribution(handle)?;
    let p_pow = product_law(handle.covertext_law().probs(), n);
    let gaps: Vec<f64> = dist.iter().zip(&p_pow).map(|(a, b)| (a - b).abs()).collect();
    let tv = 0.5 * exec::kahan_sum(&gaps);
    let max_abs_gap = gaps.iter().cloned().fold(0.0, f64::max);
    Ok(SecurityReport {
        n,
        tv_distance: tv,
        max_abs_gap,
        method: Method::Exact,
        samples: None,
    })
}

/// Monte Carlo stand-in for block lengths past the exact cap: empirical
/// stegotext frequencies against the covertext law. The result is an
/// estimate, not a proof.
pub fn sampled_stego_distribution(
    handle: &CodecHandle,
    samples: u64,
    seed: u64,
) -> Result<SecurityReport, SimError> {
    let n = handle.block_length();
    let q = handle.alphabet_size();
    let cells = q
        .checked_pow(n as u32)
        .filter(|&c| c <= 1 << 20)
        .ok_or_else(|| {
            SimError::Scale(format!("q^N histogram too large at q={q}, N={n}"))
        })?;
    if samples == 0 {
        return Err(SimError::Degenerate("no samples requested".into()));
    }
    let counts = exec::accumulate_indexed(samples as usize, cells, |i, acc| {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
        let x = draw_stegotext(handle, &mut rng).expect("drawing a stegotext cannot fail");
        acc[x.to_index() as usize] += 1.0;
    });
    let p_pow = product_law(handle.covertext_law().probs(), n);
    let inv = 1.0 / samples as f64;
    let gaps: Vec<f64> = counts
        .iter()
        .zip(&p_pow)
        .map(|(c, b)| (c * inv - b).abs())
        .collect();
    Ok(SecurityReport {
        n,
        tv_distance: 0.5 * exec::kahan_sum(&gaps),
        max_abs_gap: gaps.iter().cloned().fold(0.0, f64::max),
        method: Method::Sampled,
        samples: Some(samples),
    })
}

fn draw_stegotext<R: Rng + ?Sized>(
    handle: &CodecHandle,
    rng: &mut R,
) -> Result<Sequence, SimError> {
    let n = handle.block_length();
    let s = sample_iid(handle.covertext_law(), n, rng);
    let m = rng.gen_range(0..handle.message_count());
    match handle {
        CodecHandle::Stacked(cb) => Ok(ccc_encode(&s, m, cb, rng)?.0),
        CodecHandle::Rm(cb) => {
            let key = RmKey::random(n, rng);
            Ok(rm_encode(&s, m, cb, &key, rng)?)
        }
        CodecHandle::Nested { code, .. } => {
            let key = code.leader(rng.gen_range(0..code.coset_leaders().len()));
            Ok(nested_encode(&s, m, code, &key)?)
        }
    }
}
