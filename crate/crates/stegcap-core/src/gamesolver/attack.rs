//! Inner minimization over the attacker's channel.
//!
//! The payoff is convex in the attack for a fixed covert channel, so the
//! inner problem has a unique value. Binary alphabets get a dense grid
//! plus golden-section polish over the two flip probabilities, which is
//! robust to the distortion boundary; larger alphabets fall back to
//! projected gradient descent with a Dykstra projection.

use super::payoff::{grad_attack_iuy, i_sy, i_uy};
use super::project::attack_polytope;
use crate::channels::DistortionMatrix;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal f over [lo, hi].
pub fn golden_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (lo, hi);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Thoroughness of the inner search. Backtracking line searches in the
/// outer ascent only need a value good enough to compare candidates;
/// accepted outer iterates get the full treatment.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Effort {
    Quick,
    Full,
}

/// Minimize f over attacks on a q-letter alphabet subject to the expected
/// distortion cap, given the payoff and its gradient as closures over the
/// flat attack array. Returns (attack, value).
fn min_convex_over_attacks(
    p_x: &[f64],
    d: &DistortionMatrix,
    d2: f64,
    q: usize,
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    warm: Option<&[f64]>,
    effort: Effort,
) -> (Vec<f64>, f64) {
    // with no distortion budget and strictly positive off-diagonal costs
    // the identity is the only feasible attack
    let min_offdiag = (0..q)
        .flat_map(|x| (0..q).filter(move |&y| y != x).map(move |y| d.get(x, y)))
        .fold(f64::INFINITY, f64::min);
    if d2 <= 1e-12 && min_offdiag > 0.0 {
        let mut ident = vec![0.0; q * q];
        for x in 0..q {
            ident[x * q + x] = 1.0;
        }
        let v = f(&ident);
        return (ident, v);
    }
    let proj = attack_polytope(p_x, d, d2)
        .expect("attack polytope projector must exist for valid inputs");
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = warm {
        starts.push(w.to_vec());
    }
    // identity and uniform bracket the extremes of attack aggressiveness
    let mut ident = vec![0.0; q * q];
    for x in 0..q {
        ident[x * q + x] = 1.0;
    }
    starts.push(ident);
    if effort == Effort::Full {
        starts.push(vec![1.0 / q as f64; q * q]);
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let mut a = start;
        proj.project(&mut a);
        let mut v = f(&a);
        let iters = match effort {
            Effort::Quick => 150,
            Effort::Full => 600,
        };
        for _ in 0..iters {
            let g = grad(&a);
            let gnorm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if gnorm < 1e-14 {
                break;
            }
            let mut t = 0.5 / gnorm;
            let mut accepted = false;
            for _ in 0..40 {
                let mut cand: Vec<f64> =
                    a.iter().zip(&g).map(|(x, gi)| x - t * gi).collect();
                proj.project(&mut cand);
                let vc = f(&cand);
                if vc < v - 1e-15 {
                    a = cand;
                    v = vc;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((a, v));
        }
    }
    best.unwrap()
}

/// Binary-alphabet exact-ish inner minimum of I(U;Y) via the two flip
/// probabilities a = A(1|0), b = A(0|1).
fn min_attack_binary(
    p_xu: &[f64],
    p_x: &[f64],
    d: &DistortionMatrix,
    d2: f64,
    l: usize,
    warm: Option<&[f64]>,
    effort: Effort,
) -> (Vec<f64>, f64) {
    let w0 = p_x[0] * d.get(0, 1);
    let w1 = p_x[1] * d.get(1, 0);
    let assemble = |a: f64, b: f64| vec![1.0 - a, a, b, 1.0 - b];
    let f = |a: f64, b: f64| i_uy(p_xu, &assemble(a, b), 2, l, 2);
    let a_cap = |b: f64| {
        if w0 > 1e-300 {
            ((d2 - w1 * b) / w0).clamp(0.0, 1.0)
        } else {
            1.0
        }
    };
    let b_cap = |a: f64| {
        if w1 > 1e-300 {
            ((d2 - w0 * a) / w1).clamp(0.0, 1.0)
        } else {
            1.0
        }
    };

    let mut cands: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    if let Some(w) = warm {
        cands.push((w[1].clamp(0.0, 1.0), w[2].clamp(0.0, 1.0)));
    }
    if effort == Effort::Full {
        let g = 400usize;
        for i in 0..=g {
            let a = a_cap(0.0) * i as f64 / g as f64;
            let bc = b_cap(a);
            for jj in 0..=g {
                let b = bc * jj as f64 / g as f64;
                cands.push((a, b));
            }
        }
    } else {
        // coarse sweep still covers the region when no warm start exists
        let g = 40usize;
        for i in 0..=g {
            let a = a_cap(0.0) * i as f64 / g as f64;
            let bc = b_cap(a);
            for jj in 0..=g {
                let b = bc * jj as f64 / g as f64;
                cands.push((a, b));
            }
        }
    }
    let (mut ba, mut bb, mut bv) = (0.0, 0.0, f64::INFINITY);
    for (a, b) in cands {
        if w0 * a + w1 * b > d2 + 1e-12 {
            continue;
        }
        let v = f(a, b);
        if v < bv {
            ba = a;
            bb = b;
            bv = v;
        }
    }

    // coordinate polish with a slide along the distortion boundary to
    // escape the corner-stall that pure coordinate descent hits there
    for _ in 0..60 {
        let prev = bv;
        let (a1, v1) = golden_min(|a| f(a, bb), 0.0, a_cap(bb), 90);
        if v1 < bv {
            ba = a1;
            bv = v1;
        }
        let (b1, v2) = golden_min(|b| f(ba, b), 0.0, b_cap(ba), 90);
        if v2 < bv {
            bb = b1;
            bv = v2;
        }
        if w0 * ba + w1 * bb > d2 - 1e-9 && w0 > 1e-300 && w1 > 1e-300 {
            // parametrize along w0*a + w1*b = d2 by a
            let a_min = ((d2 - w1) / w0).clamp(0.0, 1.0);
            let a_max = (d2 / w0).clamp(0.0, 1.0);
            if a_max > a_min {
                let (as_, vs) =
                    golden_min(|a| f(a, (d2 - w0 * a) / w1), a_min, a_max, 90);
                if vs < bv {
                    ba = as_;
                    bb = (d2 - w0 * as_) / w1;
                    bv = vs;
                }
            }
        }
        if prev - bv < 1e-15 {
            break;
        }
    }
    (assemble(ba, bb), bv)
}

/// Minimum of I(U;Y) over the distortion-bounded attack set.
pub fn min_attack_iuy(
    p_xu: &[f64],
    p_x: &[f64],
    d: &DistortionMatrix,
    d2: f64,
    q: usize,
    l: usize,
    warm: Option<&[f64]>,
    effort: Effort,
) -> (Vec<f64>, f64) {
    if q == 2 {
        return min_attack_binary(p_xu, p_x, d, d2, l, warm, effort);
    }
    let f = |a: &[f64]| i_uy(p_xu, a, q, l, q);
    let grad = |a: &[f64]| grad_attack_iuy(p_xu, a, q, l, q);
    min_convex_over_attacks(p_x, d, d2, q, &f, &grad, warm, effort)
}

/// Minimum of I(S;Y) over attacks fed directly by the source; the value of
/// the game when no cover text is available to hide in.
pub fn min_attack_isy(
    p_s: &[f64],
    d: &DistortionMatrix,
    d2: f64,
    q: usize,
    effort: Effort,
) -> (Vec<f64>, f64) {
    if q == 2 {
        // reuse the binary searcher with the degenerate channel u = x = s
        let mut p_xu = vec![0.0; 4];
        p_xu[0] = p_s[0];
        p_xu[3] = p_s[1];
        return min_attack_binary(&p_xu, p_s, d, d2, 2, None, effort);
    }
    let f = |a: &[f64]| i_sy(p_s, a, q);
    let grad = |a: &[f64]| super::payoff::grad_attack_isy(p_s, a, q);
    min_convex_over_attacks(p_s, d, d2, q, &f, &grad, None, effort)
}

/// Minimum of I(U;Y) over shift-invariant attacks: the attack is a single
/// row `r` applied as A(y|x) = r((y - x) mod q), constrained to the simplex
/// and to sum_y r(y) d(0,y) <= d2.
pub fn min_cyclic_attack_iuy(
    p_xu: &[f64],
    d: &DistortionMatrix,
    d2: f64,
    q: usize,
    l: usize,
) -> (Vec<f64>, f64) {
    let expand = |r: &[f64]| {
        let mut a = vec![0.0; q * q];
        for x in 0..q {
            for y in 0..q {
                a[x * q + y] = r[(y + q - x % q) % q];
            }
        }
        a
    };
    let f = |r: &[f64]| i_uy(p_xu, &expand(r), q, l, q);
    if q == 2 {
        let beta_max = if d.get(0, 1) > 1e-300 {
            (d2 / d.get(0, 1)).min(1.0)
        } else {
            1.0
        };
        let obj = |beta: f64| f(&[1.0 - beta, beta]);
        let mut best = (0.0, obj(0.0));
        let g = 200;
        for i in 0..=g {
            let beta = beta_max * i as f64 / g as f64;
            let v = obj(beta);
            if v < best.1 {
                best = (beta, v);
            }
        }
        let lo = (best.0 - beta_max / g as f64).max(0.0);
        let hi = (best.0 + beta_max / g as f64).min(beta_max);
        let (beta, v) = golden_min(obj, lo, hi, 90);
        let (beta, v) = if v < best.1 { (beta, v) } else { best };
        return (expand(&[1.0 - beta, beta]), v);
    }
    // grid over the first-row simplex for q = 3, then local polish; larger
    // q uses projected gradient on the row
    assert!(q <= 4, "shift-invariant attack search supports q <= 4");
    let costs: Vec<f64> = (0..q).map(|y| d.get(0, y)).collect();
    let feasible = |r: &[f64]| {
        r.iter().zip(&costs).map(|(ri, ci)| ri * ci).sum::<f64>() <= d2 + 1e-12
    };
    let g = 60usize;
    let mut best_r = vec![0.0; q];
    best_r[0] = 1.0;
    let mut best_v = f(&best_r);
    let mut stack = vec![0usize; q - 1];
    loop {
        let used: usize = stack.iter().sum();
        if used <= g {
            let mut r: Vec<f64> = stack.iter().map(|&k| k as f64 / g as f64).collect();
            r.push((g - used) as f64 / g as f64);
            // last coordinate is the stay-put mass; rotate so r[0] is it
            r.rotate_right(1);
            if feasible(&r) {
                let v = f(&r);
                if v < best_v {
                    best_v = v;
                    best_r = r;
                }
            }
        }
        // odometer over the first q-1 coordinates
        let mut pos = 0;
        loop {
            if pos == stack.len() {
                break;
            }
            stack[pos] += 1;
            if stack[pos] <= g {
                break;
            }
            stack[pos] = 0;
            pos += 1;
        }
        if pos == stack.len() {
            break;
        }
    }
    // pairwise golden polish keeps the simplex sum fixed
    for _ in 0..40 {
        let prev = best_v;
        for i in 0..q {
            for j in (i + 1)..q {
                let total = best_r[i] + best_r[j];
                if total < 1e-14 {
                    continue;
                }
                let base = best_r.clone();
                let obj = |t: f64| {
                    let mut r = base.clone();
                    r[i] = t;
                    r[j] = total - t;
                    if feasible(&r) {
                        f(&r)
                    } else {
                        f64::INFINITY
                    }
                };
                let (t, v) = golden_min(obj, 0.0, total, 80);
                if v < best_v {
                    best_r[i] = t;
                    best_r[j] = total - t;
                    best_v = v;
                }
            }
        }
        if prev - best_v < 1e-14 {
            break;
        }
    }
    (expand(&best_r), best_v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::binary_entropy;

    fn bsc_embed_pxu(flip: f64) -> Vec<f64> {
        // u = intended symbol, x = u flipped with prob `flip`, uniform u
        vec![
            0.5 * (1.0 - flip),
            0.5 * flip,
            0.5 * flip,
            0.5 * (1.0 - flip),
        ]
    }

    #[test]
    fn binary_attack_on_clean_channel_hits_entropy_bound() {
        // x = u uniform; the best attack is a BSC at the distortion cap,
        // leaving 1 - h(D2)
        let p_xu = bsc_embed_pxu(0.0);
        let d = DistortionMatrix::hamming(2);
        let (a, v) = min_attack_iuy(&p_xu, &[0.5, 0.5], &d, 0.2, 2, 2, None, Effort::Full);
        assert!((v - (1.0 - binary_entropy(0.2))).abs() < 1e-6, "v = {v}");
        assert!((a[1] - 0.2).abs() < 1e-4);
        assert!((a[2] - 0.2).abs() < 1e-4);
    }

    #[test]
    fn binary_attack_zero_budget_returns_identity_value() {
        let p_xu = bsc_embed_pxu(0.3);
        let d = DistortionMatrix::hamming(2);
        let (_, v) = min_attack_iuy(&p_xu, &[0.5, 0.5], &d, 0.0, 2, 2, None, Effort::Full);
        assert!((v - (1.0 - binary_entropy(0.3))).abs() < 1e-9);
    }

    #[test]
    fn binary_attack_composes_flip_probabilities() {
        // BSC(p) followed by BSC(beta) is BSC(p*(1-beta) + (1-p)*beta);
        // at the cap beta = D2 the value is 1 - h(p (1-D2) + (1-p) D2)
        let p = 0.1;
        let d2 = 0.15;
        let p_xu = bsc_embed_pxu(p);
        let d = DistortionMatrix::hamming(2);
        let (_, v) = min_attack_iuy(&p_xu, &[0.5, 0.5], &d, d2, 2, 2, None, Effort::Full);
        let expect = 1.0 - binary_entropy(p * (1.0 - d2) + (1.0 - p) * d2);
        assert!((v - expect).abs() < 1e-6, "v = {v}, expect = {expect}");
    }

    #[test]
    fn big_budget_kills_the_channel() {
        let p_xu = bsc_embed_pxu(0.0);
        let d = DistortionMatrix::hamming(2);
        let (_, v) = min_attack_iuy(&p_xu, &[0.5, 0.5], &d, 0.5, 2, 2, None, Effort::Full);
        assert!(v.abs() < 1e-6);
    }

    #[test]
    fn ternary_attack_respects_budget_and_beats_identity() {
        // u = x uniform ternary, Hamming distortion
        let q = 3;
        let l = 3;
        let mut p_xu = vec![0.0; q * l];
        for x in 0..q {
            p_xu[x * l + x] = 1.0 / 3.0;
        }
        let d = DistortionMatrix::hamming(3);
        let p_x = vec![1.0 / 3.0; 3];
        let (a, v) = min_attack_iuy(&p_xu, &p_x, &d, 0.2, q, l, None, Effort::Full);
        let ident_v = i_uy(&p_xu, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], q, l, q);
        assert!(v < ident_v - 1e-3);
        let mut dist = 0.0;
        for x in 0..q {
            for y in 0..q {
                dist += p_x[x] * a[x * q + y] * d.get(x, y);
            }
        }
        assert!(dist <= 0.2 + 1e-6, "distortion {dist}");
        // symmetric q-ary channel at the cap is optimal here
        let beta = 0.1;
        let mut sym = vec![beta; q * q];
        for x in 0..q {
            sym[x * q + x] = 1.0 - 2.0 * beta;
        }
        let sym_v = i_uy(&p_xu, &sym, q, l, q);
        assert!(v <= sym_v + 1e-4, "v = {v}, sym = {sym_v}");
    }

    #[test]
    fn no_cover_binary_value_is_entropy_gap() {
        // uniform source, Hamming: min I(S;Y) = 1 - h(D2)
        let d = DistortionMatrix::hamming(2);
        let (_, v) = min_attack_isy(&[0.5, 0.5], &d, 0.2, 2, Effort::Full);
        assert!((v - (1.0 - binary_entropy(0.2))).abs() < 1e-6);
    }

    #[test]
    fn cyclic_attack_matches_general_on_symmetric_instance() {
        // for uniform u = x the unrestricted optimum is already symmetric,
        // so restricting to shift-invariant attacks costs nothing
        let p_xu = bsc_embed_pxu(0.0);
        let d = DistortionMatrix::hamming(2);
        let (_, v_gen) =
            min_attack_iuy(&p_xu, &[0.5, 0.5], &d, 0.2, 2, 2, None, Effort::Full);
        let (a_cyc, v_cyc) = min_cyclic_attack_iuy(&p_xu, &d, 0.2, 2, 2);
        assert!((v_gen - v_cyc).abs() < 1e-6);
        assert!((a_cyc[1] - a_cyc[2]).abs() < 1e-12);
    }

    #[test]
    fn ternary_cyclic_attack_stays_feasible() {
        let q = 3;
        let l = 3;
        let mut p_xu = vec![0.0; q * l];
        for x in 0..q {
            p_xu[x * l + x] = 1.0 / 3.0;
        }
        let d = DistortionMatrix::hamming(3);
        let (a, v) = min_cyclic_attack_iuy(&p_xu, &d, 0.2, q, l);
        let row0: Vec<f64> = a[0..3].to_vec();
        let cost: f64 = (0..3).map(|y| row0[y] * d.get(0, y)).sum();
        assert!(cost <= 0.2 + 1e-9);
        let (_, v_gen) = min_attack_iuy(
            &p_xu,
            &[1.0 / 3.0; 3],
            &d,
            0.2,
            q,
            l,
            None,
            Effort::Full,
        );
        // restricted minimum cannot undercut the unrestricted one
        assert!(v >= v_gen - 1e-6);
        assert!((v - v_gen).abs() < 2e-3, "sym instance should match: {v} vs {v_gen}");
    }
}
