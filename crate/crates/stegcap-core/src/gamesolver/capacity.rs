//! Capacity games: the active-warden max-min, its passive and no-cover
//! reductions, the marginal-free variant, closed forms, and the
//! shift-invariance comparison for circular alphabets.

use super::ascent::multistart;
use super::attack::{min_attack_isy, min_attack_iuy, min_cyclic_attack_iuy, Effort};
use super::payoff::{
    grad_h_x_given_s, grad_q_j, h_x_given_s, i_us, j_value, joint_xu,
};
use super::project::covert_polytope;
use super::{GameConfig, GameResult, SolverError, DEFAULT_TOL};
use crate::channels::{binary_entropy, CondPmf, CovertChannel, DistortionMatrix, Pmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn covert_from_flat(q: usize, l: usize, flat: &[f64]) -> Result<CovertChannel, SolverError> {
    let rows: Vec<Vec<f64>> = (0..q)
        .map(|s| flat[s * q * l..(s + 1) * q * l].to_vec())
        .collect();
    Ok(CovertChannel::new(CondPmf::new(rows)?, l)?)
}

fn attack_from_flat(q: usize, flat: &[f64]) -> Result<CondPmf, SolverError> {
    let rows: Vec<Vec<f64>> = (0..q).map(|x| flat[x * q..(x + 1) * q].to_vec()).collect();
    Ok(CondPmf::new(rows)?)
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| -rng.gen_range(1e-12..1.0f64).ln()).collect()
}

fn random_starts(seed: u64, stream_base: u64, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + i as u64);
            random_point(&mut rng, dim)
        })
        .collect()
}

/// Educated initial covert channels: a no-embedding baseline, marginal
/// preserving partial-refresh embeddings with u = x, and (aux permitting)
/// time sharing between an embedding branch and a keep-the-cover branch
/// signalled through an extra aux symbol.
pub(super) fn smart_starts(
    p_s: &[f64],
    d: &DistortionMatrix,
    d1: f64,
    q: usize,
    l: usize,
) -> Vec<Vec<f64>> {
    let dim = q * q * l;
    let idx = |s: usize, x: usize, u: usize| s * q * l + x * l + u;
    let mut out = Vec::new();

    // x = s with a constant aux symbol: payoff exactly zero, so the final
    // value can never be negative
    let mut baseline = vec![0.0; dim];
    for s in 0..q {
        baseline[idx(s, s, 0)] = 1.0;
    }
    out.push(baseline);

    let d_indep: f64 = (0..q)
        .flat_map(|s| (0..q).map(move |x| (s, x)))
        .map(|(s, x)| p_s[s] * p_s[x] * d.get(s, x))
        .sum();

    if l >= q && d_indep > 0.0 {
        // keep the cover with probability 1-g, else redraw x from the
        // cover law; u = x makes the redraw decodable
        let g_max = (d1 / d_indep).min(1.0);
        for frac in [0.5, 1.0] {
            let g = g_max * frac;
            let mut v = vec![0.0; dim];
            for s in 0..q {
                for x in 0..q {
                    let keep = if x == s { 1.0 - g } else { 0.0 };
                    v[idx(s, x, x)] = keep + g * p_s[x];
                }
            }
            out.push(v);
        }
    }

    if l >= q + 1 && d_indep > 0.0 {
        for g in [0.6, 0.8, 1.0] {
            let tau = (d1 / (g * d_indep)).min(1.0);
            let mut v = vec![0.0; dim];
            for s in 0..q {
                for x in 0..q {
                    let keep = if x == s { 1.0 - g } else { 0.0 };
                    v[idx(s, x, x)] += tau * (keep + g * p_s[x]);
                }
                v[idx(s, s, q)] += 1.0 - tau;
            }
            out.push(v);
        }
    }
    out
}

/// Active-warden capacity at a fixed auxiliary size: maximize over covert
/// channels with preserved marginal, minimize over distortion-bounded
/// attacks.
pub fn capacity_active(cfg: &GameConfig) -> Result<GameResult, SolverError> {
    cfg.validate()?;
    let q = cfg.alphabet_size();
    let l = cfg.l;
    let p_s = cfg.p_s.probs().to_vec();
    let d = cfg.d.clone();
    let (d1, d2) = (cfg.d1, cfg.d2);

    let proj = covert_polytope(&p_s, &d, d1, l, true).ok_or_else(|| {
        SolverError::BadConfig("degenerate feasible set for the covert channel".into())
    })?;
    let project = |x: &mut Vec<f64>| proj.project(x);

    let eval = |q_cc: &[f64]| {
        let p_xu = joint_xu(&p_s, q_cc, q, l);
        let (_, v) = min_attack_iuy(&p_xu, &p_s, &d, d2, q, l, None, Effort::Quick);
        v - i_us(&p_s, q_cc, q, l)
    };
    let grad = |q_cc: &[f64]| {
        let p_xu = joint_xu(&p_s, q_cc, q, l);
        let (a, _) = min_attack_iuy(&p_xu, &p_s, &d, d2, q, l, None, Effort::Quick);
        grad_q_j(&p_s, q_cc, &a, q, l)
    };

    let mut starts = smart_starts(&p_s, &d, d1, q, l);
    starts.extend(random_starts(cfg.seed, 0, cfg.multistarts, q * q * l));
    let out = multistart(starts, &project, &eval, &grad, cfg.max_iters, cfg.tol);

    let q_star = out.point;
    let p_xu = joint_xu(&p_s, &q_star, q, l);
    let (a_star, iuy_min) = min_attack_iuy(&p_xu, &p_s, &d, d2, q, l, None, Effort::Full);
    let lower = iuy_min - i_us(&p_s, &q_star, q, l);

    // attacker-side bound: the best covert response to the returned attack
    let eval_up = |q_cc: &[f64]| j_value(&p_s, q_cc, &a_star, q, l);
    let grad_up = |q_cc: &[f64]| grad_q_j(&p_s, q_cc, &a_star, q, l);
    let mut up_starts = vec![q_star.clone()];
    up_starts.extend(smart_starts(&p_s, &d, d1, q, l));
    up_starts.extend(random_starts(cfg.seed, 1_000, cfg.multistarts.min(8), q * q * l));
    let upper = multistart(up_starts, &project, &eval_up, &grad_up, cfg.max_iters, cfg.tol);

    let certificate_gap = (upper.value - lower).max(0.0);
    let value = if lower < 0.0 && lower > -1e-9 { 0.0 } else { lower };
    Ok(GameResult {
        value,
        best_covert: covert_from_flat(q, l, &q_star)?,
        worst_attack: attack_from_flat(q, &a_star)?,
        iterations: out.iterations,
        converged: certificate_gap <= cfg.tol,
        certificate_gap,
    })
}

/// Lagrangian upper bound for constrained conditional-entropy maximization:
/// max H(X|S) subject to rows stochastic, expected distortion <= d1, and
/// (optionally) marginal preservation. The dual is smooth and convex in
/// (lambda, mu); its value at any feasible multiplier bounds the primal.
fn conditional_entropy_dual(
    p_s: &[f64],
    d: &DistortionMatrix,
    d1: f64,
    with_marginal: bool,
) -> f64 {
    let q = p_s.len();
    let ln2 = std::f64::consts::LN_2;
    let g = |lam: f64, mu: &[f64]| -> f64 {
        let mut val = lam * d1;
        if with_marginal {
            for x in 0..q {
                val += mu[x] * p_s[x];
            }
        }
        for s in 0..q {
            let mut z = 0.0;
            for x in 0..q {
                let mux = if with_marginal { mu[x] } else { 0.0 };
                z += (-(lam * d.get(s, x) + mux) * ln2).exp();
            }
            val += p_s[s] * z.log2();
        }
        val
    };
    let grad = |lam: f64, mu: &[f64]| -> (f64, Vec<f64>) {
        let mut g_lam = d1;
        let mut g_mu = vec![0.0; q];
        if with_marginal {
            for x in 0..q {
                g_mu[x] = p_s[x];
            }
        }
        for s in 0..q {
            let mut row = vec![0.0; q];
            let mut z = 0.0;
            for x in 0..q {
                let mux = if with_marginal { mu[x] } else { 0.0 };
                row[x] = (-(lam * d.get(s, x) + mux) * ln2).exp();
                z += row[x];
            }
            for x in 0..q {
                let r = row[x] / z;
                g_lam -= p_s[s] * r * d.get(s, x);
                g_mu[x] -= p_s[s] * r;
            }
        }
        (g_lam, g_mu)
    };

    let mut lam = 1.0;
    let mut mu = vec![0.0; q];
    let mut best = g(lam, &mu);
    for _ in 0..800 {
        let (gl, gm) = grad(lam, &mu);
        let gnorm = gm
            .iter()
            .fold(gl.abs(), |m, x| m.max(x.abs()))
            .max(1e-18);
        let mut t = 1.0 / gnorm;
        let cur = g(lam, &mu);
        let mut moved = false;
        for _ in 0..40 {
            let lam_c = (lam - t * gl).max(0.0);
            let mu_c: Vec<f64> = if with_marginal {
                mu.iter().zip(&gm).map(|(m, gg)| m - t * gg).collect()
            } else {
                mu.clone()
            };
            if g(lam_c, &mu_c) < cur - 1e-15 {
                lam = lam_c;
                mu = mu_c;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
        let v = g(lam, &mu);
        if v < best {
            best = v;
        }
    }
    best
}

/// Shared concave maximizer for H(X|S) over a covert polytope with aux
/// size 1. Returns (r flat s*q+x, value).
pub(super) fn passive_embedding(
    p_s: &[f64],
    d: &DistortionMatrix,
    d1: f64,
    with_marginal: bool,
) -> Result<(Vec<f64>, f64), SolverError> {
    let q = p_s.len();
    let proj = covert_polytope(p_s, d, d1, 1, with_marginal).ok_or_else(|| {
        SolverError::BadConfig("degenerate feasible set for the embedding".into())
    })?;
    let project = |x: &mut Vec<f64>| proj.project(x);
    let eval = |r: &[f64]| h_x_given_s(p_s, r, q);
    let grad = |r: &[f64]| grad_h_x_given_s(p_s, r, q);

    let mut ident = vec![0.0; q * q];
    for s in 0..q {
        ident[s * q + s] = 1.0;
    }
    // the independence channel r(x|s) = p_s(x) preserves the marginal and
    // maximizes the entropy ignoring distortion
    let indep: Vec<f64> = (0..q)
        .flat_map(|_| p_s.iter().copied().collect::<Vec<_>>())
        .collect();
    let mut starts = vec![ident, indep];
    starts.extend(random_starts(0xA5, 0, 4, q * q));
    let out = multistart(starts, &project, &eval, &grad, 4_000, 1e-9);
    Ok((out.point, out.value))
}

/// Passive-warden capacity: the attacker forwards the stegotext unchanged,
/// so the game collapses to concave entropy maximization with u = x.
pub fn capacity_passive(
    p_s: &Pmf,
    d: &DistortionMatrix,
    d1: f64,
) -> Result<GameResult, SolverError> {
    let cfg = GameConfig::new(p_s.clone(), d.clone(), d1, 0.0, 1);
    cfg.validate()?;
    let q = p_s.alphabet_size();
    let ps = p_s.probs().to_vec();

    let (r, value) = passive_embedding(&ps, d, d1, true)?;
    let dual = conditional_entropy_dual(&ps, d, d1, true);
    let certificate_gap = (dual - value).max(0.0);

    let rows: Vec<Vec<f64>> = (0..q).map(|s| r[s * q..(s + 1) * q].to_vec()).collect();
    let x_given_s = CondPmf::new(rows)?;
    Ok(GameResult {
        value: value.max(0.0),
        best_covert: CovertChannel::from_x_channel(&x_given_s),
        worst_attack: CondPmf::identity(q),
        iterations: 1,
        converged: certificate_gap <= DEFAULT_TOL,
        certificate_gap,
    })
}

/// Closed-form binary-Hamming capacity.
pub fn capacity_binary_hamming(d1: f64, d2: f64) -> Result<f64, SolverError> {
    if !(d1 >= 0.0) || !(0.0..0.5).contains(&d2) {
        return Err(SolverError::BadConfig(format!(
            "need d1 >= 0 and 0 <= d2 < 1/2, got ({d1}, {d2})"
        )));
    }
    if d2 == 0.0 {
        return Ok(if d1 >= 0.5 { 1.0 } else { binary_entropy(d1) });
    }
    let h2 = binary_entropy(d2);
    let d_t = 1.0 - (-h2).exp2();
    Ok(if d1 > 0.5 {
        1.0 - h2
    } else if d1 >= d_t {
        binary_entropy(d1) - h2
    } else {
        (d1 / d_t) * (binary_entropy(d_t) - h2)
    })
}

/// H(S) minus the rate-distortion function of the source at d1; an upper
/// bound on the passive capacity. The rate-distortion function is computed
/// by alternating minimization with a bisection on the slope parameter.
pub fn rd_bound(p_s: &Pmf, d: &DistortionMatrix, d1: f64) -> Result<f64, SolverError> {
    if d.alphabet_size() != p_s.alphabet_size() {
        return Err(SolverError::BadConfig(
            "distortion matrix does not match source alphabet".into(),
        ));
    }
    if !(d1 >= 0.0) {
        return Err(SolverError::BadConfig("d1 must be nonnegative".into()));
    }
    let q = p_s.alphabet_size();
    let ps = p_s.probs();
    let h_s = p_s.entropy();

    // zero rate suffices when one reproduction letter is within budget
    let d_zero_rate = (0..q)
        .map(|x| (0..q).map(|s| ps[s] * d.get(s, x)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    if d1 >= d_zero_rate - 1e-15 {
        return Ok(h_s);
    }

    let ln2 = std::f64::consts::LN_2;
    // rate and distortion on the slope-beta point of the curve
    let at_beta = |beta: f64| -> (f64, f64) {
        let mut qx = vec![1.0 / q as f64; q];
        let mut r = vec![0.0; q * q];
        for _ in 0..600 {
            let mut new_qx = vec![0.0; q];
            for s in 0..q {
                let mut z = 0.0;
                for x in 0..q {
                    r[s * q + x] = qx[x] * (-beta * d.get(s, x) * ln2).exp();
                    z += r[s * q + x];
                }
                for x in 0..q {
                    r[s * q + x] /= z;
                    new_qx[x] += ps[s] * r[s * q + x];
                }
            }
            let change: f64 = new_qx
                .iter()
                .zip(&qx)
                .map(|(a, b)| (a - b).abs())
                .sum();
            qx = new_qx;
            if change < 1e-14 {
                break;
            }
        }
        let mut rate = 0.0;
        let mut dist = 0.0;
        for s in 0..q {
            for x in 0..q {
                let v = r[s * q + x];
                if v > 0.0 {
                    rate += ps[s] * v * (v / qx[x]).log2();
                }
                dist += ps[s] * v * d.get(s, x);
            }
        }
        (rate.max(0.0), dist)
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    while at_beta(hi).1 > d1 && hi < 1e7 {
        hi *= 2.0;
    }
    let mut rate = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (rr, dd) = at_beta(mid);
        rate = rr;
        if dd > d1 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi) {
            break;
        }
    }
    Ok((h_s - rate).max(0.0))
}

/// Capacity when no cover text exists: the transmitter sends the source
/// itself and the attacker minimizes I(S;Y).
pub fn capacity_no_cover(p_s: &Pmf, d: &DistortionMatrix, d2: f64) -> Result<f64, SolverError> {
    if d.alphabet_size() != p_s.alphabet_size() {
        return Err(SolverError::BadConfig(
            "distortion matrix does not match source alphabet".into(),
        ));
    }
    if !(d2 >= 0.0) {
        return Err(SolverError::BadConfig("d2 must be nonnegative".into()));
    }
    let q = p_s.alphabet_size();
    let (_, v) = min_attack_isy(p_s.probs(), d, d2, q, Effort::Full);
    Ok(v.max(0.0))
}

/// Marginal-free variant of the capacity game: the embedder is bound only
/// by distortion, and the attack polytope follows the induced stegotext
/// law. The gradient of the inner minimum in the embedder's strategy has no
/// clean closed form here (the attacker's feasible set moves with the
/// marginal), so ascent uses central finite differences.
pub fn capacity_pubwm(cfg: &GameConfig) -> Result<GameResult, SolverError> {
    cfg.validate()?;
    let q = cfg.alphabet_size();
    let l = cfg.l;
    let p_s = cfg.p_s.probs().to_vec();
    let d = cfg.d.clone();
    let (d1, d2) = (cfg.d1, cfg.d2);

    let min_offdiag = (0..q)
        .flat_map(|s| (0..q).filter(move |&x| x != s).map(move |x| (s, x)))
        .map(|(s, x)| d.get(s, x))
        .fold(f64::INFINITY, f64::min);
    let identity_attack_only = d2 <= 1e-12 && min_offdiag > 0.0;
    if !identity_attack_only && q > 2 {
        return Err(SolverError::UnsupportedScale(
            "marginal-free solves with an active attacker support binary sources only"
                .into(),
        ));
    }

    let proj = covert_polytope(&p_s, &d, d1, l, false).ok_or_else(|| {
        SolverError::BadConfig("degenerate feasible set for the covert channel".into())
    })?;
    let project = |x: &mut Vec<f64>| proj.project(x);
    let ident = {
        let mut a = vec![0.0; q * q];
        for x in 0..q {
            a[x * q + x] = 1.0;
        }
        a
    };

    let inner = |q_cc: &[f64], effort: Effort| -> (Vec<f64>, f64) {
        let p_xu = joint_xu(&p_s, q_cc, q, l);
        if identity_attack_only {
            let v = super::payoff::i_uy(&p_xu, &ident, q, l, q);
            return (ident.clone(), v);
        }
        let mut p_x = vec![0.0; q];
        for x in 0..q {
            for u in 0..l {
                p_x[x] += p_xu[x * l + u];
            }
        }
        min_attack_iuy(&p_xu, &p_x, &d, d2, q, l, None, effort)
    };
    let eval = |q_cc: &[f64]| inner(q_cc, Effort::Quick).1 - i_us(&p_s, q_cc, q, l);
    let grad = |q_cc: &[f64]| -> Vec<f64> {
        if identity_attack_only {
            return grad_q_j(&p_s, q_cc, &ident, q, l);
        }
        let h = 3e-6;
        let mut g = vec![0.0; q_cc.len()];
        let mut probe = q_cc.to_vec();
        for i in 0..q_cc.len() {
            probe[i] = q_cc[i] + h;
            let up = inner(&probe, Effort::Quick).1 - i_us(&p_s, &probe, q, l);
            probe[i] = q_cc[i] - h;
            let dn = inner(&probe, Effort::Quick).1 - i_us(&p_s, &probe, q, l);
            probe[i] = q_cc[i];
            g[i] = (up - dn) / (2.0 * h);
        }
        g
    };

    let mut starts = smart_starts(&p_s, &d, d1, q, l);
    if l >= q {
        // best distortion-only embedding with u = x; exact optimum when the
        // attack is pinned to the identity
        if let Ok((r, _)) = passive_embedding(&p_s, &d, d1, false) {
            let mut v = vec![0.0; q * q * l];
            for s in 0..q {
                for x in 0..q {
                    v[s * q * l + x * l + x] = r[s * q + x];
                }
            }
            starts.push(v);
        }
    }
    starts.extend(random_starts(cfg.seed, 0, cfg.multistarts, q * q * l));
    let out = multistart(starts, &project, &eval, &grad, cfg.max_iters, cfg.tol);

    let q_star = out.point;
    let (a_star, iuy_min) = inner(&q_star, Effort::Full);
    let lower = iuy_min - i_us(&p_s, &q_star, q, l);

    let upper_val = if identity_attack_only {
        // any covert channel obeys the conditional-entropy bound, so the
        // distortion-only dual certifies from above
        conditional_entropy_dual(&p_s, &d, d1, false)
    } else {
        let eval_up = |q_cc: &[f64]| j_value(&p_s, q_cc, &a_star, q, l);
        let grad_up = |q_cc: &[f64]| grad_q_j(&p_s, q_cc, &a_star, q, l);
        let mut up_starts = vec![q_star.clone()];
        up_starts.extend(smart_starts(&p_s, &d, d1, q, l));
        up_starts.extend(random_starts(cfg.seed, 1_000, cfg.multistarts.min(8), q * q * l));
        multistart(up_starts, &project, &eval_up, &grad_up, cfg.max_iters, cfg.tol).value
    };

    let certificate_gap = (upper_val - lower).max(0.0);
    let value = if lower < 0.0 && lower > -1e-9 { 0.0 } else { lower };
    Ok(GameResult {
        value,
        best_covert: covert_from_flat(q, l, &q_star)?,
        worst_attack: attack_from_flat(q, &a_star)?,
        iterations: out.iterations,
        converged: certificate_gap <= cfg.tol,
        certificate_gap,
    })
}

/// Comparison triple for circularly symmetric games.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoLossReport {
    /// Marginal-free capacity at auxiliary size L.
    pub pubwm: f64,
    /// Marginal-preserving capacity at auxiliary size q*L.
    pub steg: f64,
    /// Shift-structured embedder against shift-invariant attacks.
    pub restricted: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Solves the game restricted to shift-averaged embedders (auxiliary size
/// q*l, built by lifting a distortion-only base channel with aux size l)
/// against shift-invariant attacks.
fn restricted_cyclic_value(
    q: usize,
    d: &DistortionMatrix,
    d1: f64,
    d2: f64,
    l: usize,
    cfg: &GameConfig,
) -> Result<f64, SolverError> {
    let ps = vec![1.0 / q as f64; q];
    let ql = q * l;
    let base_dim = q * q * l;
    let lift_dim = q * q * ql;

    let lift = |base: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; lift_dim];
        for s in 0..q {
            for x in 0..q {
                for v in 0..l {
                    for i in 0..q {
                        let s_shift = (s + q - i) % q;
                        let x_shift = (x + q - i) % q;
                        out[s * q * ql + x * ql + (q * v + i)] =
                            base[s_shift * q * l + x_shift * l + v] / q as f64;
                    }
                }
            }
        }
        out
    };
    let fold = |g_lift: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; base_dim];
        for s in 0..q {
            for x in 0..q {
                for v in 0..l {
                    let mut acc = 0.0;
                    for i in 0..q {
                        let si = (s + i) % q;
                        let xi = (x + i) % q;
                        acc += g_lift[si * q * ql + xi * ql + (q * v + i)];
                    }
                    g[s * q * l + x * l + v] = acc / q as f64;
                }
            }
        }
        g
    };

    let proj = covert_polytope(&ps, d, d1, l, false).ok_or_else(|| {
        SolverError::BadConfig("degenerate feasible set for the base channel".into())
    })?;
    let project = |x: &mut Vec<f64>| proj.project(x);

    let inner = |base: &[f64]| -> (Vec<f64>, f64, Vec<f64>) {
        let lifted = lift(base);
        let p_xu = joint_xu(&ps, &lifted, q, ql);
        let (a, v) = min_cyclic_attack_iuy(&p_xu, d, d2, q, ql);
        let j = v - i_us(&ps, &lifted, q, ql);
        (a, j, lifted)
    };
    let eval = |base: &[f64]| inner(base).1;
    let grad = |base: &[f64]| {
        let (a, _, lifted) = inner(base);
        fold(&grad_q_j(&ps, &lifted, &a, q, ql))
    };

    let mut starts = smart_starts(&ps, d, d1, q, l);
    starts.extend(random_starts(cfg.seed, 2_000, cfg.multistarts, base_dim));
    let out = multistart(starts, &project, &eval, &grad, cfg.max_iters, cfg.tol);
    Ok(out.value.max(0.0))
}

/// Computes the marginal-free and marginal-preserving capacities plus the
/// shift-restricted game for a circular instance and reports whether all
/// three coincide within twice the solver tolerance.
pub fn verify_no_loss_cyclic(
    q: usize,
    d: &DistortionMatrix,
    d1: f64,
    d2: f64,
    l: usize,
) -> Result<NoLossReport, SolverError> {
    if !d.is_cyclic() {
        return Err(SolverError::BadConfig(
            "shift-invariance comparison needs a circulant distortion matrix".into(),
        ));
    }
    if d.alphabet_size() != q {
        return Err(SolverError::BadConfig(
            "alphabet size does not match the distortion matrix".into(),
        ));
    }
    let p_s = Pmf::uniform(q);
    let cfg_pub = GameConfig::new(p_s.clone(), d.clone(), d1, d2, l);
    let pub_res = capacity_pubwm(&cfg_pub)?;
    let cfg_steg = GameConfig::new(p_s, d.clone(), d1, d2, q * l);
    let steg_res = capacity_active(&cfg_steg)?;
    let restricted = restricted_cyclic_value(q, d, d1, d2, l, &cfg_steg)?;

    let tol = cfg_steg.tol;
    let passed = (pub_res.value - steg_res.value).abs() <= 2.0 * tol
        && (steg_res.value - restricted).abs() <= 2.0 * tol;
    Ok(NoLossReport {
        pubwm: pub_res.value,
        steg: steg_res.value,
        restricted,
        tol,
        passed,
    })
}
