//! Random-coding error exponents for the active and passive games.
//!
//! The active exponent is a four-layer program: an outer minimum over a
//! tilted source, a maximum over covert channels feasible at that tilted
//! source, and a jointly convex inner minimum over a tilted channel
//! p~(y|x,u,s) and a feasible attack. The inner problem is solved by
//! subgradient steps on p~ (diminishing 1/k, which absorbs the hinge kink)
//! interleaved with exact attack-row updates from the KKT conditions; the
//! middle maximum reuses the multistart ascent machinery with Danskin
//! supergradients; the outer minimum is a grid plus golden-section
//! refinement, which is enough for the one-parameter binary tilt.

use super::ascent::multistart;
use super::attack::golden_min;
use super::capacity::smart_starts;
use super::project::{covert_polytope, project_rows_to_simplex, PolytopeProjector};
use super::{ExponentCurve, GameConfig, SolverError};
use crate::channels::{kl_bits, mutual_information_bits, DistortionMatrix, Pmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN2: f64 = std::f64::consts::LN_2;

fn log2_floor(x: f64) -> f64 {
    x.max(1e-300).log2()
}

/// Exact minimizer of -sum_{x,y} c(x,y) log A(y|x) over attacks with rows
/// stochastic and expected distortion at most d2 under input law p_x. The
/// stationarity condition gives A(y|x) = c(x,y) / (nu_x + lam p_x(x) d(x,y))
/// with nu_x fixing the row sum and lam >= 0 the distortion constraint;
/// both reduce to monotone one-dimensional root finds.
pub(super) fn exact_attack_update(
    c: &[f64],
    p_x: &[f64],
    d: &DistortionMatrix,
    d2: f64,
    q: usize,
    prev: &[f64],
) -> Vec<f64> {
    let row_for = |x: usize, lam: f64, out: &mut [f64]| {
        let crow = &c[x * q..(x + 1) * q];
        let csum: f64 = crow.iter().sum();
        if csum <= 1e-300 {
            out.copy_from_slice(&prev[x * q..(x + 1) * q]);
            return;
        }
        if lam * p_x[x] <= 1e-300 {
            for y in 0..q {
                out[y] = crow[y] / csum;
            }
            return;
        }
        // nu must keep every active denominator positive
        let floor = -(0..q)
            .filter(|&y| crow[y] > 0.0)
            .map(|y| lam * p_x[x] * d.get(x, y))
            .fold(f64::INFINITY, f64::min);
        let total = |nu: f64| -> f64 {
            (0..q)
                .map(|y| {
                    if crow[y] > 0.0 {
                        crow[y] / (nu + lam * p_x[x] * d.get(x, y))
                    } else {
                        0.0
                    }
                })
                .sum()
        };
        let mut lo = floor + 1e-14 * (1.0 + floor.abs());
        let mut hi = (csum + lam * p_x[x] * d.d_max()).max(lo + 1.0);
        while total(hi) > 1.0 {
            hi = lo + (hi - lo) * 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let nu = 0.5 * (lo + hi);
        for y in 0..q {
            out[y] = if crow[y] > 0.0 {
                crow[y] / (nu + lam * p_x[x] * d.get(x, y))
            } else {
                0.0
            };
        }
        let s: f64 = out.iter().sum();
        for v in out.iter_mut() {
            *v /= s;
        }
    };

    let assemble = |lam: f64| -> Vec<f64> {
        let mut a = vec![0.0; q * q];
        for x in 0..q {
            let (head, tail) = a.split_at_mut(x * q);
            let _ = head;
            row_for(x, lam, &mut tail[..q]);
        }
        a
    };
    let distortion = |a: &[f64]| -> f64 {
        let mut acc = 0.0;
        for x in 0..q {
            for y in 0..q {
                acc += p_x[x] * a[x * q + y] * d.get(x, y);
            }
        }
        acc
    };

    let unconstrained = assemble(0.0);
    if distortion(&unconstrained) <= d2 + 1e-12 {
        return unconstrained;
    }
    let mut lam_lo = 0.0;
    let mut lam_hi = 1.0;
    while distortion(&assemble(lam_hi)) > d2 && lam_hi < 1e12 {
        lam_hi *= 4.0;
    }
    for _ in 0..120 {
        let mid = 0.5 * (lam_lo + lam_hi);
        if distortion(&assemble(mid)) > d2 {
            lam_lo = mid;
        } else {
            lam_hi = mid;
        }
    }
    assemble(lam_hi)
}

/// Inner-minimum context for one covert channel at one tilted source.
/// `theta` is the hinge weight at the solution: the subgradient of
/// (j - r)+ actually used, which Danskin's rule needs at the kink.
struct InnerSol {
    f: f64,
    p_tilde: Vec<f64>,
    attack: Vec<f64>,
    theta: f64,
}

struct InnerCtx<'a> {
    ps_tilde: Vec<f64>,
    d: &'a DistortionMatrix,
    d2: f64,
    q: usize,
    l: usize,
    r: f64,
    attack_proj: PolytopeProjector,
}

impl<'a> InnerCtx<'a> {
    fn new(
        ps_tilde: Vec<f64>,
        d: &'a DistortionMatrix,
        d2: f64,
        q: usize,
        l: usize,
        r: f64,
    ) -> Option<Self> {
        let attack_proj = super::project::attack_polytope(&ps_tilde, d, d2)?;
        Some(Self {
            ps_tilde,
            d,
            d2,
            q,
            l,
            r,
            attack_proj,
        })
    }

    fn weights(&self, q_cc: &[f64]) -> Vec<f64> {
        let (q, l) = (self.q, self.l);
        let mut w = vec![0.0; q * q * l];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    w[s * q * l + x * l + u] =
                        self.ps_tilde[s] * q_cc[s * q * l + x * l + u];
                }
            }
        }
        w
    }

    /// p~ is indexed ((s*q + x)*l + u)*q + y.
    fn tilted_joint_uy(&self, w: &[f64], p_t: &[f64]) -> Vec<f64> {
        let (q, l) = (self.q, self.l);
        let mut juy = vec![0.0; l * q];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    let wv = w[s * q * l + x * l + u];
                    if wv == 0.0 {
                        continue;
                    }
                    let base = ((s * q + x) * l + u) * q;
                    for y in 0..q {
                        juy[u * q + y] += wv * p_t[base + y];
                    }
                }
            }
        }
        juy
    }

    fn i_us_tilted(&self, w: &[f64]) -> f64 {
        let (q, l) = (self.q, self.l);
        let mut jus = vec![0.0; l * q];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    jus[u * q + s] += w[s * q * l + x * l + u];
                }
            }
        }
        mutual_information_bits(&jus, l, q)
    }

    fn j_tilted(&self, w: &[f64], p_t: &[f64]) -> f64 {
        mutual_information_bits(&self.tilted_joint_uy(w, p_t), self.l, self.q)
            - self.i_us_tilted(w)
    }

    fn objective(&self, w: &[f64], p_t: &[f64], a: &[f64]) -> f64 {
        let (q, l) = (self.q, self.l);
        let mut kl = 0.0;
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    let wv = w[s * q * l + x * l + u];
                    if wv == 0.0 {
                        continue;
                    }
                    let base = ((s * q + x) * l + u) * q;
                    for y in 0..q {
                        let p = p_t[base + y];
                        if p > 0.0 {
                            let av = a[x * q + y];
                            if av <= 0.0 {
                                return f64::INFINITY;
                            }
                            kl += wv * p * (p / av).log2();
                        }
                    }
                }
            }
        }
        kl + (self.j_tilted(w, p_t) - self.r).max(0.0)
    }

    /// Raw subgradient of the objective in p~ at fixed attack.
    fn p_tilde_subgrad(&self, w: &[f64], p_t: &[f64], a: &[f64]) -> Vec<f64> {
        let (q, l) = (self.q, self.l);
        let juy = self.tilted_joint_uy(w, p_t);
        let mut pu = vec![0.0; l];
        let mut py = vec![0.0; q];
        for u in 0..l {
            for y in 0..q {
                pu[u] += juy[u * q + y];
                py[y] += juy[u * q + y];
            }
        }
        let theta = if self.j_tilted(w, p_t) >= self.r { 1.0 } else { 0.0 };
        let mut g = vec![0.0; q * q * l * q];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    let wv = w[s * q * l + x * l + u];
                    if wv == 0.0 {
                        continue;
                    }
                    let base = ((s * q + x) * l + u) * q;
                    for y in 0..q {
                        let kl_part = log2_floor(p_t[base + y] / a[x * q + y].max(1e-300))
                            + 1.0 / LN2;
                        let mi_part = log2_floor(
                            juy[u * q + y] / (pu[u] * py[y]).max(1e-300),
                        ) - 1.0 / LN2;
                        g[base + y] = wv * (kl_part + theta * mi_part);
                    }
                }
            }
        }
        g
    }

    fn attack_cost(&self, w: &[f64], p_t: &[f64]) -> Vec<f64> {
        let (q, l) = (self.q, self.l);
        let mut c = vec![0.0; q * q];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    let wv = w[s * q * l + x * l + u];
                    if wv == 0.0 {
                        continue;
                    }
                    let base = ((s * q + x) * l + u) * q;
                    for y in 0..q {
                        c[x * q + y] += wv * p_t[base + y];
                    }
                }
            }
        }
        c
    }

    /// Jointly minimize over (p~, attack) for a fixed covert channel by
    /// diminishing-step subgradient descent on p~ interleaved with exact
    /// attack updates. Good enough for line-search comparisons; the final
    /// values go through `refine`.
    fn solve(&self, q_cc: &[f64], steps: usize, attack_every: usize) -> InnerSol {
        let (q, l) = (self.q, self.l);
        let w = self.weights(q_cc);
        let rows = q * q * l;

        let mut a = vec![0.0; q * q];
        for x in 0..q {
            a[x * q + x] = 1.0;
        }
        self.attack_proj.project(&mut a);
        // the projected identity can keep zero entries; pull slightly
        // toward uniform so initial divergences are finite
        for v in a.iter_mut() {
            *v = 0.995 * *v + 0.005 / q as f64;
        }
        let mut p_t = vec![0.0; rows * q];
        for row in 0..rows {
            let x = (row / l) % q;
            for y in 0..q {
                p_t[row * q + y] = a[x * q + y];
            }
        }

        let mut best = InnerSol {
            f: self.objective(&w, &p_t, &a),
            p_tilde: p_t.clone(),
            attack: a.clone(),
            theta: 1.0,
        };
        let mut base_step = 0.0;
        for k in 1..=steps {
            let g = self.p_tilde_subgrad(&w, &p_t, &a);
            let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if gmax > 1e-16 {
                if base_step == 0.0 {
                    base_step = 0.4 / gmax;
                }
                let t = base_step / k as f64;
                for (v, gi) in p_t.iter_mut().zip(&g) {
                    *v -= t * gi;
                }
                project_rows_to_simplex(&mut p_t, q);
            }
            if k % attack_every == 0 || k == steps {
                let c = self.attack_cost(&w, &p_t);
                a = exact_attack_update(&c, &self.ps_tilde, self.d, self.d2, q, &a);
            }
            let f = self.objective(&w, &p_t, &a);
            if f < best.f {
                best = InnerSol {
                    f,
                    p_tilde: p_t.clone(),
                    attack: a.clone(),
                    theta: if self.j_tilted(&w, &p_t) >= self.r { 1.0 } else { 0.0 },
                };
            }
        }
        best
    }

    /// Smooth part of the hinge dual at weight theta, dropping the terms
    /// constant in (p~, attack).
    fn obj_smooth(&self, w: &[f64], p_t: &[f64], a: &[f64], theta: f64) -> f64 {
        let (q, l) = (self.q, self.l);
        let mut kl = 0.0;
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    let wv = w[s * q * l + x * l + u];
                    if wv == 0.0 {
                        continue;
                    }
                    let base = ((s * q + x) * l + u) * q;
                    for y in 0..q {
                        let p = p_t[base + y];
                        if p > 0.0 {
                            let av = a[x * q + y];
                            if av <= 0.0 {
                                return f64::INFINITY;
                            }
                            kl += wv * p * (p / av).log2();
                        }
                    }
                }
            }
        }
        kl + theta * mutual_information_bits(&self.tilted_joint_uy(w, p_t), l, q)
    }

    fn grad_smooth(&self, w: &[f64], p_t: &[f64], a: &[f64], theta: f64) -> Vec<f64> {
        let (q, l) = (self.q, self.l);
        let juy = self.tilted_joint_uy(w, p_t);
        let mut pu = vec![0.0; l];
        let mut py = vec![0.0; q];
        for u in 0..l {
            for y in 0..q {
                pu[u] += juy[u * q + y];
                py[y] += juy[u * q + y];
            }
        }
        let mut g = vec![0.0; q * q * l * q];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    let wv = w[s * q * l + x * l + u];
                    if wv == 0.0 {
                        continue;
                    }
                    let base = ((s * q + x) * l + u) * q;
                    for y in 0..q {
                        // shared floor keeps dead (p, a) cells neutral
                        let ratio =
                            p_t[base + y].max(1e-18) / a[x * q + y].max(1e-18);
                        let kl_part = ratio.log2() + 1.0 / LN2;
                        let mi_part = log2_floor(
                            juy[u * q + y] / (pu[u] * py[y]).max(1e-300),
                        ) - 1.0 / LN2;
                        g[base + y] = wv * (kl_part + theta * mi_part);
                    }
                }
            }
        }
        g
    }

    /// Block descent on the smooth problem at fixed theta, in place.
    fn solve_smooth(&self, w: &[f64], theta: f64, p_t: &mut Vec<f64>, a: &mut Vec<f64>, rounds: usize) {
        let q = self.q;
        let mut v = self.obj_smooth(w, p_t, a, theta);
        for _ in 0..rounds {
            for _ in 0..4 {
                let g = self.grad_smooth(w, p_t, a, theta);
                let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if gmax < 1e-15 {
                    break;
                }
                let mut t = 0.5 / gmax;
                for _ in 0..30 {
                    let mut cand: Vec<f64> =
                        p_t.iter().zip(&g).map(|(x, gi)| x - t * gi).collect();
                    project_rows_to_simplex(&mut cand, q);
                    let vc = self.obj_smooth(w, &cand, a, theta);
                    if vc < v - 1e-16 {
                        *p_t = cand;
                        v = vc;
                        break;
                    }
                    t *= 0.5;
                }
            }
            let c = self.attack_cost(w, p_t);
            *a = exact_attack_update(&c, &self.ps_tilde, self.d, self.d2, q, a);
            v = self.obj_smooth(w, p_t, a, theta);
        }
    }

    /// High-accuracy inner minimum. Writing (t)+ as the maximum of
    /// theta * t over theta in [0, 1] and swapping min and max leaves a
    /// smooth convex problem at fixed theta, and the optimal theta is
    /// found by bisecting on the payoff-minus-rate derivative. The corner
    /// theta = 0 is exact: it collapses to the capacity attack.
    fn refine(&self, q_cc: &[f64], warm: &InnerSol) -> InnerSol {
        let (q, l) = (self.q, self.l);
        let w = self.weights(q_cc);
        let i_us = self.i_us_tilted(&w);

        // corner check: if some feasible attack already drives the payoff
        // below the rate, the tilt can copy it for free
        let mut p_xu = vec![0.0; q * l];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    p_xu[x * l + u] += w[s * q * l + x * l + u];
                }
            }
        }
        let mut p_x = vec![0.0; q];
        for x in 0..q {
            for u in 0..l {
                p_x[x] += p_xu[x * l + u];
            }
        }
        let (a0, iuy0) = super::attack::min_attack_iuy(
            &p_xu,
            &p_x,
            self.d,
            self.d2,
            q,
            l,
            Some(&warm.attack),
            super::attack::Effort::Full,
        );
        if iuy0 - i_us <= self.r + 1e-12 {
            let rows = q * q * l;
            let mut p_t = vec![0.0; rows * q];
            for row in 0..rows {
                let x = (row / l) % q;
                for y in 0..q {
                    p_t[row * q + y] = a0[x * q + y];
                }
            }
            return InnerSol {
                f: 0.0,
                p_tilde: p_t,
                attack: a0,
                theta: 0.0,
            };
        }

        let mut p_t = warm.p_tilde.clone();
        let mut a = warm.attack.clone();
        for v in a.iter_mut() {
            *v = 0.999 * *v + 0.001 / q as f64;
        }
        let solved_j = |p_t: &Vec<f64>| self.j_tilted(&w, p_t);

        // hinge fully active?
        self.solve_smooth(&w, 1.0, &mut p_t, &mut a, 60);
        if solved_j(&p_t) >= self.r - 1e-10 {
            let f = self.objective(&w, &p_t, &a);
            return InnerSol {
                f,
                p_tilde: p_t,
                attack: a,
                theta: 1.0,
            };
        }

        // interior theta: payoff at the smooth solution decreases in
        // theta, so bisect it onto the rate
        let (mut t_lo, mut t_hi) = (0.0f64, 1.0f64);
        for _ in 0..24 {
            let mid = 0.5 * (t_lo + t_hi);
            self.solve_smooth(&w, mid, &mut p_t, &mut a, 25);
            if solved_j(&p_t) > self.r {
                t_lo = mid;
            } else {
                t_hi = mid;
            }
        }
        let theta = 0.5 * (t_lo + t_hi);
        self.solve_smooth(&w, theta, &mut p_t, &mut a, 40);
        let f = self.objective(&w, &p_t, &a);
        InnerSol {
            f,
            p_tilde: p_t,
            attack: a,
            theta,
        }
    }

    /// Subgradient pass plus hinge-dual refinement; keeps the better one.
    fn solve_full(&self, q_cc: &[f64]) -> InnerSol {
        let warm = self.solve(q_cc, 300, 4);
        let refined = self.refine(q_cc, &warm);
        if refined.f <= warm.f {
            refined
        } else {
            warm
        }
    }

    /// Supergradient of the inner minimum in the covert channel, by
    /// Danskin's rule at the inner minimizer.
    fn covert_supergrad(&self, q_cc: &[f64], sol: &InnerSol) -> Vec<f64> {
        let (q, l) = (self.q, self.l);
        let w = self.weights(q_cc);
        let p_t = &sol.p_tilde;
        let a = &sol.attack;
        let juy = self.tilted_joint_uy(&w, p_t);
        let mut pu_y = vec![0.0; l];
        let mut py = vec![0.0; q];
        for u in 0..l {
            for y in 0..q {
                pu_y[u] += juy[u * q + y];
                py[y] += juy[u * q + y];
            }
        }
        let mut jus = vec![0.0; l * q];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    jus[u * q + s] += w[s * q * l + x * l + u];
                }
            }
        }
        let mut pu_s = vec![0.0; l];
        let mut ps_m = vec![0.0; q];
        for u in 0..l {
            for s in 0..q {
                pu_s[u] += jus[u * q + s];
                ps_m[s] += jus[u * q + s];
            }
        }
        let theta = sol.theta;
        let mut g = vec![0.0; q * q * l];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    let base = ((s * q + x) * l + u) * q;
                    let mut kl = 0.0;
                    let mut term_y = 0.0;
                    for y in 0..q {
                        let p = p_t[base + y];
                        if p > 0.0 {
                            kl += p * (p / a[x * q + y].max(1e-300)).log2();
                            term_y += p
                                * log2_floor(juy[u * q + y] / (pu_y[u] * py[y]).max(1e-300));
                        }
                    }
                    let term_s =
                        log2_floor(jus[u * q + s] / (pu_s[u] * ps_m[s]).max(1e-300));
                    g[s * q * l + x * l + u] =
                        self.ps_tilde[s] * (kl + theta * (term_y - term_s));
                }
            }
        }
        g
    }
}

/// Middle maximization over covert channels at one tilted source; returns
/// the best inner-minimum value found.
fn tilted_game_value(
    ps_tilde: &[f64],
    cfg: &GameConfig,
    r: f64,
) -> Result<f64, SolverError> {
    let q = ps_tilde.len();
    let l = cfg.l;
    let ctx = InnerCtx::new(ps_tilde.to_vec(), &cfg.d, cfg.d2, q, l, r).ok_or_else(|| {
        SolverError::BadConfig("degenerate attack polytope at a tilted source".into())
    })?;
    let proj = covert_polytope(ps_tilde, &cfg.d, cfg.d1, l, true).ok_or_else(|| {
        SolverError::BadConfig("degenerate covert polytope at a tilted source".into())
    })?;
    let project = |x: &mut Vec<f64>| proj.project(x);

    // the candidate p~ = A broadcast at the payoff-minimizing attack caps
    // the inner minimum by (payoff - rate)+ exactly; without the cap the
    // coarse subgradient value overestimates badly at channels whose best
    // attack sits far from the divergence-local one, and the ascent
    // drifts onto them
    let corner = |q_cc: &[f64]| -> (f64, Vec<f64>) {
        let w = ctx.weights(q_cc);
        let mut p_xu = vec![0.0; q * l];
        for s in 0..q {
            for x in 0..q {
                for u in 0..l {
                    p_xu[x * l + u] += w[s * q * l + x * l + u];
                }
            }
        }
        let mut p_x = vec![0.0; q];
        for x in 0..q {
            for u in 0..l {
                p_x[x] += p_xu[x * l + u];
            }
        }
        let (a_min, iuy) = super::attack::min_attack_iuy(
            &p_xu,
            &p_x,
            &cfg.d,
            cfg.d2,
            q,
            l,
            None,
            super::attack::Effort::Quick,
        );
        (iuy - ctx.i_us_tilted(&w) - r, a_min)
    };
    let eval = |q_cc: &[f64]| {
        let (slack, _) = corner(q_cc);
        let cap = slack.max(0.0);
        if cap == 0.0 {
            return 0.0;
        }
        ctx.solve(q_cc, 60, 5).f.min(cap)
    };
    let grad = |q_cc: &[f64]| {
        let (slack, a_min) = corner(q_cc);
        let cap = slack.max(0.0);
        let quick = ctx.solve(q_cc, 60, 5);
        if cap <= quick.f {
            // hinge-corner candidate wins: climb the attacked payoff
            super::payoff::grad_q_j(&ctx.ps_tilde, q_cc, &a_min, q, l)
        } else {
            ctx.covert_supergrad(q_cc, &quick)
        }
    };

    let smart = smart_starts(ps_tilde, &cfg.d, cfg.d1, q, l);
    let mut starts = smart.clone();
    let dim = q * q * l;
    for i in 0..cfg.multistarts.min(8) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
        rng.set_stream(4_000 + i as u64);
        starts.push((0..dim).map(|_| -rng.gen_range(1e-12..1.0f64).ln()).collect());
    }
    let out = multistart(starts, &project, &eval, &grad, cfg.max_iters.min(60), cfg.tol);

    // high-accuracy re-evaluation at the winner, anchored by the smart
    // starts in case the coarse-eval ascent wandered
    let mut best = ctx.solve_full(&out.point).f;
    for s in &smart {
        let mut p = s.clone();
        proj.project(&mut p);
        let v = ctx.solve_full(&p).f;
        if v > best {
            best = v;
        }
    }
    Ok(best.max(0.0))
}

/// Active-warden random-coding exponent at rate `r`.
pub fn exponent_active(cfg: &GameConfig, r: f64) -> Result<f64, SolverError> {
    cfg.validate()?;
    if cfg.alphabet_size() != 2 {
        return Err(SolverError::UnsupportedScale(
            "exponent solves support binary sources only".into(),
        ));
    }
    if cfg.l > 4 {
        return Err(SolverError::UnsupportedScale(
            "exponent solves cap the auxiliary alphabet at 4".into(),
        ));
    }
    if !(r >= 0.0) {
        return Err(SolverError::BadConfig("rate must be nonnegative".into()));
    }
    let p1 = cfg.p_s.prob(1);

    let divergence = |t: f64| kl_bits(&[1.0 - t, t], cfg.p_s.probs());
    let phi = |t: f64| -> Result<f64, SolverError> {
        let t = t.clamp(1e-4, 1.0 - 1e-4);
        let ps_tilde = [1.0 - t, t];
        Ok(divergence(t) + tilted_game_value(&ps_tilde, cfg, r)?)
    };

    // coarse tilt grid, untilted source first: its divergence term
    // vanishes, and every later tilt whose divergence alone reaches the
    // incumbent can be skipped outright
    let mut ts: Vec<f64> = (1..=19).map(|i| i as f64 / 20.0).collect();
    ts.push(p1.clamp(1e-4, 1.0 - 1e-4));
    ts.sort_by(|a, b| {
        let da = (a - p1).abs();
        let db = (b - p1).abs();
        da.partial_cmp(&db).unwrap()
    });
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut best_t = ts[0];
    let mut best = f64::INFINITY;
    for &t in &ts {
        if divergence(t.clamp(1e-4, 1.0 - 1e-4)) >= best {
            continue;
        }
        let v = phi(t)?;
        if v < best {
            best = v;
            best_t = t;
        }
        if best <= 1e-9 {
            // the exponent is nonnegative, so an exact zero is final
            return Ok(0.0);
        }
    }
    let step = 0.05;
    let lo = (best_t - step).max(1e-4);
    let hi = (best_t + step).min(1.0 - 1e-4);
    let mut refine_err: Option<SolverError> = None;
    let (_, v) = golden_min(
        |t| {
            // a divergence-only lower bound is enough to steer the search
            // away when it already exceeds the incumbent
            let tc = t.clamp(1e-4, 1.0 - 1e-4);
            if divergence(tc) >= best {
                return divergence(tc);
            }
            match phi(t) {
                Ok(v) => v,
                Err(e) => {
                    refine_err = Some(e);
                    f64::INFINITY
                }
            }
        },
        lo,
        hi,
        14,
    );
    if let Some(e) = refine_err {
        return Err(e);
    }
    Ok(best.min(v).max(0.0))
}

/// Passive-warden exponent: the inner maximization collapses to the
/// tilted passive capacity.
pub fn exponent_passive(
    p_s: &Pmf,
    d: &DistortionMatrix,
    d1: f64,
    r: f64,
) -> Result<f64, SolverError> {
    let probe = GameConfig::new(p_s.clone(), d.clone(), d1, 0.0, 1);
    probe.validate()?;
    if !(r >= 0.0) {
        return Err(SolverError::BadConfig("rate must be nonnegative".into()));
    }
    let q = p_s.alphabet_size();
    let tilted_value = |ps_tilde: &[f64]| -> Result<f64, SolverError> {
        let (_, v) = super::capacity::passive_embedding(ps_tilde, d, d1, true)?;
        Ok(v)
    };

    // untilted shortcut doubles as the exactness anchor above threshold
    if tilted_value(p_s.probs())? <= r {
        return Ok(0.0);
    }
    if q == 2 {
        let phi = |t: f64| -> Result<f64, SolverError> {
            let t = t.clamp(1e-6, 1.0 - 1e-6);
            let ps_tilde = [1.0 - t, t];
            let c = tilted_value(&ps_tilde)?;
            Ok(kl_bits(&ps_tilde, p_s.probs()) + (c - r).max(0.0))
        };
        let mut best = f64::INFINITY;
        let mut best_t = 0.5;
        for i in 1..200 {
            let t = i as f64 / 200.0;
            let v = phi(t)?;
            if v < best {
                best = v;
                best_t = t;
            }
        }
        let mut refine_err: Option<SolverError> = None;
        let (_, v) = golden_min(
            |t| match phi(t) {
                Ok(v) => v,
                Err(e) => {
                    refine_err = Some(e);
                    f64::INFINITY
                }
            },
            (best_t - 0.005).max(1e-6),
            (best_t + 0.005).min(1.0 - 1e-6),
            60,
        );
        if let Some(e) = refine_err {
            return Err(e);
        }
        return Ok(best.min(v).max(0.0));
    }
    if q == 3 {
        let g = 40usize;
        let mut best = f64::INFINITY;
        for i in 0..=g {
            for j in 0..=(g - i) {
                let mut ps_tilde = vec![
                    i as f64 / g as f64,
                    j as f64 / g as f64,
                    (g - i - j) as f64 / g as f64,
                ];
                for v in ps_tilde.iter_mut() {
                    *v = v.max(1e-6);
                }
                let sum: f64 = ps_tilde.iter().sum();
                for v in ps_tilde.iter_mut() {
                    *v /= sum;
                }
                let c = tilted_value(&ps_tilde)?;
                let phi = kl_bits(&ps_tilde, p_s.probs()) + (c - r).max(0.0);
                if phi < best {
                    best = phi;
                }
            }
        }
        return Ok(best.max(0.0));
    }
    Err(SolverError::UnsupportedScale(
        "passive exponent solves support alphabets up to 3".into(),
    ))
}

/// Samples the active exponent on a rate grid.
pub fn exponent_curve(cfg: &GameConfig, rates: &[f64]) -> Result<ExponentCurve, SolverError> {
    if rates.is_empty() {
        return Err(SolverError::BadConfig("empty rate grid".into()));
    }
    let mut exponents = Vec::with_capacity(rates.len());
    for &r in rates {
        exponents.push(exponent_active(cfg, r)?);
    }
    Ok(ExponentCurve {
        rates: rates.to_vec(),
        exponents,
        config: cfg.clone(),
    })
}
