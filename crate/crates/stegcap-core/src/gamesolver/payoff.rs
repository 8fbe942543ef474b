//! Raw-array payoff evaluations and their gradients.
//!
//! The solvers work on flat f64 arrays rather than the channel wrapper
//! types: a covert channel is q rows of q*L entries indexed (s, x, u) ->
//! s*q*L + x*L + u, an attack is q rows of q entries indexed (x, y) ->
//! x*q + y. Every gradient here is the raw partial of the matching
//! evaluation pipeline, so central finite differences reproduce it at
//! interior points; the tests hold them to 1e-6.

use crate::channels::mutual_information_bits;

const LN2: f64 = std::f64::consts::LN_2;

fn log2_floor(x: f64) -> f64 {
    x.max(1e-300).log2()
}

/// p(x, u) induced by source and covert channel, flattened x * l + u.
pub fn joint_xu(p_s: &[f64], q_cc: &[f64], q: usize, l: usize) -> Vec<f64> {
    let mut out = vec![0.0; q * l];
    for s in 0..q {
        let w = p_s[s];
        if w == 0.0 {
            continue;
        }
        for x in 0..q {
            for u in 0..l {
                out[x * l + u] += w * q_cc[s * q * l + x * l + u];
            }
        }
    }
    out
}

/// p(u, s), flattened u * q + s.
pub fn joint_us(p_s: &[f64], q_cc: &[f64], q: usize, l: usize) -> Vec<f64> {
    let mut out = vec![0.0; l * q];
    for s in 0..q {
        let w = p_s[s];
        if w == 0.0 {
            continue;
        }
        for x in 0..q {
            for u in 0..l {
                out[u * q + s] += w * q_cc[s * q * l + x * l + u];
            }
        }
    }
    out
}

/// p(u, y) under attack `a` (qy outputs), flattened u * qy + y.
pub fn joint_uy(p_xu: &[f64], a: &[f64], q: usize, l: usize, qy: usize) -> Vec<f64> {
    let mut out = vec![0.0; l * qy];
    for x in 0..q {
        for u in 0..l {
            let w = p_xu[x * l + u];
            if w == 0.0 {
                continue;
            }
            for y in 0..qy {
                out[u * qy + y] += w * a[x * qy + y];
            }
        }
    }
    out
}

pub fn i_us(p_s: &[f64], q_cc: &[f64], q: usize, l: usize) -> f64 {
    mutual_information_bits(&joint_us(p_s, q_cc, q, l), l, q)
}

pub fn i_uy(p_xu: &[f64], a: &[f64], q: usize, l: usize, qy: usize) -> f64 {
    mutual_information_bits(&joint_uy(p_xu, a, q, l, qy), l, qy)
}

/// J = I(U;Y) - I(U;S).
pub fn j_value(p_s: &[f64], q_cc: &[f64], a: &[f64], q: usize, l: usize) -> f64 {
    let p_xu = joint_xu(p_s, q_cc, q, l);
    i_uy(&p_xu, a, q, l, q) - i_us(p_s, q_cc, q, l)
}

/// d J / d Q(s,x,u) at fixed attack.
pub fn grad_q_j(p_s: &[f64], q_cc: &[f64], a: &[f64], q: usize, l: usize) -> Vec<f64> {
    let p_xu = joint_xu(p_s, q_cc, q, l);
    let juy = joint_uy(&p_xu, a, q, l, q);
    let jus = joint_us(p_s, q_cc, q, l);
    let mut pu_y = vec![0.0; l];
    let mut py = vec![0.0; q];
    for u in 0..l {
        for y in 0..q {
            pu_y[u] += juy[u * q + y];
            py[y] += juy[u * q + y];
        }
    }
    let mut pu_s = vec![0.0; l];
    let mut ps_marg = vec![0.0; q];
    for u in 0..l {
        for s in 0..q {
            pu_s[u] += jus[u * q + s];
            ps_marg[s] += jus[u * q + s];
        }
    }
    let mut g = vec![0.0; q * q * l];
    for s in 0..q {
        let w = p_s[s];
        if w == 0.0 {
            continue;
        }
        for x in 0..q {
            for u in 0..l {
                let mut term_y = 0.0;
                for y in 0..q {
                    let ay = a[x * q + y];
                    if ay > 0.0 {
                        term_y +=
                            ay * log2_floor(juy[u * q + y] / (pu_y[u] * py[y]).max(1e-300));
                    }
                }
                let term_s =
                    log2_floor(jus[u * q + s] / (pu_s[u] * ps_marg[s]).max(1e-300));
                g[s * q * l + x * l + u] = w * (term_y - term_s);
            }
        }
    }
    g
}

/// d I(U;Y) / d A(x,y) at fixed covert channel.
pub fn grad_attack_iuy(p_xu: &[f64], a: &[f64], q: usize, l: usize, qy: usize) -> Vec<f64> {
    let juy = joint_uy(p_xu, a, q, l, qy);
    let mut pu = vec![0.0; l];
    let mut py = vec![0.0; qy];
    for u in 0..l {
        for y in 0..qy {
            pu[u] += juy[u * qy + y];
            py[y] += juy[u * qy + y];
        }
    }
    let mut g = vec![0.0; q * qy];
    for x in 0..q {
        for y in 0..qy {
            let mut acc = 0.0;
            for u in 0..l {
                let w = p_xu[x * l + u];
                if w > 0.0 {
                    acc += w
                        * (log2_floor(juy[u * qy + y] / (pu[u] * py[y]).max(1e-300))
                            - 1.0 / LN2);
                }
            }
            g[x * qy + y] = acc;
        }
    }
    g
}

/// I(S;Y) for a direct source-to-output channel, plus its gradient; used by
/// the no-cover capacity where the embedder plays no role.
pub fn i_sy(p_s: &[f64], a: &[f64], q: usize) -> f64 {
    let mut joint = vec![0.0; q * q];
    for s in 0..q {
        for y in 0..q {
            joint[s * q + y] = p_s[s] * a[s * q + y];
        }
    }
    mutual_information_bits(&joint, q, q)
}

pub fn grad_attack_isy(p_s: &[f64], a: &[f64], q: usize) -> Vec<f64> {
    let mut py = vec![0.0; q];
    let mut rowsum = vec![0.0; q];
    for s in 0..q {
        for y in 0..q {
            py[y] += p_s[s] * a[s * q + y];
            rowsum[s] += p_s[s] * a[s * q + y];
        }
    }
    let mut g = vec![0.0; q * q];
    for s in 0..q {
        if p_s[s] == 0.0 {
            continue;
        }
        for y in 0..q {
            g[s * q + y] = p_s[s]
                * (log2_floor(p_s[s] * a[s * q + y] / (rowsum[s] * py[y]).max(1e-300))
                    - 1.0 / LN2);
        }
    }
    g
}

/// H(X|S) of an embedding channel r(x|s) (flat s * q + x) and its gradient.
pub fn h_x_given_s(p_s: &[f64], r: &[f64], q: usize) -> f64 {
    let mut h = 0.0;
    for s in 0..q {
        if p_s[s] == 0.0 {
            continue;
        }
        for x in 0..q {
            let v = r[s * q + x];
            if v > 0.0 {
                h -= p_s[s] * v * v.log2();
            }
        }
    }
    h
}

pub fn grad_h_x_given_s(p_s: &[f64], r: &[f64], q: usize) -> Vec<f64> {
    let mut g = vec![0.0; q * q];
    for s in 0..q {
        if p_s[s] == 0.0 {
            continue;
        }
        for x in 0..q {
            g[s * q + x] = -p_s[s] * (log2_floor(r[s * q + x]) + 1.0 / LN2);
        }
    }
    g
}
