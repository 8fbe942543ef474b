//! Euclidean projections onto the solvers' feasible sets.
//!
//! Every strategy set in the game is an intersection of an affine subspace
//! (row sums, marginal equalities), one distortion halfspace, and the
//! nonnegative orthant. Projection onto the intersection runs Dykstra's
//! alternating scheme; the affine part is projected in closed form through a
//! precomputed inverse of the small Gram matrix.

/// Solves A x = b for a dense square system by Gaussian elimination with
/// partial pivoting. Returns None when the pivot collapses, which the
/// callers treat as an unsupported (degenerate) configuration.
pub fn solve_linear(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve_linear(a, &e)?);
    }
    // transpose the solution columns into rows
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

/// Projection onto the affine subspace {x : M x = b}.
pub struct AffineProjector {
    m: Vec<Vec<f64>>,
    b: Vec<f64>,
    gram_inv: Vec<Vec<f64>>,
}

impl AffineProjector {
    /// Rows of `m` must be linearly independent.
    pub fn new(m: Vec<Vec<f64>>, b: Vec<f64>) -> Option<Self> {
        let k = m.len();
        let mut gram = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                gram[i][j] = m[i].iter().zip(&m[j]).map(|(x, y)| x * y).sum();
            }
        }
        let gram_inv = invert(&gram)?;
        Some(Self { m, b, gram_inv })
    }

    pub fn project(&self, x: &mut [f64]) {
        let k = self.b.len();
        let mut residual = vec![0.0; k];
        for i in 0..k {
            residual[i] = self.m[i].iter().zip(x.iter()).map(|(m, v)| m * v).sum::<f64>()
                - self.b[i];
        }
        let mut coeff = vec![0.0; k];
        for i in 0..k {
            coeff[i] = self.gram_inv[i].iter().zip(&residual).map(|(g, r)| g * r).sum();
        }
        for i in 0..k {
            if coeff[i] != 0.0 {
                for (xv, mv) in x.iter_mut().zip(&self.m[i]) {
                    *xv -= coeff[i] * mv;
                }
            }
        }
    }
}

/// Intersection of an affine subspace, at most one halfspace w.x <= cap,
/// and the nonnegative orthant, with Dykstra projection onto it.
pub struct PolytopeProjector {
    affine: AffineProjector,
    halfspace: Option<(Vec<f64>, f64)>,
}

impl PolytopeProjector {
    pub fn new(affine: AffineProjector, halfspace: Option<(Vec<f64>, f64)>) -> Self {
        Self { affine, halfspace }
    }

    pub fn project(&self, x: &mut Vec<f64>) {
        let n = x.len();
        let mut corr_half = vec![0.0; n];
        let mut corr_orth = vec![0.0; n];
        let mut prev = vec![0.0; n];
        for _ in 0..500 {
            prev.copy_from_slice(x);

            // affine subspaces need no Dykstra correction
            self.affine.project(x);

            if let Some((w, cap)) = &self.halfspace {
                for (v, c) in x.iter_mut().zip(&corr_half) {
                    *v += c;
                }
                let before = x.clone();
                let dot: f64 = w.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                if dot > *cap {
                    let w2: f64 = w.iter().map(|a| a * a).sum();
                    let scale = (dot - cap) / w2;
                    for (v, a) in x.iter_mut().zip(w) {
                        *v -= scale * a;
                    }
                }
                for i in 0..n {
                    corr_half[i] = before[i] - x[i];
                }
            }

            for (v, c) in x.iter_mut().zip(&corr_orth) {
                *v += c;
            }
            let before = x.clone();
            for v in x.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            for i in 0..n {
                corr_orth[i] = before[i] - x[i];
            }

            let change: f64 = x
                .iter()
                .zip(&prev)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if change < 1e-13 {
                break;
            }
        }
    }
}

/// Feasible covert channels for a given source: one row per cover symbol
/// over (x, u) pairs, rows stochastic, expected distortion at most `d1`,
/// and, when `preserve_marginal` is set, induced stegotext law equal to the
/// source law.
pub fn covert_polytope(
    p_s: &[f64],
    d: &crate::channels::DistortionMatrix,
    d1: f64,
    l: usize,
    preserve_marginal: bool,
) -> Option<PolytopeProjector> {
    let q = p_s.len();
    let dim = q * q * l;
    let idx = |s: usize, x: usize, u: usize| s * q * l + x * l + u;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for s in 0..q {
        let mut row = vec![0.0; dim];
        for x in 0..q {
            for u in 0..l {
                row[idx(s, x, u)] = 1.0;
            }
        }
        rows.push(row);
        rhs.push(1.0);
    }
    if preserve_marginal {
        // the last marginal equation follows from the rest; drop it
        for x in 0..q - 1 {
            let mut row = vec![0.0; dim];
            for s in 0..q {
                for u in 0..l {
                    row[idx(s, x, u)] = p_s[s];
                }
            }
            rows.push(row);
            rhs.push(p_s[x]);
        }
    }
    let affine = AffineProjector::new(rows, rhs)?;
    let mut w = vec![0.0; dim];
    for s in 0..q {
        for x in 0..q {
            for u in 0..l {
                w[idx(s, x, u)] = p_s[s] * d.get(s, x);
            }
        }
    }
    Some(PolytopeProjector::new(affine, Some((w, d1))))
}

/// Feasible attacks for a fixed stegotext law: rows stochastic, expected
/// distortion at most `d2`.
pub fn attack_polytope(
    p_x: &[f64],
    d: &crate::channels::DistortionMatrix,
    d2: f64,
) -> Option<PolytopeProjector> {
    let q = p_x.len();
    let dim = q * q;
    let mut rows = Vec::new();
    for x in 0..q {
        let mut row = vec![0.0; dim];
        for y in 0..q {
            row[x * q + y] = 1.0;
        }
        rows.push(row);
    }
    let affine = AffineProjector::new(rows, vec![1.0; q])?;
    let mut w = vec![0.0; dim];
    for x in 0..q {
        for y in 0..q {
            w[x * q + y] = p_x[x] * d.get(x, y);
        }
    }
    Some(PolytopeProjector::new(affine, Some((w, d2))))
}

/// Euclidean projection of each length-`cols` row onto the probability
/// simplex, by the sorted-threshold rule.
pub fn project_rows_to_simplex(x: &mut [f64], cols: usize) {
    for row in x.chunks_mut(cols) {
        project_simplex(row);
    }
}

pub fn project_simplex(row: &mut [f64]) {
    let n = row.len();
    let mut sorted = row.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        acc += v;
        let candidate = (acc - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    let _ = n;
    for v in row.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}
