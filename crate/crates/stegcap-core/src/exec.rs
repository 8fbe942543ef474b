//! Execution helpers shared by the solvers and simulators.
//!
//! All data-parallel loops in the crate funnel through [`map_indexed`], so
//! the `parallel` cargo feature is the single switch between rayon and the
//! sequential fallback. Floating-point reductions go through
//! [`sum_indexed`], which sums fixed-size blocks in index order with
//! compensation; totals therefore do not depend on thread count or
//! scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to `0..n` and collects the results in index order.
///
/// Runs on the rayon pool when the `parallel` feature is enabled.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(n, f)
    }
}

/// Sequential twin of [`map_indexed`], available regardless of features.
///
/// Exists so benchmarks can compare both paths within one build.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Kahan-compensated sum in slice order.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

const BLOCK: usize = 4096;

/// Sums `f(i)` over `0..n` deterministically.
///
/// Work is split into fixed blocks of 4096 indices; blocks may be evaluated
/// in parallel but partial sums are combined in block order, compensated.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    let partials = map_indexed(blocks, |b| {
        let lo = b * BLOCK;
        let hi = ((b + 1) * BLOCK).min(n);
        let mut sum = 0.0;
        let mut c = 0.0;
        for i in lo..hi {
            let y = f(i) - c;
            let t = sum + y;
            c = (t - sum) - y;
            sum = t;
        }
        sum
    });
    kahan_sum(&partials)
}

/// Accumulates `f(i)` into a shared-length vector, deterministically.
///
/// Each block produces a partial vector; partials are added coordinate-wise
/// in block order. Used for exact distribution enumerations.
pub fn accumulate_indexed<F>(n: usize, len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut Vec<f64>) + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    let partials = map_indexed(blocks, |b| {
        let lo = b * BLOCK;
        let hi = ((b + 1) * BLOCK).min(n);
        let mut acc = vec![0.0; len];
        for i in lo..hi {
            f(i, &mut acc);
        }
        acc
    });
    let mut out = vec![0.0; len];
    for part in &partials {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    out
}
