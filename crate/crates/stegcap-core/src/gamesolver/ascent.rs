//! Multistart projected gradient ascent for the outer (maximizing) player.
//!
//! The outer objective is not concave, so each run climbs from a different
//! start and the best final value wins. Starts are evaluated in parallel
//! when the `parallel` feature is on; the winner is chosen by (value,
//! start index) so the result is identical either way.

use crate::exec;

pub struct AscentOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Climb from one start. `project` maps any array onto the feasible set,
/// `eval` scores a feasible point, `grad` supplies an ascent direction
/// (for a minimax objective, a supergradient of the inner minimum).
pub fn ascend<P, E, G>(
    start: &[f64],
    project: &P,
    eval: &E,
    grad: &G,
    max_iters: usize,
    tol: f64,
) -> AscentOutcome
where
    P: Fn(&mut Vec<f64>),
    E: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = start.to_vec();
    project(&mut x);
    let mut v = eval(&x);
    let mut iters = 0;
    let mut flat_streak = 0;
    for _ in 0..max_iters {
        iters += 1;
        let g = grad(&x);
        let gnorm = g.iter().fold(0.0f64, |m, gi| m.max(gi.abs()));
        if gnorm < 1e-13 {
            break;
        }
        let mut t = 0.5 / gnorm;
        let mut improved = false;
        for _ in 0..30 {
            let mut cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + t * gi).collect();
            project(&mut cand);
            let vc = eval(&cand);
            if vc > v + 1e-14 {
                let gain = vc - v;
                x = cand;
                v = vc;
                improved = true;
                flat_streak = if gain < tol * 1e-3 { flat_streak + 1 } else { 0 };
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
        if flat_streak >= 6 {
            break;
        }
    }
    AscentOutcome {
        point: x,
        value: v,
        iterations: iters,
    }
}

/// Run `ascend` from every start and keep the best outcome. Ties in value
/// resolve to the lowest start index, which keeps runs reproducible under
/// both execution modes.
pub fn multistart<P, E, G>(
    starts: Vec<Vec<f64>>,
    project: &P,
    eval: &E,
    grad: &G,
    max_iters: usize,
    tol: f64,
) -> AscentOutcome
where
    P: Fn(&mut Vec<f64>) + Sync + Send,
    E: Fn(&[f64]) -> f64 + Sync + Send,
    G: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    assert!(!starts.is_empty());
    let outcomes = exec::map_indexed(starts.len(), |i| {
        ascend(&starts[i], project, eval, grad, max_iters, tol)
    });
    let mut best_idx = 0;
    let mut total_iters = 0;
    for (i, o) in outcomes.iter().enumerate() {
        total_iters += o.iterations;
        if o.value > outcomes[best_idx].value + 1e-15 {
            best_idx = i;
        }
    }
    let best = &outcomes[best_idx];
    AscentOutcome {
        point: best.point.clone(),
        value: best.value,
        iterations: total_iters,
    }
}
