//! Multistart ascent on the domain sphere for dimension three and up.

use crate::operators::OperatorPQ;
use crate::spaces::sample_coords;

pub(crate) const MAX_STEPS: usize = 500;
const MIN_STEP: f64 = 1e-12;
const POWER_STEPS: usize = 200;

pub(crate) struct AscentOutcome {
    pub value: f64,
    pub points: Vec<(Vec<f64>, f64)>,
    pub evaluations: usize,
}

/// `Tᵀ g` with `g` a norming functional of `Tx`: a (sub)gradient of `x ↦ ‖Tx‖`.
pub(crate) fn norm_subgradient(op: &OperatorPQ, x: &[f64]) -> Option<Vec<f64>> {
    let y = op.matrix().mul_vec(x);
    let g = op.range().norm_subgradient(&y)?;
    Some(op.matrix().tr_mul_vec(&g))
}

/// Renormalized (sub)gradient ascent followed by power steps
/// `x ← argmax_{‖z‖=1} ⟨Tᵀ g(Tx), z⟩`, which never decrease `‖Tx‖`.
pub(crate) fn ascend(op: &OperatorPQ, start: &[f64], evals: &mut usize) -> (Vec<f64>, f64) {
    let dom = op.domain();
    let mut x = start.to_vec();
    let mut fx = op.image_norm(&x);
    *evals += 1;
    let mut step = 0.25;
    for _ in 0..MAX_STEPS {
        let Some(g) = norm_subgradient(op, &x) else { break };
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            break;
        }
        let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b / scale).collect();
        let Some(xn) = dom.normalize(&y) else { break };
        let fnew = op.image_norm(&xn);
        *evals += 1;
        if fnew > fx {
            x = xn;
            fx = fnew;
            step = (step * 1.5).min(1.0);
        } else {
            step *= 0.5;
            if step < MIN_STEP {
                break;
            }
        }
    }
    for _ in 0..POWER_STEPS {
        let Some(w) = norm_subgradient(op, &x) else { break };
        let Some(xn) = dom.dual_attainer(&w) else { break };
        let fnew = op.image_norm(&xn);
        *evals += 1;
        if fnew > fx * (1.0 + 1e-15) {
            x = xn;
            fx = fnew;
        } else {
            if fnew >= fx {
                x = xn;
                fx = fnew;
            }
            break;
        }
    }
    (x, fx)
}

/// Start points: `starts` samples of the sphere plus all `±e_i`.
pub(crate) fn start_points(op: &OperatorPQ, starts: usize, seed: u64) -> Vec<Vec<f64>> {
    let dom = op.domain();
    let mut pts = sample_coords(dom, starts, seed);
    for i in 0..dom.dim() {
        let e = dom.basis_vector(i);
        pts.push(e.iter().map(|v| -v).collect());
        pts.push(e);
    }
    pts
}

pub(crate) fn multistart(op: &OperatorPQ, starts: usize, seed: u64) -> AscentOutcome {
    let mut evaluations = 0;
    let points: Vec<(Vec<f64>, f64)> = start_points(op, starts, seed)
        .iter()
        .map(|s| ascend(op, s, &mut evaluations))
        .collect();
    let value = points.iter().map(|p| p.1).fold(0.0, f64::max);
    AscentOutcome {
        value,
        points,
        evaluations,
    }
}
