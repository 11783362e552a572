//! Brute-force grid maximum, independent of the sweep and the ascent.

use crate::error::{Error, Result};
use crate::operators::OperatorPQ;
use crate::spaces::cos_sin_turns;

use super::{NormMethod, NormResult};

/// Plain evaluation maximum over a grid of the domain sphere: the circle
/// `u_k = k/grid` in the plane, a polar product grid of about `grid` points
/// in three dimensions. `tol` holds a Lipschitz slack estimate
/// `value · max neighbour distance`.
pub fn opnorm_oracle(op: &OperatorPQ, grid: usize) -> Result<NormResult> {
    let dom = op.domain();
    if grid < 1000 {
        return Err(Error::param("grid", format!("{grid} < 1000")));
    }
    let mut best = (0.0f64, vec![0.0; dom.dim()]);
    let mut consider = |x: &[f64]| {
        let v = op.image_norm(x);
        if v > best.0 || best.1.iter().all(|c| *c == 0.0) {
            best = (v, x.to_vec());
        }
    };
    let (points, spacing) = match dom.dim() {
        1 => {
            let x = dom.basis_vector(0);
            consider(&x);
            (1, 0.0)
        }
        2 => {
            let xs: Vec<[f64; 2]> = (0..grid)
                .map(|k| dom.sphere_point_turns(k as f64 / grid as f64))
                .collect();
            xs.iter().for_each(|x| consider(x));
            let spacing = (0..grid)
                .map(|k| dom.distance(&xs[k], &xs[(k + 1) % grid]))
                .fold(0.0, f64::max);
            (grid, spacing)
        }
        3 => {
            let mut g = ((grid as f64 / 2.0).sqrt().ceil() as usize).max(4);
            g += g % 2;
            let point = |i: usize, j: usize| {
                let (ct, st) = cos_sin_turns(i as f64 / (2 * g) as f64);
                let (cp, sp) = cos_sin_turns(j as f64 / (2 * g) as f64);
                let d = [st * cp, st * sp, ct];
                dom.normalize(&d).unwrap_or(d.to_vec())
            };
            let mut spacing = 0.0f64;
            let mut count = 0;
            for i in 0..=g {
                let js = if i == 0 || i == g { 1 } else { 2 * g };
                for j in 0..js {
                    let x = point(i, j);
                    consider(&x);
                    count += 1;
                    if js > 1 {
                        spacing = spacing.max(dom.distance(&x, &point(i, (j + 1) % js)));
                    }
                    if i < g {
                        spacing = spacing.max(dom.distance(&x, &point(i + 1, j)));
                    }
                }
            }
            (count, spacing)
        }
        d => {
            return Err(Error::Unsupported(format!(
                "oracle grids are exhaustive only up to dimension 3, got {d}"
            )))
        }
    };
    let slack = best.0 * spacing;
    let w = best.1;
    let neg: Vec<f64> = w.iter().map(|v| -v).collect();
    Ok(NormResult {
        value: best.0,
        witnesses: vec![w, neg],
        method: NormMethod::Oracle,
        grid_size: points,
        tol: slack,
        lower_bound: best.0,
        upper_bound: best.0 + slack,
        certified: false,
        evaluations: points,
    })
}
