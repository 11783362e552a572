//! Certified maximization over a planar unit sphere.
//!
//! Points are parametrized by turns `u ∈ [0, 1)`. Since `‖T(−x)‖ = ‖Tx‖`
//! only the half circle `[0, 1/2]` is swept.
//!
//! Upper bound on a cell between sphere points `a` and `b`: the arc is the
//! radial image of the chord, `f = ‖T·‖` is convex so it is at most
//! `max(f(a), f(b))` on the chord, and the norm on the chord is at least
//! `2m − 1` where `m = ‖(a + b)/2‖`. Hence `sup_arc f ≤ max(f(a), f(b)) / (2m − 1)`.

use crate::operators::OperatorPQ;
use crate::search::golden_max;
use crate::spaces::SequenceSpace;

pub(crate) struct SweepOutcome {
    pub value: f64,
    pub upper: f64,
    pub witnesses: Vec<Vec<f64>>,
    pub evaluations: usize,
    pub grid: usize,
    pub certified: bool,
}

/// Grid size rounded up so that every eighth turn is a grid point.
pub(crate) fn round_grid(n: usize) -> usize {
    n.max(8).div_ceil(8) * 8
}

pub(crate) struct Cell {
    ua: f64,
    xa: [f64; 2],
    fa: f64,
    ub: f64,
    xb: [f64; 2],
    fb: f64,
}

pub(crate) fn cell_upper(space: &SequenceSpace, c: &Cell) -> f64 {
    let mid = [0.5 * (c.xa[0] + c.xb[0]), 0.5 * (c.xa[1] + c.xb[1])];
    let m = space.norm(&mid);
    let d = 2.0 * m - 1.0;
    if d <= 0.0 {
        f64::INFINITY
    } else {
        c.fa.max(c.fb) / d
    }
}

/// Sweep, refine and certify `sup ‖T x‖` over the planar domain sphere.
pub(crate) fn sweep_2d(
    op: &OperatorPQ,
    grid: usize,
    tol: f64,
    budget: usize,
    extra: &[Vec<f64>],
) -> SweepOutcome {
    let dom = op.domain();
    let n = round_grid(grid);
    let half = n / 2;
    let point = |u: f64| dom.sphere_point_turns(u);
    let f = |x: &[f64; 2]| op.image_norm(x);
    let mut evals = 0usize;

    let xs: Vec<[f64; 2]> = (0..=half).map(|k| point(k as f64 / n as f64)).collect();
    let fs: Vec<f64> = xs.iter().map(f).collect();
    evals += xs.len();

    let mut best = fs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut cands: Vec<(Vec<f64>, f64)> = Vec::new();
    for x in extra {
        let v = op.image_norm(x);
        evals += 1;
        best = best.max(v);
        cands.push((x.clone(), v));
    }

    // local maxima of the half-periodic sequence fs[0..half]
    let g = |k: isize| fs[k.rem_euclid(half as isize) as usize];
    let du = 1.0 / n as f64;
    for k in 0..half as isize {
        let (l, c, r) = (g(k - 1), g(k), g(k + 1));
        if c >= l && c >= r && (c > l || c > r) {
            let u0 = k as f64 * du;
            let (u, v) = golden_max(
                |u| {
                    evals += 1;
                    f(&point(u))
                },
                u0 - du,
                u0 + du,
                1e-13,
            );
            best = best.max(v);
            cands.push((point(u).to_vec(), v));
        }
    }

    // branch and bound over the cells
    let mut stack: Vec<Cell> = (0..half)
        .map(|k| Cell {
            ua: k as f64 * du,
            xa: xs[k],
            fa: fs[k],
            ub: (k + 1) as f64 * du,
            xb: xs[k + 1],
            fb: fs[k + 1],
        })
        .collect();
    let mut upper = best;
    let mut certified = true;
    while let Some(c) = stack.pop() {
        let ub = cell_upper(dom, &c);
        if ub <= best + tol {
            upper = upper.max(ub);
            continue;
        }
        if evals >= budget || c.ub - c.ua < 1e-15 {
            certified = false;
            upper = upper.max(ub);
            continue;
        }
        let um = 0.5 * (c.ua + c.ub);
        let xm = point(um);
        let fm = f(&xm);
        evals += 1;
        if fm > best {
            best = fm;
            cands.push((xm.to_vec(), fm));
        }
        stack.push(Cell {
            ua: c.ua,
            xa: c.xa,
            fa: c.fa,
            ub: um,
            xb: xm,
            fb: fm,
        });
        stack.push(Cell {
            ua: um,
            xa: xm,
            fa: fm,
            ub: c.ub,
            xb: c.xb,
            fb: c.fb,
        });
    }

    let mut witnesses: Vec<Vec<f64>> = cands
        .into_iter()
        .filter(|(_, v)| *v >= best - tol)
        .map(|(x, _)| x)
        .collect();
    if witnesses.is_empty() {
        let k = (0..half).max_by(|&a, &b| fs[a].total_cmp(&fs[b])).unwrap_or(0);
        witnesses.push(xs[k].to_vec());
    }
    SweepOutcome {
        value: best,
        upper: upper.max(best),
        witnesses,
        evaluations: evals,
        grid: n,
        certified,
    }
}

/// Values of `‖T x(u_k)‖` on the full circle grid `u_k = k/n`.
pub(crate) fn circle_values(op: &OperatorPQ, n: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let dom = op.domain();
    let xs: Vec<[f64; 2]> = (0..n).map(|k| dom.sphere_point_turns(k as f64 / n as f64)).collect();
    let fs = xs.iter().map(|x| op.image_norm(x)).collect();
    (xs, fs)
}
