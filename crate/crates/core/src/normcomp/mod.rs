//! Operator norms `‖T‖ = sup_{‖x‖ = 1} ‖Tx‖`.
//!
//! Dispatch, in order:
//! * zero operator: 0;
//! * planar domain: certified sweep ([`sweep`]), seeded with closed-form candidates;
//! * closed forms ([`exact`]);
//! * reductions to smaller operators whose norms combine by a maximum;
//! * multistart ascent ([`multistart`]), reported as uncertified.

mod exact;
mod multistart;
mod oracle;
pub(crate) mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::operators::OperatorPQ;
use crate::spaces::{lp_norm, Exponent, NormShape, SequenceSpace};

pub use oracle::opnorm_oracle;
pub(crate) use multistart::{ascend, norm_subgradient, start_points};

pub const DEFAULT_GRID: usize = 20_000;
pub const DEFAULT_STARTS: usize = 64;
const DEFAULT_BUDGET: usize = 4_000_000;
const MAX_WITNESSES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NormMethod {
    Sweep2d,
    Multistart,
    Oracle,
    Exact,
    Decomposed,
}

/// Outcome of a norm computation.
///
/// `lower_bound` is always the value of an evaluated unit vector. When
/// `certified` is set, `upper_bound` is a proven bound (up to rounding);
/// otherwise it only repeats the best value found.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub witnesses: Vec<Vec<f64>>,
    pub method: NormMethod,
    pub grid_size: usize,
    pub tol: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub certified: bool,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormOptions {
    pub tol: f64,
    pub grid: usize,
    pub starts: usize,
    pub seed: u64,
    pub budget: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            tol: 1e-9,
            grid: DEFAULT_GRID,
            starts: DEFAULT_STARTS,
            seed: 0,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl NormOptions {
    pub fn with_tol(tol: f64) -> Self {
        NormOptions {
            tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            return Err(Error::InvalidTolerance(self.tol));
        }
        if self.grid < 20_000 {
            return Err(Error::param("grid", "the sweep needs at least 2e4 points"));
        }
        if self.starts < 64 {
            return Err(Error::param("starts", "needs at least 64 starts"));
        }
        Ok(())
    }
}

/// `‖T‖_{p→q}` with default options and the given tolerance.
pub fn opnorm(op: &OperatorPQ, tol: f64) -> Result<NormResult> {
    opnorm_with(op, &NormOptions::with_tol(tol))
}

/// The projected-ascent path alone, whatever the dimension. Never certified.
pub fn opnorm_multistart(op: &OperatorPQ, opts: &NormOptions) -> Result<NormResult> {
    opts.validate()?;
    let mut r = ascent_result(op, opts);
    r.witnesses = canonical_witnesses(r.witnesses, op.domain());
    Ok(r)
}

pub fn opnorm_with(op: &OperatorPQ, opts: &NormOptions) -> Result<NormResult> {
    opts.validate()?;
    let mut r = compute(op, opts);
    r.witnesses = canonical_witnesses(r.witnesses, op.domain());
    Ok(r)
}

fn compute(op: &OperatorPQ, opts: &NormOptions) -> NormResult {
    let dom = op.domain();
    let n = dom.dim();
    if op.matrix().is_zero() {
        let e = dom.basis_vector(0);
        return NormResult {
            value: 0.0,
            witnesses: vec![e],
            method: NormMethod::Exact,
            grid_size: 0,
            tol: opts.tol,
            lower_bound: 0.0,
            upper_bound: 0.0,
            certified: true,
            evaluations: 0,
        };
    }
    if n == 2 {
        let extra = exact::exact_norm(op).map(|e| e.maximizers).unwrap_or_default();
        let s = sweep::sweep_2d(op, opts.grid, opts.tol, opts.budget, &extra);
        return NormResult {
            value: s.value,
            witnesses: s.witnesses,
            method: NormMethod::Sweep2d,
            grid_size: s.grid,
            tol: opts.tol,
            lower_bound: s.value,
            upper_bound: s.upper,
            certified: s.certified,
            evaluations: s.evaluations,
        };
    }
    if let Some(e) = exact::exact_norm(op) {
        let value = e
            .maximizers
            .iter()
            .map(|x| op.image_norm(x))
            .fold(e.value, f64::max);
        return NormResult {
            value,
            witnesses: e.maximizers,
            method: NormMethod::Exact,
            grid_size: 0,
            tol: opts.tol,
            lower_bound: value,
            upper_bound: value,
            certified: true,
            evaluations: 0,
        };
    }
    if let Some(parts) = reduce(op) {
        return combine(parts, op.domain().dim(), opts);
    }
    ascent_result(op, opts)
}

fn ascent_result(op: &OperatorPQ, opts: &NormOptions) -> NormResult {
    let ms = multistart::multistart(op, opts.starts, opts.seed);
    let witnesses = ms
        .points
        .into_iter()
        .filter(|(_, v)| *v >= ms.value - opts.tol)
        .map(|(x, _)| x)
        .collect();
    NormResult {
        value: ms.value,
        witnesses,
        method: NormMethod::Multistart,
        grid_size: opts.starts,
        tol: opts.tol,
        lower_bound: ms.value,
        upper_bound: ms.value,
        certified: false,
        evaluations: ms.evaluations,
    }
}

/// A smaller operator together with the domain coordinates it acts on.
pub(crate) struct Piece {
    pub op: OperatorPQ,
    pub cols: Vec<usize>,
}

impl Piece {
    pub fn embed(&self, x: &[f64], dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (&j, &v) in self.cols.iter().zip(x) {
            out[j] = v;
        }
        out
    }
}

/// Splits `T` into pieces with `‖T‖ = max ‖piece‖`, and with every unit
/// attaining vector of a piece embedding to a unit attaining vector of `T`.
/// Only used from dimension three on.
pub(crate) fn reduce(op: &OperatorPQ) -> Option<Vec<Piece>> {
    let a = op.matrix();
    let dom = op.domain();
    let ran = op.range();
    let all_cols: Vec<usize> = (0..a.cols()).collect();
    if a.cols() < 3 {
        return None;
    }

    if let NormShape::Blocked { block_dim, outer: Exponent::Inf } = ran.shape() {
        // ‖Tx‖ = max_k ‖T_k x‖ over row blocks
        let inner = SequenceSpace::new(*block_dim, ran.p()).ok()?;
        let pieces = (0..a.rows() / block_dim)
            .map(|k| {
                let rows: Vec<usize> = (k * block_dim..(k + 1) * block_dim).collect();
                OperatorPQ::new(a.select(&rows, &all_cols), dom.clone(), inner.clone())
                    .map(|op| Piece { op, cols: all_cols.clone() })
            })
            .collect::<Result<Vec<_>>>()
            .ok()?;
        return Some(pieces);
    }

    let nz_cols: Vec<usize> = all_cols.iter().copied().filter(|&j| a.column(j).iter().any(|v| *v != 0.0)).collect();
    if nz_cols.len() < a.cols() && !nz_cols.is_empty() {
        let sub_domain = match dom.shape() {
            NormShape::Plain => Some(SequenceSpace::new(nz_cols.len(), dom.p()).ok()?),
            NormShape::Blocked { block_dim, .. } => {
                let b = nz_cols[0] / block_dim;
                nz_cols
                    .iter()
                    .all(|j| j / block_dim == b)
                    .then(|| SequenceSpace::new(nz_cols.len(), dom.p()).ok())
                    .flatten()
            }
            NormShape::Linear { .. } => None,
        };
        if let Some(sd) = sub_domain {
            let rows: Vec<usize> = (0..a.rows()).collect();
            let sub = OperatorPQ::new(a.select(&rows, &nz_cols), sd, ran.clone()).ok()?;
            return Some(vec![Piece { op: sub, cols: nz_cols }]);
        }
    }

    if ran.is_plain() {
        let nz_rows: Vec<usize> = (0..a.rows()).filter(|&i| a.row(i).iter().any(|v| *v != 0.0)).collect();
        if nz_rows.len() < a.rows() && !nz_rows.is_empty() {
            let sr = SequenceSpace::new(nz_rows.len(), ran.p()).ok()?;
            let sub = OperatorPQ::new(a.select(&nz_rows, &all_cols), dom.clone(), sr).ok()?;
            return Some(vec![Piece { op: sub, cols: all_cols }]);
        }
    }

    if dom.is_plain() && ran.is_plain() && dom.p().value() <= ran.p().value() {
        // block-diagonal components: ‖Tx‖_q ≤ (Σ ‖T_k‖^q ‖x_k‖_p^q)^{1/q} ≤ max‖T_k‖ ‖x‖_p for p ≤ q
        let comps = components(a);
        if comps.len() > 1 {
            return comps
                .into_iter()
                .map(|(rows, cols)| {
                    let d = SequenceSpace::new(cols.len(), dom.p()).ok()?;
                    let r = SequenceSpace::new(rows.len(), ran.p()).ok()?;
                    let op = OperatorPQ::new(a.select(&rows, &cols), d, r).ok()?;
                    Some(Piece { op, cols })
                })
                .collect();
        }
    }
    None
}

/// Connected components of the bipartite row/column support graph. Zero
/// rows and columns are dropped.
fn components(a: &Matrix) -> Vec<(Vec<usize>, Vec<usize>)> {
    let (r, c) = (a.rows(), a.cols());
    let mut parent: Vec<usize> = (0..r + c).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..r {
        for j in 0..c {
            if a.get(i, j) != 0.0 {
                let (x, y) = (find(&mut parent, i), find(&mut parent, r + j));
                parent[x] = y;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    for i in 0..r + c {
        let root = find(&mut parent, i);
        let idx = match groups.iter().position(|g| g.0 == root) {
            Some(k) => k,
            None => {
                groups.push((root, Vec::new(), Vec::new()));
                groups.len() - 1
            }
        };
        if i < r {
            groups[idx].1.push(i);
        } else {
            groups[idx].2.push(i - r);
        }
    }
    groups
        .into_iter()
        .filter(|g| !g.1.is_empty() && !g.2.is_empty())
        .map(|g| (g.1, g.2))
        .collect()
}

fn combine(pieces: Vec<Piece>, dim: usize, opts: &NormOptions) -> NormResult {
    let results: Vec<NormResult> = pieces.iter().map(|p| compute(&p.op, opts)).collect();
    let value = results.iter().map(|r| r.value).fold(0.0, f64::max);
    let mut witnesses = Vec::new();
    for (p, r) in pieces.iter().zip(&results) {
        if r.value >= value - opts.tol {
            witnesses.extend(r.witnesses.iter().map(|w| p.embed(w, dim)));
        }
    }
    NormResult {
        value,
        witnesses,
        method: NormMethod::Decomposed,
        grid_size: results.iter().map(|r| r.grid_size).max().unwrap_or(0),
        tol: opts.tol,
        lower_bound: results.iter().map(|r| r.lower_bound).fold(0.0, f64::max),
        upper_bound: results.iter().map(|r| r.upper_bound).fold(0.0, f64::max),
        certified: results.iter().all(|r| r.certified),
        evaluations: results.iter().map(|r| r.evaluations).sum(),
    }
}

/// Deduplicates, adds `−w` for each witness, and orders them: by angle in
/// the plane, lexicographically otherwise.
pub(crate) fn canonical_witnesses(ws: Vec<Vec<f64>>, space: &SequenceSpace) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = Vec::new();
    for w in ws {
        let neg: Vec<f64> = w.iter().map(|v| -v + 0.0).collect();
        let w: Vec<f64> = w.iter().map(|v| v + 0.0).collect();
        for cand in [w, neg] {
            if !all.iter().any(|o| close(o, &cand)) {
                all.push(cand);
            }
        }
    }
    let key = |x: &Vec<f64>| {
        if space.dim() == 2 {
            vec![x[1].atan2(x[0]).rem_euclid(std::f64::consts::TAU)]
        } else {
            x.iter().map(|v| -v).collect()
        }
    };
    all.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.iter()
            .zip(&kb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if all.len() > MAX_WITNESSES {
        let step = all.len() as f64 / MAX_WITNESSES as f64;
        all = (0..MAX_WITNESSES).map(|i| all[(i as f64 * step) as usize].clone()).collect();
    }
    all
}

/// Refined maxima on flat stretches can drift by ~1e-8 without changing
/// the value, so witnesses this close are treated as one.
fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-6)
}

/// Gradient of `x ↦ ‖Tx‖_q^q`: `Tᵀ (q sign(Tx) |Tx|^{q−1})`. For `q = 1`
/// this is the subgradient `Tᵀ sign(Tx)`; for `q = ∞` the subgradient of
/// `‖Tx‖_∞` is returned instead.
pub fn objective_grad(op: &OperatorPQ, x: &[f64]) -> Result<Vec<f64>> {
    let y = op.apply(x)?;
    if lp_norm(x, Exponent::Inf) == 0.0 {
        return Err(Error::param("x", "gradient requested at the origin"));
    }
    if !op.range().is_plain() {
        return Err(Error::Unsupported("objective gradient needs a plain range".into()));
    }
    match op.q() {
        Exponent::Finite(q) => {
            let g: Vec<f64> = y
                .iter()
                .map(|&v| if v == 0.0 { 0.0 } else { q * v.signum() * v.abs().powf(q - 1.0) })
                .collect();
            Ok(op.matrix().tr_mul_vec(&g))
        }
        Exponent::Inf => Ok(norm_subgradient(op, x).unwrap_or_else(|| vec![0.0; x.len()])),
    }
}
