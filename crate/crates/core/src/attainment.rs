//! Norm-attaining sets, distances to them, and the strong BPB modulus
//!
//! `ρ(ε, T) = sup{‖Tx‖ : x ∈ S_X, dist(x, NA(T)) ≥ ε}`, `η(ε, T) = max(0, ‖T‖ − ρ(ε, T))`.
//!
//! `NA(T)` is stored as finitely many representatives, plus unit spheres of
//! subspaces when the attaining set is a whole linear sphere (e.g. `T = Id`
//! on `ℓ_2`). Arcs of attaining points on planar spheres are replaced by a
//! net with spacing `cluster_tol`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normcomp::{ascend, norm_subgradient, opnorm, start_points, sweep::circle_values};
use crate::operators::OperatorPQ;
use crate::search::{bisect_boundary, golden_max};
use crate::spaces::{lp_norm, sample_coords, Exponent, SequenceSpace, UnitVector};

pub const DEFAULT_VALUE_TOL: f64 = 1e-8;
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-3;
const NORM_TOL: f64 = 1e-10;
const GRID_2D: usize = 20_000;
const CONTINUUM_FRACTION: f64 = 0.25;
const SPAN_TOL: f64 = 0.05;

/// The unit sphere of `span(basis)`; `basis` is Euclidean-orthonormal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSphere {
    pub basis: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttainmentSet {
    pub points: Vec<Vec<f64>>,
    pub subspaces: Vec<SubspaceSphere>,
    pub value_tol: f64,
    pub cluster_tol: f64,
    pub continuum_flag: bool,
    /// `‖T‖` the set was computed against.
    pub norm: f64,
    pub space: SequenceSpace,
}

impl AttainmentSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.subspaces.is_empty()
    }

    pub fn unit_points(&self) -> Vec<UnitVector> {
        self.points
            .iter()
            .filter_map(|p| UnitVector::normalized(p, self.space.clone()).ok())
            .collect()
    }

    /// Distance from `x` to the set; `+∞` when empty.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let d_pts = self
            .points
            .iter()
            .map(|s| self.space.distance(x, s))
            .fold(f64::INFINITY, f64::min);
        self.subspaces
            .iter()
            .map(|s| subspace_distance(&self.space, s, x))
            .fold(d_pts, f64::min)
    }

    /// A direction in which the distance grows fastest, to first order.
    fn distance_gradient(&self, x: &[f64]) -> Vec<f64> {
        let nearest = self
            .points
            .iter()
            .map(|s| (self.space.distance(x, s), s))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let d_sub = self
            .subspaces
            .iter()
            .map(|s| subspace_distance(&self.space, s, x))
            .fold(f64::INFINITY, f64::min);
        match nearest {
            Some((d, s)) if d <= d_sub => {
                let z: Vec<f64> = x.iter().zip(s).map(|(a, b)| a - b).collect();
                self.space
                    .norm_subgradient(&z)
                    .unwrap_or_else(|| vec![0.0; x.len()])
            }
            _ => {
                let h = 1e-7;
                (0..x.len())
                    .map(|i| {
                        let mut a = x.to_vec();
                        let mut b = x.to_vec();
                        a[i] += h;
                        b[i] -= h;
                        (self.distance(&a) - self.distance(&b)) / (2.0 * h)
                    })
                    .collect()
            }
        }
    }
}

fn subspace_distance(space: &SequenceSpace, s: &SubspaceSphere, x: &[f64]) -> f64 {
    let n = x.len();
    let coords: Option<Vec<usize>> = s
        .basis
        .iter()
        .map(|b| {
            let nz: Vec<usize> = (0..n).filter(|&i| b[i] != 0.0).collect();
            (nz.len() == 1).then(|| nz[0])
        })
        .collect();
    if let (Some(cs), true) = (coords, space.is_plain()) {
        // min over the sphere of ℓ_p^S of ‖x_S − y‖ is |1 − ‖x_S‖|
        let xs: Vec<f64> = cs.iter().map(|&i| x[i]).collect();
        let rest: Vec<f64> = (0..n).filter(|i| !cs.contains(i)).map(|i| x[i]).collect();
        let gap = (1.0 - lp_norm(&xs, space.p())).abs();
        let tail = lp_norm(&rest, space.p());
        return lp_norm(&[tail, gap], space.p());
    }
    let px = project(s, x);
    if space.is_plain() && space.p() == Exponent::TWO {
        let r2: f64 = x.iter().zip(&px).map(|(a, b)| (a - b).powi(2)).sum();
        let pn = lp_norm(&px, Exponent::TWO);
        return (r2 + (1.0 - pn).powi(2)).sqrt();
    }
    numeric_subspace_distance(space, s, x, &px)
}

fn project(s: &SubspaceSphere, x: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; x.len()];
    for b in &s.basis {
        let c: f64 = b.iter().zip(x).map(|(u, v)| u * v).sum();
        for (pi, bi) in p.iter_mut().zip(b) {
            *pi += c * bi;
        }
    }
    p
}

fn numeric_subspace_distance(space: &SequenceSpace, s: &SubspaceSphere, x: &[f64], px: &[f64]) -> f64 {
    let k = s.basis.len();
    let combine = |c: &[f64]| -> Option<Vec<f64>> {
        let mut y = vec![0.0; x.len()];
        for (ci, b) in c.iter().zip(&s.basis) {
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi += ci * bi;
            }
        }
        space.normalize(&y)
    };
    let dist = |c: &[f64]| combine(c).map_or(f64::INFINITY, |y| space.distance(x, &y));
    let mut c: Vec<f64> = s
        .basis
        .iter()
        .map(|b| b.iter().zip(px).map(|(u, v)| u * v).sum())
        .collect();
    if c.iter().all(|v| *v == 0.0) {
        c[0] = 1.0;
    }
    let mut best = dist(&c);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..64 {
        let r: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let v = dist(&r);
        if v < best {
            best = v;
            c = r;
        }
    }
    let mut step = 0.5;
    while step > 1e-10 {
        let mut improved = false;
        for i in 0..k {
            for sgn in [1.0, -1.0] {
                let mut t = c.clone();
                t[i] += sgn * step;
                let v = dist(&t);
                if v < best {
                    best = v;
                    c = t;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

fn check_tol(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 0.1 {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} outside (0, 0.1]")))
    }
}

/// Approximates `NA(T)` within `value_tol` of `‖T‖`, merging points closer
/// than `cluster_tol` in the domain norm. Refuses when the norm could not be
/// certified.
pub fn na_set(op: &OperatorPQ, value_tol: f64, cluster_tol: f64) -> Result<AttainmentSet> {
    check_tol("value_tol", value_tol)?;
    check_tol("cluster_tol", cluster_tol)?;
    let nr = opnorm(op, NORM_TOL)?;
    if !nr.certified {
        return Err(Error::Uncertified);
    }
    let norm = nr.value;
    let dom = op.domain().clone();
    let mut set = AttainmentSet {
        points: Vec::new(),
        subspaces: Vec::new(),
        value_tol,
        cluster_tol,
        continuum_flag: false,
        norm,
        space: dom.clone(),
    };
    if norm == 0.0 {
        // every unit vector attains
        set.subspaces.push(SubspaceSphere {
            basis: euclidean_basis(dom.dim()),
        });
        set.continuum_flag = true;
        return Ok(set);
    }
    if dom.dim() == 1 {
        let e = dom.basis_vector(0);
        set.points = vec![e.clone(), e.iter().map(|v| -v).collect()];
        return Ok(set);
    }
    let (points, whole, fraction) = if dom.dim() == 2 {
        na_planar(op, norm, value_tol, cluster_tol)
    } else {
        let (pts, frac) = na_ascent(op, norm, value_tol, &nr.witnesses);
        (pts, false, frac)
    };
    let arcs = points.len();
    set.points = greedy_cluster(points, &dom, cluster_tol);
    set.continuum_flag = fraction > CONTINUUM_FRACTION || whole;
    if whole {
        set.subspaces.push(SubspaceSphere {
            basis: euclidean_basis(2),
        });
    } else if dom.dim() >= 3 {
        if let Some(s) = detect_subspace(op, &set) {
            set.points.retain(|x| subspace_distance(&dom, &s, x) >= cluster_tol);
            set.subspaces.push(s);
            set.continuum_flag = true;
        }
    } else if arcs > set.points.len() + 2 || set.points.len() > 8 {
        set.continuum_flag = true;
    }
    Ok(set)
}

fn euclidean_basis(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Keeps each point unless it lies within `tol` of one already kept.
fn greedy_cluster(points: Vec<(Vec<f64>, f64)>, space: &SequenceSpace, tol: f64) -> Vec<Vec<f64>> {
    let mut pts = points;
    pts.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for (x, _) in pts {
        if kept.iter().all(|k| space.distance(k, &x) >= tol) {
            kept.push(x);
        }
    }
    kept
}

/// Planar attaining set: refined local maxima, each widened to the arc on
/// which `‖Tx‖` stays within rounding of the norm. Returns the points, a flag
/// for "the whole circle attains", and the near-attaining grid fraction.
fn na_planar(
    op: &OperatorPQ,
    norm: f64,
    value_tol: f64,
    cluster_tol: f64,
) -> (Vec<(Vec<f64>, f64)>, bool, f64) {
    let dom = op.domain();
    let n = GRID_2D;
    let (_, fs) = circle_values(op, n);
    let near = fs.iter().filter(|&&v| v >= norm - value_tol).count();
    let fraction = near as f64 / n as f64;
    let tight = 1e-12 * norm.max(1.0);
    if fs.iter().all(|&v| v >= norm - tight) {
        return (Vec::new(), true, fraction);
    }
    let du = 1.0 / n as f64;
    let point = |u: f64| dom.sphere_point_turns(u);
    let f = |u: f64| op.image_norm(&point(u));
    let g = |k: isize| fs[k.rem_euclid(n as isize) as usize];
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut covered: Vec<(f64, f64)> = Vec::new();
    for k in 0..n as isize {
        let (l, c, r) = (g(k - 1), g(k), g(k + 1));
        if !(c >= l && c >= r && (c > l || c > r)) {
            continue;
        }
        let u0 = k as f64 * du;
        let (u, v) = golden_max(f, u0 - du, u0 + du, 1e-13);
        if v < norm - value_tol {
            continue;
        }
        if covered.iter().any(|&(a, b)| in_arc(u, a, b)) {
            continue;
        }
        // widen to the arc where the value stays within `tight`
        let thr = v.min(norm) - tight;
        let reach = |dir: f64| {
            let mut s = 0.0;
            while s < 0.5 && f(u + dir * (s + du)) >= thr {
                s += du;
            }
            s + bisect_boundary(|t| f(u + dir * (s + t)) >= thr, 0.0, du, 50)
        };
        let (lo, hi) = (u - reach(-1.0), u + reach(1.0));
        covered.push((lo, hi));
        if dom.distance(&point(lo), &point(hi)) < cluster_tol {
            out.push((point(u).to_vec(), v));
            continue;
        }
        // net along the arc, endpoints included
        let mut last = point(lo);
        out.push((last.to_vec(), f(lo)));
        let steps = ((hi - lo) / (du * 1e-2)).ceil().max(1.0) as usize;
        for i in 1..=steps {
            let t = lo + (hi - lo) * i as f64 / steps as f64;
            let x = point(t);
            if dom.distance(&x, &last) >= cluster_tol || i == steps {
                out.push((x.to_vec(), f(t)));
                last = x;
            }
        }
    }
    (out, false, fraction)
}

fn in_arc(u: f64, a: f64, b: f64) -> bool {
    let w = (u - a).rem_euclid(1.0);
    w <= (b - a) + 1e-15
}

/// Attaining points from multistart ascent; also returns the fraction of
/// raw samples that already attain within `value_tol`.
fn na_ascent(op: &OperatorPQ, norm: f64, value_tol: f64, witnesses: &[Vec<f64>]) -> (Vec<(Vec<f64>, f64)>, f64) {
    let dom = op.domain();
    let samples = sample_coords(dom, 512, 1);
    let near = samples
        .iter()
        .filter(|x| op.image_norm(x) >= norm - value_tol)
        .count();
    let fraction = near as f64 / samples.len() as f64;
    let mut evals = 0;
    let mut out: Vec<(Vec<f64>, f64)> = witnesses
        .iter()
        .map(|w| (w.clone(), op.image_norm(w)))
        .filter(|(_, v)| *v >= norm - value_tol)
        .collect();
    for s in start_points(op, 256, 2) {
        let (x, v) = ascend(op, &s, &mut evals);
        if v >= norm - value_tol {
            out.push((x, v));
        }
    }
    (out, fraction)
}

/// Gram-Schmidt basis of the span of `vs`, dropping dependent vectors.
fn orthonormal_basis(vs: &[Vec<f64>], drop_below: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n = lp_norm(&w, Exponent::TWO);
        if n > drop_below {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Whether the whole unit sphere of the representatives' span attains.
fn detect_subspace(op: &OperatorPQ, set: &AttainmentSet) -> Option<SubspaceSphere> {
    if set.points.len() <= 2 {
        return None;
    }
    // near-attaining representatives may sit well off the sphere where the
    // value is flat, so the span is taken loosely and verified below
    let basis = orthonormal_basis(&set.points, SPAN_TOL);
    if basis.len() < 2 {
        return None;
    }
    let dom = op.domain();
    let thr = set.norm - set.value_tol;
    let support: Vec<usize> = (0..dom.dim())
        .filter(|&i| basis.iter().any(|b| b[i].abs() > SPAN_TOL))
        .collect();
    let basis = if support.len() == basis.len() {
        // representatives come from ascent; snap to the exact coordinate sphere
        support
            .iter()
            .map(|&i| {
                let mut e = vec![0.0; dom.dim()];
                e[i] = 1.0;
                e
            })
            .collect()
    } else {
        basis
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let probes: Vec<Vec<f64>> = (0..64)
        .map(|_| {
            let c: Vec<f64> = (0..basis.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut y = vec![0.0; dom.dim()];
            for (ci, b) in c.iter().zip(&basis) {
                for (yi, bi) in y.iter_mut().zip(b) {
                    *yi += ci * bi;
                }
            }
            y
        })
        .collect();
    let attains = probes
        .iter()
        .filter_map(|y| dom.normalize(y))
        .all(|y| op.image_norm(&y) >= thr);
    attains.then_some(SubspaceSphere { basis })
}

/// `min ‖x − s‖` over the attaining set; `+∞` for the empty set.
pub fn dist_to_set(x: &UnitVector, s: &AttainmentSet) -> Result<f64> {
    if x.space().dim() != s.space.dim() || x.space().p() != s.space.p() || x.space().shape() != s.space.shape() {
        return Err(Error::SpaceMismatch(format!(
            "point lives in {}, set in {}",
            x.space(),
            s.space
        )));
    }
    Ok(s.distance(x.coords()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileOptions {
    pub value_tol: f64,
    pub cluster_tol: f64,
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            value_tol: DEFAULT_VALUE_TOL,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            grid: GRID_2D,
            samples: 256,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbpbProfile {
    pub epsilons: Vec<f64>,
    pub rho: Vec<f64>,
    pub eta: Vec<f64>,
    pub na_empty: bool,
    pub norm: f64,
    /// Constrained maximizers behind each `ρ`, `None` when nothing is feasible.
    pub maximizers: Vec<Option<Vec<f64>>>,
    /// Set for the planar grid path; the ascent path in higher dimension is heuristic.
    pub certified: bool,
    pub na_points: usize,
    pub na_continuum: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl SbpbProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,rho,eta\n");
        for i in 0..self.epsilons.len() {
            s.push_str(&format!("{},{},{}\n", self.epsilons[i], self.rho[i], self.eta[i]));
        }
        s
    }

    pub fn eta_at(&self, eps: f64) -> Option<f64> {
        self.epsilons
            .iter()
            .position(|&e| e == eps)
            .map(|i| self.eta[i])
    }
}

/// 32 log-spaced values in `[1e-3, 2^{1/p}·1.05]`, with `p` the smallest
/// exponent in the domain norm.
pub fn default_epsilons(space: &SequenceSpace) -> Vec<f64> {
    let p_min = match space.shape() {
        crate::spaces::NormShape::Blocked { outer, .. } => space.p().value().min(outer.value()),
        _ => space.p().value(),
    };
    let hi = 2f64.powf(1.0 / p_min) * 1.05;
    let (a, b) = (1e-3f64.ln(), hi.ln());
    (0..32).map(|i| (a + (b - a) * i as f64 / 31.0).exp()).collect()
}

fn check_epsilons(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::Empty);
    }
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::param("epsilons", "must be positive and finite"));
    }
    if eps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("epsilons", "must be strictly increasing"));
    }
    Ok(())
}

/// `ρ` and `η` on the given grid of `ε`, with default options.
pub fn sbpb_profile(op: &OperatorPQ, epsilons: &[f64]) -> Result<SbpbProfile> {
    sbpb_profile_with(op, epsilons, &ProfileOptions::default())
}

pub fn sbpb_profile_with(op: &OperatorPQ, epsilons: &[f64], opts: &ProfileOptions) -> Result<SbpbProfile> {
    check_epsilons(epsilons)?;
    let na = na_set(op, opts.value_tol, opts.cluster_tol)?;
    profile_for_set(op, &na, epsilons, opts)
}

/// Profile against a precomputed attaining set.
pub fn profile_for_set(
    op: &OperatorPQ,
    na: &AttainmentSet,
    epsilons: &[f64],
    opts: &ProfileOptions,
) -> Result<SbpbProfile> {
    check_epsilons(epsilons)?;
    let norm = na.norm;
    let m = epsilons.len();
    let mut prof = SbpbProfile {
        epsilons: epsilons.to_vec(),
        rho: vec![norm; m],
        eta: vec![0.0; m],
        na_empty: na.is_empty(),
        norm,
        maximizers: vec![None; m],
        certified: op.domain().dim() <= 2,
        na_points: na.points.len(),
        na_continuum: na.continuum_flag,
        diagnostics: Vec::new(),
    };
    if prof.na_empty {
        prof.diagnostics
            .push("attaining set is empty; eta set to 0 by convention".into());
        return Ok(prof);
    }
    let raw: Vec<Option<(Vec<f64>, f64)>> = if op.domain().dim() == 2 {
        constrained_planar(op, na, epsilons, opts.grid)
    } else if op.domain().dim() == 1 {
        let e = op.domain().basis_vector(0);
        epsilons
            .iter()
            .map(|&eps| (na.distance(&e) >= eps).then(|| (e.clone(), op.image_norm(&e))))
            .collect()
    } else {
        let solver = AscentSolver::new(op, na, opts.samples, opts.seed);
        epsilons.iter().map(|&eps| solver.solve(eps)).collect()
    };
    // feasible sets shrink as ε grows, so a later maximizer is feasible earlier
    let mut best: Option<(Vec<f64>, f64)> = None;
    for i in (0..m).rev() {
        if let Some((x, v)) = &raw[i] {
            if best.as_ref().is_none_or(|b| *v > b.1) {
                best = Some((x.clone(), *v));
            }
        }
        match &best {
            Some((x, v)) => {
                prof.rho[i] = *v;
                prof.maximizers[i] = Some(x.clone());
            }
            None => prof.rho[i] = 0.0,
        }
        prof.eta[i] = (norm - prof.rho[i]).max(0.0);
    }
    Ok(prof)
}

fn constrained_planar(
    op: &OperatorPQ,
    na: &AttainmentSet,
    epsilons: &[f64],
    grid: usize,
) -> Vec<Option<(Vec<f64>, f64)>> {
    let dom = op.domain();
    let n = grid.max(1000);
    let (xs, fs) = circle_values(op, n);
    let ds: Vec<f64> = xs.iter().map(|x| na.distance(x)).collect();
    let du = 1.0 / n as f64;
    let point = |u: f64| dom.sphere_point_turns(u);
    let val = |u: f64| op.image_norm(&point(u));
    let dist = |u: f64| na.distance(&point(u));
    epsilons
        .iter()
        .map(|&eps| {
            let feas = |k: usize| ds[k] >= eps;
            let mut best: Option<(f64, f64)> = None;
            let mut offer = |u: f64, v: f64| {
                if best.is_none_or(|b| v > b.1) {
                    best = Some((u, v));
                }
            };
            for k in 0..n {
                if !feas(k) {
                    continue;
                }
                let u0 = k as f64 * du;
                offer(u0, fs[k]);
                let (l, r) = ((k + n - 1) % n, (k + 1) % n);
                let fl = if feas(l) { fs[l] } else { f64::NEG_INFINITY };
                let fr = if feas(r) { fs[r] } else { f64::NEG_INFINITY };
                if fs[k] >= fl && fs[k] >= fr {
                    let (u, v) = golden_max(
                        |u| if dist(u) >= eps { val(u) } else { f64::NEG_INFINITY },
                        u0 - du,
                        u0 + du,
                        1e-13,
                    );
                    if v.is_finite() {
                        offer(u, v);
                    }
                }
                for (nb, dir) in [(l, -1.0), (r, 1.0)] {
                    if !feas(nb) {
                        let t = bisect_boundary(|t| dist(u0 + dir * t) >= eps, 0.0, du, 60);
                        let u = u0 + dir * t;
                        if dist(u) >= eps {
                            offer(u, val(u));
                        }
                    }
                }
            }
            best.map(|(u, v)| (point(u).to_vec(), v))
        })
        .collect()
}

/// Feasible-direction ascent for `max ‖Tx‖` subject to `dist(x, NA) ≥ ε`.
struct AscentSolver<'a> {
    op: &'a OperatorPQ,
    na: &'a AttainmentSet,
    samples: Vec<(Vec<f64>, f64, f64)>,
}

const TOP_STARTS: usize = 12;
const ASCENT_STEPS: usize = 150;
const COMPASS_STEPS: usize = 400;

impl<'a> AscentSolver<'a> {
    fn new(op: &'a OperatorPQ, na: &'a AttainmentSet, samples: usize, seed: u64) -> Self {
        let samples = start_points(op, samples.max(64), seed)
            .into_iter()
            .map(|x| {
                let v = op.image_norm(&x);
                let d = na.distance(&x);
                (x, v, d)
            })
            .collect();
        AscentSolver { op, na, samples }
    }

    fn solve(&self, eps: f64) -> Option<(Vec<f64>, f64)> {
        let dim = self.op.domain().dim();
        let mut feasible: Vec<&(Vec<f64>, f64, f64)> = self.samples.iter().filter(|s| s.2 >= eps).collect();
        if feasible.is_empty() {
            return None;
        }
        feasible.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut starts: Vec<&Vec<f64>> = feasible.iter().take(TOP_STARTS).map(|s| &s.0).collect();
        // basis vectors sit at the end of the sample list
        let basis_from = self.samples.len() - 2 * dim;
        for s in &self.samples[basis_from..] {
            if s.2 >= eps && !starts.contains(&&s.0) {
                starts.push(&s.0);
            }
        }
        let mut best = starts
            .into_iter()
            .map(|x| self.climb(x, eps))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        for _ in 0..3 {
            let mut r = self.compass(best.clone(), eps);
            if let Some(q) = self.plane_refine(&r.0, eps) {
                if q.1 > r.1 {
                    r = q;
                }
            }
            if r.1 <= best.1 + 1e-15 {
                break;
            }
            best = r;
        }
        Some(best)
    }

    /// Coordinate pattern search; infeasible trial points are pushed back
    /// along the distance gradient.
    fn compass(&self, start: (Vec<f64>, f64), eps: f64) -> (Vec<f64>, f64) {
        let op = self.op;
        let dom = op.domain();
        let n = dom.dim();
        let feasible = |x: &[f64]| self.na.distance(x) >= eps;
        let along = |x: &[f64], v: &[f64], t: f64| {
            let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + t * b).collect();
            dom.normalize(&y)
        };
        let (mut x, mut fx) = start;
        let mut step = 0.1;
        let mut iters = 0;
        while step > 1e-10 && iters < COMPASS_STEPS {
            iters += 1;
            let mut moved = false;
            for i in 0..2 * n {
                let mut d = vec![0.0; n];
                d[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
                let Some(y) = along(&x, &d, step) else { continue };
                let y = if feasible(&y) {
                    y
                } else {
                    let h = unit_max(&self.na.distance_gradient(&y));
                    if h.is_empty() {
                        continue;
                    }
                    let pushed = |s: f64| along(&y, &h, s).filter(|z| feasible(z));
                    if pushed(2.0 * step).is_none() {
                        continue;
                    }
                    let s = bisect_boundary(|s| pushed(s).is_some(), 2.0 * step, 0.0, 30);
                    match pushed(s) {
                        Some(z) => z,
                        None => continue,
                    }
                };
                let v = op.image_norm(&y);
                if v > fx + 1e-15 {
                    x = y;
                    fx = v;
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (x, fx)
    }

    /// Constrained maximum on the great circle through `x` and its nearest
    /// attaining point, where the constrained optimum often lies.
    fn plane_refine(&self, x: &[f64], eps: f64) -> Option<(Vec<f64>, f64)> {
        let dom = self.op.domain();
        let s = self.nearest_attaining(x)?;
        let xa: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a: Vec<f64> = x.iter().map(|v| v / xa).collect();
        let c: f64 = s.iter().zip(&a).map(|(u, v)| u * v).sum();
        let b: Vec<f64> = s.iter().zip(&a).map(|(u, v)| u - c * v).collect();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if bn < 1e-9 {
            return None;
        }
        let point = |u: f64| {
            let (cu, su) = crate::spaces::cos_sin_turns(u);
            let y: Vec<f64> = a.iter().zip(&b).map(|(p, q)| cu * p + su * q / bn).collect();
            dom.normalize(&y)
        };
        let val = |u: f64| point(u).map_or(f64::NEG_INFINITY, |y| self.op.image_norm(&y));
        let feas = |u: f64| point(u).is_some_and(|y| self.na.distance(&y) >= eps);
        let n = 720;
        let du = 1.0 / n as f64;
        let mut best: Option<(f64, f64)> = None;
        let mut offer = |u: f64, v: f64| {
            if best.is_none_or(|b| v > b.1) {
                best = Some((u, v));
            }
        };
        let ok: Vec<bool> = (0..n).map(|k| feas(k as f64 * du)).collect();
        for k in 0..n {
            if !ok[k] {
                continue;
            }
            let u0 = k as f64 * du;
            offer(u0, val(u0));
            let (u, v) = golden_max(
                |u| if feas(u) { val(u) } else { f64::NEG_INFINITY },
                u0 - du,
                u0 + du,
                1e-13,
            );
            if v.is_finite() {
                offer(u, v);
            }
            for (nb, dir) in [((k + n - 1) % n, -1.0), ((k + 1) % n, 1.0)] {
                if !ok[nb] {
                    let t = bisect_boundary(|t| feas(u0 + dir * t), 0.0, du, 60);
                    offer(u0 + dir * t, val(u0 + dir * t));
                }
            }
        }
        let (u, v) = best?;
        point(u).map(|y| (y, v))
    }

    fn nearest_attaining(&self, x: &[f64]) -> Option<Vec<f64>> {
        let dom = self.op.domain();
        let by_point = self
            .na
            .points
            .iter()
            .map(|s| (dom.distance(x, s), s.clone()))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let by_sub = self
            .na
            .subspaces
            .iter()
            .filter_map(|s| {
                let px = dom.normalize(&project(s, x))?;
                Some((dom.distance(x, &px), px))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0));
        match (by_point, by_sub) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a.1 } else { b.1 }),
            (a, b) => a.or(b).map(|v| v.1),
        }
    }

    fn climb(&self, start: &[f64], eps: f64) -> (Vec<f64>, f64) {
        let op = self.op;
        let dom = op.domain();
        let feasible = |x: &[f64]| self.na.distance(x) >= eps;
        let along = |x: &[f64], v: &[f64], t: f64| {
            let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + t * b).collect();
            dom.normalize(&y)
        };
        let mut x = start.to_vec();
        let mut fx = op.image_norm(&x);
        let mut step = 0.25;
        for _ in 0..ASCENT_STEPS {
            let Some(g) = norm_subgradient(op, &x) else { break };
            let g = unit_max(&g);
            if g.is_empty() {
                break;
            }
            let mut cands: Vec<Vec<f64>> = Vec::new();
            match along(&x, &g, step) {
                Some(y) if feasible(&y) => cands.push(y),
                _ => {
                    let t = bisect_boundary(|t| along(&x, &g, t).is_some_and(|y| feasible(&y)), 0.0, step, 30);
                    if let Some(y) = along(&x, &g, t) {
                        cands.push(y);
                    }
                    // slide along the constraint boundary
                    let h = self.na.distance_gradient(&x);
                    let hh: f64 = h.iter().map(|v| v * v).sum();
                    let gh: f64 = g.iter().zip(&h).map(|(a, b)| a * b).sum();
                    if hh > 0.0 && gh < 0.0 {
                        let v: Vec<f64> = g.iter().zip(&h).map(|(a, b)| a - gh / hh * b).collect();
                        let v = unit_max(&v);
                        if let Some(y) = (!v.is_empty()).then(|| along(&x, &v, step)).flatten() {
                            if feasible(&y) {
                                cands.push(y);
                            } else {
                                let hu = unit_max(&h);
                                let pushed = |s: f64| along(&y, &hu, s).filter(|z| feasible(z));
                                if pushed(step).is_some() {
                                    let s = bisect_boundary(|s| pushed(s).is_some(), step, 0.0, 30);
                                    if let Some(z) = pushed(s) {
                                        cands.push(z);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let best = cands
                .into_iter()
                .filter(|y| feasible(y))
                .map(|y| {
                    let v = op.image_norm(&y);
                    (y, v)
                })
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((y, v)) if v > fx + 1e-15 => {
                    x = y;
                    fx = v;
                    step = (step * 1.5).min(0.5);
                }
                _ => {
                    step *= 0.5;
                    if step < 1e-9 {
                        break;
                    }
                }
            }
        }
        (x, fx)
    }
}

fn unit_max(v: &[f64]) -> Vec<f64> {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        Vec::new()
    } else {
        v.iter().map(|x| x / m).collect()
    }
}

/// A unit `x₀` with `‖Tx₀‖ > ‖T‖ − η` and `dist(x₀, NA) ≥ ε`, if one is found.
/// The sign is fixed so the first nonzero coordinate is positive.
pub fn sbpb_witness(op: &OperatorPQ, eps: f64, eta: f64) -> Result<Option<UnitVector>> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::param("eps", format!("{eps} must be positive")));
    }
    if eta <= 0.0 {
        return Ok(None);
    }
    let prof = sbpb_profile(op, &[eps])?;
    if prof.na_empty || prof.eta[0] >= eta {
        return Ok(None);
    }
    let Some(x) = prof.maximizers[0].clone() else {
        return Ok(None);
    };
    let sign = x.iter().find(|v| **v != 0.0).map_or(1.0, |v| v.signum());
    let x: Vec<f64> = x.iter().map(|v| sign * v + 0.0).collect();
    UnitVector::normalized(&x, op.domain().clone()).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::operators::{make_diag_beta, make_lplq_fail, make_rot_lq};
    use approx::assert_relative_eq;

    #[test]
    fn diag_into_linf_attains_at_e2() {
        let t = make_diag_beta(0.5, Exponent::TWO, Exponent::Inf).unwrap();
        let na = na_set(&t, 1e-8, 1e-3).unwrap();
        assert_eq!(na.points.len(), 2);
        for p in &na.points {
            assert!(p[0].abs() <= 1e-6 && (p[1].abs() - 1.0).abs() <= 1e-9);
        }
        assert!(!na.continuum_flag);
    }

    #[test]
    fn rot_lq_attains_at_four_axes() {
        let t = make_rot_lq(1.0, Exponent::Finite(1.5)).unwrap();
        let na = na_set(&t, 1e-8, 1e-3).unwrap();
        assert_eq!(na.points.len(), 4);
    }

    #[test]
    fn identity_is_a_continuum() {
        let t = OperatorPQ::from_plain(Matrix::identity(2), Exponent::TWO, Exponent::TWO).unwrap();
        let na = na_set(&t, 1e-8, 1e-3).unwrap();
        assert!(na.continuum_flag);
        let x = UnitVector::normalized(&[0.3, -0.7], t.domain().clone()).unwrap();
        assert!(dist_to_set(&x, &na).unwrap() <= 1e-12);
    }

    #[test]
    fn distances_to_axis_pair() {
        let t = make_diag_beta(0.5, Exponent::Finite(1.5), Exponent::Finite(3.0)).unwrap();
        let na = na_set(&t, 1e-8, 1e-3).unwrap();
        let e1 = UnitVector::new(vec![1.0, 0.0], t.domain().clone()).unwrap();
        assert_relative_eq!(dist_to_set(&e1, &na).unwrap(), 2f64.powf(1.0 / 1.5), epsilon = 1e-6);
        let e2 = UnitVector::new(na.points[0].clone(), t.domain().clone()).unwrap();
        assert_eq!(dist_to_set(&e2, &na).unwrap(), 0.0);
        let other = UnitVector::new(vec![1.0, 0.0], SequenceSpace::new(2, Exponent::TWO).unwrap()).unwrap();
        assert!(matches!(dist_to_set(&other, &na), Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn empty_set_distance_is_infinite() {
        let space = SequenceSpace::new(2, Exponent::TWO).unwrap();
        let s = AttainmentSet {
            points: vec![],
            subspaces: vec![],
            value_tol: 1e-8,
            cluster_tol: 1e-3,
            continuum_flag: false,
            norm: 1.0,
            space: space.clone(),
        };
        let x = UnitVector::new(vec![1.0, 0.0], space).unwrap();
        assert_eq!(dist_to_set(&x, &s).unwrap(), f64::INFINITY);
    }

    #[test]
    fn profile_examples() {
        let t = make_diag_beta(0.9, Exponent::TWO, Exponent::Inf).unwrap();
        let p = sbpb_profile(&t, &[1.0, 3.0]).unwrap();
        assert!(p.eta[0] <= 0.1 + 1e-12);
        assert!(p.rho[0] >= 0.9);
        assert_eq!(p.rho[1], 0.0);
        assert_eq!(p.eta[1], 1.0);
    }

    #[test]
    fn profile_rejects_unsorted_eps() {
        let t = make_diag_beta(0.9, Exponent::TWO, Exponent::Inf).unwrap();
        assert!(sbpb_profile(&t, &[0.5, 0.1]).is_err());
        assert!(sbpb_profile(&t, &[]).is_err());
    }

    #[test]
    fn witness_examples() {
        let eta = 0.1;
        let t = make_diag_beta(1.0 - eta / 2.0, Exponent::TWO, Exponent::Inf).unwrap();
        let w = sbpb_witness(&t, 1.0, eta).unwrap().unwrap();
        assert!((w.coords()[0] - 1.0).abs() < 1e-9 && w.coords()[1].abs() < 1e-9);
        assert!(sbpb_witness(&t, 1.0, 0.0).unwrap().is_none());
        let t = make_diag_beta(0.5, Exponent::Finite(3.0), Exponent::TWO).unwrap();
        assert!(sbpb_witness(&t, 0.5, 1e-3).unwrap().is_none());
    }

    #[test]
    fn lplq_subspace_and_eta() {
        let t = make_lplq_fail(Exponent::TWO, Exponent::TWO, 3).unwrap();
        let na = na_set(&t, 1e-8, 1e-3).unwrap();
        assert_eq!(na.subspaces.len(), 1);
        assert_eq!(na.subspaces[0].basis.len(), 3);
        let p = sbpb_profile(&t, &[0.9]).unwrap();
        let a: f64 = 1.0 - 1.0 / 6.0;
        let s: f64 = 1.0 - 0.81 / 2.0;
        let exact = 1.0 - (a * a * (1.0 - s * s) + s * s).sqrt();
        assert!((p.eta[0] - exact).abs() <= 1e-3, "{} vs {exact}", p.eta[0]);
    }
}
