//! Modulus of uniform convexity, the Kim–Lee functional check, and
//! Auerbach systems of planar norms.
//!
//! `δ(ε) = inf{1 − ‖(x + y)/2‖ : ‖x‖ = ‖y‖ = 1, ‖x − y‖ ≥ ε}`.
//!
//! In a plane, as `y` runs along the unit circle from `x` to `−x`, both
//! `‖x − y‖` and `1 − ‖(x + y)/2‖` are nondecreasing, so for each `x` the
//! infimum sits at the first `y` with `‖x − y‖ = ε`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::attainment::{sbpb_profile_with, ProfileOptions};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::operators::OperatorPQ;
use crate::search::{bisect_boundary, golden_max, golden_min};
use crate::spaces::{cos_sin_turns, sample_coords, Exponent, NormEvaluator, SequenceSpace};

const DELTA_GRID: usize = 2048;
const PAIR_SAMPLES: usize = 300;
const DET_GRID: usize = 1024;
/// `η` below this counts as vanishing in the Kim–Lee report.
pub const KIM_LEE_FLAT: f64 = 1e-3;
/// `η` above this counts as positive.
pub const KIM_LEE_POSITIVE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityModulus {
    pub space: Option<SequenceSpace>,
    pub epsilons: Vec<f64>,
    pub delta: Vec<f64>,
    /// Minimizing pair `(x, y)` for each `ε`.
    pub witnesses: Vec<(Vec<f64>, Vec<f64>)>,
}

impl ConvexityModulus {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,delta\n");
        for (e, d) in self.epsilons.iter().zip(&self.delta) {
            s.push_str(&format!("{e},{d}\n"));
        }
        s
    }
}

/// Closed form for `ℓ_p` with `p ≥ 2`: `1 − (1 − (ε/2)^p)^{1/p}`.
pub fn delta_closed_form(p: f64, eps: f64) -> f64 {
    1.0 - (1.0 - (eps / 2.0).powf(p)).powf(1.0 / p)
}

fn check_epsilons(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::Empty);
    }
    if eps.iter().any(|e| !(*e > 0.0 && *e <= 2.0)) {
        return Err(Error::param("epsilons", "must lie in (0, 2]"));
    }
    if eps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("epsilons", "must be strictly increasing"));
    }
    Ok(())
}

/// Unit point of a planar norm at `turns`, by radial rescaling.
fn planar_point(norm: &dyn NormEvaluator, turns: f64) -> [f64; 2] {
    match norm.space() {
        Some(s) => s.sphere_point_turns(turns),
        None => {
            let (c, s) = cos_sin_turns(turns);
            let n = norm.eval(&[c, s]);
            [c / n, s / n]
        }
    }
}

fn dist(norm: &dyn NormEvaluator, x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    norm.eval(&d)
}

fn gap(norm: &dyn NormEvaluator, x: &[f64], y: &[f64]) -> f64 {
    let m: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
    1.0 - norm.eval(&m)
}

/// Numerical `δ(ε)` for planar norms (exact reduction to one angle) and
/// three-dimensional ones (pairs of sampled points, each pushed onto the
/// constraint along the arc joining them).
pub fn delta_numeric(norm: &dyn NormEvaluator, epsilons: &[f64]) -> Result<ConvexityModulus> {
    check_epsilons(epsilons)?;
    let raw: Vec<(f64, Vec<f64>, Vec<f64>)> = match norm.dim() {
        2 => epsilons.iter().map(|&e| delta_planar(norm, e)).collect(),
        3 => {
            let pts = sphere_samples(norm, PAIR_SAMPLES, 0);
            epsilons.iter().map(|&e| delta_pairs(norm, &pts, e)).collect()
        }
        d => {
            return Err(Error::Unsupported(format!(
                "delta is computed for dimension 2 or 3, got {d}"
            )))
        }
    };
    let mut delta: Vec<f64> = raw.iter().map(|r| r.0.clamp(0.0, 1.0)).collect();
    let mut witnesses: Vec<(Vec<f64>, Vec<f64>)> = raw.into_iter().map(|r| (r.1, r.2)).collect();
    // δ is nondecreasing: a pair feasible at a larger ε is feasible earlier
    for i in (0..delta.len().saturating_sub(1)).rev() {
        if delta[i + 1] < delta[i] {
            delta[i] = delta[i + 1];
            witnesses[i] = witnesses[i + 1].clone();
        }
    }
    Ok(ConvexityModulus {
        space: norm.space().cloned(),
        epsilons: epsilons.to_vec(),
        delta,
        witnesses,
    })
}

fn delta_planar(norm: &dyn NormEvaluator, eps: f64) -> (f64, Vec<f64>, Vec<f64>) {
    // partner of x(u): first point counterclockwise at distance ε
    let pair = |u: f64| {
        let x = planar_point(norm, u);
        let t = bisect_boundary(|t| dist(norm, &x, &planar_point(norm, u + t)) >= eps, 0.5, 0.0, 60);
        let y = planar_point(norm, u + t);
        (gap(norm, &x, &y), x, y)
    };
    let du = 1.0 / DELTA_GRID as f64;
    let vals: Vec<f64> = (0..DELTA_GRID).map(|k| pair(k as f64 * du).0).collect();
    let mut k_best = 0;
    for (k, v) in vals.iter().enumerate() {
        if *v < vals[k_best] {
            k_best = k;
        }
    }
    let u0 = k_best as f64 * du;
    let (u, v) = golden_min(|u| pair(u).0, u0 - du, u0 + du, 1e-13);
    let u = if v < vals[k_best] - 1e-15 { u } else { u0 };
    let (g, x, y) = pair(u);
    (g, x.to_vec(), y.to_vec())
}

fn sphere_samples(norm: &dyn NormEvaluator, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = norm.dim();
    let mut pts = match norm.space() {
        Some(s) => sample_coords(s, count, seed),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .filter_map(|_| {
                    let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let r = norm.eval(&g);
                    (r > 0.0).then(|| g.iter().map(|v| v / r).collect())
                })
                .collect()
        }
    };
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let r = norm.eval(&e);
        let e: Vec<f64> = e.iter().map(|v| v / r).collect();
        pts.push(e.iter().map(|v| -v).collect());
        pts.push(e);
    }
    pts
}

fn delta_pairs(norm: &dyn NormEvaluator, pts: &[Vec<f64>], eps: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let along = |x: &[f64], y: &[f64], s: f64| -> Vec<f64> {
        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| (1.0 - s) * a + s * b).collect();
        let r = norm.eval(&z);
        z.iter().map(|v| v / r).collect()
    };
    let mut best = (f64::INFINITY, Vec::new(), Vec::new());
    for (i, x) in pts.iter().enumerate() {
        for y in &pts[i + 1..] {
            if dist(norm, x, y) < eps || norm.eval(&x.iter().zip(y).map(|(a, b)| a + b).collect::<Vec<_>>()) < 1e-12 {
                // antipodal pairs have no arc; their gap is 1
                if dist(norm, x, y) >= eps && best.0 > 1.0 {
                    best = (1.0, x.clone(), y.clone());
                }
                continue;
            }
            let s = bisect_boundary(|s| dist(norm, x, &along(x, y, s)) >= eps, 1.0, 0.0, 40);
            let z = along(x, y, s);
            let g = gap(norm, x, &z);
            if g < best.0 {
                best = (g, x.clone(), z);
            }
        }
    }
    best
}

/// Unit vectors `e₁, e₂` with functionals `y₁*, y₂*` (rows) such that
/// `‖e_i‖ = ‖y_i*‖ = 1` and `y_i*(e_j) = δ_ij`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuerbachSystem {
    pub vectors: Vec<Vec<f64>>,
    pub functionals: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SequenceSpace>,
}

impl AuerbachSystem {
    /// Coordinate vectors and functionals of a plain `ℓ_p^2`.
    pub fn canonical(space: &SequenceSpace) -> Result<Self> {
        if space.dim() != 2 || !space.is_plain() {
            return Err(Error::param("space", "needs a plain two-dimensional space"));
        }
        Ok(AuerbachSystem {
            vectors: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            functionals: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            space: Some(space.clone()),
        })
    }

    pub fn biorthogonality_residual(&self) -> f64 {
        let mut r = 0.0f64;
        for (i, y) in self.functionals.iter().enumerate() {
            for (j, e) in self.vectors.iter().enumerate() {
                let v: f64 = y.iter().zip(e).map(|(a, b)| a * b).sum();
                r = r.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        r
    }

    /// Largest of the biorthogonality, unit-vector and unit-functional residuals.
    pub fn residual(&self, norm: &dyn NormEvaluator) -> f64 {
        let unit = self
            .vectors
            .iter()
            .map(|e| (norm.eval(e) - 1.0).abs())
            .fold(0.0, f64::max);
        let dual = self
            .functionals
            .iter()
            .map(|y| (dual_norm_2d(norm, y) - 1.0).abs())
            .fold(0.0, f64::max);
        self.biorthogonality_residual().max(unit).max(dual)
    }
}

/// `sup_{‖x‖ = 1} |⟨w, x⟩|` for a planar norm.
pub fn dual_norm_2d(norm: &dyn NormEvaluator, w: &[f64]) -> f64 {
    if let Some(s) = norm.space() {
        return s.dual_norm(w);
    }
    maximize_on_circle(norm, |x| (w[0] * x[0] + w[1] * x[1]).abs(), DET_GRID).1
}

/// Grid search plus golden refinement of `f` on the planar unit sphere.
fn maximize_on_circle(norm: &dyn NormEvaluator, f: impl Fn(&[f64; 2]) -> f64, grid: usize) -> (f64, f64) {
    let du = 1.0 / grid as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..grid {
        let u = k as f64 * du;
        let v = f(&planar_point(norm, u));
        if v > best.1 {
            best = (u, v);
        }
    }
    let (u, v) = golden_max(|u| f(&planar_point(norm, u)), best.0 - du, best.0 + du, 1e-14);
    if v > best.1 {
        (u, v)
    } else {
        best
    }
}

fn check_planar_norm(norm: &dyn NormEvaluator) -> Result<()> {
    if norm.dim() != 2 {
        return Err(Error::param("norm", format!("needs dimension 2, got {}", norm.dim())));
    }
    let m = 720;
    let dirs: Vec<[f64; 2]> = (0..m)
        .map(|k| {
            let (c, s) = cos_sin_turns(k as f64 / m as f64);
            [c, s]
        })
        .collect();
    let mut unit = Vec::with_capacity(m);
    for d in &dirs {
        let r = norm.eval(d);
        if !(r > 1e-12 && r.is_finite()) {
            return Err(Error::DegenerateNorm(format!("value {r} on the ray through {d:?}")));
        }
        let r2 = norm.eval(&[2.0 * d[0], 2.0 * d[1]]);
        let rn = norm.eval(&[-d[0], -d[1]]);
        if (r2 - 2.0 * r).abs() > 1e-9 * r || (rn - r).abs() > 1e-9 * r {
            return Err(Error::DegenerateNorm(format!("not absolutely homogeneous along {d:?}")));
        }
        unit.push([d[0] / r, d[1] / r]);
    }
    let mut j = 1;
    while j <= m / 2 {
        for k in 0..m {
            let a = unit[k];
            let b = unit[(k + j) % m];
            if norm.eval(&[a[0] + b[0], a[1] + b[1]]) > 2.0 + 1e-9 {
                return Err(Error::DegenerateNorm("triangle inequality fails".into()));
            }
        }
        j *= 2;
    }
    Ok(())
}

fn det(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Auerbach system from a pair of unit vectors maximizing `|det(e₁, e₂)|`:
/// by maximality `y₁* = det(·, e₂)/det(e₁, e₂)` and `y₂* = det(e₁, ·)/det(e₁, e₂)`
/// have norm one.
pub fn auerbach_2d(norm: &dyn NormEvaluator) -> Result<AuerbachSystem> {
    check_planar_norm(norm)?;
    let g = DET_GRID;
    let du = 1.0 / g as f64;
    let pts: Vec<[f64; 2]> = (0..g).map(|k| planar_point(norm, k as f64 * du)).collect();
    // best partner of e(u): the envelope u ↦ max_v det(e(u), e(v)) is a
    // one-dimensional problem, unlike the narrow ridge of det in (u, v)
    let partner = |u: f64| {
        let e1 = planar_point(norm, u);
        let (k, _) = pts
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (k, x)| {
                let d = det(&e1, x);
                if d > b.1 + 1e-12 {
                    (k, d)
                } else {
                    b
                }
            });
        let v0 = k as f64 * du;
        let (v, d) = golden_max(|t| det(&e1, &planar_point(norm, t)), v0 - du, v0 + du, 1e-15);
        let dk = det(&e1, &pts[k]);
        if d > dk {
            (v, d)
        } else {
            (v0, dk)
        }
    };
    let (mut u, mut best) = (0.0, f64::NEG_INFINITY);
    for k in 0..g / 2 {
        let d = partner(k as f64 * du).1;
        if d > best + 1e-12 {
            best = d;
            u = k as f64 * du;
        }
    }
    let (un, dn) = golden_max(|t| partner(t).1, u - du, u + du, 1e-15);
    if dn > best + 1e-15 {
        u = un;
    }
    let v = partner(u).0;
    let e1 = planar_point(norm, u);
    let e2 = planar_point(norm, v);
    let d = det(&e1, &e2);
    if d <= 0.0 {
        return Err(Error::DegenerateNorm("no pair with positive determinant".into()));
    }
    let functionals = vec![
        vec![e2[1] / d, -e2[0] / d],
        vec![-e1[1] / d, e1[0] / d],
    ];
    Ok(AuerbachSystem {
        vectors: vec![e1.to_vec(), e2.to_vec()],
        functionals,
        space: norm.space().cloned(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KimLeeReport {
    pub space: SequenceSpace,
    pub epsilons: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// `δ(ε/2)` for each `ε`.
    pub delta_half: Vec<f64>,
    pub min_eta: Vec<f64>,
    /// Functional achieving `min_eta` for each `ε`.
    pub argmin: Vec<Vec<f64>>,
    /// Every sampled functional has `η(ε) > 0` wherever `δ(ε/2) > 0`.
    pub coherent: bool,
    /// Some functional has `η ≤ KIM_LEE_FLAT` at some `ε ≤ 1`.
    pub flat_witness: Option<FlatWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatWitness {
    pub epsilon: f64,
    pub functional: Vec<f64>,
    pub eta: f64,
}

impl KimLeeReport {
    pub fn all_positive(&self) -> bool {
        self.min_eta.iter().all(|&e| e > KIM_LEE_POSITIVE)
    }
}

fn functional_op(space: &SequenceSpace, w: &[f64]) -> Result<OperatorPQ> {
    let m = Matrix::from_rows(vec![w.to_vec()])?;
    OperatorPQ::new(m, space.clone(), SequenceSpace::new(1, Exponent::ONE)?)
}

fn eta_profile(space: &SequenceSpace, w: &[f64], eps: &[f64], opts: &ProfileOptions) -> Result<Vec<f64>> {
    let op = functional_op(space, w)?;
    Ok(sbpb_profile_with(&op, eps, opts)?.eta)
}

/// Samples unit functionals on `space`, computes `η(ε, x*)` for each and
/// reports the minimum per `ε`. In the plane the best sample is refined by
/// golden search along the dual sphere.
pub fn kim_lee_check(space: &SequenceSpace, epsilons: &[f64], functional_samples: usize, seed: u64) -> Result<KimLeeReport> {
    check_epsilons(epsilons)?;
    if !(2..=3).contains(&space.dim()) {
        return Err(Error::Unsupported(format!(
            "the functional sampler runs in dimension 2 or 3, got {}",
            space.dim()
        )));
    }
    let samples = functional_samples.max(4);
    let dual = space.dual();
    let opts = ProfileOptions {
        grid: 4000,
        samples: 64,
        seed,
        ..ProfileOptions::default()
    };
    let planar = space.dim() == 2;
    let half_turns: Vec<f64> = (0..samples).map(|k| k as f64 / (2 * samples) as f64).collect();
    let funcs: Vec<Vec<f64>> = if planar {
        half_turns.iter().map(|&u| dual.sphere_point_turns(u).to_vec()).collect()
    } else {
        sample_coords(&dual, samples, seed)
    };
    let halves: Vec<f64> = epsilons.iter().map(|e| e / 2.0).collect();
    let delta_half = delta_numeric(space, &halves)?.delta;
    let mut min_eta = vec![f64::INFINITY; epsilons.len()];
    let mut argmin = vec![Vec::new(); epsilons.len()];
    let mut arg_u = vec![0.0; epsilons.len()];
    let mut coherent = true;
    for (k, w) in funcs.iter().enumerate() {
        let eta = eta_profile(space, w, epsilons, &opts)?;
        for i in 0..epsilons.len() {
            if delta_half[i] > 1e-9 && eta[i] <= KIM_LEE_POSITIVE {
                coherent = false;
            }
            if eta[i] < min_eta[i] {
                min_eta[i] = eta[i];
                argmin[i] = w.clone();
                if planar {
                    arg_u[i] = half_turns[k];
                }
            }
        }
    }
    if planar {
        let du = 1.0 / (2 * samples) as f64;
        for i in 0..epsilons.len() {
            let eps = [epsilons[i]];
            let f = |u: f64| {
                let w = dual.sphere_point_turns(u);
                eta_profile(space, &w, &eps, &opts).map_or(f64::INFINITY, |e| e[0])
            };
            let (u, v) = golden_min(f, arg_u[i] - du, arg_u[i] + du, 1e-12);
            if v < min_eta[i] {
                if delta_half[i] > 1e-9 && v <= KIM_LEE_POSITIVE {
                    coherent = false;
                }
                min_eta[i] = v;
                argmin[i] = dual.sphere_point_turns(u).to_vec();
            }
        }
    }
    let flat_witness = (0..epsilons.len())
        .filter(|&i| epsilons[i] <= 1.0 && min_eta[i] <= KIM_LEE_FLAT)
        .min_by(|&a, &b| min_eta[a].total_cmp(&min_eta[b]))
        .map(|i| FlatWitness {
            epsilon: epsilons[i],
            functional: argmin[i].clone(),
            eta: min_eta[i],
        });
    Ok(KimLeeReport {
        space: space.clone(),
        epsilons: epsilons.to_vec(),
        samples,
        seed,
        delta_half,
        min_eta,
        argmin,
        coherent,
        flat_witness,
    })
}
