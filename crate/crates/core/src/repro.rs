//! One harness per gallery construction: build the operator, compute its
//! norm, attaining set and profile, and check each claim made about it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::attainment::{na_set, sbpb_profile, AttainmentSet, DEFAULT_CLUSTER_TOL, DEFAULT_VALUE_TOL};
use crate::convexity::{auerbach_2d, delta_numeric, kim_lee_check, ConvexityModulus, KimLeeReport};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::normcomp::{opnorm, opnorm_oracle, reduce, NormResult};
use crate::operators::{
    block_basis, block_dim, GalleryId, GalleryParams, GalleryTag, OperatorPQ,
};
use crate::spaces::{Exponent, SequenceSpace};

pub const DEFAULT_TOL: f64 = 1e-6;
const DIST_TOL: f64 = 1e-4;
const BLOCK_TOL: f64 = 1e-3;
const ORACLE_GRID: usize = 100_000;
const ORACLE_TOL: f64 = 1e-3;
const PROFILE_EPS: f64 = 0.9;
pub const POSITIVE_BATCH: usize = 50;
pub const POSITIVE_EPS: f64 = 0.25;
pub const POSITIVE_FLOOR: f64 = 1e-6;
pub const CERTIFICATE_ETAS: [f64; 3] = [0.5, 0.1, 0.01];

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Stated in the construction's claim.
    Stated,
    /// Worked out from the construction.
    Derived,
    /// Immediate from the definitions.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Eq,
    Ge,
    Gt,
    Le,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub expected: f64,
    pub computed: f64,
    pub tol: f64,
    pub pass: bool,
    pub basis: Basis,
    /// Recorded but left out of `overall`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub advisory: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, relation: Relation, expected: f64, computed: f64, tol: f64, basis: Basis) -> Self {
        let pass = match relation {
            Relation::Eq => (computed - expected).abs() <= tol,
            Relation::Ge => computed >= expected - tol,
            Relation::Gt => computed > expected,
            Relation::Le => computed <= expected + tol,
        } && computed.is_finite() == expected.is_finite();
        Check {
            name: name.into(),
            relation,
            expected,
            computed,
            tol,
            pass,
            basis,
            advisory: false,
        }
    }

    fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }

    /// How far the computed value is from satisfying the relation exactly.
    pub fn residual(&self) -> f64 {
        match self.relation {
            Relation::Eq => (self.computed - self.expected).abs(),
            Relation::Ge | Relation::Gt => (self.expected - self.computed).max(0.0),
            Relation::Le => (self.computed - self.expected).max(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproReport {
    pub prop_id: GalleryTag,
    pub params: GalleryParams,
    pub label: String,
    pub checks: Vec<Check>,
    pub overall: bool,
    pub runtime_ms: u64,
    pub seed: u64,
}

impl ReproReport {
    fn finish(id: &GalleryId, label: String, checks: Vec<Check>, start: Instant, seed: u64) -> Self {
        let overall = checks.iter().filter(|c| !c.advisory).all(|c| c.pass);
        ReproReport {
            prop_id: id.tag,
            params: id.params.clone(),
            label,
            checks,
            overall,
            runtime_ms: start.elapsed().as_millis() as u64,
            seed,
        }
    }

    pub fn worst_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| !c.advisory)
            .map(Check::residual)
            .fold(0.0, f64::max)
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass && !c.advisory).collect()
    }
}

/// Oracle value, taken blockwise when the domain is too large for a grid.
pub fn oracle_value(op: &OperatorPQ) -> Result<f64> {
    if op.domain().dim() <= 3 {
        return Ok(opnorm_oracle(op, ORACLE_GRID)?.value);
    }
    let pieces = reduce(op).ok_or_else(|| {
        Error::Unsupported(format!("no oracle for an irreducible operator on {}", op.domain()))
    })?;
    pieces
        .iter()
        .map(|p| oracle_value(&p.op))
        .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
}

/// Symmetric distance between a finite attaining set and a claimed one.
fn hausdorff(space: &SequenceSpace, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one_way = |s: &[Vec<f64>], t: &[Vec<f64>]| {
        s.iter()
            .map(|x| t.iter().map(|y| space.distance(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

fn pm(v: Vec<f64>) -> [Vec<f64>; 2] {
    let neg = v.iter().map(|x| -x).collect();
    [v, neg]
}

fn axis(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

struct Harness<'a> {
    op: &'a OperatorPQ,
    checks: Vec<Check>,
}

impl<'a> Harness<'a> {
    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn norm(&mut self, tol: f64) -> Result<NormResult> {
        let r = opnorm(self.op, 1e-10)?;
        self.push(Check::new("opnorm", Relation::Eq, 1.0, r.value, tol, Basis::Stated));
        let o = oracle_value(self.op)?;
        self.push(Check::new("oracle agreement", Relation::Eq, r.value, o, ORACLE_TOL, Basis::Derived));
        Ok(r)
    }

    fn image(&mut self, name: String, x: &[f64], expected: f64, tol: f64) {
        let v = self.op.image_norm(x);
        self.push(Check::new(name, Relation::Eq, expected, v, tol, Basis::Stated));
    }

    fn claimed_set(&mut self, na: &AttainmentSet, claimed: &[Vec<f64>], tol: f64) {
        self.push(Check::new(
            "attaining clusters",
            Relation::Eq,
            claimed.len() as f64,
            na.points.len() as f64,
            0.0,
            Basis::Stated,
        ));
        let h = hausdorff(self.op.domain(), &na.points, claimed);
        self.push(Check::new("attaining set error", Relation::Eq, 0.0, h, tol, Basis::Stated));
    }

    fn dist(&mut self, name: String, na: &AttainmentSet, x: &[f64], relation: Relation, expected: f64) {
        let d = na.distance(x);
        self.push(Check::new(name, relation, expected, d, DIST_TOL, Basis::Stated));
    }

    /// `η(ε) ≤ bound` where `bound = ‖T‖ − ‖Tx‖` for a feasible `x`.
    fn eta_bound(&mut self, name: String, eps: f64, bound: f64, tol: f64, basis: Basis) -> Result<f64> {
        let prof = sbpb_profile(self.op, &[eps])?;
        self.push(Check::new(name, Relation::Le, bound, prof.eta[0], tol, basis));
        Ok(prof.eta[0])
    }
}

/// Runs the claim checklist for one construction. Parameters outside the
/// range where the claim is proved are refused with [`Error::Hypothesis`].
pub fn reproduce(id: &GalleryId, tol: f64, seed: u64) -> Result<ReproReport> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::InvalidTolerance(tol));
    }
    id.check_hypotheses()?;
    let start = Instant::now();
    let op = id.build()?;
    let ps = &id.params;
    let mut h = Harness { op: &op, checks: Vec::new() };
    let dom = op.domain().clone();
    let (e1, e2) = (dom.basis_vector(0), dom.basis_vector(1));
    let na = || na_set(&op, DEFAULT_VALUE_TOL, DEFAULT_CLUSTER_TOL);
    let beta = ps.beta_or(0.5);
    match id.tag {
        GalleryTag::Diag2Inf | GalleryTag::Diag22 | GalleryTag::DiagPQ | GalleryTag::ProjN2 => {
            h.norm(tol)?;
            h.image("|T e1| = beta".into(), &e1, beta, tol);
            let na = na()?;
            h.claimed_set(&na, &pm(e2.clone()), DIST_TOL);
            let c = if id.tag == GalleryTag::DiagPQ {
                2f64.powf(dom.p().reciprocal())
            } else {
                2f64.sqrt()
            };
            h.dist("dist(e1, NA)".into(), &na, &e1, Relation::Eq, c);
            h.eta_bound("eta(1) <= 1 - beta".into(), 1.0, 1.0 - beta, tol, Basis::Derived)?;
        }
        GalleryTag::Rot21 | GalleryTag::Rot2Q => {
            h.norm(tol)?;
            h.image("|T e1| = beta".into(), &e1, beta, tol);
            let na = na()?;
            if beta == 1.0 {
                let mut claimed = pm(e1.clone()).to_vec();
                claimed.extend(pm(e2.clone()));
                h.claimed_set(&na, &claimed, DIST_TOL);
            } else {
                h.claimed_set(&na, &pm(e2.clone()), DIST_TOL);
                h.dist("dist(e1, NA)".into(), &na, &e1, Relation::Eq, 2f64.sqrt());
                h.eta_bound("eta(1) <= 1 - beta".into(), 1.0, 1.0 - beta, tol, Basis::Derived)?;
            }
        }
        GalleryTag::ComposePQ => {
            h.norm(tol)?;
            h.image("|T e1| = beta".into(), &e1, beta, tol);
            let na = na()?;
            h.push(Check::new("attaining clusters", Relation::Ge, 1.0, na.points.len() as f64, 0.0, Basis::Direct));
            let claimed = pm(e2.clone());
            let off = na
                .points
                .iter()
                .map(|x| claimed.iter().map(|y| dom.distance(x, y)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            h.push(Check::new("NA within {+-e2}", Relation::Eq, 0.0, off, DIST_TOL, Basis::Stated));
            h.dist("dist(e1, NA)".into(), &na, &e1, Relation::Ge, 1.0);
            h.eta_bound("eta(1) <= 1 - beta".into(), 1.0, 1.0 - beta, tol, Basis::Derived)?;
        }
        GalleryTag::BiorthInf => {
            let eta = ps.eta.unwrap_or(0.5);
            h.norm(tol)?;
            h.image("|T e1| = 1 - eta".into(), &e1, 1.0 - eta, tol);
            let na = na()?;
            let min_second = na.points.iter().map(|z| z[1].abs()).fold(f64::INFINITY, f64::min);
            h.push(Check::new("|x2*(z)| on NA", Relation::Ge, 1.0, min_second, DIST_TOL, Basis::Stated));
            h.dist("dist(e1, NA)".into(), &na, &e1, Relation::Ge, 1.0);
            h.eta_bound("eta(1) <= eta".into(), 1.0, eta, tol, Basis::Derived)?;
        }
        GalleryTag::AuerbachYY => {
            let sys = auerbach_2d(&dom)?;
            h.push(Check::new(
                "Auerbach residual",
                Relation::Le,
                0.0,
                sys.residual(&dom),
                1e-8,
                Basis::Direct,
            ));
            h.norm(tol)?;
            let u1 = sys.vectors[0].clone();
            h.image("|T e1| = beta".into(), &u1, beta, tol);
            let na = na()?;
            let y2 = &sys.functionals[1];
            let min_y2 = na
                .points
                .iter()
                .map(|z| (y2[0] * z[0] + y2[1] * z[1]).abs())
                .fold(f64::INFINITY, f64::min);
            h.push(Check::new("|y2*(z)| on NA", Relation::Ge, 1.0, min_y2, DIST_TOL, Basis::Derived));
            h.dist("dist(e1, NA)".into(), &na, &u1, Relation::Ge, 1.0);
            h.eta_bound("eta(1) <= 1 - beta".into(), 1.0, 1.0 - beta, tol, Basis::Derived)?;
        }
        GalleryTag::BlockN | GalleryTag::LplqFailN => {
            let blocks = ps.blocks.unwrap_or(5);
            let bd = block_dim(&dom).unwrap_or(2);
            let block = id.tag == GalleryTag::BlockN;
            let a = |k: usize| {
                if block {
                    k as f64 / (k as f64 + 1.0)
                } else {
                    1.0 - 1.0 / (2.0 * k as f64)
                }
            };
            h.norm(tol.max(BLOCK_TOL))?;
            for k in 1..=blocks {
                let x = block_basis(&dom, bd, k, 0);
                h.image(format!("|T e(1,{k})|"), &x, a(k), BLOCK_TOL);
            }
            let na = na()?;
            let continuum = !block && op.p() == op.q();
            if continuum {
                let dims = na.subspaces.first().map_or(0, |s| s.basis.len());
                h.push(Check::new("attaining sphere dimension", Relation::Eq, blocks as f64, dims as f64, 0.0, Basis::Derived));
                let off = na
                    .subspaces
                    .iter()
                    .flat_map(|s| s.basis.iter())
                    .map(|b| (0..blocks).map(|k| b[2 * k].abs()).fold(0.0, f64::max))
                    .fold(0.0, f64::max);
                h.push(Check::new("attaining sphere inside span e(2,n)", Relation::Eq, 0.0, off, BLOCK_TOL, Basis::Derived));
            } else {
                let claimed: Vec<Vec<f64>> = (1..=blocks)
                    .flat_map(|k| pm(block_basis(&dom, bd, k, 1)))
                    .collect();
                h.claimed_set(&na, &claimed, BLOCK_TOL);
            }
            for k in 1..=blocks {
                let x = block_basis(&dom, bd, k, 0);
                h.dist(format!("dist(e(1,{k}), NA)"), &na, &x, Relation::Ge, 1.0);
            }
            let eps = ps.eps.unwrap_or(PROFILE_EPS);
            if block {
                let eta = h.eta_bound(
                    format!("eta({eps}) <= 1/(N+1)"),
                    eps,
                    1.0 / (blocks as f64 + 1.0),
                    BLOCK_TOL,
                    Basis::Derived,
                )?;
                let lit = 1.0 / (2.0 * blocks as f64);
                h.push(Check::new(format!("eta({eps}) <= 1/(2N)"), Relation::Le, lit, eta, BLOCK_TOL, Basis::Stated).advisory());
            } else {
                h.eta_bound(
                    format!("eta({eps}) <= 1/(2N)"),
                    eps,
                    1.0 / (2.0 * blocks as f64),
                    BLOCK_TOL,
                    Basis::Stated,
                )?;
            }
        }
    }
    Ok(ReproReport::finish(id, id.to_string(), h.checks, start, seed))
}

/// `F(x) = ½[(x − √(1−x²))^q + (x + √(1−x²))^q]`, the `q`-th power of
/// `‖T(x, √(1−x²))‖_q` for the scaled rotation.
pub fn rotation_profile(q: f64, x: f64) -> f64 {
    let s = (1.0 - x * x).sqrt();
    0.5 * ((x - s).powf(q) + (x + s).powf(q))
}

pub fn rotation_profile_derivative(q: f64, x: f64) -> f64 {
    let s = (1.0 - x * x).sqrt();
    0.5 * q * ((x - s).powf(q - 1.0) * (1.0 + x / s) + (x + s).powf(q - 1.0) * (1.0 - x / s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub q: f64,
    pub grid: usize,
    pub min_derivative: f64,
    pub max_fd_relative_error: f64,
    pub checks: Vec<Check>,
    pub overall: bool,
}

/// Certifies `F′ > 0` on `(1/√2, 1)`.
///
/// The chain of inequalities once used to bound `F′` from below by
/// `q(x − √(1−x²))^{q−1}` drops a negative term in the wrong direction;
/// the bound that actually holds is `F′ ≤ q(x − √(1−x²))^{q−1}`. Both are
/// evaluated; the lower one is recorded as advisory.
pub fn monotonicity_certificate(q: Exponent, grid: usize) -> Result<MonotonicityReport> {
    let qv = match q {
        Exponent::Finite(v) if (1.0..2.0).contains(&v) => v,
        _ => {
            return Err(Error::Hypothesis {
                tag: GalleryTag::Rot2Q.to_string(),
                reason: format!("monotonicity is claimed for 1 <= q < 2, got q = {q}"),
            })
        }
    };
    if grid < 1000 {
        return Err(Error::param("grid", format!("{grid} < 1000")));
    }
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let xs: Vec<f64> = (0..grid).map(|k| a + (1.0 - a) * (k as f64 + 0.5) / grid as f64).collect();
    let d: Vec<f64> = xs.iter().map(|&x| rotation_profile_derivative(qv, x)).collect();
    let min_derivative = d.iter().copied().fold(f64::INFINITY, f64::min);
    let margin = 1e-4;
    let h = 1e-6;
    let max_fd = xs
        .iter()
        .zip(&d)
        .filter(|(x, _)| **x > a + margin && **x < 1.0 - margin)
        .map(|(&x, &dx)| {
            let fd = (rotation_profile(qv, x + h) - rotation_profile(qv, x - h)) / (2.0 * h);
            (fd - dx).abs() / dx.abs()
        })
        .fold(0.0, f64::max);
    let lower_gap = xs
        .iter()
        .zip(&d)
        .map(|(&x, &dx)| dx - qv * (x - (1.0 - x * x).sqrt()).powf(qv - 1.0))
        .fold(f64::INFINITY, f64::min);
    let upper_gap = xs
        .iter()
        .zip(&d)
        .map(|(&x, &dx)| qv * (x - (1.0 - x * x).sqrt()).powf(qv - 1.0) - dx)
        .fold(f64::INFINITY, f64::min);
    let mid_expected = (2.0 / 2f64.powf(0.5 + 1.0 / qv)).powf(qv);
    let mid_computed = rotation_profile(qv, a);
    let rot = crate::operators::make_rot_lq(1.0, q)?;
    let mid_norm = rot.image_norm(&[a, a]);
    let checks = vec![
        Check::new("min F'", Relation::Gt, 0.0, min_derivative, 0.0, Basis::Stated),
        Check::new("F' vs central differences (relative)", Relation::Le, 0.0, max_fd, 1e-5, Basis::Derived),
        Check::new("F(1/sqrt2)", Relation::Eq, mid_expected, mid_computed, 1e-10, Basis::Stated),
        Check::new("|T(1/sqrt2, 1/sqrt2)|_q", Relation::Eq, 2.0 / 2f64.powf(0.5 + 1.0 / qv), mid_norm, 1e-10, Basis::Stated),
        Check::new("F(1) = |T e1|^q", Relation::Eq, 1.0, rotation_profile(qv, 1.0), 1e-12, Basis::Derived),
        Check::new("F' <= q (x - sqrt(1-x^2))^(q-1)", Relation::Ge, 0.0, upper_gap, 1e-9, Basis::Derived),
        Check::new("F' >= q (x - sqrt(1-x^2))^(q-1)", Relation::Ge, 0.0, lower_gap, 1e-9, Basis::Stated).advisory(),
    ];
    let overall = checks.iter().filter(|c| !c.advisory).all(|c| c.pass);
    Ok(MonotonicityReport {
        q: qv,
        grid,
        min_derivative,
        max_fd_relative_error: max_fd,
        checks,
        overall,
    })
}

/// `β = 1 − η/2` (or the matching truncation) and a point `x₀` with
/// `‖Tx₀‖ > 1 − η` at distance at least one from `NA(T)`.
pub fn failure_certificate(tag: GalleryTag, eta: f64, seed: u64) -> Result<ReproReport> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::param("eta", format!("{eta} outside (0, 1)")));
    }
    let start = Instant::now();
    let beta = 1.0 - eta / 2.0;
    let params = GalleryParams::default();
    let (id, x0) = match tag {
        GalleryTag::BlockN | GalleryTag::LplqFailN => {
            // smallest truncation whose last block is already close enough
            let blocks = if tag == GalleryTag::BlockN {
                (1.0 / eta - 1.0).floor() as usize + 1
            } else {
                (1.0 / (2.0 * eta)).floor() as usize + 1
            };
            let params = params.blocks(blocks);
            let params = if tag == GalleryTag::LplqFailN {
                params.p(Exponent::TWO).q(Exponent::TWO)
            } else {
                params
            };
            let id = GalleryId::new(tag, params);
            let dom = id.build()?.domain().clone();
            let x0 = block_basis(&dom, block_dim(&dom).unwrap_or(2), blocks, 0);
            (id, x0)
        }
        GalleryTag::BiorthInf => (GalleryId::new(tag, params.eta(eta / 2.0).n(3)), axis(3, 0)),
        GalleryTag::ProjN2 => (GalleryId::new(tag, params.beta(beta).n(4)), axis(4, 0)),
        GalleryTag::AuerbachYY => {
            let id = GalleryId::new(tag, params.beta(beta).p(Exponent::Finite(3.0)));
            let sys = auerbach_2d(&SequenceSpace::new(2, Exponent::Finite(3.0))?)?;
            (id, sys.vectors[0].clone())
        }
        _ => (GalleryId::new(tag, params.beta(beta)), axis(2, 0)),
    };
    let op = id.build()?;
    let na = na_set(&op, DEFAULT_VALUE_TOL, DEFAULT_CLUSTER_TOL)?;
    let norm = opnorm(&op, 1e-10)?.value;
    let checks = vec![
        Check::new("|T x0| > |T| - eta", Relation::Gt, norm - eta, op.image_norm(&x0), 0.0, Basis::Stated),
        Check::new("dist(x0, NA)", Relation::Ge, 1.0, na.distance(&x0), DIST_TOL, Basis::Stated),
    ];
    let label = format!("{} certificate eta={eta}", op.id().map_or(tag.to_string(), |i| i.to_string()));
    Ok(ReproReport::finish(op.id().unwrap_or(&id), label, checks, start, seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositiveCase {
    pub seed: u64,
    pub matrix: Matrix,
    pub eta: f64,
    pub pass: bool,
}

/// Random `2×2` operators `ℓ_3 → ℓ_2` scaled to norm one; each should have
/// `η(0.25, T) > 1e-6`.
pub fn positive_batch(count: usize, seed: u64) -> Result<Vec<PositiveCase>> {
    (0..count as u64)
        .map(|i| {
            let s = seed.wrapping_add(i);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let rows: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..2).map(|_| StandardNormal.sample(&mut rng)).collect())
                .collect();
            let raw = OperatorPQ::from_plain(Matrix::from_rows(rows)?, Exponent::Finite(3.0), Exponent::TWO)?;
            let norm = opnorm(&raw, 1e-12)?.value;
            let op = raw.scaled(1.0 / norm);
            let eta = sbpb_profile(&op, &[POSITIVE_EPS])?.eta[0];
            Ok(PositiveCase {
                seed: s,
                matrix: op.matrix().clone(),
                eta,
                pass: eta > POSITIVE_FLOOR,
            })
        })
        .collect()
}

/// The default parameter matrix of the gallery.
pub fn default_cases() -> Vec<GalleryId> {
    let e = |v: f64| Exponent::new(v).expect("valid exponent");
    let betas = [0.5, 0.9];
    let mut out = Vec::new();
    let p = GalleryParams::default;
    for tag in [GalleryTag::Diag2Inf, GalleryTag::Diag22] {
        out.extend(betas.iter().map(|&b| GalleryId::new(tag, p().beta(b))));
    }
    let dq = [e(1.5), e(2.0), e(3.0), Exponent::Inf];
    for &pp in &[e(1.5), e(2.0), e(3.0)] {
        for &q in &dq {
            if q.value() >= pp.value() {
                out.extend(betas.iter().map(|&b| GalleryId::new(GalleryTag::DiagPQ, p().beta(b).p(pp).q(q))));
            }
        }
    }
    for b in [0.5, 0.9, 1.0] {
        out.push(GalleryId::new(GalleryTag::Rot21, p().beta(b)));
    }
    for q in [e(1.0), e(1.5)] {
        for b in [0.5, 0.9, 1.0] {
            out.push(GalleryId::new(GalleryTag::Rot2Q, p().beta(b).q(q)));
        }
    }
    for pp in [e(1.5), e(2.0)] {
        for q in [e(1.0), e(1.5)] {
            out.extend(betas.iter().map(|&b| GalleryId::new(GalleryTag::ComposePQ, p().beta(b).p(pp).q(q))));
        }
    }
    let all_p = [e(1.0), e(1.5), e(2.0), e(3.0), Exponent::Inf];
    for pp in all_p {
        for eta in [0.5, 0.1] {
            out.push(GalleryId::new(GalleryTag::BiorthInf, p().eta(eta).p(pp).n(3)));
        }
    }
    for pp in all_p {
        out.extend(betas.iter().map(|&b| GalleryId::new(GalleryTag::AuerbachYY, p().beta(b).p(pp))));
    }
    out.extend(betas.iter().map(|&b| GalleryId::new(GalleryTag::ProjN2, p().beta(b).n(4))));
    for n in [3, 5, 8] {
        out.push(GalleryId::new(GalleryTag::BlockN, p().blocks(n)));
    }
    for (pp, q) in [(1.5, 1.5), (1.5, 2.0), (1.5, 3.0), (2.0, 2.0), (2.0, 3.0), (3.0, 3.0)] {
        for n in [3, 5, 8] {
            out.push(GalleryId::new(GalleryTag::LplqFailN, p().p(e(pp)).q(e(q)).blocks(n)));
        }
    }
    out
}

/// Statement → harnesses exercising it.
pub const COVERAGE: &[(&str, &[&str])] = &[
    ("strong BPB definition", &["profile", "certificates"]),
    ("Kim-Lee theorem", &["kim_lee", "delta"]),
    ("example (l2^2, linf^2)", &["DIAG-2-INF"]),
    ("example (l2^2, l2^2)", &["DIAG-2-2"]),
    ("diagonal T_beta on lp^2 -> lq^2", &["DIAG-P-Q"]),
    ("l2^2 -> l1^2 rotation", &["ROT-2-1"]),
    ("l2^2 -> lq^2 rotation, 1 <= q < 2", &["ROT-2-Q", "monotonicity"]),
    ("composition with the identity", &["COMPOSE-P-Q"]),
    ("(X, linf^2) failure", &["BIORTH-INF"]),
    ("(Y, Y) failure via Auerbach bases", &["AUERBACH-YY", "auerbach"]),
    ("(l2, l2^2) projection remark", &["PROJ-N-2"]),
    ("block operator on l2(X) -> linf(Y)", &["BLOCK-N"]),
    ("lp -> lq failure for p <= q", &["LPLQ-FAIL-N"]),
    ("lp -> lq property for q < p", &["positive_batch"]),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub statement: String,
    pub harnesses: Vec<String>,
    pub covered: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuerbachRow {
    pub p: Exponent,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproBundle {
    pub seed: u64,
    pub tol: f64,
    pub reports: Vec<ReproReport>,
    pub refusals: Vec<String>,
    pub certificates: Vec<ReproReport>,
    pub monotonicity: Vec<MonotonicityReport>,
    pub positive_batch: Vec<PositiveCase>,
    pub kim_lee: Vec<KimLeeReport>,
    pub delta: Vec<ConvexityModulus>,
    pub auerbach: Vec<AuerbachRow>,
    pub coverage: Vec<CoverageRow>,
    pub overall: bool,
}

impl ReproBundle {
    /// JSON with every `runtime_ms` zeroed, for determinism comparisons.
    pub fn to_stable_json(&self) -> String {
        let mut b = self.clone();
        b.reports.iter_mut().chain(b.certificates.iter_mut()).for_each(|r| r.runtime_ms = 0);
        serde_json::to_string_pretty(&b).expect("bundle serializes")
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .reports
            .iter()
            .chain(&self.certificates)
            .filter(|r| !r.overall)
            .map(|r| format!("{}: {}", r.label, r.failed().iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ")))
            .collect();
        if self.reports.is_empty() {
            out.push(format!("no reports ({})", self.refusals.join("; ")));
        }
        out.extend(self.monotonicity.iter().filter(|m| !m.overall).map(|m| format!("monotonicity q={}", m.q)));
        out.extend(
            self.positive_batch
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("positive batch seed {} eta {}", c.seed, c.eta)),
        );
        out.extend(self.kim_lee.iter().filter(|k| !kim_lee_expected(k)).map(|k| format!("kim-lee {}", k.space)));
        out.extend(self.auerbach.iter().filter(|a| !a.pass).map(|a| format!("auerbach p={}", a.p)));
        out.extend(self.coverage.iter().filter(|c| !c.covered).map(|c| format!("uncovered: {}", c.statement)));
        out
    }
}

/// Uniformly convex planes keep `η` positive; `ℓ_1` and `ℓ_∞` show a
/// vanishing `η` at some `ε ≤ 1`.
pub fn kim_lee_expected(r: &KimLeeReport) -> bool {
    let p = r.space.p();
    if p == Exponent::ONE || p == Exponent::Inf {
        r.flat_witness.is_some()
    } else {
        r.coherent && r.all_positive()
    }
}

/// Which harnesses to run. `only` wins over `tag`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunFilter {
    pub tag: Option<GalleryTag>,
    pub only: Option<GalleryId>,
}

impl RunFilter {
    fn is_full(&self) -> bool {
        self.tag.is_none() && self.only.is_none()
    }
}

/// Every harness at default parameters, plus the property batches. With a
/// tag filter only that tag's reports are produced.
pub fn run_all(tol: f64, seed: u64) -> Result<ReproBundle> {
    run_filtered(tol, seed, &RunFilter::default())
}

pub fn run_filtered(tol: f64, seed: u64, filter: &RunFilter) -> Result<ReproBundle> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::InvalidTolerance(tol));
    }
    let cases = match &filter.only {
        Some(id) => vec![id.clone()],
        None => default_cases()
            .into_iter()
            .filter(|id| filter.tag.is_none_or(|f| f == id.tag))
            .collect(),
    };
    let mut reports = Vec::new();
    let mut refusals = Vec::new();
    for id in &cases {
        match reproduce(id, tol, seed) {
            Ok(r) => reports.push(r),
            Err(e @ Error::Hypothesis { .. }) => refusals.push(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    let full = filter.is_full();
    let mut certificates = Vec::new();
    let mut monotonicity = Vec::new();
    let mut positive = Vec::new();
    let mut kim_lee = Vec::new();
    let mut delta = Vec::new();
    let mut auerbach = Vec::new();
    if full {
        let q2 = GalleryId::new(GalleryTag::Rot2Q, GalleryParams::default().beta(1.0).q(Exponent::TWO));
        if let Err(e) = reproduce(&q2, tol, seed) {
            refusals.push(e.to_string());
        }
        for tag in GalleryTag::ALL {
            for eta in CERTIFICATE_ETAS {
                certificates.push(failure_certificate(tag, eta, seed)?);
            }
        }
        for q in [1.0, 1.2, 1.5, 1.9] {
            monotonicity.push(monotonicity_certificate(Exponent::Finite(q), 10_000)?);
        }
        positive = positive_batch(POSITIVE_BATCH, seed)?;
        let ps = [Exponent::ONE, Exponent::Finite(1.5), Exponent::TWO, Exponent::Finite(3.0), Exponent::Inf];
        for p in ps {
            let s = SequenceSpace::new(2, p)?;
            kim_lee.push(kim_lee_check(&s, &[0.5, 1.0], 64, seed)?);
            delta.push(delta_numeric(&s, &[0.25, 0.5, 1.0, 1.5, 2.0])?);
            let sys = auerbach_2d(&s)?;
            let residual = sys.residual(&s);
            auerbach.push(AuerbachRow {
                p,
                residual,
                pass: residual <= 1e-8,
            });
        }
    }
    let mut bundle = ReproBundle {
        seed,
        tol,
        reports,
        refusals,
        certificates,
        monotonicity,
        positive_batch: positive,
        kim_lee,
        delta,
        auerbach,
        coverage: Vec::new(),
        overall: false,
    };
    if full {
        bundle.coverage = coverage(&bundle);
    }
    bundle.overall = bundle.failures().is_empty();
    Ok(bundle)
}

fn coverage(b: &ReproBundle) -> Vec<CoverageRow> {
    let ran = |h: &str| match h {
        "profile" => b.reports.iter().any(|r| r.checks.iter().any(|c| c.name.starts_with("eta("))),
        "certificates" => !b.certificates.is_empty(),
        "kim_lee" => !b.kim_lee.is_empty(),
        "delta" => !b.delta.is_empty(),
        "monotonicity" => !b.monotonicity.is_empty(),
        "auerbach" => !b.auerbach.is_empty(),
        "positive_batch" => !b.positive_batch.is_empty(),
        tag => b.reports.iter().any(|r| r.prop_id.as_str() == tag),
    };
    COVERAGE
        .iter()
        .map(|(s, hs)| CoverageRow {
            statement: s.to_string(),
            harnesses: hs.iter().map(|h| h.to_string()).collect(),
            covered: hs.iter().all(|h| ran(h)),
        })
        .collect()
}

/// Writes `<dir>/<tag>.json` per tag, `<dir>/index.csv`, and `<dir>/bundle.json`.
pub fn write_bundle(dir: &Path, bundle: &ReproBundle) -> Result<()> {
    let io = |e: std::io::Error| Error::Unsupported(format!("writing reports: {e}"));
    fs::create_dir_all(dir).map_err(io)?;
    let mut by_tag: BTreeMap<&str, Vec<&ReproReport>> = BTreeMap::new();
    for r in &bundle.reports {
        by_tag.entry(r.prop_id.as_str()).or_default().push(r);
    }
    for (tag, rs) in &by_tag {
        let json = serde_json::to_string_pretty(rs).map_err(|e| Error::Unsupported(e.to_string()))?;
        fs::write(dir.join(format!("{tag}.json")), json).map_err(io)?;
    }
    let mut csv = String::from("tag,params,overall,worst_check_residual,runtime_ms\n");
    for r in &bundle.reports {
        csv.push_str(&format!(
            "{},\"{}\",{},{},{}\n",
            r.prop_id,
            r.params,
            r.overall,
            r.worst_residual(),
            r.runtime_ms
        ));
    }
    fs::write(dir.join("index.csv"), csv).map_err(io)?;
    let json = serde_json::to_string_pretty(bundle).map_err(|e| Error::Unsupported(e.to_string()))?;
    fs::write(dir.join("bundle.json"), json).map_err(io)?;
    Ok(())
}
