//! Exponents, `p`-norms and unit spheres of finite-dimensional sequence spaces.
//!
//! The plain spaces are `ℓ_p^n`. Two further shapes exist so that one norm
//! evaluator serves every operator in the gallery:
//!
//! * [`NormShape::Blocked`]: the mixed norm `ℓ_r(ℓ_p^k)`, i.e. the outer
//!   `r`-norm of the vector of inner block `p`-norms.
//! * [`NormShape::Linear`]: a two-dimensional norm `x ↦ ‖M x‖_p` for an
//!   invertible `M`, which covers rotated and sheared unit balls.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance on `‖x‖ - 1` accepted by [`UnitVector::new`].
pub const UNIT_TOL: f64 = 1e-10;

/// A Hölder exponent `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Inf,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    /// `f64::INFINITY` maps to [`Exponent::Inf`]; anything below 1 or NaN is rejected.
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Inf)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidExponent(p.to_string()))
        }
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Exponent::Inf => Ok(self),
            Exponent::Finite(p) => Exponent::new(p),
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, Exponent::Inf)
    }

    /// Numeric value, with `Inf` as `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Inf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Inf => None,
        }
    }

    pub fn dual(self) -> Exponent {
        dual_exponent(self)
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Inf => 0.0,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Inf),
            _ => t
                .parse::<f64>()
                .map_err(|_| Error::InvalidExponent(s.to_string()))
                .and_then(Exponent::new),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor;

        impl Visitor<'_> for ExpVisitor {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Exponent::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                v.parse().map_err(E::custom)
            }
        }

        d.deserialize_any(ExpVisitor)
    }
}

/// Conjugate exponent: `p/(p-1)`, with `1 ↔ ∞`.
pub fn dual_exponent(p: Exponent) -> Exponent {
    match p {
        Exponent::Inf => Exponent::ONE,
        Exponent::Finite(1.0) => Exponent::Inf,
        Exponent::Finite(v) => Exponent::Finite(v / (v - 1.0)),
    }
}

/// `‖x‖_p`, checked. Rejects empty vectors, non-finite entries and `p < 1`.
pub fn pnorm(x: &[f64], p: Exponent) -> Result<f64> {
    let p = p.validate()?;
    if x.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(lp_norm(x, p))
}

/// Unchecked `‖x‖_p` used on hot paths. Factors out `max |x_i|` so large
/// exponents cannot overflow.
#[inline]
pub(crate) fn lp_norm(x: &[f64], p: Exponent) -> f64 {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    match p {
        Exponent::Inf => m,
        Exponent::Finite(1.0) => x.iter().map(|v| v.abs()).sum(),
        Exponent::Finite(2.0) => {
            let s: f64 = x
                .iter()
                .map(|v| {
                    let t = v / m;
                    t * t
                })
                .sum();
            m * s.sqrt()
        }
        Exponent::Finite(p) => {
            let s: f64 = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
            m * s.powf(1.0 / p)
        }
    }
}

/// Unit vector `x` of `ℓ_p` maximizing `⟨w, x⟩`; `None` for `w = 0`.
pub(crate) fn lp_attainer(w: &[f64], p: Exponent) -> Option<Vec<f64>> {
    let m = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return None;
    }
    let x = match p {
        Exponent::Inf => w
            .iter()
            .map(|&v| if v == 0.0 { 0.0 } else { v.signum() })
            .collect(),
        Exponent::Finite(1.0) => {
            let j = w.iter().position(|v| v.abs() == m).unwrap_or(0);
            let mut x = vec![0.0; w.len()];
            x[j] = w[j].signum();
            x
        }
        Exponent::Finite(p) => {
            let e = 1.0 / (p - 1.0);
            let y: Vec<f64> = w
                .iter()
                .map(|&v| v.signum() * (v.abs() / m).powf(e) * (v != 0.0) as u8 as f64)
                .collect();
            let n = lp_norm(&y, Exponent::Finite(p));
            y.into_iter().map(|v| v / n).collect()
        }
    };
    Some(x)
}

/// How the norm of a [`SequenceSpace`] is assembled from coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormShape {
    #[default]
    Plain,
    /// `ℓ_outer(ℓ_p^{block_dim})`: consecutive blocks of `block_dim` coordinates.
    Blocked { block_dim: usize, outer: Exponent },
    /// `x ↦ ‖map · x‖_p` on the plane.
    Linear { map: [[f64; 2]; 2] },
}

impl NormShape {
    pub fn is_plain(&self) -> bool {
        matches!(self, NormShape::Plain)
    }
}

#[derive(Deserialize)]
struct SpaceRepr {
    dim: usize,
    p: Exponent,
    #[serde(default)]
    shape: NormShape,
}

/// A finite-dimensional real sequence space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr")]
pub struct SequenceSpace {
    dim: usize,
    p: Exponent,
    #[serde(skip_serializing_if = "NormShape::is_plain")]
    shape: NormShape,
}

impl TryFrom<SpaceRepr> for SequenceSpace {
    type Error = Error;

    fn try_from(r: SpaceRepr) -> Result<Self> {
        match r.shape {
            NormShape::Plain => SequenceSpace::new(r.dim, r.p),
            NormShape::Blocked { block_dim, outer } => {
                if block_dim == 0 || !r.dim.is_multiple_of(block_dim) {
                    return Err(Error::param("block_dim", "must divide the dimension"));
                }
                SequenceSpace::blocked(r.dim / block_dim, block_dim, r.p, outer)
            }
            NormShape::Linear { map } => {
                if r.dim != 2 {
                    return Err(Error::param("dim", "linear-image norms are two-dimensional"));
                }
                SequenceSpace::linear_image(r.p, map)
            }
        }
    }
}

impl SequenceSpace {
    /// `ℓ_p^dim`.
    pub fn new(dim: usize, p: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        Ok(SequenceSpace {
            dim,
            p: p.validate()?,
            shape: NormShape::Plain,
        })
    }

    /// `ℓ_outer(ℓ_inner^block_dim)` with `blocks` blocks. When both exponents
    /// agree the mixed norm is literally `ℓ_p^{blocks·block_dim}`, and the
    /// plain space is returned.
    pub fn blocked(blocks: usize, block_dim: usize, inner: Exponent, outer: Exponent) -> Result<Self> {
        if blocks == 0 || block_dim == 0 {
            return Err(Error::param("blocks", "block count and size must be positive"));
        }
        let inner = inner.validate()?;
        let outer = outer.validate()?;
        let dim = blocks * block_dim;
        if inner == outer || blocks == 1 {
            return SequenceSpace::new(dim, inner);
        }
        Ok(SequenceSpace {
            dim,
            p: inner,
            shape: NormShape::Blocked { block_dim, outer },
        })
    }

    /// The plane normed by `x ↦ ‖map · x‖_p`; `map` must be invertible.
    pub fn linear_image(p: Exponent, map: [[f64; 2]; 2]) -> Result<Self> {
        let det = map[0][0] * map[1][1] - map[0][1] * map[1][0];
        let scale = map.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if !det.is_finite() || det.abs() <= 1e-12 * scale * scale || scale == 0.0 {
            return Err(Error::DegenerateNorm(
                "linear map is singular, the norm vanishes on a ray".into(),
            ));
        }
        Ok(SequenceSpace {
            dim: 2,
            p: p.validate()?,
            shape: NormShape::Linear { map },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Inner (coordinate) exponent.
    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn shape(&self) -> &NormShape {
        &self.shape
    }

    pub fn is_plain(&self) -> bool {
        self.shape.is_plain()
    }

    /// Norm of `x`; `x` must have length `dim`.
    #[inline]
    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            NormShape::Plain => lp_norm(x, self.p),
            NormShape::Blocked { block_dim, outer } => {
                let inner: Vec<f64> = x.chunks(*block_dim).map(|b| lp_norm(b, self.p)).collect();
                lp_norm(&inner, *outer)
            }
            NormShape::Linear { map } => {
                let y = [
                    map[0][0] * x[0] + map[0][1] * x[1],
                    map[1][0] * x[0] + map[1][1] * x[1],
                ];
                lp_norm(&y, self.p)
            }
        }
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.norm(&d)
    }

    /// The dual space, i.e. the space whose norm is the dual norm of this one
    /// under the standard pairing.
    pub fn dual(&self) -> SequenceSpace {
        match &self.shape {
            NormShape::Plain => SequenceSpace {
                dim: self.dim,
                p: self.p.dual(),
                shape: NormShape::Plain,
            },
            NormShape::Blocked { block_dim, outer } => SequenceSpace {
                dim: self.dim,
                p: self.p.dual(),
                shape: NormShape::Blocked {
                    block_dim: *block_dim,
                    outer: outer.dual(),
                },
            },
            NormShape::Linear { map } => {
                // sup{⟨w,x⟩ : ‖Mx‖_p ≤ 1} = ‖M^{-T} w‖_{p'}
                let inv = inverse2(map);
                SequenceSpace {
                    dim: 2,
                    p: self.p.dual(),
                    shape: NormShape::Linear {
                        map: [[inv[0][0], inv[1][0]], [inv[0][1], inv[1][1]]],
                    },
                }
            }
        }
    }

    /// Dual norm of the functional `w`.
    pub fn dual_norm(&self, w: &[f64]) -> f64 {
        self.dual().norm(w)
    }

    /// A unit vector `x` with `⟨w, x⟩ = ‖w‖_*`; `None` for `w = 0`.
    pub fn dual_attainer(&self, w: &[f64]) -> Option<Vec<f64>> {
        match &self.shape {
            NormShape::Plain => lp_attainer(w, self.p),
            NormShape::Blocked { block_dim, outer } => {
                let dual_inner = self.p.dual();
                let weights: Vec<f64> = w.chunks(*block_dim).map(|b| lp_norm(b, dual_inner)).collect();
                let outer_x = lp_attainer(&weights, *outer)?;
                let mut x = vec![0.0; self.dim];
                for (k, b) in w.chunks(*block_dim).enumerate() {
                    if outer_x[k] == 0.0 {
                        continue;
                    }
                    if let Some(u) = lp_attainer(b, self.p) {
                        for (i, ui) in u.into_iter().enumerate() {
                            x[k * block_dim + i] = outer_x[k] * ui;
                        }
                    }
                }
                Some(x)
            }
            NormShape::Linear { map } => {
                let inv = inverse2(map);
                // ⟨w, M^{-1} y⟩ = ⟨M^{-T} w, y⟩
                let v = [
                    inv[0][0] * w[0] + inv[1][0] * w[1],
                    inv[0][1] * w[0] + inv[1][1] * w[1],
                ];
                let y = lp_attainer(&v, self.p)?;
                Some(vec![
                    inv[0][0] * y[0] + inv[0][1] * y[1],
                    inv[1][0] * y[0] + inv[1][1] * y[1],
                ])
            }
        }
    }

    /// A norming functional of `y`: dual-unit `g` with `⟨g, y⟩ = ‖y‖`.
    pub fn norm_subgradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        self.dual().dual_attainer(y)
    }

    pub fn normalize(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = self.norm(x);
        (n > 0.0 && n.is_finite()).then(|| x.iter().map(|v| v / n).collect())
    }

    /// Point of a planar unit sphere at the given fraction of a full turn.
    /// Plain spaces use [`sphere_point_2d`]; other norms rescale the
    /// Euclidean direction radially.
    pub(crate) fn sphere_point_turns(&self, turns: f64) -> [f64; 2] {
        debug_assert_eq!(self.dim, 2);
        match self.shape {
            NormShape::Plain => lp_circle_point(turns, self.p),
            _ => {
                let (c, s) = cos_sin_turns(turns);
                let n = self.norm(&[c, s]);
                [c / n, s / n]
            }
        }
    }

    /// Unit sphere point at angle `theta` (planar spaces only).
    pub fn sphere_point(&self, theta: f64) -> Result<UnitVector> {
        if self.dim != 2 {
            return Err(Error::Unsupported("angle parametrization needs a planar space".into()));
        }
        Ok(UnitVector {
            coords: self.sphere_point_turns(theta / TAU).to_vec(),
            space: self.clone(),
        })
    }

    pub fn basis_vector(&self, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dim];
        e[i] = 1.0;
        self.normalize(&e).unwrap_or(e)
    }
}

impl fmt::Display for SequenceSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            NormShape::Plain => write!(f, "l_{}^{}", self.p, self.dim),
            NormShape::Blocked { block_dim, outer } => {
                write!(f, "l_{}(l_{}^{})^{}", outer, self.p, block_dim, self.dim / block_dim)
            }
            NormShape::Linear { map } => write!(f, "l_{}^2 under {:?}", self.p, map),
        }
    }
}

fn inverse2(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

/// `(cos, sin)` of `turns · 2π`, exact on multiples of an eighth turn.
pub(crate) fn cos_sin_turns(turns: f64) -> (f64, f64) {
    let u = turns.rem_euclid(1.0);
    let e = u * 8.0;
    if e.fract() == 0.0 {
        let k = e as usize % 8;
        const R: f64 = FRAC_1_SQRT_2;
        return [
            (1.0, 0.0),
            (R, R),
            (0.0, 1.0),
            (-R, R),
            (-1.0, 0.0),
            (-R, -R),
            (0.0, -1.0),
            (R, -R),
        ][k];
    }
    let (s, c) = (u * TAU).sin_cos();
    (c, s)
}

fn lp_circle_point(turns: f64, p: Exponent) -> [f64; 2] {
    match p {
        Exponent::Inf => {
            // arc length along the square boundary, perimeter 8, starting at (1, 0)
            let t = turns.rem_euclid(1.0) * 8.0;
            if t < 1.0 {
                [1.0, t]
            } else if t < 3.0 {
                [2.0 - t, 1.0]
            } else if t < 5.0 {
                [-1.0, 4.0 - t]
            } else if t < 7.0 {
                [t - 6.0, -1.0]
            } else {
                [1.0, t - 8.0]
            }
        }
        Exponent::Finite(p) => {
            let (c, s) = cos_sin_turns(turns);
            if p == 2.0 {
                return [c, s];
            }
            let e = 2.0 / p;
            [c.signum() * c.abs().powf(e), s.signum() * s.abs().powf(e)]
        }
    }
}

/// `(sign(cos θ)|cos θ|^{2/p}, sign(sin θ)|sin θ|^{2/p})`, or the arc-length
/// walk around the square for `p = ∞`. Continuous and onto `S_{ℓ_p^2}`.
pub fn sphere_point_2d(theta: f64, p: Exponent) -> Result<UnitVector> {
    let space = SequenceSpace::new(2, p)?;
    Ok(UnitVector {
        coords: lp_circle_point(theta / TAU, p).to_vec(),
        space,
    })
}

/// Deterministic sample of `count` unit vectors.
///
/// Planar spaces get the uniform angle grid `θ_k = 2πk/count`; higher
/// dimensions normalize standard Gaussian draws, which reach every orthant.
pub fn sphere_sample(space: &SequenceSpace, count: usize, seed: u64) -> Vec<UnitVector> {
    sample_coords(space, count, seed)
        .into_iter()
        .map(|coords| UnitVector {
            coords,
            space: space.clone(),
        })
        .collect()
}

pub(crate) fn sample_coords(space: &SequenceSpace, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if space.dim() == 2 {
        return (0..count)
            .map(|k| space.sphere_point_turns(k as f64 / count as f64).to_vec())
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g: Vec<f64> = (0..space.dim())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        if let Some(x) = space.normalize(&g) {
            out.push(x);
        }
    }
    out
}

/// A point of the unit sphere of `space`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitVector {
    coords: Vec<f64>,
    space: SequenceSpace,
}

impl UnitVector {
    pub fn new(coords: Vec<f64>, space: SequenceSpace) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: coords.len(),
            });
        }
        if let Some(index) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let n = space.norm(&coords);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::param("coords", format!("norm {n} is not 1")));
        }
        Ok(UnitVector { coords, space })
    }

    pub fn normalized(coords: &[f64], space: SequenceSpace) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: coords.len(),
            });
        }
        let x = space
            .normalize(coords)
            .ok_or_else(|| Error::param("coords", "zero vector has no direction"))?;
        Ok(UnitVector { coords: x, space })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn space(&self) -> &SequenceSpace {
        &self.space
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// Anything that can evaluate a norm on `ℝ^dim`.
pub trait NormEvaluator {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    /// The sequence space behind this evaluator, when there is one.
    fn space(&self) -> Option<&SequenceSpace> {
        None
    }
}

impl NormEvaluator for SequenceSpace {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.norm(x)
    }

    fn space(&self) -> Option<&SequenceSpace> {
        Some(self)
    }
}

/// Wraps a closure as a norm evaluator.
pub struct FnNorm<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FnNorm<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnNorm { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64> NormEvaluator for FnNorm<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    const EXPS: [Exponent; 5] = [
        Exponent::Finite(1.0),
        Exponent::Finite(1.5),
        Exponent::Finite(2.0),
        Exponent::Finite(3.0),
        Exponent::Inf,
    ];

    #[test]
    fn pnorm_examples() {
        assert_eq!(pnorm(&[1.0, 0.0], Exponent::TWO).unwrap(), 1.0);
        assert_eq!(pnorm(&[1.0, 1.0], Exponent::ONE).unwrap(), 2.0);
        assert_eq!(pnorm(&[1.0, 1.0], Exponent::Inf).unwrap(), 1.0);
        assert_relative_eq!(pnorm(&[1.0, 1.0], Exponent::TWO).unwrap(), SQRT_2, epsilon = 1e-15);
        assert_eq!(pnorm(&[0.0, 0.0, 0.0], Exponent::Finite(3.0)).unwrap(), 0.0);
    }

    #[test]
    fn pnorm_errors() {
        assert!(matches!(
            pnorm(&[1.0], Exponent::Finite(0.5)),
            Err(Error::InvalidExponent(_))
        ));
        assert!(matches!(
            pnorm(&[1.0, f64::NAN], Exponent::TWO),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(matches!(pnorm(&[], Exponent::TWO), Err(Error::Empty)));
    }

    #[test]
    fn large_exponent_does_not_overflow() {
        let x = [1e200, 2e200];
        let n = pnorm(&x, Exponent::Finite(50.0)).unwrap();
        assert!(n.is_finite());
        assert_relative_eq!(n, 2e200 * (1.0 + 0.5f64.powi(50)).powf(1.0 / 50.0), max_relative = 1e-14);
    }

    #[test]
    fn dual_exponent_examples() {
        assert_eq!(dual_exponent(Exponent::TWO), Exponent::TWO);
        assert_eq!(dual_exponent(Exponent::ONE), Exponent::Inf);
        assert_eq!(dual_exponent(Exponent::Inf), Exponent::ONE);
        assert_relative_eq!(dual_exponent(Exponent::Finite(4.0)).value(), 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn exponent_parse_and_json() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Inf);
        assert_eq!("1.5".parse::<Exponent>().unwrap(), Exponent::Finite(1.5));
        assert!("0.9".parse::<Exponent>().is_err());
        assert_eq!(serde_json::to_string(&Exponent::Inf).unwrap(), "\"inf\"");
        let e: Exponent = serde_json::from_str("3").unwrap();
        assert_eq!(e, Exponent::Finite(3.0));
        assert!(serde_json::from_str::<Exponent>("0.5").is_err());
    }

    #[test]
    fn sphere_point_examples() {
        for p in EXPS {
            assert_eq!(sphere_point_2d(0.0, p).unwrap().coords(), &[1.0, 0.0]);
        }
        let x = sphere_point_2d(FRAC_PI_4, Exponent::TWO).unwrap();
        assert_relative_eq!(x.coords()[0], SQRT_2 / 2.0, epsilon = 1e-15);
        assert_relative_eq!(x.coords()[1], SQRT_2 / 2.0, epsilon = 1e-15);
        let x = sphere_point_2d(FRAC_PI_4, Exponent::ONE).unwrap();
        assert_relative_eq!(x.coords()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(x.coords()[1], 0.5, epsilon = 1e-15);
        let x = sphere_point_2d(FRAC_PI_2, Exponent::Inf).unwrap();
        assert_eq!(x.coords(), &[0.0, 1.0]);
        let x = sphere_point_2d(PI, Exponent::Finite(3.0)).unwrap();
        assert_eq!(x.coords(), &[-1.0, 0.0]);
    }

    #[test]
    fn sphere_point_unit_on_dense_grid() {
        for p in EXPS {
            let mut worst = 0.0f64;
            for k in 0..10_000 {
                let theta = TAU * k as f64 / 10_000.0 + 1e-3;
                let x = sphere_point_2d(theta, p).unwrap();
                worst = worst.max((lp_norm(x.coords(), p) - 1.0).abs());
            }
            assert!(worst <= 1e-12, "p={p}: {worst}");
        }
    }

    #[test]
    fn sphere_point_is_continuous() {
        for p in EXPS {
            let mut prev = sphere_point_2d(0.0, p).unwrap().into_coords();
            for k in 1..=4000 {
                let x = sphere_point_2d(TAU * k as f64 / 4000.0, p).unwrap().into_coords();
                let jump = lp_norm(&[x[0] - prev[0], x[1] - prev[1]], Exponent::Inf);
                assert!(jump < 0.05, "p={p} jump {jump} at k={k}");
                prev = x;
            }
        }
    }

    #[test]
    fn grid_sample_hits_axes() {
        for p in EXPS {
            let s = SequenceSpace::new(2, p).unwrap();
            let pts: Vec<Vec<f64>> = sphere_sample(&s, 4, 0).into_iter().map(|u| u.into_coords()).collect();
            assert_eq!(pts, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]]);
        }
    }

    #[test]
    fn random_sample_is_deterministic_and_unit() {
        let s = SequenceSpace::new(5, Exponent::Finite(3.0)).unwrap();
        let a = sphere_sample(&s, 200, 7);
        let b = sphere_sample(&s, 200, 7);
        assert_eq!(a, b);
        assert_ne!(a, sphere_sample(&s, 200, 8));
        let mut orthants = std::collections::HashSet::new();
        for u in &a {
            assert!((s.norm(u.coords()) - 1.0).abs() <= 1e-10);
            orthants.insert(u.coords().iter().map(|v| *v > 0.0).collect::<Vec<_>>());
        }
        assert!(orthants.len() > 20);
    }

    #[test]
    fn blocked_norm_and_collapse() {
        let s = SequenceSpace::blocked(3, 2, Exponent::TWO, Exponent::Inf).unwrap();
        assert_eq!(s.norm(&[3.0, 4.0, 0.0, 1.0, 6.0, 8.0]), 10.0);
        let plain = SequenceSpace::blocked(3, 2, Exponent::TWO, Exponent::TWO).unwrap();
        assert!(plain.is_plain());
        assert_eq!(plain.dim(), 6);
    }

    #[test]
    fn dual_attainers_norm_their_functional() {
        let spaces = [
            SequenceSpace::new(3, Exponent::Finite(1.5)).unwrap(),
            SequenceSpace::new(3, Exponent::ONE).unwrap(),
            SequenceSpace::new(3, Exponent::Inf).unwrap(),
            SequenceSpace::blocked(2, 2, Exponent::TWO, Exponent::Inf).unwrap(),
            SequenceSpace::blocked(2, 2, Exponent::Finite(3.0), Exponent::ONE).unwrap(),
        ];
        let ws: [&[f64]; 3] = [&[1.0, -2.0, 0.5], &[0.0, 3.0, -1.0], &[0.3, 0.3, -0.3]];
        for s in &spaces {
            for w in ws {
                let w: Vec<f64> = w.iter().cycle().take(s.dim()).copied().collect();
                let x = s.dual_attainer(&w).unwrap();
                assert_relative_eq!(s.norm(&x), 1.0, epsilon = 1e-12);
                let pairing: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
                assert_relative_eq!(pairing, s.dual_norm(&w), epsilon = 1e-12);
            }
        }
        let lin = SequenceSpace::linear_image(Exponent::TWO, [[1.0, 0.5], [0.0, 1.0]]).unwrap();
        let x = lin.dual_attainer(&[0.2, -1.0]).unwrap();
        assert_relative_eq!(lin.norm(&x), 1.0, epsilon = 1e-12);
        assert_relative_eq!(0.2 * x[0] - x[1], lin.dual_norm(&[0.2, -1.0]), epsilon = 1e-12);
    }

    #[test]
    fn singular_linear_map_rejected() {
        assert!(matches!(
            SequenceSpace::linear_image(Exponent::TWO, [[1.0, 2.0], [2.0, 4.0]]),
            Err(Error::DegenerateNorm(_))
        ));
    }

    fn exponent() -> impl Strategy<Value = Exponent> {
        prop_oneof![
            (1.0f64..8.0).prop_map(Exponent::Finite),
            Just(Exponent::ONE),
            Just(Exponent::Inf)
        ]
    }

    proptest! {
        #[test]
        fn dual_is_an_involution(p in exponent()) {
            let back = p.dual().dual();
            match (p, back) {
                (Exponent::Inf, Exponent::Inf) => {}
                (Exponent::Finite(a), Exponent::Finite(b)) => prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0)),
                _ => prop_assert!(false, "endpoint mismatch"),
            }
        }

        #[test]
        fn norm_monotone_in_exponent(x in prop::collection::vec(-10.0f64..10.0, 1..8), a in exponent(), b in exponent()) {
            let (lo, hi) = if a.value() <= b.value() { (a, b) } else { (b, a) };
            prop_assert!(lp_norm(&x, hi) <= lp_norm(&x, lo) * (1.0 + 1e-12));
        }

        #[test]
        fn homogeneity(x in prop::collection::vec(-10.0f64..10.0, 1..8), c in -5.0f64..5.0, p in exponent()) {
            let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
            let lhs = lp_norm(&cx, p);
            let rhs = c.abs() * lp_norm(&x, p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn triangle_inequality(
            xy in (1usize..8).prop_flat_map(|n| (prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-10.0f64..10.0, n))),
            p in exponent()
        ) {
            let (x, y) = xy;
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            prop_assert!(lp_norm(&s, p) <= lp_norm(&x, p) + lp_norm(&y, p) + 1e-12);
        }
    }
}
