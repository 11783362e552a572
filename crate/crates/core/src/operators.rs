//! Operators between sequence spaces and the gallery of named constructions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::convexity::{auerbach_2d, AuerbachSystem};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::spaces::{Exponent, NormShape, SequenceSpace};

/// Names of the gallery constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GalleryTag {
    #[serde(rename = "DIAG-2-INF")]
    Diag2Inf,
    #[serde(rename = "DIAG-2-2")]
    Diag22,
    #[serde(rename = "DIAG-P-Q")]
    DiagPQ,
    #[serde(rename = "ROT-2-1")]
    Rot21,
    #[serde(rename = "ROT-2-Q")]
    Rot2Q,
    #[serde(rename = "COMPOSE-P-Q")]
    ComposePQ,
    #[serde(rename = "BIORTH-INF")]
    BiorthInf,
    #[serde(rename = "AUERBACH-YY")]
    AuerbachYY,
    #[serde(rename = "PROJ-N-2")]
    ProjN2,
    #[serde(rename = "BLOCK-N")]
    BlockN,
    #[serde(rename = "LPLQ-FAIL-N")]
    LplqFailN,
}

impl GalleryTag {
    pub const ALL: [GalleryTag; 11] = [
        GalleryTag::Diag2Inf,
        GalleryTag::Diag22,
        GalleryTag::DiagPQ,
        GalleryTag::Rot21,
        GalleryTag::Rot2Q,
        GalleryTag::ComposePQ,
        GalleryTag::BiorthInf,
        GalleryTag::AuerbachYY,
        GalleryTag::ProjN2,
        GalleryTag::BlockN,
        GalleryTag::LplqFailN,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GalleryTag::Diag2Inf => "DIAG-2-INF",
            GalleryTag::Diag22 => "DIAG-2-2",
            GalleryTag::DiagPQ => "DIAG-P-Q",
            GalleryTag::Rot21 => "ROT-2-1",
            GalleryTag::Rot2Q => "ROT-2-Q",
            GalleryTag::ComposePQ => "COMPOSE-P-Q",
            GalleryTag::BiorthInf => "BIORTH-INF",
            GalleryTag::AuerbachYY => "AUERBACH-YY",
            GalleryTag::ProjN2 => "PROJ-N-2",
            GalleryTag::BlockN => "BLOCK-N",
            GalleryTag::LplqFailN => "LPLQ-FAIL-N",
        }
    }

    /// Parameter names the construction reads.
    pub fn schema(self) -> &'static [&'static str] {
        match self {
            GalleryTag::Diag2Inf | GalleryTag::Diag22 | GalleryTag::Rot21 => &["beta"],
            GalleryTag::DiagPQ | GalleryTag::ComposePQ => &["beta", "p", "q"],
            GalleryTag::Rot2Q => &["beta", "q"],
            GalleryTag::BiorthInf => &["eta", "p", "n"],
            GalleryTag::AuerbachYY => &["beta", "p"],
            GalleryTag::ProjN2 => &["beta", "n"],
            GalleryTag::BlockN => &["blocks"],
            GalleryTag::LplqFailN => &["p", "q", "blocks"],
        }
    }

    /// The statement the construction certifies.
    pub fn claim(self) -> &'static str {
        match self {
            GalleryTag::Diag2Inf => {
                "T(x,y) = (beta x, y) on l_2^2 -> l_inf^2 has norm 1, attains only at z = +-e2, and |e1 - z|_2 = sqrt(2)"
            }
            GalleryTag::Diag22 => "T(x,y) = (beta x, y) on l_2^2 -> l_2^2 has norm 1 and attains only at +-e2",
            GalleryTag::DiagPQ => {
                "for 1 < p <= q < inf (or p < q = inf), T_beta = diag(beta, 1) has |T e1|_q = beta and |z - e1|_p = 2^(1/p) on NA(T)"
            }
            GalleryTag::Rot21 => {
                "T_beta(x,y) = ((beta x - y)/2, (beta x + y)/2) on l_2^2 -> l_1^2 has norm 1, |T e1|_1 = beta, NA = {+-e2}"
            }
            GalleryTag::Rot2Q => {
                "for 1 <= q < 2, the 2^(-1/q)-scaled rotation attains its norm only at +-e1, +-e2 (beta = 1) and only at +-e2 for beta < 1"
            }
            GalleryTag::ComposePQ => {
                "for 1 < p <= 2, 1 <= q < 2, the rotation precomposed with Id: l_p^2 -> l_2^2 has norm 1 and NA within {+-e2}"
            }
            GalleryTag::BiorthInf => {
                "T(x) = ((1 - eta) x1*(x), x2*(x)) into l_inf^2 has norm 1, and every attaining z has |x2*(z)| = 1, so dist(e1, NA) >= 1"
            }
            GalleryTag::AuerbachYY => {
                "with an Auerbach system of a 2-dimensional Y, T_beta = beta y1* e1 + y2* e2 has norm 1 and |e1 - y0| >= 1 on NA"
            }
            GalleryTag::ProjN2 => "T = R composed with the projection onto the first two coordinates keeps |T| = |R| = 1",
            GalleryTag::BlockN => {
                "block diagonal T = (T_n) from l_2(l_2^2) to l_inf(l_2^2) with T_n = diag(n/(n+1), 1) has norm 1 and vanishing eta"
            }
            GalleryTag::LplqFailN => {
                "blocks diag(1 - 1/(2n), 1) on l_p -> l_q, p <= q: |T e_(1,n)| = 1 - 1/(2n) while every attaining v has |e_(1,n) - v|_q >= 1"
            }
        }
    }
}

impl fmt::Display for GalleryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GalleryTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        GalleryTag::ALL
            .into_iter()
            .find(|g| g.as_str() == t)
            .ok_or_else(|| Error::param("tag", format!("unknown gallery tag {s:?}")))
    }
}

/// Parameters of a gallery construction. Unused fields stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GalleryParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

impl GalleryParams {
    pub fn beta(mut self, v: f64) -> Self {
        self.beta = Some(v);
        self
    }

    pub fn p(mut self, v: Exponent) -> Self {
        self.p = Some(v);
        self
    }

    pub fn q(mut self, v: Exponent) -> Self {
        self.q = Some(v);
        self
    }

    pub fn n(mut self, v: usize) -> Self {
        self.n = Some(v);
        self
    }

    pub fn blocks(mut self, v: usize) -> Self {
        self.blocks = Some(v);
        self
    }

    pub fn eta(mut self, v: f64) -> Self {
        self.eta = Some(v);
        self
    }

    pub fn eps(mut self, v: f64) -> Self {
        self.eps = Some(v);
        self
    }

    /// `beta` if given, else `1 - eta/2`, else `default`.
    pub fn beta_or(&self, default: f64) -> f64 {
        self.beta
            .or_else(|| self.eta.map(|e| 1.0 - e / 2.0))
            .unwrap_or(default)
    }
}

impl fmt::Display for GalleryParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(v) = self.beta {
            parts.push(format!("beta={v}"));
        }
        if let Some(v) = self.p {
            parts.push(format!("p={v}"));
        }
        if let Some(v) = self.q {
            parts.push(format!("q={v}"));
        }
        if let Some(v) = self.n {
            parts.push(format!("n={v}"));
        }
        if let Some(v) = self.blocks {
            parts.push(format!("N={v}"));
        }
        if let Some(v) = self.eta {
            parts.push(format!("eta={v}"));
        }
        if let Some(v) = self.eps {
            parts.push(format!("eps={v}"));
        }
        f.write_str(&parts.join(";"))
    }
}

/// A gallery construction with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalleryId {
    pub tag: GalleryTag,
    #[serde(default)]
    pub params: GalleryParams,
}

impl GalleryId {
    pub fn new(tag: GalleryTag, params: GalleryParams) -> Self {
        GalleryId { tag, params }
    }

    /// Builds the operator. Only the operator constructors' ranges are
    /// enforced here; see [`GalleryId::check_hypotheses`] for the stronger
    /// assumptions of each statement.
    pub fn build(&self) -> Result<OperatorPQ> {
        let ps = &self.params;
        let beta = ps.beta_or(0.5);
        let op = match self.tag {
            GalleryTag::Diag2Inf => {
                fixed_exponent("p", ps.p, Exponent::TWO)?;
                fixed_exponent("q", ps.q, Exponent::Inf)?;
                make_diag_beta(beta, Exponent::TWO, Exponent::Inf)?
            }
            GalleryTag::Diag22 => {
                fixed_exponent("p", ps.p, Exponent::TWO)?;
                fixed_exponent("q", ps.q, Exponent::TWO)?;
                make_diag_beta(beta, Exponent::TWO, Exponent::TWO)?
            }
            GalleryTag::DiagPQ => make_diag_beta(
                beta,
                ps.p.unwrap_or(Exponent::Finite(1.5)),
                ps.q.unwrap_or(Exponent::Finite(3.0)),
            )?,
            GalleryTag::Rot21 => {
                fixed_exponent("q", ps.q, Exponent::ONE)?;
                make_rot_l1(beta)?
            }
            GalleryTag::Rot2Q => make_rot_lq(beta, ps.q.unwrap_or(Exponent::Finite(1.5)))?,
            GalleryTag::ComposePQ => make_compose(
                beta,
                ps.p.unwrap_or(Exponent::Finite(1.5)),
                ps.q.unwrap_or(Exponent::ONE),
            )?,
            GalleryTag::BiorthInf => {
                fixed_exponent("q", ps.q, Exponent::Inf)?;
                let eta = ps.eta.unwrap_or(0.5);
                let space = SequenceSpace::new(ps.n.unwrap_or(3), ps.p.unwrap_or(Exponent::TWO))?;
                make_biorth_inf(&space, eta)?
            }
            GalleryTag::AuerbachYY => {
                let space = SequenceSpace::new(2, ps.p.unwrap_or(Exponent::TWO))?;
                make_auerbach_yy(&auerbach_2d(&space)?, beta)?
            }
            GalleryTag::ProjN2 => {
                let r = make_diag_beta(beta, Exponent::TWO, Exponent::TWO)?;
                make_proj_then(&r, ps.n.unwrap_or(4))?
            }
            GalleryTag::BlockN => make_block_n(ps.blocks.unwrap_or(5))?,
            GalleryTag::LplqFailN => make_lplq_fail(
                ps.p.unwrap_or(Exponent::TWO),
                ps.q.unwrap_or(Exponent::TWO),
                ps.blocks.unwrap_or(5),
            )?,
        };
        Ok(op.with_id(self.clone()))
    }

    /// Refuses parameters outside the range where the construction's claim
    /// is proved.
    pub fn check_hypotheses(&self) -> Result<()> {
        let ps = &self.params;
        let refuse = |reason: String| {
            Err(Error::Hypothesis {
                tag: self.tag.to_string(),
                reason,
            })
        };
        let beta = ps.beta_or(0.5);
        if self.tag.schema().contains(&"beta") {
            let closed = matches!(self.tag, GalleryTag::Rot21 | GalleryTag::Rot2Q);
            if let Err(e) = check_beta(beta, closed) {
                return refuse(e.to_string());
            }
        }
        match self.tag {
            GalleryTag::DiagPQ => {
                let p = ps.p.unwrap_or(Exponent::Finite(1.5));
                let q = ps.q.unwrap_or(Exponent::Finite(3.0));
                let ok = match (p, q) {
                    (Exponent::Finite(p), Exponent::Finite(q)) => p > 1.0 && p <= q,
                    (Exponent::Finite(p), Exponent::Inf) => p > 1.0,
                    _ => false,
                };
                if !ok {
                    return refuse(format!(
                        "needs 1 < p <= q < inf or p < q = inf, got p = {p}, q = {q}"
                    ));
                }
            }
            GalleryTag::Rot2Q => {
                let q = ps.q.unwrap_or(Exponent::Finite(1.5));
                if let Some(reason) = rot_lq_violation(q) {
                    return refuse(reason);
                }
            }
            GalleryTag::ComposePQ => {
                let p = ps.p.unwrap_or(Exponent::Finite(1.5));
                let q = ps.q.unwrap_or(Exponent::ONE);
                if !matches!(p, Exponent::Finite(v) if v > 1.0 && v <= 2.0) {
                    return refuse(format!("needs 1 < p <= 2, got p = {p}"));
                }
                if let Some(reason) = rot_lq_violation(q) {
                    return refuse(reason);
                }
            }
            GalleryTag::BiorthInf => {
                let eta = ps.eta.unwrap_or(0.5);
                if !(eta > 0.0 && eta < 1.0) {
                    return refuse(format!("eta = {eta} must lie in (0, 1)"));
                }
                if ps.n.unwrap_or(3) < 2 {
                    return refuse("needs two biorthogonal pairs, so n >= 2".into());
                }
            }
            GalleryTag::ProjN2 if ps.n.unwrap_or(4) < 2 => {
                return refuse("the projection needs n >= 2".into());
            }
            GalleryTag::BlockN | GalleryTag::LplqFailN if ps.blocks.unwrap_or(5) < 1 => {
                return refuse("needs at least one block".into());
            }
            GalleryTag::LplqFailN => {
                let p = ps.p.unwrap_or(Exponent::TWO);
                let q = ps.q.unwrap_or(Exponent::TWO);
                if let Some(reason) = lplq_violation(p, q) {
                    return refuse(reason);
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for GalleryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.tag, self.params)
    }
}

fn fixed_exponent(name: &'static str, given: Option<Exponent>, required: Exponent) -> Result<()> {
    match given {
        Some(e) if e != required => Err(Error::param(name, format!("this tag fixes {name} = {required}"))),
        _ => Ok(()),
    }
}

fn rot_lq_violation(q: Exponent) -> Option<String> {
    match q {
        Exponent::Finite(v) if (1.0..2.0).contains(&v) => None,
        Exponent::Finite(2.0) => Some(
            "q = 2: the midpoint value |T(1/sqrt2, 1/sqrt2)|_q equals 1, so NA is not {+-e1, +-e2}; needs 1 <= q < 2".into(),
        ),
        _ => Some(format!(
            "q = {q}: the midpoint value |T(1/sqrt2, 1/sqrt2)|_q exceeds 1; needs 1 <= q < 2"
        )),
    }
}

fn lplq_violation(p: Exponent, q: Exponent) -> Option<String> {
    match (p, q) {
        (Exponent::Finite(p), Exponent::Finite(q)) if p > 1.0 && p <= q => None,
        _ => Some(format!("needs 1 < p <= q < inf, got p = {p}, q = {q}")),
    }
}

fn check_beta(beta: f64, closed_top: bool) -> Result<()> {
    let ok = beta > 0.0 && (beta < 1.0 || (closed_top && beta == 1.0));
    if ok {
        Ok(())
    } else {
        let range = if closed_top { "(0, 1]" } else { "(0, 1)" };
        Err(Error::param("beta", format!("{beta} outside {range}")))
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tag: Option<GalleryTag>,
    #[serde(default)]
    params: GalleryParams,
    matrix: Matrix,
    p: Exponent,
    q: Exponent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<SequenceSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<SequenceSpace>,
}

/// A real matrix acting between two sequence spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct OperatorPQ {
    matrix: Matrix,
    domain: SequenceSpace,
    range: SequenceSpace,
    id: Option<GalleryId>,
}

impl TryFrom<OperatorRepr> for OperatorPQ {
    type Error = Error;

    fn try_from(r: OperatorRepr) -> Result<Self> {
        let domain = match r.domain {
            Some(d) => d,
            None => SequenceSpace::new(r.matrix.cols(), r.p)?,
        };
        let range = match r.range {
            Some(s) => s,
            None => SequenceSpace::new(r.matrix.rows(), r.q)?,
        };
        if domain.p() != r.p || range.p() != r.q {
            return Err(Error::SpaceMismatch("p/q disagree with the stored spaces".into()));
        }
        let op = OperatorPQ::new(r.matrix, domain, range)?;
        Ok(match r.tag {
            Some(tag) => op.with_id(GalleryId::new(tag, r.params)),
            None => op,
        })
    }
}

impl From<OperatorPQ> for OperatorRepr {
    fn from(op: OperatorPQ) -> Self {
        let (tag, params) = match op.id {
            Some(id) => (Some(id.tag), id.params),
            None => (None, GalleryParams::default()),
        };
        OperatorRepr {
            tag,
            params,
            p: op.domain.p(),
            q: op.range.p(),
            matrix: op.matrix,
            domain: Some(op.domain),
            range: Some(op.range),
        }
    }
}

impl OperatorPQ {
    pub fn new(matrix: Matrix, domain: SequenceSpace, range: SequenceSpace) -> Result<Self> {
        if matrix.cols() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: matrix.cols(),
            });
        }
        if matrix.rows() != range.dim() {
            return Err(Error::DimensionMismatch {
                expected: range.dim(),
                got: matrix.rows(),
            });
        }
        Ok(OperatorPQ {
            matrix,
            domain,
            range,
            id: None,
        })
    }

    /// `matrix` from `ℓ_p^cols` to `ℓ_q^rows`.
    pub fn from_plain(matrix: Matrix, p: Exponent, q: Exponent) -> Result<Self> {
        let domain = SequenceSpace::new(matrix.cols(), p)?;
        let range = SequenceSpace::new(matrix.rows(), q)?;
        OperatorPQ::new(matrix, domain, range)
    }

    pub fn with_id(mut self, id: GalleryId) -> Self {
        self.id = Some(id);
        self
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn domain(&self) -> &SequenceSpace {
        &self.domain
    }

    pub fn range(&self) -> &SequenceSpace {
        &self.range
    }

    pub fn id(&self) -> Option<&GalleryId> {
        self.id.as_ref()
    }

    pub fn p(&self) -> Exponent {
        self.domain.p()
    }

    pub fn q(&self) -> Exponent {
        self.range.p()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                got: x.len(),
            });
        }
        Ok(self.matrix.mul_vec(x))
    }

    /// `‖T x‖` in the range norm. `x` must have the domain dimension.
    #[inline]
    pub fn image_norm(&self, x: &[f64]) -> f64 {
        self.range.norm(&self.matrix.mul_vec(x))
    }

    /// Transposed matrix between the dual spaces.
    pub fn adjoint(&self) -> OperatorPQ {
        OperatorPQ {
            matrix: self.matrix.transpose(),
            domain: self.range.dual(),
            range: self.domain.dual(),
            id: None,
        }
    }

    pub fn scaled(&self, c: f64) -> OperatorPQ {
        OperatorPQ {
            matrix: self.matrix.scaled(c),
            domain: self.domain.clone(),
            range: self.range.clone(),
            id: None,
        }
    }
}

/// `diag(beta, 1)` from `ℓ_p^2` to `ℓ_q^2`.
pub fn make_diag_beta(beta: f64, p: Exponent, q: Exponent) -> Result<OperatorPQ> {
    check_beta(beta, false)?;
    let op = OperatorPQ::from_plain(Matrix::diag(&[beta, 1.0]), p, q)?;
    let tag = match (p, q) {
        (Exponent::Finite(2.0), Exponent::Inf) => GalleryTag::Diag2Inf,
        (Exponent::Finite(a), Exponent::Finite(b)) if a == 2.0 && b == 2.0 => GalleryTag::Diag22,
        _ => GalleryTag::DiagPQ,
    };
    let mut params = GalleryParams::default().beta(beta);
    if tag == GalleryTag::DiagPQ {
        params = params.p(p).q(q);
    }
    Ok(op.with_id(GalleryId::new(tag, params)))
}

/// `[[β/2, −1/2], [β/2, 1/2]]` from `ℓ_2^2` to `ℓ_1^2`.
pub fn make_rot_l1(beta: f64) -> Result<OperatorPQ> {
    check_beta(beta, true)?;
    let m = Matrix::from_rows(vec![vec![beta / 2.0, -0.5], vec![beta / 2.0, 0.5]])?;
    Ok(OperatorPQ::from_plain(m, Exponent::TWO, Exponent::ONE)?
        .with_id(GalleryId::new(GalleryTag::Rot21, GalleryParams::default().beta(beta))))
}

fn rot_matrix(beta: f64, q: f64) -> Result<Matrix> {
    let s = 2f64.powf(-1.0 / q);
    Matrix::from_rows(vec![vec![beta * s, -s], vec![beta * s, s]])
}

/// The rotation scaled by `2^{-1/q}`, from `ℓ_2^2` to `ℓ_q^2` with `1 ≤ q < 2`.
pub fn make_rot_lq(beta: f64, q: Exponent) -> Result<OperatorPQ> {
    check_beta(beta, true)?;
    if let Some(reason) = rot_lq_violation(q) {
        return Err(Error::Hypothesis {
            tag: GalleryTag::Rot2Q.to_string(),
            reason,
        });
    }
    let m = rot_matrix(beta, q.value())?;
    Ok(OperatorPQ::from_plain(m, Exponent::TWO, q)?
        .with_id(GalleryId::new(GalleryTag::Rot2Q, GalleryParams::default().beta(beta).q(q))))
}

/// The `make_rot_lq` matrix read on `ℓ_p^2`, `1 < p ≤ 2`.
pub fn make_compose(beta: f64, p: Exponent, q: Exponent) -> Result<OperatorPQ> {
    check_beta(beta, false)?;
    if !matches!(p, Exponent::Finite(v) if v > 1.0 && v <= 2.0) {
        return Err(Error::param("p", format!("{p} outside (1, 2]")));
    }
    if let Some(reason) = rot_lq_violation(q) {
        return Err(Error::param("q", reason));
    }
    let m = rot_matrix(beta, q.value())?;
    Ok(OperatorPQ::from_plain(m, p, q)?.with_id(GalleryId::new(
        GalleryTag::ComposePQ,
        GalleryParams::default().beta(beta).p(p).q(q),
    )))
}

/// `x ↦ ((1−η) x_1, x_2)` from `space` into `ℓ_∞^2`.
pub fn make_biorth_inf(space: &SequenceSpace, eta: f64) -> Result<OperatorPQ> {
    let n = space.dim();
    if n < 2 {
        return Err(Error::param("dim", "needs dim >= 2"));
    }
    if !space.is_plain() {
        return Err(Error::Unsupported("coordinate functionals need a plain l_p space".into()));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::param("eta", format!("{eta} outside (0, 1)")));
    }
    let mut m = Matrix::zeros(2, n);
    m.set(0, 0, 1.0 - eta);
    m.set(1, 1, 1.0);
    let range = SequenceSpace::new(2, Exponent::Inf)?;
    Ok(OperatorPQ::new(m, space.clone(), range)?.with_id(GalleryId::new(
        GalleryTag::BiorthInf,
        GalleryParams::default().eta(eta).p(space.p()).n(n),
    )))
}

/// `E · diag(β, 1) · F` on the Auerbach system's own space.
pub fn make_auerbach_yy(basis: &AuerbachSystem, beta: f64) -> Result<OperatorPQ> {
    check_beta(beta, false)?;
    let space = basis
        .space
        .clone()
        .ok_or_else(|| Error::Unsupported("the Auerbach system carries no sequence space".into()))?;
    if space.dim() != 2 || basis.vectors.len() != 2 || basis.functionals.len() != 2 {
        return Err(Error::param("basis", "needs a two-dimensional system"));
    }
    let e = Matrix::from_rows(vec![
        vec![basis.vectors[0][0], basis.vectors[1][0]],
        vec![basis.vectors[0][1], basis.vectors[1][1]],
    ])?;
    let f = Matrix::from_rows(basis.functionals.clone())?;
    let m = e.matmul(&Matrix::diag(&[beta, 1.0]))?.matmul(&f)?;
    let mut params = GalleryParams::default().beta(beta);
    if space.is_plain() {
        params = params.p(space.p());
    }
    Ok(OperatorPQ::new(m, space.clone(), space)?.with_id(GalleryId::new(GalleryTag::AuerbachYY, params)))
}

/// `[R | 0]` on `ℓ_p^n` where `R` acts on `ℓ_p^2`.
pub fn make_proj_then(r: &OperatorPQ, n: usize) -> Result<OperatorPQ> {
    if r.domain().dim() != 2 || !r.domain().is_plain() {
        return Err(Error::param("R", "needs a plain two-dimensional domain"));
    }
    if n < 2 {
        return Err(Error::param("n", "needs n >= 2"));
    }
    let rows = r.range().dim();
    let mut m = Matrix::zeros(rows, n);
    for i in 0..rows {
        for j in 0..2 {
            m.set(i, j, r.matrix().get(i, j));
        }
    }
    let domain = SequenceSpace::new(n, r.p())?;
    let mut params = GalleryParams::default().n(n);
    if let Some(b) = r.id().and_then(|id| id.params.beta) {
        params = params.beta(b);
    }
    Ok(OperatorPQ::new(m, domain, r.range().clone())?.with_id(GalleryId::new(GalleryTag::ProjN2, params)))
}

/// Block diagonal operator from `ℓ_{p_outer}(X)` to `ℓ_{q_outer}(Y)`.
pub fn make_block(ops: &[OperatorPQ], p_outer: Exponent, q_outer: Exponent) -> Result<OperatorPQ> {
    let first = ops.first().ok_or(Error::Empty)?;
    let (dx, dy) = (first.domain().dim(), first.range().dim());
    for op in ops {
        if op.domain() != first.domain() || op.range() != first.range() {
            return Err(Error::SpaceMismatch("blocks must share domain and range spaces".into()));
        }
    }
    if !first.domain().is_plain() || !first.range().is_plain() {
        return Err(Error::Unsupported("blocks must act between plain spaces".into()));
    }
    let n = ops.len();
    let mut m = Matrix::zeros(n * dy, n * dx);
    for (k, op) in ops.iter().enumerate() {
        for i in 0..dy {
            for j in 0..dx {
                m.set(k * dy + i, k * dx + j, op.matrix().get(i, j));
            }
        }
    }
    let domain = SequenceSpace::blocked(n, dx, first.p(), p_outer)?;
    let range = SequenceSpace::blocked(n, dy, first.q(), q_outer)?;
    OperatorPQ::new(m, domain, range)
}

/// `N` blocks `diag(n/(n+1), 1)` from `ℓ_2(ℓ_2^2)` to `ℓ_∞(ℓ_2^2)`.
pub fn make_block_n(blocks: usize) -> Result<OperatorPQ> {
    if blocks == 0 {
        return Err(Error::param("blocks", "needs N >= 1"));
    }
    let ops = (1..=blocks)
        .map(|n| {
            let a = n as f64 / (n as f64 + 1.0);
            OperatorPQ::from_plain(Matrix::diag(&[a, 1.0]), Exponent::TWO, Exponent::TWO)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(make_block(&ops, Exponent::TWO, Exponent::Inf)?
        .with_id(GalleryId::new(GalleryTag::BlockN, GalleryParams::default().blocks(blocks))))
}

/// Blocks `diag(1 − 1/(2n), 1)`, `n = 1..N`, from `ℓ_p^{2N}` to `ℓ_q^{2N}`.
pub fn make_lplq_fail(p: Exponent, q: Exponent, blocks: usize) -> Result<OperatorPQ> {
    if let Some(reason) = lplq_violation(p, q) {
        return Err(Error::param("p", reason));
    }
    if blocks == 0 {
        return Err(Error::param("blocks", "needs N >= 1"));
    }
    let d: Vec<f64> = (1..=blocks)
        .flat_map(|n| [1.0 - 1.0 / (2.0 * n as f64), 1.0])
        .collect();
    Ok(OperatorPQ::from_plain(Matrix::diag(&d), p, q)?.with_id(GalleryId::new(
        GalleryTag::LplqFailN,
        GalleryParams::default().p(p).q(q).blocks(blocks),
    )))
}

/// Index of the first coordinate of block `n` (1-based) for a plain or
/// blocked space with blocks of size `block_dim`.
pub fn block_basis(space: &SequenceSpace, block_dim: usize, n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; space.dim()];
    e[(n - 1) * block_dim + i] = 1.0;
    e
}

/// Block size of a blocked space, or `None` for other shapes.
pub fn block_dim(space: &SequenceSpace) -> Option<usize> {
    match space.shape() {
        NormShape::Blocked { block_dim, .. } => Some(*block_dim),
        _ => None,
    }
}
