//! Closed forms for the operator norm.
//!
//! Each branch is a finite maximization: over rows (range `ℓ_∞`), sign
//! vectors of the range (range `ℓ_1`), columns (domain `ℓ_1`), cube
//! vertices (domain `ℓ_∞`), or the top singular value (`2 → 2`).

use nalgebra::DMatrix;

use crate::operators::OperatorPQ;
use crate::spaces::Exponent;

/// Largest sign enumeration we are willing to do.
const MAX_SIGN_DIM: usize = 16;

pub(crate) struct ExactMax {
    pub value: f64,
    pub maximizers: Vec<Vec<f64>>,
}

impl ExactMax {
    fn from_candidates(cands: impl IntoIterator<Item = (f64, Option<Vec<f64>>)>) -> Option<Self> {
        let cands: Vec<(f64, Vec<f64>)> = cands
            .into_iter()
            .filter_map(|(v, x)| x.map(|x| (v, x)))
            .collect();
        let value = cands.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        if !value.is_finite() {
            return None;
        }
        let cut = value - 1e-12 * value.max(1e-300);
        let maximizers = cands.into_iter().filter(|c| c.0 >= cut).map(|c| c.1).collect();
        Some(ExactMax { value, maximizers })
    }
}

fn sign_vectors(n: usize) -> impl Iterator<Item = Vec<f64>> {
    // the first sign is fixed to + since x and -x give the same value
    (0..1usize << (n - 1)).map(move |mask| {
        (0..n)
            .map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 })
            .collect()
    })
}

/// `‖T‖` in closed form when one of the special structures applies.
/// Never called for the zero operator.
pub(crate) fn exact_norm(op: &OperatorPQ) -> Option<ExactMax> {
    let a = op.matrix();
    let dom = op.domain();
    let ran = op.range();
    let (rows, cols) = (a.rows(), a.cols());

    if cols == 1 {
        let c = a.column(0);
        let s = dom.norm(&[1.0]);
        let v = ran.norm(&c) / s;
        return Some(ExactMax {
            value: v,
            maximizers: vec![vec![1.0 / s]],
        });
    }
    if ran.is_plain() && (rows == 1 || ran.p().is_inf()) {
        // ‖Tx‖_∞ = max_i |⟨row_i, x⟩|
        return ExactMax::from_candidates(
            (0..rows).map(|i| (dom.dual_norm(a.row(i)), dom.dual_attainer(a.row(i)))),
        );
    }
    if ran.is_plain() && ran.p() == Exponent::ONE && rows <= MAX_SIGN_DIM {
        // ‖Tx‖_1 = max_s ⟨Tᵀs, x⟩
        return ExactMax::from_candidates(sign_vectors(rows).map(|s| {
            let w = a.tr_mul_vec(&s);
            (dom.dual_norm(&w), dom.dual_attainer(&w))
        }));
    }
    if dom.is_plain() && dom.p() == Exponent::ONE {
        return ExactMax::from_candidates((0..cols).map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            (ran.norm(&a.column(j)), Some(e))
        }));
    }
    if dom.is_plain() && dom.p().is_inf() && cols <= MAX_SIGN_DIM {
        return ExactMax::from_candidates(sign_vectors(cols).map(|x| (op.image_norm(&x), Some(x))));
    }
    if dom.is_plain() && ran.is_plain() && dom.p() == Exponent::TWO && ran.p() == Exponent::TWO {
        let m = DMatrix::from_row_slice(rows, cols, a.as_slice());
        let svd = m.svd(false, true);
        let v_t = svd.v_t?;
        let (k, &s) = svd
            .singular_values
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))?;
        let v: Vec<f64> = v_t.row(k).iter().copied().collect();
        let v = dom.normalize(&v)?;
        return Some(ExactMax {
            value: s.max(op.image_norm(&v)),
            maximizers: vec![v],
        });
    }
    None
}
