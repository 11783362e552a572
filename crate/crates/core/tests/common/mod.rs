//! Seeded property suites shared by the property tests and the acceptance run.
#![allow(dead_code)]

use normlab::attainment::sbpb_profile;
use normlab::convexity::{auerbach_2d, delta_closed_form, delta_numeric};
use normlab::normcomp::{opnorm, opnorm_multistart, opnorm_oracle, NormOptions};
use normlab::{Exponent, Matrix, OperatorPQ, SequenceSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Suite = Result<(), String>;

pub const EXPONENTS: [Exponent; 5] = [
    Exponent::ONE,
    Exponent::Finite(1.5),
    Exponent::TWO,
    Exponent::Finite(3.0),
    Exponent::Inf,
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_rows(
        (0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect(),
    )
    .unwrap()
}

pub fn exponent(rng: &mut impl Rng) -> Exponent {
    EXPONENTS[rng.random_range(0..EXPONENTS.len())]
}

pub fn norm(op: &OperatorPQ) -> f64 {
    opnorm(op, 1e-10).unwrap().value
}

pub fn duality(cases: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    for k in 0..cases {
        let n = 2 + k % 2;
        let op = OperatorPQ::from_plain(matrix(&mut r, n, n), exponent(&mut r), exponent(&mut r)).unwrap();
        let (a, b) = (norm(&op), norm(&op.adjoint()));
        if (a - b).abs() > 1e-6 {
            return Err(format!("case {k}: |T| = {a}, |T*| = {b}, {:?}", op.matrix()));
        }
    }
    Ok(())
}

pub fn scaling(cases: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    for k in 0..cases {
        let op = OperatorPQ::from_plain(matrix(&mut r, 2, 2 + k % 2), exponent(&mut r), exponent(&mut r)).unwrap();
        let c: f64 = r.random_range(-5.0..5.0);
        let (a, b) = (norm(&op.scaled(c)), c.abs() * norm(&op));
        if (a - b).abs() > 1e-9 * b.max(1e-300) {
            return Err(format!("case {k}: |cT| = {a}, |c||T| = {b}"));
        }
    }
    Ok(())
}

pub fn column_bound(cases: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    for k in 0..cases {
        let q = exponent(&mut r);
        let m = matrix(&mut r, 2 + k % 2, 2 + k % 2);
        let cols = (0..m.cols())
            .map(|j| normlab::pnorm(&m.column(j), q).unwrap())
            .fold(0.0, f64::max);
        let op = OperatorPQ::from_plain(m, Exponent::ONE, q).unwrap();
        let v = norm(&op);
        if (v - cols).abs() > 1e-9 {
            return Err(format!("case {k}: |T| = {v}, max column = {cols}"));
        }
    }
    Ok(())
}

/// `p ↦ ‖T‖_{p→q}` is nondecreasing along `1 < 1.5 < 2 < 3`.
pub fn monotone_domain(cases: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let chain = [1.0, 1.5, 2.0, 3.0].map(Exponent::Finite);
    for k in 0..cases {
        let m = matrix(&mut r, 2, 2 + k % 2);
        let q = exponent(&mut r);
        let vals: Vec<f64> = chain
            .iter()
            .map(|&p| norm(&OperatorPQ::from_plain(m.clone(), p, q).unwrap()))
            .collect();
        if vals.windows(2).any(|w| w[0] > w[1] + 1e-9) {
            return Err(format!("case {k}: values {vals:?} along p = 1, 1.5, 2, 3"));
        }
    }
    Ok(())
}

pub fn sweep_oracle(cases: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    for k in 0..cases {
        let op = OperatorPQ::from_plain(matrix(&mut r, 2, 2), exponent(&mut r), exponent(&mut r)).unwrap();
        let (a, o) = (norm(&op), opnorm_oracle(&op, 100_000).unwrap().value);
        if (a - o).abs() > 1e-3 || o > a + 1e-9 {
            return Err(format!("case {k}: sweep {a}, oracle {o}"));
        }
    }
    Ok(())
}

pub fn multistart_sweep(cases: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    for k in 0..cases {
        let op = OperatorPQ::from_plain(matrix(&mut r, 2, 2), exponent(&mut r), exponent(&mut r)).unwrap();
        let a = norm(&op);
        let m = opnorm_multistart(&op, &NormOptions { seed: k as u64, ..NormOptions::with_tol(1e-10) })
            .unwrap()
            .value;
        if (a - m).abs() > 1e-6 {
            return Err(format!("case {k}: sweep {a}, multistart {m}, {op:?}"));
        }
    }
    Ok(())
}

pub fn witness_validity(cases: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    for k in 0..cases {
        let n = 2 + k % 2;
        let op = OperatorPQ::from_plain(matrix(&mut r, n, n), exponent(&mut r), exponent(&mut r)).unwrap();
        let res = opnorm(&op, 1e-8).unwrap();
        for w in &res.witnesses {
            let unit = (op.domain().norm(w) - 1.0).abs();
            let gap = (op.image_norm(w) - res.value).abs();
            if unit > 1e-10 || gap > res.tol {
                return Err(format!("case {k}: witness {w:?} unit error {unit}, value gap {gap}"));
            }
        }
    }
    Ok(())
}

/// Random linear images of `ℓ_p²` plus the plain spaces.
pub fn auerbach_residuals(cases: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let mut spaces: Vec<SequenceSpace> = EXPONENTS.iter().map(|&p| SequenceSpace::new(2, p).unwrap()).collect();
    while spaces.len() < EXPONENTS.len() + cases {
        let map = [
            [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)],
            [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)],
        ];
        if let Ok(s) = SequenceSpace::linear_image(exponent(&mut r), map) {
            spaces.push(s);
        }
    }
    for s in &spaces {
        let sys = auerbach_2d(s).map_err(|e| format!("{s}: {e}"))?;
        let res = sys.residual(s);
        if res > 1e-8 {
            return Err(format!("{s}: residual {res}"));
        }
    }
    Ok(())
}

pub fn rho_monotone(cases: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let eps = [0.1, 0.25, 0.5, 0.75, 1.0, 1.25];
    for k in 0..cases {
        let raw = OperatorPQ::from_plain(matrix(&mut r, 2, 2), exponent(&mut r), exponent(&mut r)).unwrap();
        let op = raw.scaled(1.0 / norm(&raw));
        let prof = sbpb_profile(&op, &eps).map_err(|e| e.to_string())?;
        if prof.rho.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("case {k}: rho {:?}", prof.rho));
        }
        if prof.eta.iter().any(|&e| !(0.0..=1.0 + 1e-12).contains(&e)) {
            return Err(format!("case {k}: eta {:?}", prof.eta));
        }
    }
    Ok(())
}

pub fn delta_closed_forms() -> Suite {
    let eps = [0.25, 0.5, 1.0, 1.5];
    for p in [2.0, 3.0, 4.0] {
        let s = SequenceSpace::new(2, Exponent::Finite(p)).unwrap();
        let d = delta_numeric(&s, &eps).map_err(|e| e.to_string())?;
        for (e, v) in eps.iter().zip(&d.delta) {
            let c = delta_closed_form(p, *e);
            if (v - c).abs() > 2e-3 {
                return Err(format!("p = {p}, eps = {e}: {v} vs {c}"));
            }
        }
        if d.delta.windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("p = {p}: delta not monotone {:?}", d.delta));
        }
    }
    Ok(())
}
