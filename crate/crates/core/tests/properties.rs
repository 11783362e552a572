mod common;

use normlab::attainment::{sbpb_profile, sbpb_witness};
use normlab::convexity::kim_lee_check;
use normlab::normcomp::{objective_grad, opnorm};
use normlab::operators::{GalleryId, GalleryParams, GalleryTag};
use normlab::repro::{default_cases, reproduce, ReproReport, COVERAGE};
use normlab::{Exponent, Matrix, OperatorPQ, SequenceSpace};
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = Exponent> {
    prop::sample::select(common::EXPONENTS.to_vec())
}

fn matrix(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), n)
        .prop_filter_map("nonzero", |rows| {
            let m = Matrix::from_rows(rows).ok()?;
            (m.max_abs() > 1e-3).then_some(m)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn duality_2x2(m in matrix(2), p in exponent(), q in exponent()) {
        let op = OperatorPQ::from_plain(m, p, q).unwrap();
        let (a, b) = (common::norm(&op), common::norm(&op.adjoint()));
        prop_assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
    }

    #[test]
    fn scaling_is_exact(m in matrix(2), p in exponent(), q in exponent(), c in -4.0f64..4.0) {
        let op = OperatorPQ::from_plain(m, p, q).unwrap();
        let (a, b) = (common::norm(&op.scaled(c)), c.abs() * common::norm(&op));
        prop_assert!((a - b).abs() <= 1e-9 * b.max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn gradient_matches_differences(
        m in matrix(3),
        q in prop::sample::select(vec![1.5, 2.0, 3.0]),
        x in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        prop_assume!(x.iter().any(|v| v.abs() > 0.1));
        let op = OperatorPQ::from_plain(m, Exponent::TWO, Exponent::Finite(q)).unwrap();
        prop_assume!(op.apply(&x).unwrap().iter().all(|v| v.abs() > 1e-3));
        let g = objective_grad(&op, &x).unwrap();
        let f = |y: &[f64]| op.apply(y).unwrap().iter().map(|v| v.abs().powf(q)).sum::<f64>();
        let h = 1e-6;
        for i in 0..3 {
            let (mut a, mut b) = (x.clone(), x.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (f(&a) - f(&b)) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "coordinate {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn witness_iff_eta_below(m in matrix(2), p in exponent(), q in exponent(), eps in 0.2f64..1.2, eta in 0.0f64..0.5) {
        let raw = OperatorPQ::from_plain(m, p, q).unwrap();
        let op = raw.scaled(1.0 / common::norm(&raw));
        let computed = sbpb_profile(&op, &[eps]).unwrap().eta[0];
        prop_assume!((computed - eta).abs() > 1e-6);
        let w = sbpb_witness(&op, eps, eta).unwrap();
        prop_assert_eq!(w.is_some(), computed < eta);
        if let Some(w) = w {
            prop_assert!(op.image_norm(w.coords()) > 1.0 - eta - 1e-9);
        }
    }

    #[test]
    fn diag_refusals_match_hypotheses(beta in -0.5f64..1.5, p in exponent(), q in exponent()) {
        let id = GalleryId::new(GalleryTag::DiagPQ, GalleryParams::default().beta(beta).p(p).q(q));
        let inside = beta > 0.0 && beta < 1.0 && p.value() > 1.0 && p.value() <= q.value() && !p.is_inf();
        prop_assert_eq!(id.check_hypotheses().is_ok(), inside);
    }

    #[test]
    fn rot_refusals_match_hypotheses(beta in -0.5f64..1.5, q in prop::sample::select(vec![1.0, 1.2, 1.5, 1.99, 2.0, 2.5])) {
        let id = GalleryId::new(GalleryTag::Rot2Q, GalleryParams::default().beta(beta).q(Exponent::Finite(q)));
        let inside = beta > 0.0 && beta <= 1.0 && q < 2.0;
        prop_assert_eq!(id.check_hypotheses().is_ok(), inside);
    }
}

#[test]
fn duality_3x3() {
    common::duality(60, 11).unwrap();
}

#[test]
fn scaling_seeded() {
    common::scaling(60, 12).unwrap();
}

#[test]
fn column_bound() {
    common::column_bound(80, 13).unwrap();
}

#[test]
fn monotone_domain_exponent() {
    common::monotone_domain(60, 14).unwrap();
}

#[test]
fn sweep_agrees_with_oracle_on_200_operators() {
    common::sweep_oracle(200, 15).unwrap();
}

#[test]
fn multistart_agrees_with_sweep() {
    common::multistart_sweep(60, 16).unwrap();
}

#[test]
fn witnesses_are_valid() {
    common::witness_validity(80, 17).unwrap();
}

#[test]
fn auerbach_residuals() {
    common::auerbach_residuals(30, 18).unwrap();
}

#[test]
fn rho_is_monotone() {
    common::rho_monotone(30, 19).unwrap();
}

#[test]
fn delta_against_closed_form() {
    common::delta_closed_forms().unwrap();
}

#[test]
fn kim_lee_coherent_on_uniformly_convex_planes() {
    for p in [1.5, 2.0, 3.0] {
        let s = SequenceSpace::new(2, Exponent::Finite(p)).unwrap();
        let r = kim_lee_check(&s, &[0.25, 0.5, 1.0], 16, 3).unwrap();
        assert!(r.coherent, "p = {p}: {:?}", r.min_eta);
        assert!(r.all_positive(), "p = {p}: {:?}", r.min_eta);
    }
}

#[test]
fn gallery_norms_are_one() {
    for id in default_cases() {
        let op = id.build().unwrap();
        let v = opnorm(&op, 1e-10).unwrap().value;
        assert!((v - 1.0).abs() <= 1e-8, "{id}: {v}");
    }
}

#[test]
fn reports_are_reproducible_and_round_trip() {
    let id = GalleryId::new(GalleryTag::ComposePQ, GalleryParams::default().beta(0.9));
    let mut a = reproduce(&id, 1e-6, 5).unwrap();
    let mut b = reproduce(&id, 1e-6, 5).unwrap();
    a.runtime_ms = 0;
    b.runtime_ms = 0;
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let back: ReproReport = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(back, a);
}

#[test]
fn coverage_table_names_real_harnesses() {
    let known = ["profile", "certificates", "kim_lee", "delta", "monotonicity", "auerbach", "positive_batch"];
    let tags: Vec<&str> = default_cases().iter().map(|id| id.tag.as_str()).collect();
    for (statement, harnesses) in COVERAGE {
        assert!(!harnesses.is_empty(), "{statement}");
        for h in *harnesses {
            assert!(known.contains(h) || tags.contains(h), "{statement}: unknown harness {h}");
        }
    }
    for tag in GalleryTag::ALL {
        assert!(COVERAGE.iter().any(|(_, hs)| hs.contains(&tag.as_str())), "{tag} not covered");
    }
}
