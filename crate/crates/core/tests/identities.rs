use std::sync::Arc;

use symphonic::identities::{
    exponent_sweep, identity_sides, run_identity, verify_lemma3, verify_sec3, verify_thm1_unweighted,
    verify_thm1_weighted, verify_thm6, Family, IdentityCase, IdentityKind, Sec3Form, Sec3Variant,
};
use symphonic::report::residual_norm;
use symphonic::sampling::sample_points;
use symphonic::zoo::{manifold, map};
use symphonic::{Manifold, Map};

fn samples(u: &Map, n: usize) -> Vec<Vec<f64>> {
    sample_points(u.source().domain(), n, 11)
}

fn euclid(n: usize) -> Arc<Manifold> {
    Arc::new(Manifold::euclidean(n))
}

#[test]
fn unweighted_identity_on_doubling() {
    let u = map("dilation:2").unwrap();
    let f = map("poly_quadratic").unwrap();
    let rep = verify_thm1_unweighted(&u, &f, &samples(&u, 100), 1e-8).unwrap();
    assert!(rep.verdict, "{:e}", rep.max_residual);
    assert!(rep.hypotheses_hold());
    let x = [0.25, -0.5];
    let s = identity_sides(IdentityKind::Thm1Unweighted, &u, &f, 2.0, 2, &x).unwrap();
    assert_eq!(s.scale, 16.0);
    assert_eq!(s.u_image, vec![0.5, -1.0]);
}

#[test]
fn isometries_preserve_divergence() {
    for (u, f) in [("rotation:0.7", "trig_map"), ("rotation3", "cubic_map_r3")] {
        let u = map(u).unwrap();
        let f = if f == "cubic_map_r3" {
            Map::from_strs("g", euclid(3), euclid(2), &["x1*x2 - x3^2", "sin(x3) + x1^3"]).unwrap()
        } else {
            map(f).unwrap()
        };
        let rep = verify_thm1_unweighted(&u, &f, &samples(&u, 100), 1e-10).unwrap();
        assert!(rep.verdict, "{}: {:e}", u.name(), rep.max_residual);
    }
}

#[test]
fn weighted_and_power_versions_on_doubling() {
    let u = map("dilation:2").unwrap();
    let f = map("mixed_map").unwrap();
    let s = samples(&u, 100);
    let rep = verify_thm1_weighted(&u, &f, 3.0, &s, 1e-7).unwrap();
    assert!(rep.verdict, "{:e}", rep.max_residual);
    let rep = verify_thm6(&u, &f, 2.0, 3, &s, 1e-7).unwrap();
    assert!(rep.verdict, "{:e}", rep.max_residual);
    let x = [0.1, 0.2];
    let t6 = identity_sides(IdentityKind::Thm6MVersion, &u, &f, 2.0, 3, &x).unwrap();
    assert!((t6.scale - 64.0).abs() < 1e-12);
}

#[test]
fn p_two_and_m_two_reduce_to_plain_cases() {
    let u = map("scaled_projection:1.5").unwrap();
    let f = map("trig_map").unwrap();
    let s = samples(&u, 40);
    let a = verify_thm1_unweighted(&u, &f, &s, 1e-7).unwrap();
    let b = verify_thm1_weighted(&u, &f, 2.0, &s, 1e-7).unwrap();
    for (x, y) in a.per_point.iter().zip(&b.per_point) {
        assert!(residual_norm(&x.lhs, &y.lhs) < 1e-12);
        assert!(residual_norm(&x.rhs, &y.rhs) < 1e-12);
    }
    let c = verify_thm6(&u, &f, 2.5, 2, &s, 1e-7).unwrap();
    let d = verify_thm1_weighted(&u, &f, 2.5, &s, 1e-7).unwrap();
    for (x, y) in c.per_point.iter().zip(&d.per_point) {
        assert!(residual_norm(&x.lhs, &y.lhs) < 1e-12 * x.lhs.iter().fold(1.0, |m: f64, v| m.max(v.abs())));
    }
    assert!(a.verdict && b.verdict && c.verdict && d.verdict);
}

#[test]
fn exponent_sweeps_recover_powers() {
    let lambdas = [1.0, 1.5, 2.0, 3.0];
    let cases = [
        (IdentityKind::Thm1Unweighted, 2.0, 2, 4.0, 1e-6),
        (IdentityKind::Thm1Weighted, 2.5, 2, 5.0, 1e-5),
        (IdentityKind::Thm1Weighted, 3.0, 2, 6.0, 1e-5),
        (IdentityKind::Thm6MVersion, 3.0, 3, 9.0, 1e-5),
        (IdentityKind::Sec3TTheorem, 2.0, 2, 4.0, 1e-6),
    ];
    for (family, u0) in [
        (Family::Dilation { dim: 2 }, "dilation:1"),
        (Family::ScaledProjection, "scaled_projection:1"),
    ] {
        let u = map(u0).unwrap();
        let f = map("mixed_map").unwrap();
        for (kind, p, m, expected, tol) in cases {
            if kind == IdentityKind::Sec3TTheorem && family == Family::ScaledProjection {
                continue;
            }
            let case = IdentityCase::new(kind, u.clone(), f.clone())
                .unwrap()
                .with_p(p)
                .with_m(m)
                .with_family(family);
            let sweep = exponent_sweep(&case, &lambdas).unwrap();
            assert_eq!(sweep.expected_exponent, expected);
            assert!(
                (sweep.fitted_exponent - expected).abs() < tol,
                "{kind} {family:?}: {}",
                sweep.fitted_exponent
            );
        }
    }
}

#[test]
fn stereographic_needs_the_correction_term() {
    let u = map("stereographic").unwrap();
    let f = map("scaled_rotation:1.3").unwrap();
    let s = samples(&u, 100);
    let thm = verify_thm1_unweighted(&u, &f, &s, 1e-7).unwrap();
    assert!(thm.max_residual > 1e-3);
    assert!(!thm.hypotheses_hold());
    for p in [2.0, 3.0] {
        let lem = verify_lemma3(&u, &f, p, &s, 1e-7).unwrap();
        assert!(lem.verdict, "p={p}: {:e}", lem.max_residual);
    }
}

#[test]
fn correction_coefficient_lambda_squared_only_fits_p_two() {
    let u = map("stereographic").unwrap();
    let f = map("scaled_rotation:1.3").unwrap();
    let x = [1.1, 0.4];
    let lf2: f64 = 1.3 * 1.3;
    for (p, should_fit) in [(2.0, true), (3.0, false)] {
        let s = identity_sides(IdentityKind::Lemma3, &u, &f, p, 2, &x).unwrap();
        let corr = s.correction.clone().unwrap();
        // Replace λ_f^{2p−2} by λ_f².
        let printed: Vec<f64> = corr
            .iter()
            .zip(&s.unscaled)
            .map(|(c, v)| c / lf2.powf(p - 1.0) * lf2 + s.scale * v)
            .collect();
        let r = residual_norm(&s.lhs, &printed);
        assert_eq!(r < 1e-7, should_fit, "p={p}: residual {r:e}");
        assert!(residual_norm(&s.lhs, &s.rhs) < 1e-7);
    }
}

#[test]
fn correction_form_reductions() {
    let u = map("scaled_projection:2").unwrap();
    let f = map("scaled_rotation:0.8").unwrap();
    let s = samples(&u, 50);
    let lem = verify_lemma3(&u, &f, 2.5, &s, 1e-7).unwrap();
    let thm = verify_thm1_weighted(&u, &f, 2.5, &s, 1e-7).unwrap();
    assert!(lem.verdict && thm.verdict);
    for (a, b) in lem.per_point.iter().zip(&thm.per_point) {
        assert!(residual_norm(&a.rhs, &b.rhs) < 1e-12);
    }
    let id = map("identity:2").unwrap();
    let sq = map("square_projection").unwrap();
    let rep = verify_lemma3(&sq, &id, 3.0, &samples(&sq, 50), 1e-9).unwrap();
    assert!(rep.verdict, "{:e}", rep.max_residual);
}

#[test]
fn trace_modified_examples() {
    let u = map("dilation:2").unwrap();
    let s = samples(&u, 60);
    let f = map("scaled_rotation:1.3").unwrap();
    let rep = verify_sec3(&u, &f, &s, 1e-8, Sec3Variant::T, Sec3Form::Theorem).unwrap();
    assert!(rep.verdict && rep.hypotheses_hold(), "{rep:#?}");
    let id = map("identity:2").unwrap();
    let nl = map("poly_quadratic").unwrap();
    assert!(
        verify_sec3(&nl, &id, &s, 1e-9, Sec3Variant::T, Sec3Form::Lemma)
            .unwrap()
            .verdict
    );
    let rep = verify_sec3(&u, &nl, &s, 1e-8, Sec3Variant::T, Sec3Form::Theorem).unwrap();
    assert!(rep.verdict, "{:e}", rep.max_residual);
    assert!(!rep.hypotheses_hold());

    // Lemma form with a non-totally-geodesic u.
    let sq = map("square_projection").unwrap();
    let rep = verify_sec3(&sq, &f, &samples(&sq, 60), 1e-7, Sec3Variant::T, Sec3Form::Lemma).unwrap();
    assert!(rep.verdict, "{:e}", rep.max_residual);

    // Source dimension 4: the S correction vanishes.
    let u4 = map("dilation:1.5:4").unwrap();
    let f4 = map("quartic_map4").unwrap();
    let s4 = samples(&u4, 40);
    let a = verify_sec3(&u4, &f4, &s4, 1e-7, Sec3Variant::S, Sec3Form::Theorem).unwrap();
    let b = verify_thm1_unweighted(&u4, &f4, &s4, 1e-7).unwrap();
    assert!(a.verdict && b.verdict);
    for (x, y) in a.per_point.iter().zip(&b.per_point) {
        assert!(residual_norm(&x.lhs, &y.lhs) < 1e-12 * x.lhs.iter().fold(1.0, |m: f64, v| m.max(v.abs())));
    }
}

#[test]
fn trace_dimension_mismatch_is_annotated() {
    let u = map("scaled_projection:2").unwrap();
    let f = map("poly_quadratic").unwrap();
    let rep = verify_sec3(&u, &f, &samples(&u, 30), 1e-7, Sec3Variant::T, Sec3Form::Theorem).unwrap();
    let h = rep
        .hypotheses
        .iter()
        .find(|h| h.name == "equal_trace_dimensions")
        .unwrap();
    assert!(!h.holds);
    assert!(!rep.verdict);
}

#[test]
fn curved_isometry_satisfies_weighted_identity() {
    let u = map("chart_transition_ab").unwrap();
    let f = Map::from_strs(
        "g",
        manifold("sphere_b").unwrap(),
        euclid(2),
        &["cos(x1) + sin(x2)*x1", "sin(x1)*cos(x2)^2"],
    )
    .unwrap();
    let s = samples(&u, 60);
    for p in [2.0, 3.0] {
        let rep = verify_thm1_weighted(&u, &f, p, &s, 1e-7).unwrap();
        assert!(rep.verdict && rep.hypotheses_hold(), "p={p}: {:e}", rep.max_residual);
    }
}

#[test]
fn verdicts_stable_under_doubling_samples() {
    let u = map("dilation:1.5").unwrap();
    let f = map("trig_map").unwrap();
    for kind in [
        IdentityKind::Thm1Unweighted,
        IdentityKind::Thm1Weighted,
        IdentityKind::Thm6MVersion,
    ] {
        let a = run_identity(kind, &u, &f, 2.5, 3, &samples(&u, 50), 1e-7).unwrap();
        let b = run_identity(kind, &u, &f, 2.5, 3, &samples(&u, 100), 1e-7).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert!(a.verdict);
    }
}

#[test]
fn singular_weights_are_excluded() {
    let u = map("dilation:2").unwrap();
    let f = Map::from_strs("c", euclid(2), euclid(2), &["1", "x1 - x1"]).unwrap();
    let rep = verify_thm1_weighted(&u, &f, 1.5, &samples(&u, 10), 1e-7).unwrap();
    assert_eq!(rep.excluded.len(), 10);
    assert!(!rep.verdict);
}
