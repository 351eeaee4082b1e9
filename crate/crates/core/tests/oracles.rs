use proptest::prelude::*;
use symphonic::autodiff::{evaluate_jet2, finite_difference_jet2_default};
use symphonic::expr::Expression;
use symphonic::identities::composable_samples;
use symphonic::maps::{compose, verify_chain_rule_main1};
use symphonic::sampling::sample_points;
use symphonic::tensors::frame::{divergence_frame_sum, sigma_frame_sum, weight_sq_frame_sum};
use symphonic::tensors::{energy_densities, weight_sq, SigmaKind, TensorField, WeightRule};
use symphonic::zoo::{catalog, manifold, map};
use symphonic::{Map, Matrix};

const KINDS: [SigmaKind; 8] = [
    SigmaKind::Symphonic,
    SigmaKind::Power { m: 2 },
    SigmaKind::Power { m: 3 },
    SigmaKind::TraceT,
    SigmaKind::TraceS,
    SigmaKind::TraceTPower { m: 3, p: 2.5 },
    SigmaKind::TraceSPower { m: 4, p: 3.0 },
    SigmaKind::TraceTPower { m: 2, p: 2.0 },
];

fn zoo_maps() -> Vec<Map> {
    catalog().into_iter().filter_map(|e| e.map().cloned()).collect()
}

fn fd_matches(e: &Expression, x: &[f64]) -> f64 {
    let ad = evaluate_jet2(e, x).unwrap();
    let fd = finite_difference_jet2_default(e, x).unwrap();
    fd.max_scaled_diff(&ad)
}

#[test]
fn autodiff_matches_differences_on_zoo_corpus() {
    let mut corpus: Vec<(Expression, Vec<Vec<f64>>)> = Vec::new();
    for m in zoo_maps() {
        let pts = sample_points(m.source().domain(), 10, 3);
        for src in m.component_sources().unwrap_or_default() {
            corpus.push((Expression::parse(&src, m.source_dim()).unwrap(), pts.clone()));
        }
        for src in m.source().metric().sources() {
            corpus.push((Expression::parse(&src, m.source_dim()).unwrap(), pts.clone()));
        }
    }
    assert!(corpus.len() > 50);
    for (e, pts) in &corpus {
        for x in pts {
            let d = fd_matches(e, x);
            assert!(d < 1e-5, "{} at {x:?}: {d:e}", e.source());
        }
    }
}

#[test]
fn plain_value_equals_jet_value() {
    let srcs = [
        "x1/x2 + x2^3",
        "atan2(x1, x2)*exp(x1)",
        "sqrt(x1^2 + 1)/(x2 - 3)",
        "log(2 + sin(x1*x2))^2.5",
    ];
    for s in srcs {
        let e = Expression::parse(s, 2).unwrap();
        let x = [0.37, -1.21];
        assert_eq!(e.evaluate(&x).unwrap(), evaluate_jet2(&e, &x).unwrap().value, "{s}");
    }
}

fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (1usize..=3).prop_map(|k| format!("x{k}")),
        prop_oneof![Just("0.5"), Just("1.3"), Just("2"), Just("pi")].prop_map(String::from),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        let two = (inner.clone(), inner.clone());
        prop_oneof![
            two.clone().prop_map(|(a, b)| format!("({a} + {b})")),
            two.clone().prop_map(|(a, b)| format!("({a} - {b})")),
            two.clone().prop_map(|(a, b)| format!("({a} * {b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            inner.clone().prop_map(|a| format!("log(2 + sin({a}))")),
            two.clone().prop_map(|(a, b)| format!("atan2({a}, 2 + ({b})^2)")),
            two.prop_map(|(a, b)| format!("({a})/(2 + cos({b}))")),
        ]
    })
}

fn any_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (1usize..=3).prop_map(|k| format!("x{k}")),
        prop_oneof![
            Just("0"),
            Just("7"),
            Just("0.125"),
            Just("1e-3"),
            Just("2.5E+4"),
            Just("pi")
        ]
        .prop_map(String::from),
    ];
    leaf.prop_recursive(4, 40, 2, |inner| {
        let two = (inner.clone(), inner.clone());
        let fname = prop_oneof![
            Just("sin"),
            Just("cos"),
            Just("tan"),
            Just("exp"),
            Just("log"),
            Just("sqrt"),
            Just("abs")
        ];
        prop_oneof![
            (
                two.clone(),
                prop_oneof![Just("+"), Just("-"), Just("*"), Just("/"), Just("^")]
            )
                .prop_map(|((a, b), op)| format!("{a} {op} {b}")),
            two.clone().prop_map(|(a, b)| format!("({a}) ^ ({b})")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.clone().prop_map(|a| format!("({a})")),
            (fname, inner.clone()).prop_map(|(f, a)| format!("{f}({a})")),
            two.prop_map(|(a, b)| format!("atan2({a}, {b})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_parse_is_a_fixpoint(src in any_expr()) {
        let e = Expression::parse(&src, 3).unwrap();
        let printed = e.to_string();
        let again = Expression::parse(&printed, 3).unwrap();
        prop_assert!(e.root().same_structure(again.root()), "{} -> {}", src, printed);
        prop_assert_eq!(again.to_string(), printed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn autodiff_matches_differences_on_random_expressions(
        src in smooth_expr(),
        x in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        let e = Expression::parse(&src, 3).unwrap();
        let d = fd_matches(&e, &x);
        prop_assert!(d < 1e-5, "{} at {:?}: {:e}", src, x, d);
    }
}

fn rel(a: &Matrix, b: &Matrix) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1.0)
}

#[test]
fn frame_sums_match_matrix_powers() {
    for m in zoo_maps() {
        for x in sample_points(m.source().domain(), 8, 2) {
            let jet = m.map_jet(&x).unwrap();
            for kind in KINDS {
                let a = TensorField::new(m.clone(), kind).unwrap().components(&x).unwrap();
                let b = sigma_frame_sum(&m, kind, &x, None).unwrap();
                assert!(rel(&b, &a) < 1e-10, "{} {kind:?}: {:e}", m.name(), rel(&b, &a));
            }
            for rule in [WeightRule::Unit, WeightRule::Pullback, WeightRule::PowerNorm { m: 3 }] {
                let a = weight_sq(rule, &jet.p_endo);
                let b = weight_sq_frame_sum(&m, rule, &x, None).unwrap();
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{} {rule:?}", m.name());
            }
        }
    }
}

fn rotation(k: usize, angle: f64) -> Matrix {
    // Product of Givens rotations in consecutive planes.
    let mut q = Matrix::identity(k);
    for i in 0..k.saturating_sub(1) {
        let (s, c) = (angle * (i + 1) as f64).sin_cos();
        let g = Matrix::from_fn(k, k, |r, col| match (r, col) {
            (r, col) if r == i && col == i => c,
            (r, col) if r == i + 1 && col == i + 1 => c,
            (r, col) if r == i && col == i + 1 => -s,
            (r, col) if r == i + 1 && col == i => s,
            (r, col) if r == col => 1.0,
            _ => 0.0,
        });
        q = q.matmul(&g);
    }
    q
}

#[test]
fn frame_divergence_matches_matrix_path_and_is_frame_independent() {
    let ids = [
        "stereographic",
        "hopf",
        "square_projection",
        "trig_map",
        "cubic_map",
        "chart_transition_ab",
        "equator",
    ];
    for id in ids {
        let m = map(id).unwrap();
        let q = rotation(m.source_dim(), 0.83);
        for x in sample_points(m.source().domain(), 4, 9) {
            for (kind, rule, p) in [
                (SigmaKind::Symphonic, WeightRule::Unit, 2.0),
                (SigmaKind::Symphonic, WeightRule::Pullback, 3.0),
                (SigmaKind::Power { m: 3 }, WeightRule::PowerNorm { m: 3 }, 2.5),
                (SigmaKind::TraceT, WeightRule::Unit, 2.0),
                (SigmaKind::TraceSPower { m: 3, p: 2.5 }, WeightRule::Unit, 2.0),
            ] {
                let t = TensorField::new(m.clone(), kind).unwrap();
                let a = if rule == WeightRule::Unit {
                    t.divergence(&x).unwrap().div
                } else {
                    t.weighted_divergence(rule, p, &x).unwrap().div
                };
                let b = divergence_frame_sum(&m, kind, rule, p, &x, None).unwrap();
                let c = divergence_frame_sum(&m, kind, rule, p, &x, Some(&q)).unwrap();
                let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
                for i in 0..a.len() {
                    assert!(
                        (a[i] - b[i]).abs() < 1e-9 * scale,
                        "{id} {kind:?}: {} vs {}",
                        a[i],
                        b[i]
                    );
                    assert!(
                        (b[i] - c[i]).abs() < 1e-9 * scale,
                        "{id} {kind:?} rotated: {} vs {}",
                        b[i],
                        c[i]
                    );
                }
            }
        }
    }
}

#[test]
fn rotated_frame_sigma_is_unchanged() {
    let m = map("hopf").unwrap();
    let q = rotation(3, 1.1);
    for x in sample_points(m.source().domain(), 10, 4) {
        for kind in KINDS {
            let a = sigma_frame_sum(&m, kind, &x, None).unwrap();
            let b = sigma_frame_sum(&m, kind, &x, Some(&q)).unwrap();
            assert!(rel(&b, &a) < 1e-10);
        }
    }
}

#[test]
fn energies_are_chart_independent() {
    let t = map("chart_transition_ab").unwrap();
    let g = Map::from_strs(
        "g",
        manifold("sphere_b").unwrap(),
        std::sync::Arc::new(symphonic::Manifold::euclidean(2)),
        &["cos(x1)*x2", "sin(x1)^2 + x2"],
    )
    .unwrap();
    let gt = compose(&g, &t).unwrap();
    for x in sample_points(t.source().domain(), 20, 1) {
        let y = t.evaluate(&x).unwrap();
        let a = energy_densities(&gt, 3, &x).unwrap();
        let b = energy_densities(&g, 3, &y).unwrap();
        for (u, v) in [(a.e_du, b.e_du), (a.e_pullback, b.e_pullback), (a.e_m, b.e_m)] {
            assert!((u - v).abs() < 1e-11 * v.abs().max(1.0));
        }
    }
}

#[test]
fn chain_rule_over_all_composable_zoo_pairs() {
    let maps = zoo_maps();
    let mut pairs = 0;
    for u in &maps {
        for f in &maps {
            if u.target_dim() != f.source_dim() || u.target().metric() != f.source().metric() {
                continue;
            }
            let samples = composable_samples(u, f, 100, 17).unwrap();
            if samples.len() < 100 {
                continue;
            }
            pairs += 1;
            for x in &samples {
                let rep = verify_chain_rule_main1(f, u, x, 1e-8).unwrap();
                let scale = rep.per_point[0].rhs.iter().fold(1.0f64, |s, v| s.max(v.abs()));
                assert!(
                    rep.max_residual < 1e-8 * scale,
                    "{} after {}: {:e}",
                    f.name(),
                    u.name(),
                    rep.max_residual
                );
            }
        }
    }
    assert!(pairs > 50, "{pairs}");
}
