//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symphonic::analysis::{is_p_symphonic, morphism_probe_test, prop2_constraint, Jet2Data};
use symphonic::autodiff::{evaluate_jet2, finite_difference_jet2_default};
use symphonic::expr::Expression;
use symphonic::identities::{
    composable_samples, exponent_sweep, identity_sides, run_identity, Family, IdentityCase, IdentityKind,
};
use symphonic::maps::verify_chain_rule_main1;
use symphonic::report::{residual_norm, ResidualReport};
use symphonic::sampling::{sample_points, DEFAULT_SAMPLES, DEFAULT_SEED};
use symphonic::tensors::frame::sigma_frame_sum;
use symphonic::tensors::{SigmaKind, TensorField};
use symphonic::zoo::{self, Tag};
use symphonic::{Map, Matrix};

type Outcome = Result<String, String>;
type Criterion = Box<dyn Fn() -> Outcome>;

const LAMBDAS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
const PLANE_MAPS: [&str; 5] = ["poly_quadratic", "trig_map", "mixed_map", "cubic_map", "poly_scalar"];

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn m(id: &str) -> Map {
    zoo::map(id).unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn report(kind: IdentityKind, u: &Map, f: &Map, p: f64, mm: u32, tol: f64) -> ResidualReport {
    let s = composable_samples(u, f, DEFAULT_SAMPLES, DEFAULT_SEED).unwrap();
    assert_eq!(s.len(), DEFAULT_SAMPLES, "{} ∘ {}", f.name(), u.name());
    run_identity(kind, u, f, p, mm, &s, tol).unwrap()
}

fn sweep(kind: IdentityKind, f: &Map, p: f64, mm: u32) -> f64 {
    let family = Family::Dilation { dim: f.source_dim() };
    let case = IdentityCase::new(kind, family.build(1.0).unwrap(), f.clone())
        .unwrap()
        .with_p(p)
        .with_m(mm)
        .with_family(family);
    exponent_sweep(&case, &LAMBDAS).unwrap().fitted_exponent
}

/// Worst absolute residual, worst exponent error, and the failing cases, over
/// the dilation family and the plane maps.
struct FamilyRun {
    worst: f64,
    worst_fit: f64,
    failures: Vec<String>,
}

fn dilation_family(kind: IdentityKind, p: f64, mm: u32, tol: f64, fit_tol: f64) -> FamilyRun {
    let mut run = FamilyRun {
        worst: 0.0,
        worst_fit: 0.0,
        failures: Vec::new(),
    };
    for id in PLANE_MAPS {
        let f = m(id);
        for l in LAMBDAS {
            let u = zoo::dilation(l, 2).unwrap();
            let r = report(kind, &u, &f, p, mm, tol);
            run.worst = run.worst.max(r.max_residual);
            if !(r.verdict && r.excluded.len() < r.per_point.len()) {
                let mag = r
                    .per_point
                    .iter()
                    .flat_map(|q| q.rhs.iter())
                    .fold(0.0f64, |a, v| a.max(v.abs()));
                let rel = r
                    .per_point
                    .iter()
                    .map(|q| q.residual / q.rhs.iter().fold(1.0f64, |a, v| a.max(v.abs())))
                    .fold(0.0, f64::max);
                run.failures.push(format!(
                    "{kind} p={p} m={mm} λ={l} f={id}: residual {:.2e} with |rhs| up to {mag:.2e} (relative {rel:.1e})",
                    r.max_residual
                ));
            }
        }
        let fit = (sweep(kind, &f, p, mm) - kind.expected_exponent(p, mm)).abs();
        run.worst_fit = run.worst_fit.max(fit);
        if fit >= fit_tol {
            run.failures
                .push(format!("{kind} p={p} m={mm} f={id}: exponent off by {fit:e}"));
        }
    }
    run
}

fn criterion1() -> Outcome {
    let t = Instant::now();
    let run = dilation_family(IdentityKind::Thm1Unweighted, 2.0, 2, 1e-7, 1e-5);
    let secs = t.elapsed().as_secs_f64();
    ensure(run.failures.is_empty(), || run.failures.join("; "))?;
    ensure(secs < 10.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "max residual {:.2e}, exponent error {:.1e}, {secs:.2} s",
        run.worst, run.worst_fit
    ))
}

fn criterion2() -> Outcome {
    let (mut res, mut fit, mut failures) = (0.0f64, 0.0f64, Vec::new());
    for p in [1.5, 2.0, 2.5, 3.0] {
        let run = dilation_family(IdentityKind::Thm1Weighted, p, 2, 1e-6, 1e-4);
        res = res.max(run.worst);
        fit = fit.max(run.worst_fit);
        failures.extend(run.failures);
    }
    ensure(failures.is_empty(), || {
        format!("{} of 80 cases: {}", failures.len(), failures.join("; "))
    })?;
    Ok(format!("max residual {res:.2e}, exponent error {fit:.1e}"))
}

fn criterion3() -> Outcome {
    let u = m("stereographic");
    let f = m("scaled_rotation:1.3");
    let mut worst = 0.0f64;
    for p in [2.0, 3.0] {
        let r = report(IdentityKind::Lemma3, &u, &f, p, 2, 1e-6);
        ensure(r.verdict, || format!("three-term form p={p}: {:e}", r.max_residual))?;
        worst = worst.max(r.max_residual);
    }
    let s = composable_samples(&u, &f, DEFAULT_SAMPLES, DEFAULT_SEED).unwrap();
    let two_term: Vec<f64> = s
        .iter()
        .map(|x| {
            let t = identity_sides(IdentityKind::Thm1Unweighted, &u, &f, 2.0, 2, x).unwrap();
            residual_norm(&t.lhs, &t.rhs)
        })
        .collect();
    let min = two_term.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(min > 1e-3, || format!("two-term form residual only {min:e} somewhere"))?;
    Ok(format!(
        "three-term residual {worst:.2e}; two-term residual ≥ {min:.2e} at all {} points",
        s.len()
    ))
}

fn criterion4() -> Outcome {
    let (mut res, mut fit, mut failures) = (0.0f64, 0.0f64, Vec::new());
    for mm in [2, 3, 4] {
        for p in [2.0, 3.0] {
            let run = dilation_family(IdentityKind::Thm6MVersion, p, mm, 1e-6, 1e-4);
            res = res.max(run.worst);
            fit = fit.max(run.worst_fit);
            failures.extend(run.failures);
        }
    }
    let mut agree = 0.0f64;
    for id in PLANE_MAPS {
        let f = m(id);
        for l in LAMBDAS {
            let u = zoo::dilation(l, 2).unwrap();
            for p in [2.0, 3.0] {
                let a = report(IdentityKind::Thm6MVersion, &u, &f, p, 2, 1e-6);
                let b = report(IdentityKind::Thm1Weighted, &u, &f, p, 2, 1e-6);
                for (x, y) in a.per_point.iter().zip(&b.per_point) {
                    agree = agree
                        .max(residual_norm(&x.lhs, &y.lhs))
                        .max(residual_norm(&x.rhs, &y.rhs));
                    agree = agree.max((x.residual - y.residual).abs());
                }
            }
        }
    }
    if agree >= 1e-10 {
        failures.push(format!("m = 2 differs from the weighted check by {agree:e}"));
    }
    ensure(failures.is_empty(), || {
        format!("{} of 61 checks: {}", failures.len(), failures.join("; "))
    })?;
    Ok(format!(
        "max residual {res:.2e}, exponent error {fit:.1e}, m=2 agreement {agree:.1e}"
    ))
}

fn criterion5() -> Outcome {
    let mut res = 0.0f64;
    let mut fit = 0.0f64;
    let pairs: Vec<(usize, &str)> = vec![
        (2, "poly_quadratic"),
        (2, "trig_map"),
        (2, "mixed_map"),
        (4, "quartic_map4"),
    ];
    for (n, id) in &pairs {
        let f = m(id);
        for l in LAMBDAS {
            let u = zoo::dilation(l, *n).unwrap();
            let r = report(IdentityKind::Sec3TTheorem, &u, &f, 2.0, 2, 1e-7);
            ensure(r.verdict, || format!("T identity λ={l} f={id}: {:e}", r.max_residual))?;
            res = res.max(r.max_residual);
        }
        fit = fit.max((sweep(IdentityKind::Sec3TTheorem, &f, 2.0, 2) - 4.0).abs());
    }
    ensure(fit < 1e-5, || format!("T exponent off by {fit:e}"))?;
    for n in 1..=4 {
        let id = m(&format!("identity:{n}"));
        let t = TensorField::new(id.clone(), SigmaKind::TraceT).unwrap();
        for x in sample_points(id.source().domain(), 50, 3) {
            let c = t.components(&x).unwrap();
            ensure(c.max_abs() == 0.0, || {
                format!("T tensor of identity:{n} is {c:?} at {x:?}")
            })?;
        }
    }
    for id in ["quartic_map4", "dilation:1.5:4"] {
        let f = m(id);
        let s = TensorField::new(f.clone(), SigmaKind::TraceS).unwrap();
        let plain = TensorField::new(f.clone(), SigmaKind::Symphonic).unwrap();
        for x in sample_points(f.source().domain(), 50, 3) {
            let d = s.components(&x).unwrap().max_abs_diff(&plain.components(&x).unwrap());
            ensure(d == 0.0, || format!("S correction of {id} is {d:e} at {x:?}"))?;
        }
    }
    Ok(format!(
        "T residual {res:.2e}, exponent error {fit:.1e}, identity T tensor 0, S correction 0 in dim 4"
    ))
}

fn criterion6() -> Outcome {
    let mut worst = 0.0f64;
    for p in [2u32, 3] {
        let f = m(&format!("radial_2p_harmonic:{p}"));
        let s = sample_points(f.source().domain(), DEFAULT_SAMPLES, DEFAULT_SEED);
        let r = is_p_symphonic(&f, p as f64, &s, 1e-6).unwrap();
        ensure(r.verdict, || format!("radial p={p}: {:e}", r.max_residual))?;
        worst = worst.max(r.max_residual);
    }
    let f = m("quadratic_x1sq");
    let s = sample_points(f.source().domain(), DEFAULT_SAMPLES, DEFAULT_SEED);
    let r = is_p_symphonic(&f, 2.0, &s, 1e-6).unwrap();
    ensure(!r.verdict, || "x1² passed".into())?;
    // div(|∇f|²∇f) = 24·x1² for f = x1².
    let mut dev = 0.0f64;
    for pr in &r.per_point {
        let oracle = 24.0 * pr.point[0] * pr.point[0];
        dev = dev.max((pr.residual - oracle).abs());
    }
    ensure(dev < 1e-9, || format!("x1² residual differs from 24·x1² by {dev:e}"))?;
    Ok(format!(
        "radial residual {worst:.2e}; x1² matches 24·x1² within {dev:.1e}"
    ))
}

fn zoo_maps() -> Vec<Map> {
    zoo::catalog().into_iter().filter_map(|e| e.map().cloned()).collect()
}

fn criterion7() -> Outcome {
    let maps = zoo_maps();
    let (mut pairs, mut skipped, mut worst) = (0, 0, 0.0f64);
    for u in &maps {
        for f in &maps {
            if u.target_dim() != f.source_dim() || u.target().metric() != f.source().metric() {
                continue;
            }
            let s = composable_samples(u, f, 100, DEFAULT_SEED).unwrap();
            if s.len() < 100 {
                skipped += 1;
                continue;
            }
            pairs += 1;
            for x in &s {
                let r = verify_chain_rule_main1(f, u, x, 1e-8).unwrap();
                ensure(r.verdict, || {
                    format!("{} ∘ {} at {x:?}: {:e}", f.name(), u.name(), r.max_residual)
                })?;
                worst = worst.max(r.max_residual);
            }
        }
    }
    Ok(format!(
        "{pairs} pairs × 100 points, max residual {worst:.2e} ({skipped} pairs with too small a common domain)"
    ))
}

fn criterion8() -> Outcome {
    let mut corpus = 0;
    let mut ad_fd = 0.0f64;
    for f in zoo_maps() {
        let pts = sample_points(f.source().domain(), 10, 3);
        let mut srcs = f.component_sources().unwrap_or_default();
        srcs.extend(f.source().metric().sources());
        srcs.extend(f.target().metric().sources());
        for src in srcs {
            let e = Expression::parse(&src, f.source_dim()).or_else(|_| Expression::parse(&src, f.target_dim()));
            let e = e.map_err(|err| format!("{src}: {err}"))?;
            let pts = if e.arity() == f.source_dim() {
                pts.clone()
            } else {
                sample_points(f.target().domain(), 10, 3)
            };
            corpus += 1;
            for x in pts {
                let exact = evaluate_jet2(&e, &x).map_err(|err| err.to_string())?;
                let fd = finite_difference_jet2_default(&e, &x).map_err(|err| err.to_string())?;
                ad_fd = ad_fd.max(fd.max_scaled_diff(&exact));
            }
        }
    }
    ensure(ad_fd < 1e-5, || format!("autodiff vs differences {ad_fd:e}"))?;

    let kinds = [
        SigmaKind::Symphonic,
        SigmaKind::Power { m: 3 },
        SigmaKind::Power { m: 4 },
        SigmaKind::TraceT,
        SigmaKind::TraceS,
        SigmaKind::TraceTPower { m: 3, p: 2.5 },
        SigmaKind::TraceSPower { m: 3, p: 3.0 },
    ];
    let mut frame = 0.0f64;
    for f in zoo_maps() {
        for x in sample_points(f.source().domain(), 10, 5) {
            for kind in kinds {
                let a = TensorField::new(f.clone(), kind).unwrap().components(&x).unwrap();
                let b = sigma_frame_sum(&f, kind, &x, None).unwrap();
                frame = frame.max(b.max_abs_diff(&a) / a.max_abs().max(1.0));
            }
        }
    }
    ensure(frame < 1e-10, || format!("frame sum vs matrix power {frame:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut prop2 = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=4);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let raw: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let c2 = Matrix::from_fn(n, n, |i, j| raw[i.min(j) * n + i.max(j)]);
        let jet = Jet2Data::new(c.clone(), c2.clone()).unwrap();
        let p = rng.gen_range(1.0..5.0);
        let a = prop2_constraint(&jet, p);
        let b = prop2_loops(&c, &c2, p);
        prop2 = prop2.max((a - b).abs() / b.abs().max(1.0));
    }
    ensure(prop2 < 1e-12, || format!("contracted vs loops {prop2:e}"))?;
    Ok(format!(
        "{corpus} expressions AD/FD {ad_fd:.1e}; frame/matrix {frame:.1e}; 200 jets {prop2:.1e}"
    ))
}

/// The 2-jet constraint summed index by index.
fn prop2_loops(c: &[f64], c2: &Matrix, p: f64) -> f64 {
    let n = c.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                s += 2.0
                    * (p - 2.0)
                    * c[k]
                    * c[i]
                    * c[j]
                    * (c[i] * c2[(i, k)] * c[j] * c[j] + c[i] * c[i] * c[j] * c2[(j, k)]);
                s += c[i]
                    * c[i]
                    * c[j]
                    * c[j]
                    * (c2[(k, k)] * c[i] * c[j] + c[k] * c2[(i, k)] * c[j] + c[k] * c[i] * c2[(j, k)]);
            }
        }
    }
    s
}

fn criterion9() -> Outcome {
    let mut checked = Vec::new();
    for e in zoo::catalog() {
        let Some(u) = e.map() else { continue };
        let tg = e.has_tag(|t| matches!(t, Tag::TotallyGeodesic));
        let hc = e.has_tag(|t| {
            matches!(
                t,
                Tag::HorizontallyConformal { .. } | Tag::Conformal { .. } | Tag::Isometry
            )
        });
        if !(tg && hc) {
            continue;
        }
        let s = sample_points(u.source().domain(), 20, DEFAULT_SEED);
        for p in [2.0, 3.0] {
            let r = morphism_probe_test(u, p, &s, 1e-7).unwrap();
            ensure(r.verdict, || format!("{} p={p}: {:e}", e.id, r.max_residual))?;
        }
        checked.push(e.id.clone());
    }
    ensure(checked.len() >= 3, || format!("only {} tagged maps", checked.len()))?;
    let bad = m("cube_map");
    ensure(
        bad.component_sources() == Some(vec!["x1".into(), "x2^3".into()]),
        || "cube_map is not (x1, x2^3)".into(),
    )?;
    let s = sample_points(bad.source().domain(), 20, DEFAULT_SEED);
    let r = morphism_probe_test(&bad, 2.0, &s, 1e-7).unwrap();
    ensure(!r.verdict, || "(x1, x2³) passed the probe test".into())?;
    Ok(format!(
        "passes for {}; (x1, x2³) fails with residual {:.2e}",
        checked.join(", "),
        r.max_residual
    ))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symphonic"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_config(config: &Path, json: &Path, threads: Option<&str>) -> Result<(i32, Vec<u8>), String> {
    let mut cmd = bin();
    cmd.arg("run").arg("--config").arg(config).arg("--json").arg(json);
    if let Some(t) = threads {
        cmd.env("SYMPHONIC_THREADS", t);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    let bytes = std::fs::read(json).map_err(|e| format!("{}: {e}", json.display()))?;
    Ok((out.status.code().unwrap_or(-1), bytes))
}

fn criterion10(started: Instant) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut names = Vec::new();
    for name in ["dilations", "curved", "scalar_fields"] {
        let cfg = configs_dir().join(format!("{name}.toml"));
        let (s1, a) = run_config(&cfg, &dir.path().join(format!("{name}-a.json")), None)?;
        let (s2, b) = run_config(&cfg, &dir.path().join(format!("{name}-b.json")), Some("1"))?;
        ensure(s1 == 0 && s2 == 0, || format!("{name}: status {s1}/{s2}"))?;
        ensure(a == b, || format!("{name}: reports differ between runs"))?;
        names.push(name);
    }
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "[[tasks]]\nkind = \"identity\"\nidentity = \"thm1_unweighted\"\nu = \"uu\"\nf = \"poly_quadratic\"\n",
    )
    .map_err(|e| e.to_string())?;
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&bad)
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&out.stderr);
    ensure(out.status.code() == Some(2) && stderr.contains("`uu`"), || {
        format!("malformed config: {:?} {stderr}", out.status)
    })?;
    let fail = bin()
        .args([
            "verify",
            "--identity",
            "thm1_unweighted",
            "--u",
            "stereographic",
            "--f",
            "scaled_rotation:1.3",
        ])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(fail.status.code() == Some(1), || {
        format!("failing identity gave {:?}", fail.status)
    })?;
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("suite took {secs:.0} s"))?;
    Ok(format!(
        "{} run to 0 byte-stably; `uu` named with status 2; failing check gives 1; {secs:.1} s so far",
        names.join(", ")
    ))
}

fn main() {
    let started = Instant::now();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("dilation scaling of div σ, exponent 4", Box::new(criterion1)),
        ("weighted dilation scaling, exponent 2p", Box::new(criterion2)),
        ("correction term for non-geodesic u", Box::new(criterion3)),
        ("power tensors, exponent mp", Box::new(criterion4)),
        ("trace-modified tensors T and S", Box::new(criterion5)),
        ("p-symphonic functions vs 2p-harmonic", Box::new(criterion6)),
        ("second fundamental form chain rule", Box::new(criterion7)),
        ("oracle agreement", Box::new(criterion8)),
        ("morphism probes", Box::new(criterion9)),
        ("command line end to end", Box::new(move || criterion10(started))),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {title}: {detail} [{secs:.2} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {title}: {detail} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
