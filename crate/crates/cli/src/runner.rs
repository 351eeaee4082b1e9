//! Executes a validated plan.

use rayon::prelude::*;
use symphonic::analysis::{
    horizontal_conformality, is_conformal_function, is_p_symphonic, is_totally_geodesic, morphism_probe_test,
};
use symphonic::identities::{composable_samples, exponent_sweep, run_identity, Family, IdentityCase};
use symphonic::report::ResidualReport;
use symphonic::sampling::sample_points;
use symphonic::{Map, Result};

use crate::config::{Action, Job, Params, Plan, PredicateKind, RunConfig, TaskKind};
use crate::report::{Outcome, Payload, Report, TaskRecord};

/// Runs every job; records come back in task order whatever the thread count.
pub fn run(config: &RunConfig, plan: &Plan) -> Report {
    let records = plan.jobs.par_iter().map(run_job).collect();
    Report::new(config.clone(), records)
}

fn subject(job: &Job) -> String {
    match &job.action {
        Action::Predicate { predicate, map, .. } => format!("{}({})", predicate.name(), map.name()),
        Action::Identity { identity, u, f } => format!("{identity}(u = {}, f = {})", u.name(), f.name()),
        Action::Sweep {
            identity, family, f, ..
        } => {
            let u = match family {
                Family::Dilation { dim } => format!("dilation:λ:{dim}"),
                Family::ScaledProjection => "scaled_projection:λ".into(),
            };
            format!("{identity}(u = {u}, f = {})", f.name())
        }
    }
}

fn kind(action: &Action) -> TaskKind {
    match action {
        Action::Predicate { .. } => TaskKind::Predicate,
        Action::Identity { .. } => TaskKind::Identity,
        Action::Sweep { .. } => TaskKind::Sweep,
    }
}

struct Checked {
    verdict: bool,
    pass: bool,
    max_residual: Option<f64>,
    detail: String,
    payload: Payload,
}

fn run_job(job: &Job) -> TaskRecord {
    let mut rec = TaskRecord {
        name: job.name.clone(),
        kind: kind(&job.action),
        subject: subject(job),
        params: job.params,
        outcome: Outcome::Error,
        verdict: None,
        max_residual: None,
        detail: String::new(),
        hypotheses: Vec::new(),
        error: None,
        payload: None,
    };
    match check(job) {
        Ok(c) => {
            rec.outcome = if c.pass { Outcome::Pass } else { Outcome::Fail };
            rec.verdict = Some(c.verdict);
            rec.max_residual = c.max_residual;
            rec.detail = c.detail;
            if let Payload::Residual(r) = &c.payload {
                rec.hypotheses = r.hypotheses.clone();
            }
            rec.payload = Some(c.payload);
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

fn residual(r: ResidualReport, expect: bool) -> Checked {
    let detail = if r.excluded.is_empty() {
        format!("{} points", r.per_point.len())
    } else {
        format!("{} points, {} excluded", r.per_point.len(), r.excluded.len())
    };
    Checked {
        verdict: r.verdict,
        pass: r.verdict == expect,
        max_residual: Some(r.max_residual),
        detail,
        payload: Payload::Residual(r),
    }
}

fn predicate(kind: PredicateKind, map: &Map, lambda: Option<f64>, expect: bool, p: &Params) -> Result<Checked> {
    let s = sample_points(map.source().domain(), p.samples, p.seed);
    Ok(match kind {
        PredicateKind::PSymphonic => residual(is_p_symphonic(map, p.p, &s, p.tol)?, expect),
        PredicateKind::TotallyGeodesic => residual(is_totally_geodesic(map, &s, p.tol)?, expect),
        PredicateKind::ConformalFunction => residual(is_conformal_function(map, &s, p.tol)?, expect),
        PredicateKind::MorphismProbe => residual(morphism_probe_test(map, p.p, &s, p.tol)?, expect),
        PredicateKind::HorizontallyConformal => {
            let r = horizontal_conformality(map, &s, p.tol)?;
            let mut verdict = r.verdict;
            let mut detail = format!("λ ∈ [{:.9}, {:.9}]", r.lambda_min, r.lambda_max);
            if let Some(l) = lambda {
                verdict &= r.lambda_constant && (r.lambda_min - l).abs().max((r.lambda_max - l).abs()) < p.tol;
                detail.push_str(&format!(", expected λ = {l}"));
            }
            Checked {
                verdict,
                pass: verdict == expect,
                max_residual: Some(r.max_residual),
                detail,
                payload: Payload::Conformality(r),
            }
        }
    })
}

fn check(job: &Job) -> Result<Checked> {
    let p = &job.params;
    match &job.action {
        Action::Predicate {
            predicate: kind,
            map,
            lambda,
            expect,
        } => predicate(*kind, map, *lambda, *expect, p),
        Action::Identity { identity, u, f } => {
            let s = composable_samples(u, f, p.samples, p.seed)?;
            Ok(residual(run_identity(*identity, u, f, p.p, p.m, &s, p.tol)?, true))
        }
        Action::Sweep {
            identity,
            family,
            f,
            lambdas,
            exponent_tol,
        } => {
            let u = family.build(lambdas[0])?;
            let s = composable_samples(&u, f, p.samples, p.seed)?;
            let case = IdentityCase::new(*identity, u, f.clone())?
                .with_p(p.p)
                .with_m(p.m)
                .with_tol(p.tol)
                .with_samples(s)
                .with_family(*family);
            let r = exponent_sweep(&case, lambdas)?;
            let off = (r.fitted_exponent - r.expected_exponent).abs();
            let verdict = off < *exponent_tol;
            let max_residual = r.points.iter().map(|q| q.max_residual).fold(0.0f64, f64::max);
            Ok(Checked {
                verdict,
                pass: verdict,
                max_residual: Some(max_residual),
                detail: format!(
                    "fitted exponent {:.6}, expected {}",
                    r.fitted_exponent, r.expected_exponent
                ),
                payload: Payload::Sweep(r),
            })
        }
    }
}
