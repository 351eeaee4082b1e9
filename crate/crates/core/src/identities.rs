//! Composition identities for stress-tensor divergences, checked pointwise.
//!
//! For `u: M → N` and `f: N → P`, each identity relates a divergence along
//! `f∘u` at `x` to divergences along `f` at `u(x)` (and, for the three-term
//! forms, along `u` at `x`). Both sides are computed independently; the
//! dilation `λ` on the right is the one extracted from `u` at `x`.
//!
//! | kind              | left                          | right                                          |
//! |-------------------|-------------------------------|------------------------------------------------|
//! | `thm1_unweighted` | `div σ_{f∘u}`                 | `λ⁴ div σ_f`                                    |
//! | `thm1_weighted`   | `div(w^{p−2}σ_{f∘u})`         | `λ^{2p} div(w_f^{p−2}σ_f)`                      |
//! | `lemma3`          | `div(w^{p−2}σ_{f∘u})`         | `λ_f^{2p−2} df(div(w_u^{p−2}σ_u)) + λ^{2p} div(w_f^{p−2}σ_f)` |
//! | `thm6_m_version`  | `div(‖d_m‖^{p−2}σ_{m,f∘u})`   | `λ^{mp} div(‖d_m f‖^{p−2}σ_{m,f})`              |
//! | `sec3_T_theorem`  | `div σ_{T,f∘u}`               | `λ⁴ div σ_{T,f}`                                |
//! | `sec3_T_lemma`    | `div σ_{T,f∘u}`               | `λ_f² df(div σ_{T,u}) + λ⁴ div σ_{T,f}`         |
//! | `sec3_S_variant`  | `div σ_{S,f∘u}`               | `λ⁴ div σ_{S,f}`                                |
//!
//! Identities are evaluated in `f64`, which the tolerances assume.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{dilation_sq_at, horizontal_conformality, is_totally_geodesic};
use crate::error::{Error, Result};
use crate::maps::{compose, SmoothMap};
use crate::report::{residual_norm, HypothesisCheck, PointResidual, ResidualReport};
use crate::sampling::{sample_points_where, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::tensors::{divergence, weighted_divergence, SigmaKind, TensorField, WeightRule};
use crate::zoo;

/// Tolerance for the hypothesis annotations.
pub const HYPOTHESIS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityKind {
    #[serde(rename = "thm1_unweighted")]
    Thm1Unweighted,
    #[serde(rename = "thm1_weighted")]
    Thm1Weighted,
    #[serde(rename = "lemma3")]
    Lemma3,
    #[serde(rename = "thm6_m_version")]
    Thm6MVersion,
    #[serde(rename = "sec3_T_theorem")]
    Sec3TTheorem,
    #[serde(rename = "sec3_T_lemma")]
    Sec3TLemma,
    #[serde(rename = "sec3_S_variant")]
    Sec3SVariant,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 7] = [
        IdentityKind::Thm1Unweighted,
        IdentityKind::Thm1Weighted,
        IdentityKind::Lemma3,
        IdentityKind::Thm6MVersion,
        IdentityKind::Sec3TTheorem,
        IdentityKind::Sec3TLemma,
        IdentityKind::Sec3SVariant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityKind::Thm1Unweighted => "thm1_unweighted",
            IdentityKind::Thm1Weighted => "thm1_weighted",
            IdentityKind::Lemma3 => "lemma3",
            IdentityKind::Thm6MVersion => "thm6_m_version",
            IdentityKind::Sec3TTheorem => "sec3_T_theorem",
            IdentityKind::Sec3TLemma => "sec3_T_lemma",
            IdentityKind::Sec3SVariant => "sec3_S_variant",
        }
    }

    /// Power of `λ` multiplying the `f`-side divergence.
    pub fn expected_exponent(self, p: f64, m: u32) -> f64 {
        match self {
            IdentityKind::Thm1Unweighted
            | IdentityKind::Sec3TTheorem
            | IdentityKind::Sec3TLemma
            | IdentityKind::Sec3SVariant => 4.0,
            IdentityKind::Thm1Weighted | IdentityKind::Lemma3 => 2.0 * p,
            IdentityKind::Thm6MVersion => m as f64 * p,
        }
    }

    fn has_correction_term(self) -> bool {
        matches!(self, IdentityKind::Lemma3 | IdentityKind::Sec3TLemma)
    }
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = IdentityKind::ALL.iter().map(|k| k.name()).collect();
                Error::arg(format!("unknown identity `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

/// Trace modification used by the `sec3` identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sec3Variant {
    T,
    S,
}

/// Two-term form or three-term form with the `df(div σ_u)` correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sec3Form {
    Theorem,
    Lemma,
}

/// One-parameter family `λ ↦ u_λ` with dilation `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `λ·id` on `ℝⁿ`.
    Dilation { dim: usize },
    /// `λ·(x1, x2)` from `ℝ³`.
    ScaledProjection,
}

impl Family {
    pub fn build(self, lambda: f64) -> Result<SmoothMap<f64>> {
        match self {
            Family::Dilation { dim } => zoo::dilation(lambda, dim),
            Family::ScaledProjection => zoo::scaled_projection(lambda),
        }
    }
}

/// An identity together with the maps, parameters and sample points it is checked on.
#[derive(Debug, Clone)]
pub struct IdentityCase {
    pub kind: IdentityKind,
    pub u: SmoothMap<f64>,
    pub f: SmoothMap<f64>,
    pub p: f64,
    pub m: u32,
    pub samples: Vec<Vec<f64>>,
    pub tol: f64,
    pub family: Option<Family>,
}

/// Up to `count` points of `u`'s source at which `f∘u` can be evaluated.
pub fn composable_samples(u: &SmoothMap<f64>, f: &SmoothMap<f64>, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let fu = compose(f, u)?;
    Ok(sample_points_where(
        u.source().domain(),
        count,
        seed,
        count * 100,
        |x| fu.evaluate(x).is_ok(),
    ))
}

impl IdentityCase {
    /// Case with `p = m = 2`, tolerance `1e-7` and default samples.
    pub fn new(kind: IdentityKind, u: SmoothMap<f64>, f: SmoothMap<f64>) -> Result<Self> {
        let samples = composable_samples(&u, &f, DEFAULT_SAMPLES, DEFAULT_SEED)?;
        Ok(IdentityCase {
            kind,
            u,
            f,
            p: 2.0,
            m: 2,
            samples,
            tol: 1e-7,
            family: None,
        })
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_m(mut self, m: u32) -> Self {
        self.m = m;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_samples(mut self, samples: Vec<Vec<f64>>) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = Some(family);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.u.target_dim() != self.f.source_dim() {
            return Err(Error::arg(format!(
                "{} has target dimension {} but {} has source dimension {}",
                self.u.name(),
                self.u.target_dim(),
                self.f.name(),
                self.f.source_dim()
            )));
        }
        if !(self.p >= 1.0) {
            return Err(Error::arg(format!("exponent p = {} must be at least 1", self.p)));
        }
        if self.m < 2 {
            return Err(Error::arg(format!("power order m = {} must be at least 2", self.m)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::arg(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }

    pub fn run(&self) -> Result<ResidualReport> {
        self.validate()?;
        run_identity(self.kind, &self.u, &self.f, self.p, self.m, &self.samples, self.tol)
    }
}

/// Both sides of an identity at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySides {
    pub point: Vec<f64>,
    /// `u(x)`.
    pub u_image: Vec<f64>,
    /// `f(u(x))`.
    pub image: Vec<f64>,
    pub lhs: Vec<f64>,
    /// Correction term of the three-term forms.
    pub correction: Option<Vec<f64>>,
    /// The `f`-side divergence at `u(x)` before scaling.
    pub unscaled: Vec<f64>,
    /// Power of `λ` applied to `unscaled`.
    pub scale: f64,
    pub rhs: Vec<f64>,
    pub lambda: f64,
}

fn trace_kind(kind: IdentityKind) -> Option<(SigmaKind, Sec3Form)> {
    match kind {
        IdentityKind::Sec3TTheorem => Some((SigmaKind::TraceT, Sec3Form::Theorem)),
        IdentityKind::Sec3TLemma => Some((SigmaKind::TraceT, Sec3Form::Lemma)),
        IdentityKind::Sec3SVariant => Some((SigmaKind::TraceS, Sec3Form::Theorem)),
        _ => None,
    }
}

/// `λ_f²` of `f` at `y` and `df(v)`.
fn f_dilation_and_push(f: &SmoothMap<f64>, y: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>)> {
    let jf = f.map_jet(y)?;
    let (l2, _) = dilation_sq_at(&jf);
    Ok((l2, jf.du.matvec(v)))
}

/// Evaluates both sides of `kind` at `x`.
pub fn identity_sides(
    kind: IdentityKind,
    u: &SmoothMap<f64>,
    f: &SmoothMap<f64>,
    p: f64,
    m: u32,
    x: &[f64],
) -> Result<IdentitySides> {
    let fu = compose(f, u)?;
    let ju = u.map_jet(x)?;
    let (l2, _) = dilation_sq_at(&ju);
    let y = ju.image.clone();
    let (lhs, image, unscaled, scale, correction) = match kind {
        IdentityKind::Thm1Unweighted => {
            let l = divergence(&fu, SigmaKind::Symphonic, x)?;
            let r = divergence(f, SigmaKind::Symphonic, &y)?;
            (l.div, l.image, r.div, l2.powi(2), None)
        }
        IdentityKind::Thm1Weighted | IdentityKind::Lemma3 => {
            let l = weighted_divergence(&fu, SigmaKind::Symphonic, p, x)?;
            let r = weighted_divergence(f, SigmaKind::Symphonic, p, &y)?;
            let correction = if kind == IdentityKind::Lemma3 {
                let du_div = weighted_divergence(u, SigmaKind::Symphonic, p, x)?;
                let (lf2, push) = f_dilation_and_push(f, &y, &du_div.div)?;
                Some(push.iter().map(|v| lf2.powf(p - 1.0) * v).collect())
            } else {
                None
            };
            (l.div, l.image, r.div, l2.powf(p), correction)
        }
        IdentityKind::Thm6MVersion => {
            let rule = WeightRule::PowerNorm { m };
            let l = TensorField::new(fu.clone(), SigmaKind::Power { m })?.weighted_divergence(rule, p, x)?;
            let r = TensorField::new(f.clone(), SigmaKind::Power { m })?.weighted_divergence(rule, p, &y)?;
            (l.div, l.image, r.div, l2.powf(m as f64 * p / 2.0), None)
        }
        _ => {
            let (sk, form) = trace_kind(kind).expect("remaining kinds are sec3");
            let l = divergence(&fu, sk, x)?;
            let r = divergence(f, sk, &y)?;
            let correction = if form == Sec3Form::Lemma {
                let du_div = divergence(u, sk, x)?;
                let (lf2, push) = f_dilation_and_push(f, &y, &du_div.div)?;
                Some(push.iter().map(|v| lf2 * v).collect())
            } else {
                None
            };
            (l.div, l.image, r.div, l2.powi(2), correction)
        }
    };
    let mut rhs: Vec<f64> = unscaled.iter().map(|v| scale * v).collect();
    if let Some(c) = &correction {
        for (r, v) in rhs.iter_mut().zip(c) {
            *r += v;
        }
    }
    Ok(IdentitySides {
        point: x.to_vec(),
        u_image: y,
        image,
        lhs,
        correction,
        unscaled,
        scale,
        rhs,
        lambda: l2.max(0.0).sqrt(),
    })
}

fn hypothesis(name: &str, holds: bool, max_residual: f64, detail: impl Into<String>) -> HypothesisCheck {
    HypothesisCheck {
        name: name.to_string(),
        holds,
        max_residual,
        detail: detail.into(),
    }
}

fn conformality_hypothesis(
    name: &str,
    map: &SmoothMap<f64>,
    samples: &[Vec<f64>],
    constant: bool,
) -> Result<HypothesisCheck> {
    if map.source_dim() < map.target_dim() {
        return Ok(hypothesis(
            name,
            false,
            f64::NAN,
            "source dimension below target dimension",
        ));
    }
    let rep = horizontal_conformality(map, samples, HYPOTHESIS_TOL)?;
    let holds = rep.verdict && (!constant || rep.lambda_constant);
    Ok(hypothesis(
        name,
        holds,
        rep.max_residual,
        format!("λ ∈ [{:.9}, {:.9}]", rep.lambda_min, rep.lambda_max),
    ))
}

fn hypotheses(
    kind: IdentityKind,
    u: &SmoothMap<f64>,
    f: &SmoothMap<f64>,
    samples: &[Vec<f64>],
) -> Result<Vec<HypothesisCheck>> {
    let mut out = Vec::new();
    let lemma_form = kind.has_correction_term();
    out.push(conformality_hypothesis(
        if lemma_form {
            "u_horizontally_conformal"
        } else {
            "u_horizontally_conformal_constant"
        },
        u,
        samples,
        !lemma_form,
    )?);
    if !lemma_form {
        let tg = is_totally_geodesic(u, samples, HYPOTHESIS_TOL)?;
        out.push(hypothesis("u_totally_geodesic", tg.verdict, tg.max_residual, ""));
    }
    let needs_f = matches!(
        kind,
        IdentityKind::Lemma3 | IdentityKind::Sec3TLemma | IdentityKind::Sec3TTheorem
    );
    if needs_f {
        let images: Vec<Vec<f64>> = samples.iter().filter_map(|x| u.evaluate(x).ok()).collect();
        let mut h = conformality_hypothesis("f_conformal", f, &images, false)?;
        if f.source_dim() != f.target_dim() {
            h.holds = false;
            h.detail.push_str("; dimensions differ");
        }
        out.push(h);
        if kind == IdentityKind::Sec3TTheorem {
            let tg = is_totally_geodesic(f, &images, HYPOTHESIS_TOL)?;
            out.push(hypothesis("f_totally_geodesic", tg.verdict, tg.max_residual, ""));
        }
    }
    if trace_kind(kind).is_some() {
        let (m, n) = (u.source_dim(), u.target_dim());
        out.push(hypothesis(
            "equal_trace_dimensions",
            m == n,
            0.0,
            format!("trace terms use dim {m} along f∘u and dim {n} along f"),
        ));
    }
    Ok(out)
}

/// Checks `kind` at every sample and annotates the hypotheses it relies on.
///
/// Points where a weight is singular are excluded; other errors abort.
pub fn run_identity(
    kind: IdentityKind,
    u: &SmoothMap<f64>,
    f: &SmoothMap<f64>,
    p: f64,
    m: u32,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport> {
    compose(f, u)?;
    let results: Vec<Result<PointResidual>> = samples
        .par_iter()
        .map(|x| {
            let s = identity_sides(kind, u, f, p, m, x)?;
            let r = residual_norm(&s.lhs, &s.rhs);
            Ok(PointResidual::new(x, &s.image, &s.lhs, &s.rhs, r))
        })
        .collect();
    let mut pts = Vec::new();
    let mut excluded = Vec::new();
    for (x, r) in samples.iter().zip(results) {
        match r {
            Ok(p) => pts.push(p),
            Err(e @ Error::SingularWeight { .. }) => excluded.push(crate::report::ExcludedPoint::new(x, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    let mut rep = ResidualReport::from_points(kind.name(), tol, pts, excluded)
        .with_hypotheses(hypotheses(kind, u, f, samples)?)
        .with_note(format!("u = {}, f = {}, p = {p}, m = {m}", u.name(), f.name()));
    if !rep.verdict && !rep.hypotheses_hold() {
        rep.notes
            .push("some hypotheses fail; a nonzero residual is expected".into());
    } else if !rep.verdict {
        rep.notes.push("hypotheses hold but the identity fails".into());
    }
    Ok(rep)
}

pub fn verify_thm1_unweighted(
    u: &SmoothMap<f64>,
    f: &SmoothMap<f64>,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport> {
    run_identity(IdentityKind::Thm1Unweighted, u, f, 2.0, 2, samples, tol)
}

pub fn verify_thm1_weighted(
    u: &SmoothMap<f64>,
    f: &SmoothMap<f64>,
    p: f64,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport> {
    check_p(p)?;
    run_identity(IdentityKind::Thm1Weighted, u, f, p, 2, samples, tol)
}

pub fn verify_lemma3(
    u: &SmoothMap<f64>,
    f: &SmoothMap<f64>,
    p: f64,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport> {
    check_p(p)?;
    run_identity(IdentityKind::Lemma3, u, f, p, 2, samples, tol)
}

pub fn verify_thm6(
    u: &SmoothMap<f64>,
    f: &SmoothMap<f64>,
    p: f64,
    m: u32,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport> {
    check_p(p)?;
    if m < 2 {
        return Err(Error::arg(format!("power order m = {m} must be at least 2")));
    }
    run_identity(IdentityKind::Thm6MVersion, u, f, p, m, samples, tol)
}

/// The trace-modified identities in either form; `S` in lemma form adds the
/// `λ_f² df(div σ_{S,u})` term like `T`.
pub fn verify_sec3(
    u: &SmoothMap<f64>,
    f: &SmoothMap<f64>,
    samples: &[Vec<f64>],
    tol: f64,
    variant: Sec3Variant,
    form: Sec3Form,
) -> Result<ResidualReport> {
    match (variant, form) {
        (Sec3Variant::T, Sec3Form::Theorem) => run_identity(IdentityKind::Sec3TTheorem, u, f, 2.0, 2, samples, tol),
        (Sec3Variant::T, Sec3Form::Lemma) => run_identity(IdentityKind::Sec3TLemma, u, f, 2.0, 2, samples, tol),
        (Sec3Variant::S, Sec3Form::Theorem) => run_identity(IdentityKind::Sec3SVariant, u, f, 2.0, 2, samples, tol),
        (Sec3Variant::S, Sec3Form::Lemma) => trace_s_corrected(u, f, samples, tol),
    }
}

fn trace_s_corrected(u: &SmoothMap<f64>, f: &SmoothMap<f64>, samples: &[Vec<f64>], tol: f64) -> Result<ResidualReport> {
    let fu = compose(f, u)?;
    let pts = samples
        .par_iter()
        .map(|x| {
            let l = divergence(&fu, SigmaKind::TraceS, x)?;
            let ju = u.map_jet(x)?;
            let (l2, _) = dilation_sq_at(&ju);
            let r = divergence(f, SigmaKind::TraceS, &ju.image)?;
            let du_div = divergence(u, SigmaKind::TraceS, x)?;
            let (lf2, push) = f_dilation_and_push(f, &ju.image, &du_div.div)?;
            let rhs: Vec<f64> = r.div.iter().zip(&push).map(|(a, b)| l2 * l2 * a + lf2 * b).collect();
            let res = residual_norm(&l.div, &rhs);
            Ok(PointResidual::new(x, &l.image, &l.div, &rhs, res))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_points("sec3_S_lemma", tol, pts, vec![]))
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("exponent p = {p} must be at least 1")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    /// Mean over samples of `ln(‖lhs − correction‖ / ‖unscaled‖)`.
    pub mean_log_ratio: f64,
    pub samples_used: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub identity: String,
    pub expected_exponent: f64,
    pub fitted_exponent: f64,
    pub points: Vec<SweepPoint>,
}

/// Least-squares slope of `y` against `x`.
fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fits the power of `λ` relating the two sides over the case's family `u_λ`.
pub fn exponent_sweep(case: &IdentityCase, lambdas: &[f64]) -> Result<SweepResult> {
    case.validate()?;
    let family = case
        .family
        .ok_or_else(|| Error::arg("exponent sweep needs a case with a dilation family"))?;
    if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::arg(format!("sweep dilation {l} must be positive and finite")));
    }
    let mut distinct: Vec<f64> = lambdas.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::arg("exponent sweep needs at least two distinct dilations"));
    }
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let u = family.build(lambda)?;
        let sides: Vec<IdentitySides> = case
            .samples
            .par_iter()
            .map(|x| identity_sides(case.kind, &u, &case.f, case.p, case.m, x))
            .collect::<Result<_>>()?;
        let mut logs = Vec::new();
        let mut max_residual = 0.0f64;
        for s in &sides {
            max_residual = max_residual.max(residual_norm(&s.lhs, &s.rhs));
            let core: Vec<f64> = match &s.correction {
                Some(c) => s.lhs.iter().zip(c).map(|(a, b)| a - b).collect(),
                None => s.lhs.clone(),
            };
            let num = core.iter().map(|v| v * v).sum::<f64>().sqrt();
            let den = s.unscaled.iter().map(|v| v * v).sum::<f64>().sqrt();
            if num > 1e-300 && den > 1e-12 {
                logs.push((num / den).ln());
            }
        }
        if logs.is_empty() {
            return Err(Error::arg(format!(
                "no sample gives a nonzero divergence at λ = {lambda}; the sweep is degenerate"
            )));
        }
        points.push(SweepPoint {
            lambda,
            mean_log_ratio: logs.iter().sum::<f64>() / logs.len() as f64,
            samples_used: logs.len(),
            max_residual,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.lambda.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_log_ratio).collect();
    Ok(SweepResult {
        identity: case.kind.name().to_string(),
        expected_exponent: case.kind.expected_exponent(case.p, case.m),
        fitted_exponent: ls_slope(&xs, &ys),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f_quad() -> SmoothMap<f64> {
        zoo::map("poly_quadratic").unwrap()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in IdentityKind::ALL {
            assert_eq!(k.name().parse::<IdentityKind>().unwrap(), k);
            assert_eq!(k.to_string(), k.name());
        }
        assert!("thm9".parse::<IdentityKind>().is_err());
    }

    #[test]
    fn doubling_scales_by_sixteen() {
        let u = zoo::map("dilation:2").unwrap();
        let x = [0.3, -0.5];
        let s = identity_sides(IdentityKind::Thm1Unweighted, &u, &f_quad(), 2.0, 2, &x).unwrap();
        assert_eq!(s.scale, 16.0);
        assert!(residual_norm(&s.lhs, &s.rhs) < 1e-8);
        let w = identity_sides(IdentityKind::Thm1Weighted, &u, &f_quad(), 3.0, 2, &x).unwrap();
        assert!((w.scale - 64.0).abs() < 1e-12);
        assert!(residual_norm(&w.lhs, &w.rhs) < 1e-7);
        let t6 = identity_sides(IdentityKind::Thm6MVersion, &u, &f_quad(), 2.0, 3, &x).unwrap();
        assert!((t6.scale - 64.0).abs() < 1e-12);
        assert!(residual_norm(&t6.lhs, &t6.rhs) < 1e-7);
    }

    #[test]
    fn sweep_rejects_degenerate_input() {
        let case = IdentityCase::new(IdentityKind::Thm1Unweighted, zoo::map("dilation:1").unwrap(), f_quad())
            .unwrap()
            .with_family(Family::Dilation { dim: 2 });
        assert!(exponent_sweep(&case, &[2.0, 2.0]).is_err());
        assert!(exponent_sweep(&case, &[2.0]).is_err());
        assert!(exponent_sweep(&case, &[2.0, -1.0]).is_err());
        let no_family = IdentityCase { family: None, ..case };
        assert!(exponent_sweep(&no_family, &[1.0, 2.0]).is_err());
    }
}
