//! Predicates on maps and the 2-jet probe machinery.
//!
//! The predicates evaluate a pointwise condition over a sample set and report
//! residuals. Sample evaluation runs in parallel; aggregation is in sample
//! order, so reports are deterministic.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::autodiff::Dual;
use crate::error::{Error, Result};
use crate::geometry::ChartManifold;
use crate::linalg::{inner, Mat};
use crate::maps::{compose, MapJet, SmoothMap};
use crate::report::{residual_norm, ExcludedPoint, PointResidual, ResidualReport};
use crate::scalar::{Real, Scalar};
use crate::tensors::frame::{frame_connection, frame_with_derivatives};
use crate::tensors::{weighted_divergence, SigmaKind};

fn to_f64s<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

/// Splits per-sample results into evaluated points and excluded ones; a
/// singular weight excludes the point, any other error aborts.
fn collect_points<T: Real>(
    samples: &[Vec<T>],
    results: Vec<Result<PointResidual>>,
) -> Result<(Vec<PointResidual>, Vec<ExcludedPoint>)> {
    let mut pts = Vec::new();
    let mut excluded = Vec::new();
    for (x, r) in samples.iter().zip(results) {
        match r {
            Ok(p) => pts.push(p),
            Err(e @ Error::SingularWeight { .. }) => excluded.push(ExcludedPoint::new(x, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    Ok((pts, excluded))
}

/// `max |div(‖u*h‖^{p−2} σ_u)|` over the samples.
pub fn is_p_symphonic<T: Real>(map: &SmoothMap<T>, p: f64, samples: &[Vec<T>], tol: f64) -> Result<ResidualReport> {
    if !(p >= 1.0) {
        return Err(Error::arg(format!("exponent p = {p} must be at least 1")));
    }
    let results: Vec<Result<PointResidual>> = samples
        .par_iter()
        .map(|x| {
            let d = weighted_divergence(map, SigmaKind::Symphonic, p, x)?;
            let zero = vec![T::lit(0.0); d.div.len()];
            let r = residual_norm(&d.div, &zero);
            Ok(PointResidual::new(x, &d.image, &d.div, &zero, r))
        })
        .collect();
    let (pts, excluded) = collect_points(samples, results)?;
    Ok(ResidualReport::from_points(
        format!("p_symphonic(p={p})"),
        tol,
        pts,
        excluded,
    ))
}

/// `(λ², residual)` of `g^{αβ}u^i_α u^j_β = λ² h^{ij}` at one jet, with
/// `λ² = tr(C·h)/dim N` and the residual the largest entry of `C − λ²h⁻¹`.
pub fn dilation_sq_at<T: Real>(jet: &MapJet<T>) -> (T, T) {
    let c = jet.du.matmul(&jet.source.g_inv).matmul(&jet.du.transpose());
    let n = jet.target_dim();
    let lambda_sq = c.matmul(&jet.target.g).trace() / T::lit(n as f64);
    let resid = c.max_abs_diff(&jet.target.g_inv.scale(lambda_sq));
    (lambda_sq, resid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalitySample {
    pub point: Vec<f64>,
    pub lambda_sq: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalityReport {
    pub map: String,
    pub tolerance: f64,
    pub samples: Vec<ConformalitySample>,
    pub max_residual: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `λ_max − λ_min < tolerance`.
    pub lambda_constant: bool,
    /// `max_residual < tolerance`.
    pub verdict: bool,
}

impl ConformalityReport {
    /// Mean of the extracted `λ`.
    pub fn mean_lambda(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.lambda_sq.max(0.0).sqrt()).sum::<f64>() / self.samples.len() as f64
    }
}

/// Horizontal conformality with the dilation extracted pointwise.
pub fn horizontal_conformality<T: Real>(
    map: &SmoothMap<T>,
    samples: &[Vec<T>],
    tol: f64,
) -> Result<ConformalityReport> {
    if map.source_dim() < map.target_dim() {
        return Err(Error::arg(format!(
            "horizontal conformality needs source dimension ≥ target dimension, got {} < {}",
            map.source_dim(),
            map.target_dim()
        )));
    }
    let rows: Vec<ConformalitySample> = samples
        .par_iter()
        .map(|x| {
            let jet = map.map_jet(x)?;
            let (l2, r) = dilation_sq_at(&jet);
            Ok(ConformalitySample {
                point: to_f64s(x),
                lambda_sq: l2.to_f64_lossy(),
                residual: r.to_f64_lossy(),
            })
        })
        .collect::<Result<_>>()?;
    let max_residual = rows.iter().fold(0.0f64, |m, s| m.max(s.residual));
    let lambdas: Vec<f64> = rows.iter().map(|s| s.lambda_sq.max(0.0).sqrt()).collect();
    let lambda_min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nonempty = !rows.is_empty();
    Ok(ConformalityReport {
        map: map.name().to_string(),
        tolerance: tol,
        samples: rows,
        max_residual,
        lambda_min: if nonempty { lambda_min } else { 0.0 },
        lambda_max: if nonempty { lambda_max } else { 0.0 },
        lambda_constant: nonempty && lambda_max - lambda_min < tol,
        verdict: nonempty && max_residual < tol,
    })
}

/// `max |∇du|` over the samples.
pub fn is_totally_geodesic<T: Real>(map: &SmoothMap<T>, samples: &[Vec<T>], tol: f64) -> Result<ResidualReport> {
    let pts: Vec<PointResidual> = samples
        .par_iter()
        .map(|x| {
            let jet = map.map_jet(x)?;
            let b = jet.second_fund.as_slice().to_vec();
            let zero = vec![T::lit(0.0); b.len()];
            let r = jet.second_fund.max_abs().to_f64_lossy();
            Ok(PointResidual::new(x, &jet.image, &b, &zero, r))
        })
        .collect::<Result<_>>()?;
    Ok(ResidualReport::from_points("totally_geodesic", tol, pts, vec![]))
}

/// `f_i f_j = λ g_{ij}` with `λ = g^{ij}f_i f_j / dim M`.
pub fn is_conformal_function<T: Real>(f: &SmoothMap<T>, samples: &[Vec<T>], tol: f64) -> Result<ResidualReport> {
    if f.target_dim() != 1 {
        return Err(Error::DimensionMismatch {
            what: format!("target of function {}", f.name()),
            expected: 1,
            found: f.target_dim(),
        });
    }
    let m = f.source_dim();
    let pts: Vec<PointResidual> = samples
        .par_iter()
        .map(|x| {
            let jet = f.map_jet(x)?;
            let grad = jet.du.row(0);
            let lambda = inner(&jet.source.g_inv, &grad, &grad) / T::lit(m as f64);
            let lhs: Vec<T> = (0..m * m).map(|k| grad[k / m] * grad[k % m]).collect();
            let rhs: Vec<T> = (0..m * m).map(|k| lambda * jet.source.g[(k / m, k % m)]).collect();
            let r = lhs
                .iter()
                .zip(&rhs)
                .fold(0.0f64, |a, (&l, &r)| a.max((l - r).abs().to_f64_lossy()));
            Ok(PointResidual::new(x, &[lambda], &lhs, &rhs, r))
        })
        .collect::<Result<_>>()?;
    let mut rep = ResidualReport::from_points("conformal_function", tol, pts, vec![]);
    rep.notes.push("image column holds the extracted λ".into());
    if m >= 2 {
        rep.notes.push(format!(
            "∇f⊗∇f has rank ≤ 1 while g has rank {m}; the condition only holds where ∇f = 0"
        ));
    }
    Ok(rep)
}

/// Scalar `p`-Laplacian `div(|∇f|^{2p−2}∇f)` of a function, computed as
/// `(1/√det g) ∂_α(√det g · |∇f|^{2p−2} g^{αβ} f_β)`.
pub fn scalar_p_laplacian<T: Real>(f: &SmoothMap<T>, p: f64, x: &[T]) -> Result<T> {
    if f.target_dim() != 1 || !f.target().is_euclidean() {
        return Err(Error::arg(format!("{} is not a real-valued function", f.name())));
    }
    let jet = f.map_jet(x)?;
    let m = f.source_dim();
    let (zero, one) = (T::lit(0.0), T::lit(1.0));
    let mut total = zero;
    let mut sqrt_det = one;
    for a in 0..m {
        let xd: Vec<Dual<T>> = (0..m)
            .map(|k| Dual::new(x[k], if k == a { one } else { zero }))
            .collect();
        let g = f.source().metric_at(&xd)?;
        let l = g.cholesky().ok_or_else(|| Error::NotPositiveDefinite {
            chart: f.source().name().to_string(),
            point: to_f64s(x),
        })?;
        let sd = (0..m).fold(Dual::new(one, zero), |s, k| s * l[(k, k)]);
        let g_inv = g.inverse()?;
        let df: Vec<Dual<T>> = (0..m).map(|b| Dual::new(jet.du[(0, b)], jet.ddu[(0, b, a)])).collect();
        let grad_sq = inner(&g_inv, &df, &df);
        let q = if p == 1.0 {
            Dual::new(one, zero)
        } else if grad_sq.re > zero {
            grad_sq.powf(T::lit(p - 1.0))
        } else {
            return Err(Error::SingularWeight { point: to_f64s(x), p });
        };
        let flux_a = (0..m).fold(Dual::new(zero, zero), |s, b| s + g_inv[(a, b)] * df[b]);
        total = total + (sd * q * flux_a).eps;
        sqrt_det = sd.re;
    }
    let v = total / sqrt_det;
    if !v.all_finite() {
        return Err(Error::NonFinite {
            what: "scalar p-Laplacian".into(),
            point: to_f64s(x),
        });
    }
    Ok(v)
}

/// First and second partial derivatives prescribed for a test function at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Jet2Data<T> {
    pub c: Vec<T>,
    pub c2: Mat<T>,
}

impl<T: Real> Jet2Data<T> {
    pub fn new(c: Vec<T>, c2: Mat<T>) -> Result<Self> {
        let n = c.len();
        if c2.rows() != n || c2.cols() != n {
            return Err(Error::DimensionMismatch {
                what: "second-order jet coefficients".into(),
                expected: n,
                found: c2.rows(),
            });
        }
        if c2.max_abs_diff(&c2.transpose()) > T::lit(0.0) {
            return Err(Error::arg("second-order jet coefficients must be symmetric"));
        }
        Ok(Jet2Data { c, c2 })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }
}

/// Left side of the 2-jet constraint with every repeated index summed:
/// `2(p−2) C_k C_i C_j (C_i C_{ik} C_j² + C_i² C_j C_{jk}) + C_i² C_j² (C_{kk} C_i C_j + C_k C_{ik} C_j + C_k C_i C_{jk})`.
///
/// Contracted to `4(p−2)·S₃·Q + S₃²·tr C₂ + 2·S₃·Q` with `S₃ = Σ C_i³` and
/// `Q = Σ_{ik} C_i² C_{ik} C_k`.
pub fn prop2_constraint<T: Real>(jet: &Jet2Data<T>, p: f64) -> T {
    let c = &jet.c;
    let s3 = c.iter().fold(T::lit(0.0), |s, &v| s + v * v * v);
    let c2c = jet.c2.matvec(c);
    let q = c.iter().zip(&c2c).fold(T::lit(0.0), |s, (&v, &w)| s + v * v * w);
    T::lit(4.0 * (p - 2.0)) * s3 * q + s3 * s3 * jet.c2.trace() + T::lit(2.0) * s3 * q
}

/// The coordinate probes `C = e_k`, `C₂ = 0`.
pub fn probe_jets(target_dim: usize) -> Result<Vec<Jet2Data<f64>>> {
    if target_dim == 0 {
        return Err(Error::arg("probe dimension must be at least 1"));
    }
    Ok((0..target_dim)
        .map(|k| Jet2Data {
            c: (0..target_dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect(),
            c2: Mat::zeros(target_dim, target_dim),
        })
        .collect())
}

/// Coordinate function `y ↦ y^{k+1}` on `chart`.
pub fn coordinate_probe<T: Real>(chart: &Arc<ChartManifold<T>>, k: usize) -> Result<SmoothMap<T>> {
    let line = Arc::new(ChartManifold::euclidean(1));
    SmoothMap::from_strs(format!("y{}", k + 1), chart.clone(), line, &[&format!("x{}", k + 1)])
}

/// Pulls back each coordinate probe `f_k(y) = y^k` through `u` and checks that
/// `f_k∘u` is `p`-symphonic, up to the probe's own defect scaled by `λ^{2p}`.
///
/// Passing is necessary for `u` to be a `p`-symphonic morphism, not sufficient.
pub fn morphism_probe_test<T: Real>(u: &SmoothMap<T>, p: f64, samples: &[Vec<T>], tol: f64) -> Result<ResidualReport> {
    if !(p >= 1.0) {
        return Err(Error::arg(format!("exponent p = {p} must be at least 1")));
    }
    let n = u.target_dim();
    let flat = u.target().is_euclidean();
    let mut pts = Vec::new();
    let mut excluded = Vec::new();
    let mut probe_max = Vec::new();
    for k in 0..n {
        let fk = coordinate_probe(u.target(), k)?;
        let composite = compose(&fk, u)?;
        let results: Vec<Result<PointResidual>> = samples
            .par_iter()
            .map(|x| {
                let lhs = weighted_divergence(&composite, SigmaKind::Symphonic, p, x)?;
                let jet = u.map_jet(x)?;
                let base = if flat {
                    T::lit(0.0)
                } else {
                    let (l2, _) = dilation_sq_at(&jet);
                    let own = weighted_divergence(&fk, SigmaKind::Symphonic, p, &jet.image)?;
                    l2.powf(T::lit(p)) * own.div[0]
                };
                let r = (lhs.div[0] - base).abs().to_f64_lossy();
                Ok(PointResidual::new(x, &lhs.image, &lhs.div, &[base], r))
            })
            .collect();
        let (p_k, e_k) = collect_points(samples, results)?;
        probe_max.push(p_k.iter().fold(0.0f64, |m, q| m.max(q.residual)));
        pts.extend(p_k);
        excluded.extend(e_k);
    }
    let mut rep = ResidualReport::from_points(format!("morphism_probe(p={p})"), tol, pts, excluded);
    for (k, m) in probe_max.iter().enumerate() {
        rep.notes.push(format!("probe y{}: max residual {m:e}", k + 1));
    }
    if !flat {
        rep.notes
            .push("rhs holds λ^{2p} times the probe's own weighted divergence at u(x)".into());
    }
    rep.notes
        .push("passing is a necessary condition for a p-symphonic morphism, not a sufficient one".into());
    Ok(rep)
}

/// Terms of the expansion of `div(w^{p−2}σ_{f∘u})` in an orthonormal frame.
///
/// With `A_a = d(f∘u)ε_a`, `B_ab = ∇du(ε_a, ε_b)`, `F_ab = d(f∘u)(∇_{ε_a}ε_b)`
/// and `σ_a = Σ_c ⟨A_a, A_c⟩A_c`:
///
/// * `i_*`: the three `∇du` terms of `div σ`, `Σ⟨df B_bb, A_a⟩A_a`,
///   `Σ⟨A_b, df B_ba⟩A_a`, `Σ⟨A_b, A_a⟩df B_ba`;
/// * `ii_second_fund`, `ii_frame`: the six terms of `Σ_a ε_a(w²)σ_a / 4` split by type,
///   each `∇du` term equal to `Σ⟨df B_ab, σ_b⟩σ_a`;
/// * `iii_*`: `Σ⟨σ_b, Hf(duε_a, duε_b)⟩σ_a`, `Σ⟨σ_b, df B_ab⟩σ_a`, `Σ⟨σ_b, F_ab⟩σ_a`.
///
/// For horizontally conformal `u` with dilation `λ`,
/// `div(w^{p−2}σ_{f∘u}) = λ^{2p}·div(w_f^{p−2}σ_f)∘u + w^{p−2}(I + I_frame) + ((p−2)/2)w^{p−4}(II + III)`,
/// where the Hessian term of III is part of the first summand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem7Terms {
    pub point: Vec<f64>,
    pub image: Vec<f64>,
    pub p: f64,
    pub lambda: f64,
    pub weight: f64,
    pub i_tension: Vec<f64>,
    pub i_first: Vec<f64>,
    pub i_second: Vec<f64>,
    /// Frame-derivative terms of `div σ`; cancel identically.
    pub i_frame: Vec<f64>,
    pub ii_second_fund: [Vec<f64>; 3],
    pub ii_frame: [Vec<f64>; 3],
    pub iii_hessian: Vec<f64>,
    pub iii_second_fund: Vec<f64>,
    pub iii_frame: Vec<f64>,
    /// `I = i_tension + i_first + i_second`.
    pub i: Vec<f64>,
    /// Sum of all six II terms.
    pub ii: Vec<f64>,
    /// `iii_second_fund + iii_frame`.
    pub iii: Vec<f64>,
    /// `λ^{2p}·div(w_f^{p−2}σ_f)` at `u(x)`.
    pub scaled_f_term: Vec<f64>,
    /// Directly computed `div(w^{p−2}σ_{f∘u})`.
    pub total: Vec<f64>,
    /// Right side of the decomposition.
    pub decomposition: Vec<f64>,
    /// `|total − decomposition|`.
    pub residual: f64,
}

type V = Vec<f64>;

fn vzero(n: usize) -> V {
    vec![0.0; n]
}

fn axpy(acc: &mut V, s: f64, v: &[f64]) {
    for (a, &b) in acc.iter_mut().zip(v) {
        *a += s * b;
    }
}

fn vsum(vs: &[&V]) -> V {
    let mut out = vzero(vs[0].len());
    for v in vs {
        axpy(&mut out, 1.0, v);
    }
    out
}

/// Evaluates every term of the frame expansion at `x` (see [`Theorem7Terms`]).
pub fn theorem7_ingredients(f: &SmoothMap<f64>, u: &SmoothMap<f64>, p: f64, x: &[f64]) -> Result<Theorem7Terms> {
    if !(p >= 1.0) {
        return Err(Error::arg(format!("exponent p = {p} must be at least 1")));
    }
    let fu = compose(f, u)?;
    let ju = u.map_jet(x)?;
    let jf = f.map_jet(&ju.image)?;
    let q = f.target_dim();
    let (e, de) = frame_with_derivatives(u.source(), x, None)?;
    let conn = frame_connection(&ju.source, &e, &de);
    let k = e.cols();
    let m = u.source_dim();
    let h = &jf.target.g;
    let ip = |a: &[f64], b: &[f64]| inner(h, a, b);

    let ue: Mat<f64> = ju.du.matmul(&e);
    let a_vec: Vec<V> = (0..k).map(|a| jf.du.matvec(&ue.col(a))).collect();
    let b_vec = |a: usize, b: usize| -> V {
        let bb: Vec<f64> = (0..u.target_dim())
            .map(|i| {
                let mut s = 0.0;
                for al in 0..m {
                    for be in 0..m {
                        s += ju.second_fund[(i, al, be)] * e[(al, a)] * e[(be, b)];
                    }
                }
                s
            })
            .collect();
        jf.du.matvec(&bb)
    };
    let dfb: Vec<Vec<V>> = (0..k).map(|a| (0..k).map(|b| b_vec(a, b)).collect()).collect();
    let fr: Vec<Vec<V>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    let v: Vec<f64> = (0..m).map(|be| conn[(a, b, be)]).collect();
                    jf.du.matvec(&ju.du.matvec(&v))
                })
                .collect()
        })
        .collect();
    let hess = |v: &[f64], w: &[f64]| -> V {
        (0..q)
            .map(|kk| {
                let mut s = 0.0;
                for i in 0..v.len() {
                    for j in 0..w.len() {
                        s += jf.second_fund[(kk, i, j)] * v[i] * w[j];
                    }
                }
                s
            })
            .collect()
    };
    let gram = Mat::from_fn(k, k, |a, b| ip(&a_vec[a], &a_vec[b]));
    let sig: Vec<V> = (0..k)
        .map(|a| {
            let mut s = vzero(q);
            for c in 0..k {
                axpy(&mut s, gram[(a, c)], &a_vec[c]);
            }
            s
        })
        .collect();
    let w2: f64 = gram.as_slice().iter().map(|v| v * v).sum();

    let mut i_tension = vzero(q);
    let mut i_first = vzero(q);
    let mut i_second = vzero(q);
    let mut i_frame = vzero(q);
    for a in 0..k {
        for b in 0..k {
            axpy(&mut i_tension, ip(&dfb[b][b], &a_vec[a]), &a_vec[a]);
            axpy(&mut i_first, ip(&a_vec[b], &dfb[b][a]), &a_vec[a]);
            axpy(&mut i_second, gram[(b, a)], &dfb[b][a]);
            // ∇_{ε_b}A_a frame part, minus σ(∇_{ε_b}ε_b).
            axpy(&mut i_frame, ip(&fr[b][b], &a_vec[a]), &a_vec[a]);
            axpy(&mut i_frame, ip(&a_vec[b], &fr[b][a]), &a_vec[a]);
            axpy(&mut i_frame, gram[(b, a)], &fr[b][a]);
            axpy(&mut i_frame, -ip(&fr[b][b], &a_vec[a]), &a_vec[a]);
        }
    }
    let mut ii_sf = [vzero(q), vzero(q), vzero(q)];
    let mut ii_fr = [vzero(q), vzero(q), vzero(q)];
    let mut iii_hessian = vzero(q);
    let mut iii_second_fund = vzero(q);
    let mut iii_frame = vzero(q);
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                let g_cb = gram[(c, b)];
                axpy(&mut ii_sf[0], ip(&dfb[a][b], &a_vec[c]) * g_cb, &sig[a]);
                axpy(&mut ii_fr[0], ip(&fr[a][b], &a_vec[c]) * g_cb, &sig[a]);
                axpy(&mut ii_sf[1], ip(&a_vec[b], &dfb[a][c]) * g_cb, &sig[a]);
                axpy(&mut ii_fr[1], ip(&a_vec[b], &fr[a][c]) * g_cb, &sig[a]);
                axpy(&mut ii_sf[2], g_cb * ip(&dfb[a][c], &a_vec[b]), &sig[a]);
                axpy(&mut ii_fr[2], g_cb * ip(&fr[a][c], &a_vec[b]), &sig[a]);
            }
            let hab = hess(&ue.col(a), &ue.col(b));
            axpy(&mut iii_hessian, ip(&sig[b], &hab), &sig[a]);
            axpy(&mut iii_second_fund, ip(&sig[b], &dfb[a][b]), &sig[a]);
            axpy(&mut iii_frame, ip(&sig[b], &fr[a][b]), &sig[a]);
        }
    }
    let i = vsum(&[&i_tension, &i_first, &i_second]);
    let ii = vsum(&[&ii_sf[0], &ii_sf[1], &ii_sf[2], &ii_fr[0], &ii_fr[1], &ii_fr[2]]);
    let iii = vsum(&[&iii_second_fund, &iii_frame]);

    let (l2, _) = dilation_sq_at(&ju);
    let lambda = l2.max(0.0).sqrt();
    let f_div = weighted_divergence(f, SigmaKind::Symphonic, p, &ju.image)?;
    let scaled_f_term: V = f_div.div.iter().map(|v| l2.powf(p) * v).collect();
    let total = weighted_divergence(&fu, SigmaKind::Symphonic, p, x)?.div;
    let w = w2.sqrt();
    let mut decomposition = scaled_f_term.clone();
    if p != 2.0 && w2 == 0.0 {
        return Err(Error::SingularWeight { point: x.to_vec(), p });
    }
    let wp2 = if p == 2.0 { 1.0 } else { w.powf(p - 2.0) };
    axpy(&mut decomposition, wp2, &vsum(&[&i, &i_frame]));
    if p != 2.0 {
        axpy(
            &mut decomposition,
            (p - 2.0) / 2.0 * w.powf(p - 4.0),
            &vsum(&[&ii, &iii]),
        );
    }
    let residual = residual_norm(&total, &decomposition);
    Ok(Theorem7Terms {
        point: x.to_vec(),
        image: jf.image.clone(),
        p,
        lambda,
        weight: w,
        i_tension,
        i_first,
        i_second,
        i_frame,
        ii_second_fund: ii_sf,
        ii_frame: ii_fr,
        iii_hessian,
        iii_second_fund,
        iii_frame,
        i,
        ii,
        iii,
        scaled_f_term,
        total,
        decomposition,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: usize) -> Arc<ChartManifold<f64>> {
        Arc::new(ChartManifold::euclidean(n))
    }

    fn brute_force(jet: &Jet2Data<f64>, p: f64) -> f64 {
        let (c, c2, n) = (&jet.c, &jet.c2, jet.dim());
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

    #[test]
    fn prop2_examples() {
        let j = Jet2Data::new(vec![1.0, 0.0, 0.0], Mat::diagonal(&[0.0, 1.0, 1.0])).unwrap();
        assert_eq!(brute_force(&j, 2.0), 2.0);
        assert_eq!(prop2_constraint(&j, 2.0), 2.0);
        let z = Jet2Data::new(vec![0.3, -1.2], Mat::zeros(2, 2)).unwrap();
        assert_eq!(prop2_constraint(&z, 3.0), 0.0);
        for pj in probe_jets(3).unwrap() {
            assert_eq!(pj.c.iter().map(|v| v * v).sum::<f64>(), 1.0);
            assert_eq!(prop2_constraint(&pj, 1.5), 0.0);
        }
        assert!(Jet2Data::new(vec![1.0, 0.0], Mat::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]])).is_err());
    }

    #[test]
    fn conformal_function_examples() {
        let f = SmoothMap::from_strs("3x", r(1), r(1), &["3*x1"]).unwrap();
        let rep = is_conformal_function(&f, &[vec![0.4]], 1e-12).unwrap();
        assert!(rep.verdict);
        assert!((rep.per_point[0].image[0] - 9.0).abs() < 1e-13);
        let g = SmoothMap::from_strs("x1", r(2), r(1), &["x1"]).unwrap();
        let rep = is_conformal_function(&g, &[vec![0.4, 0.1]], 1e-3).unwrap();
        assert!(!rep.verdict);
        assert!((rep.max_residual - 0.5).abs() < 1e-13);
        let c = SmoothMap::from_strs("c", r(2), r(1), &["2"]).unwrap();
        assert!(is_conformal_function(&c, &[vec![0.4, 0.1]], 1e-12).unwrap().verdict);
    }

    #[test]
    fn conformality_of_projection_and_cube() {
        let pr = SmoothMap::from_strs("pr", r(3), r(2), &["1.5*x1", "1.5*x2"]).unwrap();
        let s = vec![vec![0.1, 0.2, 0.3], vec![-0.4, 0.5, 0.9]];
        let rep = horizontal_conformality(&pr, &s, 1e-12).unwrap();
        assert!(rep.verdict && rep.lambda_constant);
        assert!((rep.lambda_min - 1.5).abs() < 1e-14);
        let cube = SmoothMap::from_strs("cube", r(2), r(2), &["x1", "x2^3"]).unwrap();
        assert!(!horizontal_conformality(&cube, &[vec![0.3, 0.7]], 1e-6).unwrap().verdict);
        let up = SmoothMap::from_strs("up", r(1), r(2), &["x1", "x1"]).unwrap();
        assert!(horizontal_conformality(&up, &[vec![0.3]], 1e-6).is_err());
    }

    #[test]
    fn scalar_laplacian_matches_tensor_path() {
        let f = SmoothMap::from_strs("f", r(2), r(1), &["x1^2"]).unwrap();
        let x = [0.7, 0.1];
        assert!((scalar_p_laplacian(&f, 2.0, &x).unwrap() - 24.0 * 0.49).abs() < 1e-12);
        let g = SmoothMap::from_strs("g", r(3), r(1), &["sin(x1)*x2 + x3^2*x1"]).unwrap();
        let y = [0.3, -0.8, 0.5];
        for p in [1.5, 2.0, 3.0] {
            let a = scalar_p_laplacian(&g, p, &y).unwrap();
            let b = weighted_divergence(&g, SigmaKind::Symphonic, p, &y).unwrap().div[0];
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn probes_separate_dilation_from_cube() {
        let s = vec![vec![0.3, 0.4], vec![-0.6, 0.8], vec![0.5, -0.2]];
        let dil = SmoothMap::from_strs("dil", r(2), r(2), &["2*x1", "2*x2"]).unwrap();
        let cube = SmoothMap::from_strs("cube", r(2), r(2), &["x1", "x2^3"]).unwrap();
        for p in [1.5, 2.0, 3.0, 4.0] {
            assert!(morphism_probe_test(&dil, p, &s, 1e-9).unwrap().verdict);
            assert!(!morphism_probe_test(&cube, p, &s, 1e-3).unwrap().verdict);
        }
    }

    #[test]
    fn frame_expansion_on_dilation_and_linear_maps() {
        let f = SmoothMap::from_strs("f", r(2), r(2), &["x1^2 - x2", "sin(x1*x2)"]).unwrap();
        let u = SmoothMap::from_strs("u", r(2), r(2), &["2*x1", "2*x2"]).unwrap();
        for p in [2.0, 2.5, 3.0] {
            let t = theorem7_ingredients(&f, &u, p, &[0.3, -0.4]).unwrap();
            assert!(
                t.residual < 1e-8 * t.total.iter().map(|v| v.abs()).fold(1.0, f64::max),
                "{t:?}"
            );
            for v in [&t.i, &t.i_frame, &t.iii_second_fund, &t.iii_frame, &t.ii] {
                assert!(v.iter().all(|c| c.abs() < 1e-12));
            }
        }
    }
}
