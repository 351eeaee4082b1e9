//! Stress tensors along maps and their divergences.
//!
//! Every tensor here is a `u⁻¹TN`-valued 1-form `σ^i_α` built from `du` and
//! the endomorphism `P = g⁻¹·u*h`:
//!
//! | kind                 | `σ`                                          |
//! |----------------------|----------------------------------------------|
//! | `Symphonic`          | `du·P`                                       |
//! | `Power { m }`        | `du·P^{m−1}`                                 |
//! | `TraceT`             | `du·P − (tr P / dim M)·du`                   |
//! | `TraceS`             | `du·P + ((dim M − 4)/4)·tr P·du`             |
//! | `TraceTPower { m, p }` | `du·P^{m−1} − (1/m)(tr P)^{p/2}·du`        |
//! | `TraceSPower { m, p }` | `du·P^{m−1} + ((m − 4)/4)(tr P)^{p/2}·du`  |
//!
//! Divergences differentiate the whole construction: each source direction
//! `γ` is one forward pass with first-order [`Dual`] numbers seeded by the
//! second derivatives of `u`, the metric `g` at the seeded point and the
//! metric `h` at the seeded image.

pub mod frame;

use serde::Serialize;

use crate::autodiff::Dual;
use crate::error::{Error, Result};
use crate::linalg::{Mat, Tensor3};
use crate::maps::{MapJet, SmoothMap};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaKind {
    Symphonic,
    Power { m: u32 },
    TraceT,
    TraceS,
    TraceTPower { m: u32, p: f64 },
    TraceSPower { m: u32, p: f64 },
}

impl SigmaKind {
    fn validate(self) -> Result<Self> {
        match self {
            SigmaKind::Power { m } if m < 2 => Err(Error::arg(format!("power order m = {m} must be at least 2"))),
            SigmaKind::TraceTPower { m, p } | SigmaKind::TraceSPower { m, p } => {
                if m < 2 {
                    Err(Error::arg(format!("power order m = {m} must be at least 2")))
                } else if !(p >= 1.0) {
                    Err(Error::arg(format!("exponent p = {p} must be at least 1")))
                } else {
                    Ok(self)
                }
            }
            _ => Ok(self),
        }
    }

    /// Power of `P` appearing in the leading term.
    fn order(self) -> u32 {
        match self {
            SigmaKind::Power { m } | SigmaKind::TraceTPower { m, .. } | SigmaKind::TraceSPower { m, .. } => m,
            _ => 2,
        }
    }

    /// The weight whose `(p−2)`-th power makes this tensor variational.
    pub fn natural_weight(self) -> WeightRule {
        match self {
            SigmaKind::Power { m } if m != 2 => WeightRule::PowerNorm { m },
            SigmaKind::Symphonic | SigmaKind::Power { .. } => WeightRule::Pullback,
            _ => WeightRule::Unit,
        }
    }
}

/// Scalar `w` whose power `w^{p−2}` weights a divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum WeightRule {
    /// `w = 1`.
    Unit,
    /// `w = ‖u*h‖ = (tr P²)^{1/2}`.
    Pullback,
    /// `w = ‖d_m u‖ = (tr P^m)^{1/2}`.
    PowerNorm { m: u32 },
}

/// `P = g⁻¹ duᵀ h du`.
pub fn pullback_endo<S: Scalar>(du: &Mat<S>, g_inv: &Mat<S>, h: &Mat<S>) -> Mat<S> {
    g_inv.matmul(&du.transpose().matmul(h).matmul(du))
}

/// `t^{p/2}` with `0^{p/2} = 0`.
fn trace_power<S: Scalar>(t: S, p: f64) -> S {
    if t.re() > S::Real::lit(0.0) {
        t.powf(S::Real::lit(p / 2.0))
    } else {
        S::zero()
    }
}

/// `σ` from `du` and `P`; `source_dim` enters the trace-modified kinds.
pub fn sigma_from_parts<S: Scalar>(kind: SigmaKind, du: &Mat<S>, p_endo: &Mat<S>, source_dim: usize) -> Mat<S> {
    let lit = |v: f64| S::constant(S::Real::lit(v));
    let lead = du.matmul(&p_endo.pow(kind.order() - 1));
    let tr = p_endo.trace();
    let dim = source_dim as f64;
    match kind {
        SigmaKind::Symphonic | SigmaKind::Power { .. } => lead,
        SigmaKind::TraceT => lead.sub(&du.scale(tr / lit(dim))),
        SigmaKind::TraceS => lead.add(&du.scale(tr * lit((dim - 4.0) / 4.0))),
        SigmaKind::TraceTPower { m, p } => lead.sub(&du.scale(trace_power(tr, p) / lit(m as f64))),
        SigmaKind::TraceSPower { m, p } => lead.add(&du.scale(trace_power(tr, p) * lit((m as f64 - 4.0) / 4.0))),
    }
}

/// `w²` for the given rule.
pub fn weight_sq<S: Scalar>(rule: WeightRule, p_endo: &Mat<S>) -> S {
    match rule {
        WeightRule::Unit => S::one(),
        WeightRule::Pullback => p_endo.matmul(p_endo).trace(),
        WeightRule::PowerNorm { m } => p_endo.pow(m).trace(),
    }
}

/// A stress tensor along a map.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField<T: Real> {
    map: SmoothMap<T>,
    kind: SigmaKind,
}

/// Divergence of a (possibly weighted) tensor at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceResult<T> {
    pub point: Vec<T>,
    pub image: Vec<T>,
    /// `div(w^{p−2}σ)^i`; the plain divergence when unweighted.
    pub div: Vec<T>,
    /// `w^{p−2}` at the point (1 when unweighted).
    pub weight_value: T,
    /// `w` itself.
    pub weight_base: T,
    /// `g^{αβ} ∂_α(w^{p−2}) σ^i_β`.
    pub gradient_term: Vec<T>,
    /// `w^{p−2}·div(σ)^i`.
    pub weighted_term: Vec<T>,
}

/// `|du|²`, `‖u*h‖²` and `‖d_m u‖²` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyDensities<T> {
    pub e_du: T,
    pub e_pullback: T,
    pub m: u32,
    pub e_m: T,
}

/// `σ`, its coordinate derivatives `∂_γσ`, `w²` and `∂_γ(w²)` at a point.
pub(crate) struct SigmaDerivatives<T> {
    pub jet: MapJet<T>,
    pub sigma: Mat<T>,
    pub dsigma: Vec<Mat<T>>,
    pub w2: T,
    pub dw2: Vec<T>,
}

/// One dual-number pass per source direction; `premultiply` multiplies the
/// tensor by `(w²)^{e}` inside the pass.
pub(crate) fn sigma_derivatives<T: Real>(
    map: &SmoothMap<T>,
    kind: SigmaKind,
    rule: WeightRule,
    x: &[T],
    premultiply: Option<f64>,
) -> Result<SigmaDerivatives<T>> {
    let jet = map.map_jet(x)?;
    let (n, m) = (jet.target_dim(), jet.source_dim());
    let zero = T::lit(0.0);
    let one = T::lit(1.0);
    let mut dsigma = Vec::with_capacity(m);
    let mut dw2 = Vec::with_capacity(m);
    let mut sigma = None;
    let mut w2 = zero;
    for c in 0..m {
        let du_d = Mat::from_fn(n, m, |i, a| Dual::new(jet.du[(i, a)], jet.ddu[(i, a, c)]));
        let x_d: Vec<Dual<T>> = (0..m)
            .map(|k| Dual::new(x[k], if k == c { one } else { zero }))
            .collect();
        let y_d: Vec<Dual<T>> = (0..n).map(|i| Dual::new(jet.image[i], jet.du[(i, c)])).collect();
        let g_inv_d = map.source().metric_at(&x_d)?.inverse()?;
        let h_d = map.target().metric_at(&y_d)?;
        let p_d = pullback_endo(&du_d, &g_inv_d, &h_d);
        let mut s_d = sigma_from_parts(kind, &du_d, &p_d, m);
        let w2_d = weight_sq(rule, &p_d);
        if let Some(e) = premultiply {
            let factor = if w2_d.re > zero {
                w2_d.powf(T::lit(e))
            } else if e == 0.0 {
                Dual::one()
            } else {
                Dual::zero()
            };
            s_d = s_d.scale(factor);
        }
        if sigma.is_none() {
            sigma = Some(s_d.map(|v| v.re));
            w2 = w2_d.re;
        }
        dsigma.push(s_d.map(|v| v.eps));
        dw2.push(w2_d.eps);
    }
    let sigma = match sigma {
        Some(s) => s,
        None => Mat::zeros(n, m),
    };
    if sigma
        .as_slice()
        .iter()
        .chain(dsigma.iter().flat_map(|d| d.as_slice()))
        .any(|v| !v.all_finite())
    {
        return Err(Error::NonFinite {
            what: "stress tensor derivative".into(),
            point: x.iter().map(|v| v.to_f64_lossy()).collect(),
        });
    }
    Ok(SigmaDerivatives {
        jet,
        sigma,
        dsigma,
        w2,
        dw2,
    })
}

/// `(∇σ)^i_{αβ} = ∂_ασ^i_β − Γ^γ_{αβ}σ^i_γ + Γ̃^i_{jk} u^j_α σ^k_β`, stored `[i][α][β]`.
pub(crate) fn covariant_from<T: Real>(jet: &MapJet<T>, sigma: &Mat<T>, dsigma: &[Mat<T>]) -> Tensor3<T> {
    let (n, m) = (jet.target_dim(), jet.source_dim());
    Tensor3::from_fn(n, m, m, |i, a, b| {
        let mut v = dsigma[a][(i, b)];
        for c in 0..m {
            v = v - jet.source.christoffel[(c, a, b)] * sigma[(i, c)];
        }
        for j in 0..n {
            for k in 0..n {
                v = v + jet.target.christoffel[(i, j, k)] * jet.du[(j, a)] * sigma[(k, b)];
            }
        }
        v
    })
}

/// `g^{αβ}(∇σ)^i_{αβ}`.
pub(crate) fn trace_covariant<T: Real>(jet: &MapJet<T>, nabla: &Tensor3<T>) -> Vec<T> {
    let (n, m) = (jet.target_dim(), jet.source_dim());
    (0..n)
        .map(|i| {
            let mut s = T::lit(0.0);
            for a in 0..m {
                for b in 0..m {
                    s = s + jet.source.g_inv[(a, b)] * nabla[(i, a, b)];
                }
            }
            s
        })
        .collect()
}

impl<T: Real> TensorField<T> {
    pub fn new(map: SmoothMap<T>, kind: SigmaKind) -> Result<Self> {
        Ok(TensorField {
            map,
            kind: kind.validate()?,
        })
    }

    pub fn map(&self) -> &SmoothMap<T> {
        &self.map
    }

    pub fn kind(&self) -> SigmaKind {
        self.kind
    }

    /// Components `σ^i_α` at `x`.
    pub fn components(&self, x: &[T]) -> Result<Mat<T>> {
        let jet = self.map.map_jet(x)?;
        Ok(sigma_from_parts(self.kind, &jet.du, &jet.p_endo, jet.source_dim()))
    }

    /// `(∇σ)^i_{αβ}` at `x`.
    pub fn covariant_derivative(&self, x: &[T]) -> Result<Tensor3<T>> {
        let d = sigma_derivatives(&self.map, self.kind, WeightRule::Unit, x, None)?;
        Ok(covariant_from(&d.jet, &d.sigma, &d.dsigma))
    }

    /// `div_g σ` at `x`.
    pub fn divergence(&self, x: &[T]) -> Result<DivergenceResult<T>> {
        let d = sigma_derivatives(&self.map, self.kind, WeightRule::Unit, x, None)?;
        let div = trace_covariant(&d.jet, &covariant_from(&d.jet, &d.sigma, &d.dsigma));
        let one = T::lit(1.0);
        Ok(DivergenceResult {
            point: x.to_vec(),
            image: d.jet.image.clone(),
            gradient_term: vec![T::lit(0.0); div.len()],
            weighted_term: div.clone(),
            div,
            weight_value: one,
            weight_base: one,
        })
    }

    /// `div_g(w^{p−2}σ)` at `x`, split by the product rule.
    ///
    /// At `w = 0` the weight is singular for `p < 2`; for `p ≥ 2` it is
    /// extended continuously (`w^{p−2}` is 1 at `p = 2` and 0 above) and the
    /// gradient term is taken as 0.
    pub fn weighted_divergence(&self, rule: WeightRule, p: f64, x: &[T]) -> Result<DivergenceResult<T>> {
        if !(p >= 1.0) {
            return Err(Error::arg(format!("exponent p = {p} must be at least 1")));
        }
        let d = sigma_derivatives(&self.map, self.kind, rule, x, None)?;
        let div = trace_covariant(&d.jet, &covariant_from(&d.jet, &d.sigma, &d.dsigma));
        let (n, m) = (d.jet.target_dim(), d.jet.source_dim());
        let zero = T::lit(0.0);
        let e = T::lit((p - 2.0) / 2.0);
        let (weight, dweight): (T, Vec<T>) = if rule == WeightRule::Unit || p == 2.0 {
            (T::lit(1.0), vec![zero; m])
        } else if d.w2 > zero {
            let w = d.w2.powf(e);
            let coeff = e * d.w2.powf(e - T::lit(1.0));
            (w, d.dw2.iter().map(|&g| coeff * g).collect())
        } else if p < 2.0 {
            return Err(Error::SingularWeight {
                point: x.iter().map(|v| v.to_f64_lossy()).collect(),
                p,
            });
        } else {
            (zero, vec![zero; m])
        };
        let gradient_term: Vec<T> = (0..n)
            .map(|i| {
                let mut s = zero;
                for a in 0..m {
                    for b in 0..m {
                        s = s + d.jet.source.g_inv[(a, b)] * dweight[a] * d.sigma[(i, b)];
                    }
                }
                s
            })
            .collect();
        let weighted_term: Vec<T> = div.iter().map(|&v| weight * v).collect();
        let total = gradient_term.iter().zip(&weighted_term).map(|(&a, &b)| a + b).collect();
        if !weight.all_finite() || gradient_term.iter().any(|v| !v.all_finite()) {
            return Err(Error::NonFinite {
                what: "weighted divergence".into(),
                point: x.iter().map(|v| v.to_f64_lossy()).collect(),
            });
        }
        Ok(DivergenceResult {
            point: x.to_vec(),
            image: d.jet.image,
            div: total,
            weight_value: weight,
            weight_base: d.w2.sqrt(),
            gradient_term,
            weighted_term,
        })
    }

    /// `div_g(w^{p−2}σ)` with the weight folded into the tensor before
    /// differentiating; a single-term cross-check of
    /// [`weighted_divergence`](Self::weighted_divergence).
    pub fn weighted_divergence_direct(&self, rule: WeightRule, p: f64, x: &[T]) -> Result<Vec<T>> {
        let e = if rule == WeightRule::Unit { 0.0 } else { (p - 2.0) / 2.0 };
        let d = sigma_derivatives(&self.map, self.kind, rule, x, Some(e))?;
        Ok(trace_covariant(&d.jet, &covariant_from(&d.jet, &d.sigma, &d.dsigma)))
    }
}

/// `σ_u = du·P`.
pub fn sigma<T: Real>(u: &SmoothMap<T>, x: &[T]) -> Result<Mat<T>> {
    TensorField::new(u.clone(), SigmaKind::Symphonic)?.components(x)
}

/// `σ_{m,u} = du·P^{m−1}`.
pub fn sigma_m<T: Real>(u: &SmoothMap<T>, m: u32, x: &[T]) -> Result<Mat<T>> {
    TensorField::new(u.clone(), SigmaKind::Power { m })?.components(x)
}

/// `σ_{T,u} = du·P − (tr P / dim M)·du`.
pub fn sigma_t<T: Real>(u: &SmoothMap<T>, x: &[T]) -> Result<Mat<T>> {
    TensorField::new(u.clone(), SigmaKind::TraceT)?.components(x)
}

/// `σ_{S,u} = du·P + ((dim M − 4)/4)·tr P·du`.
pub fn sigma_s<T: Real>(u: &SmoothMap<T>, x: &[T]) -> Result<Mat<T>> {
    TensorField::new(u.clone(), SigmaKind::TraceS)?.components(x)
}

/// `σ_{T,u,m} = du·P^{m−1} − (1/m)(tr P)^{p/2}·du`.
pub fn sigma_t_m<T: Real>(u: &SmoothMap<T>, m: u32, p: f64, x: &[T]) -> Result<Mat<T>> {
    TensorField::new(u.clone(), SigmaKind::TraceTPower { m, p })?.components(x)
}

/// `σ_{S,u,m} = du·P^{m−1} + ((m−4)/4)(tr P)^{p/2}·du`.
pub fn sigma_s_m<T: Real>(u: &SmoothMap<T>, m: u32, p: f64, x: &[T]) -> Result<Mat<T>> {
    TensorField::new(u.clone(), SigmaKind::TraceSPower { m, p })?.components(x)
}

pub fn energy_densities<T: Real>(u: &SmoothMap<T>, m: u32, x: &[T]) -> Result<EnergyDensities<T>> {
    if m < 2 {
        return Err(Error::arg(format!("power order m = {m} must be at least 2")));
    }
    let p = u.map_jet(x)?.p_endo;
    Ok(EnergyDensities {
        e_du: p.trace(),
        e_pullback: p.matmul(&p).trace(),
        m,
        e_m: p.pow(m).trace(),
    })
}

/// Plain divergence of `σ` of the given kind along `u`.
pub fn divergence<T: Real>(u: &SmoothMap<T>, kind: SigmaKind, x: &[T]) -> Result<DivergenceResult<T>> {
    TensorField::new(u.clone(), kind)?.divergence(x)
}

/// Weighted divergence `div(w^{p−2}σ)` with the kind's natural weight.
pub fn weighted_divergence<T: Real>(u: &SmoothMap<T>, kind: SigmaKind, p: f64, x: &[T]) -> Result<DivergenceResult<T>> {
    TensorField::new(u.clone(), kind)?.weighted_divergence(kind.natural_weight(), p, x)
}
