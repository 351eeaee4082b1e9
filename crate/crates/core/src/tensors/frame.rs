//! Orthonormal-frame realizations of the stress tensors.
//!
//! These follow the nested frame sums literally, e.g.
//! `σ_u(X) = Σ_b ⟨du X, du ε_b⟩ du ε_b`, and compute divergences as
//! `Σ_a (∇_{ε_a}σ)(ε_a)` with the frame differentiated through its Cholesky
//! construction. They share no matrix-power code with the parent module and
//! serve as its oracle.

use crate::autodiff::Dual;
use crate::error::{Error, Result};
use crate::geometry::{ChartManifold, MetricJet};
use crate::linalg::{inner, Mat, Tensor3};
use crate::maps::SmoothMap;
use crate::scalar::{Real, Scalar};

use super::{SigmaKind, WeightRule};

/// Gram matrix `G_{ab} = ⟨du ε_a, du ε_b⟩_h` and the vectors `du ε_a` (columns).
fn gram<S: Scalar>(du: &Mat<S>, e: &Mat<S>, h: &Mat<S>) -> (Mat<S>, Mat<S>) {
    let a = du.matmul(e);
    let k = e.cols();
    let g = Mat::from_fn(k, k, |i, j| inner(h, &a.col(i), &a.col(j)));
    (g, a)
}

/// `Σ_{b_1…b_len} G_{a b_1} G_{b_1 b_2} ⋯ G_{b_{len−1} b_len} · v(b_len)` by explicit recursion.
fn chain_sum<S: Scalar>(g: &Mat<S>, start: usize, len: u32, leaf: &dyn Fn(usize) -> Vec<S>) -> Vec<S> {
    if len == 0 {
        return leaf(start);
    }
    let mut acc: Option<Vec<S>> = None;
    for b in 0..g.rows() {
        let sub = chain_sum(g, b, len - 1, leaf);
        let w = g[(start, b)];
        acc = Some(match acc {
            None => sub.iter().map(|&v| w * v).collect(),
            Some(a) => a.iter().zip(&sub).map(|(&x, &v)| x + w * v).collect(),
        });
    }
    acc.unwrap_or_default()
}

/// `Σ_{b_1…b_m} G_{b_1 b_2} G_{b_2 b_3} ⋯ G_{b_m b_1}`.
fn cyclic_sum<S: Scalar>(g: &Mat<S>, m: u32) -> S {
    let mut total = S::zero();
    for b in 0..g.rows() {
        let closing = |k: usize| vec![g[(k, b)]];
        total = total + chain_sum(g, b, m - 1, &closing)[0];
    }
    total
}

fn frame_sigma_vectors<S: Scalar>(
    kind: SigmaKind,
    du: &Mat<S>,
    e: &Mat<S>,
    h: &Mat<S>,
    source_dim: usize,
) -> Vec<Vec<S>> {
    let (g, a) = gram(du, e, h);
    let k = e.cols();
    let energy = (0..k).fold(S::zero(), |s, i| s + g[(i, i)]);
    let order = match kind {
        SigmaKind::Power { m } | SigmaKind::TraceTPower { m, .. } | SigmaKind::TraceSPower { m, .. } => m,
        _ => 2,
    };
    let lit = |v: f64| S::constant(S::Real::lit(v));
    let tp = |p: f64| {
        if energy.re() > S::Real::lit(0.0) {
            energy.powf(S::Real::lit(p / 2.0))
        } else {
            S::zero()
        }
    };
    let dim = source_dim as f64;
    let coeff = match kind {
        SigmaKind::Symphonic | SigmaKind::Power { .. } => S::zero(),
        SigmaKind::TraceT => -energy / lit(dim),
        SigmaKind::TraceS => energy * lit((dim - 4.0) / 4.0),
        SigmaKind::TraceTPower { m, p } => -tp(p) / lit(m as f64),
        SigmaKind::TraceSPower { m, p } => tp(p) * lit((m as f64 - 4.0) / 4.0),
    };
    let leaf = |b: usize| a.col(b);
    (0..k)
        .map(|i| {
            let lead = chain_sum(&g, i, order - 1, &leaf);
            lead.iter().zip(a.col(i)).map(|(&l, v)| l + coeff * v).collect()
        })
        .collect()
}

fn frame_weight_sq<S: Scalar>(rule: WeightRule, du: &Mat<S>, e: &Mat<S>, h: &Mat<S>) -> S {
    let (g, _) = gram(du, e, h);
    match rule {
        WeightRule::Unit => S::one(),
        WeightRule::Pullback => {
            let k = g.rows();
            let mut s = S::zero();
            for i in 0..k {
                for j in 0..k {
                    s = s + g[(i, j)] * g[(i, j)];
                }
            }
            s
        }
        WeightRule::PowerNorm { m } => cyclic_sum(&g, m),
    }
}

/// Coordinate components `σ(∂_β) = Σ_a σ(ε_a) (E⁻¹)_{aβ}`.
fn to_coordinates<S: Scalar>(vectors: &[Vec<S>], e: &Mat<S>, target_dim: usize) -> Result<Mat<S>> {
    let e_inv = e.inverse()?;
    let m = e.rows();
    Ok(Mat::from_fn(target_dim, m, |i, b| {
        (0..vectors.len()).fold(S::zero(), |s, a| s + vectors[a][i] * e_inv[(a, b)])
    }))
}

fn frame_at<S: Scalar<Real = T>, T: Real>(
    chart: &ChartManifold<T>,
    x: &[S],
    rotation: Option<&Mat<T>>,
) -> Result<Mat<S>> {
    let e = chart.frame_at(x)?;
    Ok(match rotation {
        Some(q) => e.matmul(&q.map(S::constant)),
        None => e,
    })
}

/// `σ^i_α` from nested frame sums, optionally in the rotated frame `E·Q`.
pub fn sigma_frame_sum<T: Real>(
    u: &SmoothMap<T>,
    kind: SigmaKind,
    x: &[T],
    rotation: Option<&Mat<T>>,
) -> Result<Mat<T>> {
    let jet = u.map_jet(x)?;
    let e = frame_at(u.source(), x, rotation)?;
    let v = frame_sigma_vectors(kind, &jet.du, &e, &jet.target.g, jet.source_dim());
    to_coordinates(&v, &e, jet.target_dim())
}

/// `w²` from frame sums.
pub fn weight_sq_frame_sum<T: Real>(
    u: &SmoothMap<T>,
    rule: WeightRule,
    x: &[T],
    rotation: Option<&Mat<T>>,
) -> Result<T> {
    let jet = u.map_jet(x)?;
    let e = frame_at(u.source(), x, rotation)?;
    Ok(frame_weight_sq(rule, &jet.du, &e, &jet.target.g))
}

/// Orthonormal frame `E` (optionally `E·Q`) and its coordinate derivatives
/// `∂_γE`, obtained by differentiating the Cholesky factorization.
pub fn frame_with_derivatives<T: Real>(
    chart: &ChartManifold<T>,
    x: &[T],
    rotation: Option<&Mat<T>>,
) -> Result<(Mat<T>, Vec<Mat<T>>)> {
    chart.check_point(x)?;
    let m = chart.dim();
    let mut e = None;
    let mut de = Vec::with_capacity(m);
    for c in 0..m {
        let xd: Vec<Dual<T>> = (0..m)
            .map(|k| Dual::new(x[k], if k == c { T::lit(1.0) } else { T::lit(0.0) }))
            .collect();
        let ed = frame_at(chart, &xd, rotation)?;
        if e.is_none() {
            e = Some(ed.map(|v| v.re));
        }
        de.push(ed.map(|v| v.eps));
    }
    let e = match e {
        Some(e) => e,
        None => frame_at(chart, x, rotation)?,
    };
    Ok((e, de))
}

/// `conn[(a, b, β)] = (∇_{ε_a} ε_b)^β = ε_a^γ (∂_γ ε_b^β + Γ^β_{γδ} ε_b^δ)`.
pub fn frame_connection<T: Real>(metric: &MetricJet<T>, e: &Mat<T>, de: &[Mat<T>]) -> Tensor3<T> {
    let m = e.rows();
    let k = e.cols();
    Tensor3::from_fn(k, k, m, |a, b, beta| {
        let mut s = T::lit(0.0);
        for c in 0..m {
            let mut inner = de[c][(beta, b)];
            for d in 0..m {
                inner = inner + metric.christoffel[(beta, c, d)] * e[(d, b)];
            }
            s = s + e[(c, a)] * inner;
        }
        s
    })
}

/// `Σ_a [∇_{ε_a}(Wσ(ε_a)) − Wσ(∇_{ε_a}ε_a)]` with `W = w^{p−2}` (or 1 for
/// [`WeightRule::Unit`]).
pub fn divergence_frame_sum<T: Real>(
    u: &SmoothMap<T>,
    kind: SigmaKind,
    rule: WeightRule,
    p: f64,
    x: &[T],
    rotation: Option<&Mat<T>>,
) -> Result<Vec<T>> {
    let jet = u.map_jet(x)?;
    let (n, m) = (jet.target_dim(), jet.source_dim());
    let zero = T::lit(0.0);
    let one = T::lit(1.0);
    let e_exp = if rule == WeightRule::Unit { 0.0 } else { (p - 2.0) / 2.0 };
    // v[γ][a] = Dual components of W·σ(ε_a) differentiated along ∂_γ.
    let mut vals: Option<Vec<Vec<T>>> = None;
    let mut dvals: Vec<Vec<Vec<T>>> = Vec::with_capacity(m);
    let mut frame = None;
    let mut dframe = Vec::with_capacity(m);
    for c in 0..m {
        let x_d: Vec<Dual<T>> = (0..m)
            .map(|k| Dual::new(x[k], if k == c { one } else { zero }))
            .collect();
        let y_d: Vec<Dual<T>> = (0..n).map(|i| Dual::new(jet.image[i], jet.du[(i, c)])).collect();
        let du_d = Mat::from_fn(n, m, |i, a| Dual::new(jet.du[(i, a)], jet.ddu[(i, a, c)]));
        let e_d = frame_at(u.source(), &x_d, rotation)?;
        let h_d = u.target().metric_at(&y_d)?;
        let w2 = frame_weight_sq(rule, &du_d, &e_d, &h_d);
        let weight = if e_exp == 0.0 {
            Dual::one()
        } else if w2.re > zero {
            w2.powf(T::lit(e_exp))
        } else if p < 2.0 {
            return Err(Error::SingularWeight {
                point: x.iter().map(|v| v.to_f64_lossy()).collect(),
                p,
            });
        } else {
            Dual::zero()
        };
        let vs = frame_sigma_vectors(kind, &du_d, &e_d, &h_d, m);
        let vs: Vec<Vec<Dual<T>>> = vs
            .into_iter()
            .map(|v| v.into_iter().map(|s| weight * s).collect())
            .collect();
        if vals.is_none() {
            vals = Some(vs.iter().map(|v| v.iter().map(|s| s.re).collect()).collect());
            frame = Some(e_d.map(|s| s.re));
        }
        dvals.push(vs.iter().map(|v| v.iter().map(|s| s.eps).collect()).collect());
        dframe.push(e_d.map(|s| s.eps));
    }
    let (vals, e) = match (vals, frame) {
        (Some(v), Some(e)) => (v, e),
        _ => return Ok(vec![zero; n]),
    };
    let k = e.cols();
    let conn = frame_connection(&jet.source, &e, &dframe);
    let coords = to_coordinates(&vals, &e, n)?;
    let mut div = vec![zero; n];
    for a in 0..k {
        for i in 0..n {
            let mut s = zero;
            for c in 0..m {
                let mut d = dvals[c][a][i];
                for j in 0..n {
                    for l in 0..n {
                        d = d + jet.target.christoffel[(i, j, l)] * jet.du[(j, c)] * vals[a][l];
                    }
                }
                s = s + e[(c, a)] * d;
            }
            for beta in 0..m {
                s = s - conn[(a, a, beta)] * coords[(i, beta)];
            }
            div[i] = div[i] + s;
        }
    }
    Ok(div)
}
