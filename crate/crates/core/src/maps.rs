//! Smooth maps between charts and their pointwise jets.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::autodiff::{evaluate_jets2, CoordinateFn};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{ChartManifold, MetricJet};
use crate::linalg::{Mat, Tensor3};
use crate::report::{PointResidual, ResidualReport};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq)]
enum Repr<T: Real> {
    Components(Vec<Expression>),
    Composite {
        outer: Arc<SmoothMap<T>>,
        inner: Arc<SmoothMap<T>>,
    },
}

/// A map `u: (M, g) → (N, h)` given in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap<T: Real> {
    name: String,
    source: Arc<ChartManifold<T>>,
    target: Arc<ChartManifold<T>>,
    repr: Repr<T>,
}

impl<T: Real> SmoothMap<T> {
    /// Map with components `u^i(x1, …, xm)`.
    pub fn new(
        name: impl Into<String>,
        source: Arc<ChartManifold<T>>,
        target: Arc<ChartManifold<T>>,
        components: Vec<Expression>,
    ) -> Result<Self> {
        let name = name.into();
        if components.len() != target.dim() {
            return Err(Error::DimensionMismatch {
                what: format!("components of map {name}"),
                expected: target.dim(),
                found: components.len(),
            });
        }
        if let Some(e) = components.iter().find(|e| e.arity() != source.dim()) {
            return Err(Error::DimensionMismatch {
                what: format!("arity of component `{}` of map {name}", e.source()),
                expected: source.dim(),
                found: e.arity(),
            });
        }
        Ok(SmoothMap {
            name,
            source,
            target,
            repr: Repr::Components(components),
        })
    }

    /// Parses each component string in the source coordinates.
    pub fn from_strs(
        name: impl Into<String>,
        source: Arc<ChartManifold<T>>,
        target: Arc<ChartManifold<T>>,
        components: &[&str],
    ) -> Result<Self> {
        let n = source.dim();
        let exprs = components
            .iter()
            .map(|s| Expression::parse(s, n))
            .collect::<Result<Vec<_>, _>>()?;
        SmoothMap::new(name, source, target, exprs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Arc<ChartManifold<T>> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ChartManifold<T>> {
        &self.target
    }

    pub fn source_dim(&self) -> usize {
        self.source.dim()
    }

    pub fn target_dim(&self) -> usize {
        self.target.dim()
    }

    /// Component source strings, or `None` for a composite.
    pub fn component_sources(&self) -> Option<Vec<String>> {
        match &self.repr {
            Repr::Components(es) => Some(es.iter().map(|e| e.source().to_string()).collect()),
            Repr::Composite { .. } => None,
        }
    }

    pub fn is_composite(&self) -> bool {
        matches!(self.repr, Repr::Composite { .. })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `u(x)` with domain checks on the source and on every intermediate chart.
    pub fn evaluate(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_domain(x)?;
        let y = self.eval(x)?;
        self.target.check_point(&y)?;
        Ok(y)
    }

    /// All pointwise geometric data at `x`.
    pub fn map_jet(&self, x: &[T]) -> Result<MapJet<T>> {
        let jets = evaluate_jets2(self, x)?;
        let image: Vec<T> = jets.iter().map(|j| j.value).collect();
        self.target.check_point(&image)?;
        let (m, n) = (self.source_dim(), self.target_dim());
        let du = Mat::from_fn(n, m, |i, a| jets[i].grad[a]);
        let ddu = Tensor3::from_fn(n, m, m, |i, a, b| jets[i].hess[(a, b)]);
        let source = self.source.metric_jet(x)?;
        let target = self.target.metric_jet_unchecked(&image)?;
        Ok(MapJet::assemble(x.to_vec(), image, du, ddu, source, target))
    }
}

impl<T: Real> fmt::Display for SmoothMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.name, self.source.name(), self.target.name())
    }
}

impl<T: Real> CoordinateFn<T> for SmoothMap<T> {
    fn input_dim(&self) -> usize {
        self.source.dim()
    }

    fn output_dim(&self) -> usize {
        self.target.dim()
    }

    fn check_domain(&self, x: &[T]) -> Result<()> {
        match &self.repr {
            Repr::Components(_) => self.source.check_point(x),
            Repr::Composite { outer, inner } => {
                inner.check_domain(x)?;
                let y = inner.eval(x)?;
                inner.target.check_point(&y)?;
                outer.check_domain(&y)
            }
        }
    }

    fn eval<S: Scalar<Real = T>>(&self, x: &[S]) -> Result<Vec<S>> {
        match &self.repr {
            Repr::Components(es) => es.iter().map(|e| Ok(e.evaluate(x)?)).collect(),
            Repr::Composite { outer, inner } => outer.eval(&inner.eval(x)?),
        }
    }
}

/// `outer ∘ inner`, evaluated by nesting the two maps.
///
/// `inner.target` and `outer.source` are identified by dimension; the
/// composite takes its source from `inner` and its target from `outer`.
pub fn compose<T: Real>(outer: &SmoothMap<T>, inner: &SmoothMap<T>) -> Result<SmoothMap<T>> {
    if inner.target_dim() != outer.source_dim() {
        return Err(Error::arg(format!(
            "cannot compose {} after {}: {} has target dimension {} but {} has source dimension {}",
            outer.name,
            inner.name,
            inner.name,
            inner.target_dim(),
            outer.name,
            outer.source_dim()
        )));
    }
    Ok(SmoothMap {
        name: format!("{}∘{}", outer.name, inner.name),
        source: inner.source.clone(),
        target: outer.target.clone(),
        repr: Repr::Composite {
            outer: Arc::new(outer.clone()),
            inner: Arc::new(inner.clone()),
        },
    })
}

/// Pointwise data of a map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapJet<T> {
    pub point: Vec<T>,
    pub image: Vec<T>,
    /// `du[(i, α)] = u^i_α`.
    pub du: Mat<T>,
    /// `ddu[(i, α, β)] = u^i_{αβ}`.
    pub ddu: Tensor3<T>,
    /// `(u*h)_{αβ} = h_{ij}(u(x)) u^i_α u^j_β`.
    pub pullback: Mat<T>,
    /// `P = g⁻¹·u*h`.
    pub p_endo: Mat<T>,
    /// `(∇du)^i_{αβ}`.
    pub second_fund: Tensor3<T>,
    /// Metric data of the source at the point.
    pub source: MetricJet<T>,
    /// Metric data of the target at the image.
    pub target: MetricJet<T>,
}

impl<T: Real> MapJet<T> {
    pub(crate) fn assemble(
        point: Vec<T>,
        image: Vec<T>,
        du: Mat<T>,
        ddu: Tensor3<T>,
        source: MetricJet<T>,
        target: MetricJet<T>,
    ) -> Self {
        let (n, m) = (du.rows(), du.cols());
        let pullback = du.transpose().matmul(&target.g).matmul(&du);
        let p_endo = source.g_inv.matmul(&pullback);
        let second_fund = Tensor3::from_fn(n, m, m, |i, a, b| {
            let mut v = ddu[(i, a, b)];
            for c in 0..m {
                v = v - source.christoffel[(c, a, b)] * du[(i, c)];
            }
            for j in 0..n {
                for k in 0..n {
                    v = v + target.christoffel[(i, j, k)] * du[(j, a)] * du[(k, b)];
                }
            }
            v
        });
        MapJet {
            point,
            image,
            du,
            ddu,
            pullback,
            p_endo,
            second_fund,
            source,
            target,
        }
    }

    pub fn source_dim(&self) -> usize {
        self.du.cols()
    }

    pub fn target_dim(&self) -> usize {
        self.du.rows()
    }

    /// `|du|² = tr P`.
    pub fn energy_density(&self) -> T {
        self.p_endo.trace()
    }

    /// `τ(u)^i = g^{αβ}(∇du)^i_{αβ}`.
    pub fn tension(&self) -> Vec<T> {
        let m = self.source_dim();
        (0..self.target_dim())
            .map(|i| {
                let mut s = T::lit(0.0);
                for a in 0..m {
                    for b in 0..m {
                        s = s + self.source.g_inv[(a, b)] * self.second_fund[(i, a, b)];
                    }
                }
                s
            })
            .collect()
    }
}

/// Both sides of `∇df(du X, du Y) + df(∇du(X, Y)) = (∇_X d(f∘u))Y` over all
/// coordinate directions `X = ∂_α`, `Y = ∂_β`, flattened as `[k][α][β]`.
pub fn chain_rule_sides<T: Real>(f: &SmoothMap<T>, u: &SmoothMap<T>, x: &[T]) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let fu = compose(f, u)?;
    let ju = u.map_jet(x)?;
    let jf = f.map_jet(&ju.image)?;
    let jfu = fu.map_jet(x)?;
    let (p, n, m) = (f.target_dim(), u.target_dim(), u.source_dim());
    let mut lhs = Vec::with_capacity(p * m * m);
    let mut rhs = Vec::with_capacity(p * m * m);
    for k in 0..p {
        for a in 0..m {
            for b in 0..m {
                let mut v = T::lit(0.0);
                for i in 0..n {
                    v = v + jf.du[(k, i)] * ju.second_fund[(i, a, b)];
                    for j in 0..n {
                        v = v + jf.second_fund[(k, i, j)] * ju.du[(i, a)] * ju.du[(j, b)];
                    }
                }
                lhs.push(v);
                rhs.push(jfu.second_fund[(k, a, b)]);
            }
        }
    }
    Ok((jfu.image, lhs, rhs))
}

/// Pointwise check of the composition formula for second fundamental forms.
///
/// The left side is assembled from the jets of `f` and `u` separately; the
/// right side is the second fundamental form of the nested composite. The
/// residual is the largest component-wise difference.
pub fn verify_chain_rule_main1<T: Real>(
    f: &SmoothMap<T>,
    u: &SmoothMap<T>,
    point: &[T],
    tol: f64,
) -> Result<ResidualReport> {
    let (image, lhs, rhs) = chain_rule_sides(f, u, point)?;
    let residual = lhs
        .iter()
        .zip(&rhs)
        .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs().to_f64_lossy()));
    let pr = PointResidual::new(point, &image, &lhs, &rhs, residual);
    Ok(ResidualReport::from_points("chain_rule", tol, vec![pr], vec![]))
}
