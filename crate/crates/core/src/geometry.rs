//! Chart-described Riemannian manifolds.

use serde::Serialize;

use crate::autodiff::Dual;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::linalg::{Mat, Tensor3};
use crate::scalar::{Real, Scalar};

/// Metric components `g_{αβ}` as functions of the chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// `δ_{αβ}`.
    Euclidean,
    /// `φ(x)·δ_{αβ}`.
    Conformal(Expression),
    /// `diag(g_11(x), …, g_nn(x))`.
    Diagonal(Vec<Expression>),
    /// Upper triangle, row-major: `g_11, g_12, …, g_1n, g_22, …, g_nn`.
    Full(Vec<Expression>),
}

impl Metric {
    /// Source text of each component expression (empty for Euclidean).
    pub fn sources(&self) -> Vec<String> {
        match self {
            Metric::Euclidean => vec![],
            Metric::Conformal(e) => vec![e.source().to_string()],
            Metric::Diagonal(es) | Metric::Full(es) => es.iter().map(|e| e.source().to_string()).collect(),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Conformal(_) => "conformal",
            Metric::Diagonal(_) => "diagonal",
            Metric::Full(_) => "full",
        }
    }
}

/// A single coordinate chart with a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartManifold<T: Real> {
    name: String,
    domain: Domain<T>,
    metric: Metric,
}

/// Serializable description of a chart, used in reports.
#[derive(Debug, Clone, Serialize)]
pub struct ChartSummary {
    pub name: String,
    pub dim: usize,
    pub domain: Vec<(f64, f64)>,
    pub metric_kind: String,
    pub metric: Vec<String>,
}

impl<T: Real> ChartManifold<T> {
    pub fn new(name: impl Into<String>, domain: Domain<T>, metric: Metric) -> Result<Self> {
        let name = name.into();
        let n = domain.dim();
        let expected = match &metric {
            Metric::Euclidean => 0,
            Metric::Conformal(_) => 1,
            Metric::Diagonal(_) => n,
            Metric::Full(_) => n * (n + 1) / 2,
        };
        let exprs: &[Expression] = match &metric {
            Metric::Euclidean => &[],
            Metric::Conformal(e) => std::slice::from_ref(e),
            Metric::Diagonal(es) | Metric::Full(es) => es,
        };
        if exprs.len() != expected {
            return Err(Error::DimensionMismatch {
                what: format!("metric components of {name}"),
                expected,
                found: exprs.len(),
            });
        }
        if let Some(e) = exprs.iter().find(|e| e.arity() != n) {
            return Err(Error::DimensionMismatch {
                what: format!("arity of metric component `{}` of {name}", e.source()),
                expected: n,
                found: e.arity(),
            });
        }
        Ok(ChartManifold { name, domain, metric })
    }

    /// Flat `ℝⁿ` on the whole of `ℝⁿ`.
    pub fn euclidean(n: usize) -> Self {
        ChartManifold {
            name: format!("R{n}"),
            domain: Domain::unbounded(n),
            metric: Metric::Euclidean,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn is_euclidean(&self) -> bool {
        self.metric == Metric::Euclidean
    }

    pub fn summary(&self) -> ChartSummary {
        ChartSummary {
            name: self.name.clone(),
            dim: self.dim(),
            domain: self
                .domain
                .intervals()
                .iter()
                .map(|iv| (iv.lo.to_f64_lossy(), iv.hi.to_f64_lossy()))
                .collect(),
            metric_kind: self.metric.kind_name().into(),
            metric: self.metric.sources(),
        }
    }

    pub fn check_point(&self, x: &[T]) -> Result<()> {
        self.domain.check(&self.name, x)
    }

    /// `g_{αβ}(x)` over any scalar type; no domain check.
    pub fn metric_at<S: Scalar<Real = T>>(&self, x: &[S]) -> Result<Mat<S>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                what: format!("point on {}", self.name),
                expected: n,
                found: x.len(),
            });
        }
        Ok(match &self.metric {
            Metric::Euclidean => Mat::identity(n),
            Metric::Conformal(e) => {
                let phi = e.evaluate(x)?;
                Mat::identity(n).scale(phi)
            }
            Metric::Diagonal(es) => {
                let d = es.iter().map(|e| e.evaluate(x)).collect::<Result<Vec<_>, _>>()?;
                Mat::diagonal(&d)
            }
            Metric::Full(es) => {
                let mut g = Mat::zeros(n, n);
                let mut k = 0;
                for a in 0..n {
                    for b in a..n {
                        let v = es[k].evaluate(x)?;
                        g[(a, b)] = v;
                        g[(b, a)] = v;
                        k += 1;
                    }
                }
                g
            }
        })
    }

    fn not_pd(&self, x: &[T]) -> Error {
        Error::NotPositiveDefinite {
            chart: self.name.clone(),
            point: x.iter().map(|v| v.to_f64_lossy()).collect(),
        }
    }

    /// Orthonormal frame over any scalar type: columns of `L^{-T}` with `g = LLᵀ`.
    pub fn frame_at<S: Scalar<Real = T>>(&self, x: &[S]) -> Result<Mat<S>> {
        let g = self.metric_at(x)?;
        let l = g
            .cholesky()
            .ok_or_else(|| self.not_pd(&x.iter().map(Scalar::re).collect::<Vec<_>>()))?;
        Ok(l.lower_triangular_inverse()?.transpose())
    }

    /// Orthonormal frame at `x` (columns are frame vectors in the coordinate basis).
    pub fn orthonormal_frame(&self, x: &[T]) -> Result<Mat<T>> {
        self.check_point(x)?;
        self.frame_at(x)
    }

    /// `orthonormal_frame(x)·q` for an orthogonal `q`; the rotation hook for
    /// frame-independence checks.
    pub fn rotated_frame(&self, x: &[T], q: &Mat<T>) -> Result<Mat<T>> {
        Ok(self.orthonormal_frame(x)?.matmul(q))
    }

    /// Metric, inverse, first derivatives and Christoffel symbols at `x`.
    pub fn metric_jet(&self, x: &[T]) -> Result<MetricJet<T>> {
        self.check_point(x)?;
        self.metric_jet_unchecked(x)
    }

    /// As [`metric_jet`](Self::metric_jet) without the domain check; used for
    /// target points whose containment is checked by the caller.
    pub(crate) fn metric_jet_unchecked(&self, x: &[T]) -> Result<MetricJet<T>> {
        let n = self.dim();
        let g = self.metric_at(x)?;
        if g.as_slice().iter().any(|v| !v.all_finite()) {
            return Err(Error::NonFinite {
                what: format!("metric of {}", self.name),
                point: x.iter().map(|v| v.to_f64_lossy()).collect(),
            });
        }
        if g.cholesky().is_none() {
            return Err(self.not_pd(x));
        }
        let g_inv = g.inverse()?;
        let mut dg = Tensor3::zeros(n, n, n);
        if !self.is_euclidean() {
            for c in 0..n {
                let xd: Vec<Dual<T>> = (0..n)
                    .map(|k| Dual::new(x[k], if k == c { T::lit(1.0) } else { T::lit(0.0) }))
                    .collect();
                let gd = self.metric_at(&xd)?;
                for a in 0..n {
                    for b in 0..n {
                        dg[(c, a, b)] = gd[(a, b)].eps;
                    }
                }
            }
        }
        let christoffel = christoffel_from(&g_inv, &dg);
        Ok(MetricJet {
            g,
            g_inv,
            dg,
            christoffel,
        })
    }
}

/// `Γ^γ_{αβ} = ½ g^{γδ}(∂_α g_{δβ} + ∂_β g_{αδ} − ∂_δ g_{αβ})` with
/// `dg[(γ, α, β)] = ∂_γ g_{αβ}`.
pub fn christoffel_from<T: Real>(g_inv: &Mat<T>, dg: &Tensor3<T>) -> Tensor3<T> {
    let n = g_inv.rows();
    let half = T::lit(0.5);
    Tensor3::from_fn(n, n, n, |c, a, b| {
        let mut s = T::lit(0.0);
        for d in 0..n {
            s = s + g_inv[(c, d)] * (dg[(a, d, b)] + dg[(b, a, d)] - dg[(d, a, b)]);
        }
        half * s
    })
}

/// Pointwise metric data of a chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricJet<T> {
    /// `g_{αβ}`.
    pub g: Mat<T>,
    /// `g^{αβ}`.
    pub g_inv: Mat<T>,
    /// `dg[(γ, α, β)] = ∂_γ g_{αβ}`.
    pub dg: Tensor3<T>,
    /// `christoffel[(γ, α, β)] = Γ^γ_{αβ}`.
    pub christoffel: Tensor3<T>,
}

impl<T: Real> MetricJet<T> {
    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    /// Largest `|∂_γ g_{αβ} − Γ^δ_{γα} g_{δβ} − Γ^δ_{γβ} g_{αδ}|`.
    pub fn compatibility_defect(&self) -> T {
        let n = self.dim();
        let mut worst = T::lit(0.0);
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let mut r = self.dg[(c, a, b)];
                    for d in 0..n {
                        r = r
                            - self.christoffel[(d, c, a)] * self.g[(d, b)]
                            - self.christoffel[(d, c, b)] * self.g[(a, d)];
                    }
                    worst = worst.max_of(r.abs());
                }
            }
        }
        worst
    }
}
