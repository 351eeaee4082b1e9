//! Residual reports shared by predicates and identity checks.

use serde::Serialize;

use crate::scalar::Real;

fn to_f64s<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

/// Euclidean norm of `a − b`.
pub fn residual_norm<T: Real>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = (x - y).to_f64_lossy();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResidual {
    pub point: Vec<f64>,
    pub image: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: f64,
}

impl PointResidual {
    pub fn new<T: Real>(point: &[T], image: &[T], lhs: &[T], rhs: &[T], residual: f64) -> Self {
        PointResidual {
            point: to_f64s(point),
            image: to_f64s(image),
            lhs: to_f64s(lhs),
            rhs: to_f64s(rhs),
            residual,
        }
    }
}

/// A sample point left out of the verdict, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedPoint {
    pub point: Vec<f64>,
    pub reason: String,
}

impl ExcludedPoint {
    pub fn new<T: Real>(point: &[T], reason: impl Into<String>) -> Self {
        ExcludedPoint {
            point: to_f64s(point),
            reason: reason.into(),
        }
    }
}

/// Result of checking a hypothesis that an identity relies on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub holds: bool,
    pub max_residual: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub identity: String,
    pub tolerance: f64,
    pub per_point: Vec<PointResidual>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub fitted_exponent: Option<f64>,
    /// `max_residual < tolerance` over at least one evaluated point.
    pub verdict: bool,
    pub excluded: Vec<ExcludedPoint>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub notes: Vec<String>,
}

impl ResidualReport {
    pub fn from_points(
        identity: impl Into<String>,
        tolerance: f64,
        per_point: Vec<PointResidual>,
        excluded: Vec<ExcludedPoint>,
    ) -> Self {
        let n = per_point.len();
        let max_residual = per_point.iter().fold(0.0f64, |m, p| {
            if p.residual.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(p.residual)
            }
        });
        let mean_residual = if n == 0 {
            0.0
        } else {
            per_point.iter().map(|p| p.residual).sum::<f64>() / n as f64
        };
        let mut notes = Vec::new();
        if !excluded.is_empty() {
            notes.push(format!("{} of {} samples excluded", excluded.len(), n + excluded.len()));
        }
        if n == 0 {
            notes.push("no sample could be evaluated".into());
        }
        ResidualReport {
            identity: identity.into(),
            tolerance,
            per_point,
            max_residual,
            mean_residual,
            fitted_exponent: None,
            verdict: n > 0 && max_residual < tolerance,
            excluded,
            hypotheses: Vec::new(),
            notes,
        }
    }

    pub fn with_hypotheses(mut self, hypotheses: Vec<HypothesisCheck>) -> Self {
        self.hypotheses = hypotheses;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// True when every recorded hypothesis holds.
    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregates() {
        let pts = vec![
            PointResidual::new(&[0.0], &[0.0], &[1.0], &[1.5], 0.5),
            PointResidual::new(&[1.0], &[1.0], &[1.0], &[1.1], 0.1),
        ];
        let r = ResidualReport::from_points("x", 1.0, pts, vec![]);
        assert_eq!(r.max_residual, 0.5);
        assert!((r.mean_residual - 0.3).abs() < 1e-15);
        assert!(r.verdict);
        let empty = ResidualReport::from_points("x", 1.0, vec![], vec![ExcludedPoint::new(&[0.0], "w = 0")]);
        assert!(!empty.verdict);
        assert_eq!(empty.notes.len(), 2);
        assert_eq!(residual_norm(&[3.0, 0.0], &[0.0, 4.0]), 5.0);
    }
}
