//! Axis-aligned coordinate boxes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Interval { lo, hi }
    }

    pub fn unbounded() -> Self {
        Interval {
            lo: T::lit(f64::NEG_INFINITY),
            hi: T::lit(f64::INFINITY),
        }
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.all_finite() && self.hi.all_finite()
    }
}

/// Product of open intervals, one per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain<T> {
    intervals: Vec<Interval<T>>,
}

impl<T: Real> Domain<T> {
    pub fn new(intervals: Vec<Interval<T>>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::arg("domain needs at least one coordinate"));
        }
        for (k, iv) in intervals.iter().enumerate() {
            if !(iv.lo < iv.hi) {
                return Err(Error::arg(format!(
                    "coordinate {} has empty interval ({}, {})",
                    k + 1,
                    iv.lo,
                    iv.hi
                )));
            }
        }
        Ok(Domain { intervals })
    }

    pub fn unbounded(dim: usize) -> Self {
        Domain {
            intervals: vec![Interval::unbounded(); dim],
        }
    }

    /// Cube `(lo, hi)^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Domain {
            intervals: vec![Interval::new(T::lit(lo), T::lit(hi)); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    /// Checks membership, naming the first offending coordinate.
    pub fn check(&self, chart: &str, x: &[T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: format!("point on {chart}"),
                expected: self.dim(),
                found: x.len(),
            });
        }
        for (k, (iv, &v)) in self.intervals.iter().zip(x).enumerate() {
            if !iv.contains(v) {
                return Err(Error::OutsideDomain {
                    chart: chart.to_string(),
                    coordinate: k + 1,
                    value: v.to_f64_lossy(),
                    lo: iv.lo.to_f64_lossy(),
                    hi: iv.hi.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim() && self.intervals.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }
}
