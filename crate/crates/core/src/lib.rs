//! Chart-based evaluation of symphonic stress tensors.
//!
//! The crate computes, at points of coordinate charts, the stress tensors
//! `σ_u = du∘P`, their power and trace-modified variants, plain and weighted
//! divergences along maps, and checks composition identities for maps
//! between Riemannian manifolds numerically.
//!
//! The geometric core (charts, maps, tensors, predicates) is generic over the
//! base float ([`Real`]: `f32` or `f64`). The zoo, the identity checks and the
//! aliases at the crate root use `f64`, which the tolerances are calibrated for.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod autodiff;
pub mod domain;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod identities;
pub mod linalg;
pub mod maps;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod tensors;
pub mod zoo;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// `f64` chart.
pub type Manifold = geometry::ChartManifold<f64>;
/// `f64` map.
pub type Map = maps::SmoothMap<f64>;
/// `f64` matrix.
pub type Matrix = linalg::Mat<f64>;
/// `f64` stress tensor field.
pub type Field = tensors::TensorField<f64>;
