use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("coordinate {coordinate} = {value} lies outside the open interval ({lo}, {hi}) of {chart}")]
    OutsideDomain {
        chart: String,
        coordinate: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("metric of {chart} is not positive definite at {point:?}")]
    NotPositiveDefinite { chart: String, point: Vec<f64> },

    #[error("weight vanishes at {point:?} while p = {p} < 2")]
    SingularWeight { point: Vec<f64>, p: f64 },

    #[error("non-finite {what} at {point:?}")]
    NonFinite { what: String, point: Vec<f64> },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("singular matrix in {0}")]
    Singular(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
