//! Config-driven runs of the symphonic checks, shared by the `symphonic` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod runner;

pub use config::{ConfigError, Diagnostics, Plan, RunConfig};
pub use report::Report;
