//! Report documents and their text rendering.

use std::fmt::Write as _;

use serde::Serialize;
use symphonic::analysis::ConformalityReport;
use symphonic::identities::SweepResult;
use symphonic::report::{HypothesisCheck, ResidualReport};

use crate::config::{Params, RunConfig, TaskKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

impl Outcome {
    fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    Residual(ResidualReport),
    Conformality(ConformalityReport),
    Sweep(SweepResult),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRecord {
    pub name: String,
    pub kind: TaskKind,
    /// What was checked, e.g. `thm1_weighted(u = u, f = f)`.
    pub subject: String,
    pub params: Params,
    pub outcome: Outcome,
    /// Raw verdict of the underlying check, before any `expect` inversion.
    pub verdict: Option<bool>,
    pub max_residual: Option<f64>,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub hypotheses: Vec<HypothesisCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub tasks: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub exit_status: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub generator: String,
    pub config: RunConfig,
    pub summary: Summary,
    pub tasks: Vec<TaskRecord>,
}

impl Report {
    pub fn new(config: RunConfig, tasks: Vec<TaskRecord>) -> Self {
        let count = |o: Outcome| tasks.iter().filter(|t| t.outcome == o).count();
        let (passed, failed, errors) = (count(Outcome::Pass), count(Outcome::Fail), count(Outcome::Error));
        Report {
            schema_version: SCHEMA_VERSION,
            generator: format!("symphonic {}", env!("CARGO_PKG_VERSION")),
            config,
            summary: Summary {
                tasks: tasks.len(),
                passed,
                failed,
                errors,
                exit_status: if passed == tasks.len() { 0 } else { 1 },
            },
            tasks,
        }
    }

    pub fn exit_status(&self) -> i32 {
        self.summary.exit_status
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Fixed-width table of the task records.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = self.tasks.iter().map(|t| t.name.len()).max().unwrap_or(4).max(4);
        let sw = self.tasks.iter().map(|t| t.subject.len()).max().unwrap_or(7).max(7);
        let _ = writeln!(
            out,
            "{:<w$}  {:<9}  {:<sw$}  {:<6}  {:>12}  DETAIL",
            "TASK", "KIND", "SUBJECT", "RESULT", "MAX RESIDUAL"
        );
        for t in &self.tasks {
            let res = t.max_residual.map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
            let _ = writeln!(
                out,
                "{:<w$}  {:<9}  {:<sw$}  {:<6}  {:>12}  {}",
                t.name,
                t.kind.to_string(),
                t.subject,
                t.outcome.label(),
                res,
                t.detail
            );
            for h in &t.hypotheses {
                let _ = writeln!(
                    out,
                    "{:<w$}    hypothesis {}: {} ({:.3e}){}",
                    "",
                    h.name,
                    if h.holds { "holds" } else { "fails" },
                    h.max_residual,
                    if h.detail.is_empty() {
                        String::new()
                    } else {
                        format!(", {}", h.detail)
                    }
                );
            }
            if let Some(e) = &t.error {
                let _ = writeln!(out, "{:<w$}    error: {e}", "");
            }
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} tasks: {} passed, {} failed, {} errors",
            s.tasks, s.passed, s.failed, s.errors
        );
        out
    }
}
