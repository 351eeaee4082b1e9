//! TOML run configurations and their static validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use symphonic::domain::{Domain, Interval};
use symphonic::expr::Expression;
use symphonic::geometry::{ChartManifold, Metric};
use symphonic::identities::{Family, IdentityKind};
use symphonic::sampling::{DEFAULT_SAMPLES, DEFAULT_SEED};
use symphonic::{zoo, Manifold, Map};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_EXPONENT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Default seed for tasks that do not set one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Default sample count for tasks that do not set one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub manifolds: BTreeMap<String, ManifoldSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub maps: BTreeMap<String, MapSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Report path, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zoo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// One `[lo, hi]` pair per coordinate; `inf` bounds are allowed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean,
    Conformal { factor: String },
    Diagonal { components: Vec<String> },
    Full { components: Vec<String> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zoo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Defaults to flat space of dimension `components.len()`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Predicate,
    Identity,
    Sweep,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Predicate => "predicate",
            TaskKind::Identity => "identity",
            TaskKind::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateKind {
    PSymphonic,
    HorizontallyConformal,
    TotallyGeodesic,
    ConformalFunction,
    MorphismProbe,
}

impl PredicateKind {
    pub fn name(self) -> &'static str {
        match self {
            PredicateKind::PSymphonic => "p_symphonic",
            PredicateKind::HorizontallyConformal => "horizontally_conformal",
            PredicateKind::TotallyGeodesic => "totally_geodesic",
            PredicateKind::ConformalFunction => "conformal_function",
            PredicateKind::MorphismProbe => "morphism_probe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Dilation,
    ScaledProjection,
}

/// One `[[tasks]]` entry. Which fields apply depends on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<PredicateKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<IdentityKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// Expected constant dilation for `horizontally_conformal`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent_tol: Option<f64>,
    /// Expected predicate verdict; `false` turns a non-example into a passing task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<bool>,
}

impl TaskSpec {
    pub fn new(kind: TaskKind) -> Self {
        TaskSpec {
            kind,
            name: None,
            predicate: None,
            map: None,
            identity: None,
            u: None,
            f: None,
            family: None,
            lambdas: None,
            lambda: None,
            p: None,
            m: None,
            samples: None,
            seed: None,
            tol: None,
            exponent_tol: None,
            expect: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("malformed config: {0}")]
    Syntax(String),

    #[error("{context}: unknown object `{name}`")]
    UnknownObject { context: String, name: String },

    #[error("{context}: {message}")]
    Invalid { context: String, message: String },
}

impl ConfigError {
    fn invalid(context: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            context: context.into(),
            message: message.into(),
        }
    }
}

/// Every problem found while validating a config.
#[derive(Debug)]
pub struct Diagnostics(pub Vec<ConfigError>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "error: {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

impl From<ConfigError> for Diagnostics {
    fn from(e: ConfigError) -> Self {
        Diagnostics(vec![e])
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// Resolves every object and checks every task; reports all problems at once.
    pub fn resolve(&self) -> Result<Plan, Diagnostics> {
        let mut errs = Vec::new();
        let objects = Objects::build(self, &mut errs);
        let mut names = BTreeSet::new();
        let mut jobs = Vec::new();
        for (i, t) in self.tasks.iter().enumerate() {
            let name = t.name.clone().unwrap_or_else(|| format!("task{}", i + 1));
            if !names.insert(name.clone()) {
                errs.push(ConfigError::invalid(format!("task `{name}`"), "duplicate task name"));
            }
            if let Some(job) = resolve_task(self, &objects, t, name, &mut errs) {
                jobs.push(job);
            }
        }
        if errs.is_empty() {
            Ok(Plan { jobs })
        } else {
            Err(Diagnostics(errs))
        }
    }
}

struct Objects {
    manifolds: BTreeMap<String, Arc<Manifold>>,
    maps: BTreeMap<String, Map>,
}

impl Objects {
    fn build(cfg: &RunConfig, errs: &mut Vec<ConfigError>) -> Self {
        let mut manifolds = BTreeMap::new();
        for (name, spec) in &cfg.manifolds {
            match build_manifold(name, spec) {
                Ok(m) => {
                    manifolds.insert(name.clone(), m);
                }
                Err(e) => errs.push(e),
            }
        }
        let mut out = Objects {
            manifolds,
            maps: BTreeMap::new(),
        };
        for (name, spec) in &cfg.maps {
            match out.build_map(cfg, name, spec) {
                Ok(m) => {
                    out.maps.insert(name.clone(), m);
                }
                Err(e) => errs.push(e),
            }
        }
        out
    }

    fn chart(&self, cfg: &RunConfig, context: &str, name: &str) -> Result<Arc<Manifold>, ConfigError> {
        if let Some(m) = self.manifolds.get(name) {
            return Ok(m.clone());
        }
        if cfg.manifolds.contains_key(name) {
            return Err(ConfigError::invalid(
                context,
                format!("manifold `{name}` is itself invalid"),
            ));
        }
        zoo::manifold(name).map_err(|_| ConfigError::UnknownObject {
            context: context.into(),
            name: name.into(),
        })
    }

    fn build_map(&self, cfg: &RunConfig, name: &str, spec: &MapSpec) -> Result<Map, ConfigError> {
        let ctx = format!("map `{name}`");
        match (&spec.zoo, &spec.components) {
            (Some(id), None) => {
                if spec.source.is_some() || spec.target.is_some() {
                    return Err(ConfigError::invalid(ctx, "a zoo map takes no `source` or `target`"));
                }
                zoo::map(id).map_err(|e| ConfigError::invalid(ctx, e.to_string()))
            }
            (None, Some(comps)) => {
                let src = spec
                    .source
                    .as_deref()
                    .ok_or_else(|| ConfigError::invalid(&ctx, "`source` is required with `components`"))?;
                let source = self.chart(cfg, &ctx, src)?;
                let target = match &spec.target {
                    Some(t) => self.chart(cfg, &ctx, t)?,
                    None => Arc::new(Manifold::euclidean(comps.len())),
                };
                let exprs = comps
                    .iter()
                    .map(|c| {
                        Expression::parse(c, source.dim())
                            .map_err(|e| ConfigError::invalid(&ctx, format!("component `{c}`: {e}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Map::new(name, source, target, exprs).map_err(|e| ConfigError::invalid(ctx, e.to_string()))
            }
            _ => Err(ConfigError::invalid(ctx, "give exactly one of `zoo` or `components`")),
        }
    }

    fn map(&self, cfg: &RunConfig, context: &str, name: &str) -> Result<Map, ConfigError> {
        if let Some(m) = self.maps.get(name) {
            return Ok(m.clone());
        }
        if cfg.maps.contains_key(name) {
            return Err(ConfigError::invalid(context, format!("map `{name}` is itself invalid")));
        }
        zoo::map(name).map_err(|_| ConfigError::UnknownObject {
            context: context.into(),
            name: name.into(),
        })
    }
}

fn build_manifold(name: &str, spec: &ManifoldSpec) -> Result<Arc<Manifold>, ConfigError> {
    let ctx = format!("manifold `{name}`");
    if let Some(id) = &spec.zoo {
        if spec.dim.is_some() || spec.domain.is_some() || spec.metric.is_some() {
            return Err(ConfigError::invalid(ctx, "a zoo manifold takes no other fields"));
        }
        return zoo::manifold(id).map_err(|e| ConfigError::invalid(ctx, e.to_string()));
    }
    let dim = match (spec.dim, &spec.domain) {
        (Some(d), Some(b)) if d != b.len() => {
            return Err(ConfigError::invalid(
                ctx,
                format!("dim = {d} but the domain has {} intervals", b.len()),
            ))
        }
        (Some(d), _) => d,
        (None, Some(b)) => b.len(),
        (None, None) => return Err(ConfigError::invalid(ctx, "needs `dim` or `domain`")),
    };
    if dim == 0 {
        return Err(ConfigError::invalid(ctx, "dimension must be positive"));
    }
    let domain = match &spec.domain {
        Some(b) => Domain::new(b.iter().map(|[lo, hi]| Interval::new(*lo, *hi)).collect()),
        None => Ok(Domain::unbounded(dim)),
    }
    .map_err(|e| ConfigError::invalid(&ctx, e.to_string()))?;
    let parse =
        |s: &String| Expression::parse(s, dim).map_err(|e| ConfigError::invalid(&ctx, format!("metric `{s}`: {e}")));
    let metric = match &spec.metric {
        None | Some(MetricSpec::Euclidean) => Metric::Euclidean,
        Some(MetricSpec::Conformal { factor }) => Metric::Conformal(parse(factor)?),
        Some(MetricSpec::Diagonal { components }) => {
            Metric::Diagonal(components.iter().map(parse).collect::<Result<_, _>>()?)
        }
        Some(MetricSpec::Full { components }) => Metric::Full(components.iter().map(parse).collect::<Result<_, _>>()?),
    };
    ChartManifold::new(name, domain, metric)
        .map(Arc::new)
        .map_err(|e| ConfigError::invalid(ctx, e.to_string()))
}

/// Parameters shared by all task kinds after defaults are applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub p: f64,
    pub m: u32,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub enum Action {
    Predicate {
        predicate: PredicateKind,
        map: Map,
        lambda: Option<f64>,
        expect: bool,
    },
    Identity {
        identity: IdentityKind,
        u: Map,
        f: Map,
    },
    Sweep {
        identity: IdentityKind,
        family: Family,
        f: Map,
        lambdas: Vec<f64>,
        exponent_tol: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Job {
    pub name: String,
    pub params: Params,
    pub action: Action,
}

/// A validated config, ready to run.
#[derive(Debug, Clone, Default)]
pub struct Plan {
    pub jobs: Vec<Job>,
}

fn resolve_task(
    cfg: &RunConfig,
    objects: &Objects,
    t: &TaskSpec,
    name: String,
    errs: &mut Vec<ConfigError>,
) -> Option<Job> {
    let ctx = format!("task `{name}`");
    let before = errs.len();
    let params = Params {
        p: t.p.unwrap_or(2.0),
        m: t.m.unwrap_or(2),
        samples: t.samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES),
        seed: t.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        tol: t.tol.unwrap_or(DEFAULT_TOL),
    };
    if !(params.p >= 1.0 && params.p.is_finite()) {
        errs.push(ConfigError::invalid(
            &ctx,
            format!("p = {} must be at least 1", params.p),
        ));
    }
    if params.m < 2 {
        errs.push(ConfigError::invalid(
            &ctx,
            format!("m = {} must be at least 2", params.m),
        ));
    }
    if params.samples == 0 {
        errs.push(ConfigError::invalid(&ctx, "sample count must be positive"));
    }
    if !(params.tol > 0.0 && params.tol.is_finite()) {
        errs.push(ConfigError::invalid(
            &ctx,
            format!("tol = {} must be positive", params.tol),
        ));
    }

    let mut unused = |field: &str, present: bool| {
        if present {
            errs.push(ConfigError::invalid(
                &ctx,
                format!("`{field}` does not apply to {} tasks", t.kind),
            ));
        }
    };
    match t.kind {
        TaskKind::Predicate => {
            unused("identity", t.identity.is_some());
            unused("u", t.u.is_some());
            unused("f", t.f.is_some());
            unused("family", t.family.is_some());
            unused("lambdas", t.lambdas.is_some());
            unused("exponent_tol", t.exponent_tol.is_some());
        }
        TaskKind::Identity => {
            unused("predicate", t.predicate.is_some());
            unused("map", t.map.is_some());
            unused("family", t.family.is_some());
            unused("lambdas", t.lambdas.is_some());
            unused("lambda", t.lambda.is_some());
            unused("exponent_tol", t.exponent_tol.is_some());
            unused("expect", t.expect.is_some());
        }
        TaskKind::Sweep => {
            unused("predicate", t.predicate.is_some());
            unused("map", t.map.is_some());
            unused("u", t.u.is_some());
            unused("lambda", t.lambda.is_some());
            unused("expect", t.expect.is_some());
        }
    }

    let mut need = |field: &str, v: Option<&String>| -> Option<Map> {
        let Some(n) = v else {
            errs.push(ConfigError::invalid(&ctx, format!("missing `{field}`")));
            return None;
        };
        objects
            .map(cfg, &format!("{ctx}, field `{field}`"), n)
            .map_err(|e| errs.push(e))
            .ok()
    };
    let action = match t.kind {
        TaskKind::Predicate => {
            let map = need("map", t.map.as_ref());
            let predicate = t.predicate.or_else(|| {
                errs.push(ConfigError::invalid(&ctx, "missing `predicate`"));
                None
            });
            match (predicate, map) {
                (Some(predicate), Some(map)) => Some(Action::Predicate {
                    predicate,
                    map,
                    lambda: t.lambda,
                    expect: t.expect.unwrap_or(true),
                }),
                _ => None,
            }
        }
        TaskKind::Identity => {
            let u = need("u", t.u.as_ref());
            let f = need("f", t.f.as_ref());
            let identity = t.identity.or_else(|| {
                errs.push(ConfigError::invalid(&ctx, "missing `identity`"));
                None
            });
            match (identity, u, f) {
                (Some(identity), Some(u), Some(f)) => {
                    if u.target_dim() != f.source_dim() {
                        errs.push(ConfigError::invalid(
                            &ctx,
                            format!(
                                "u has target dimension {} but f has source dimension {}",
                                u.target_dim(),
                                f.source_dim()
                            ),
                        ));
                    }
                    Some(Action::Identity { identity, u, f })
                }
                _ => None,
            }
        }
        TaskKind::Sweep => {
            let f = need("f", t.f.as_ref());
            let identity = t.identity.or_else(|| {
                errs.push(ConfigError::invalid(&ctx, "missing `identity`"));
                None
            });
            let lambdas = t.lambdas.clone().unwrap_or_default();
            let mut distinct = lambdas.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            if distinct.len() < 2 || lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                errs.push(ConfigError::invalid(
                    &ctx,
                    "`lambdas` needs at least two distinct positive values",
                ));
            }
            let exponent_tol = t.exponent_tol.unwrap_or(DEFAULT_EXPONENT_TOL);
            if !(exponent_tol > 0.0) {
                errs.push(ConfigError::invalid(&ctx, "`exponent_tol` must be positive"));
            }
            match (identity, f) {
                (Some(identity), Some(f)) => {
                    let family = match t.family.unwrap_or(FamilyKind::Dilation) {
                        FamilyKind::Dilation => Family::Dilation { dim: f.source_dim() },
                        FamilyKind::ScaledProjection => {
                            if f.source_dim() != 2 {
                                errs.push(ConfigError::invalid(
                                    &ctx,
                                    "the scaled projection family needs f defined on a plane",
                                ));
                            }
                            Family::ScaledProjection
                        }
                    };
                    Some(Action::Sweep {
                        identity,
                        family,
                        f,
                        lambdas,
                        exponent_tol,
                    })
                }
                _ => None,
            }
        }
    }?;
    (errs.len() == before).then_some(Job { name, params, action })
}
