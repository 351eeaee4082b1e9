use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symphonic::expr::Expression;
use symphonic::identities::IdentityKind;
use symphonic::zoo::{self, ZooObject};
use symphonic_cli::config::{FamilyKind, Format, PredicateKind, TaskKind, TaskSpec};
use symphonic_cli::{runner, Diagnostics, Report, RunConfig};

/// Checks stress-tensor identities and map predicates at sampled chart points.
#[derive(Parser)]
#[command(name = "symphonic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run p-symphonic, horizontal conformality and total geodesy checks on one map.
    CheckMap {
        /// Zoo id of the map.
        #[arg(long, conflicts_with = "map")]
        zoo: Option<String>,
        /// Name of a map defined in the file given by --config.
        #[arg(long, requires = "config")]
        map: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Verify a named identity for a pair (u, f).
    Verify {
        #[arg(long)]
        identity: IdentityKind,
        #[arg(long)]
        u: String,
        #[arg(long)]
        f: String,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the power of λ relating the two sides of an identity over u = λ-family.
    Sweep {
        #[arg(long)]
        identity: IdentityKind,
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long, default_value = "poly_quadratic")]
        f: String,
        #[arg(long, value_enum, default_value = "dilation")]
        family: FamilyArg,
        #[arg(long, default_value_t = symphonic_cli::config::DEFAULT_EXPONENT_TOL)]
        exponent_tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// List the catalog of manifolds and maps.
    Zoo {
        /// Re-verify every certified tag.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check the syntax of an expression and print its canonical form.
    Parse {
        expression: String,
        /// Number of coordinates x1..xn in scope; defaults to the length of --at, else 16.
        #[arg(long)]
        arity: Option<usize>,
        /// Comma-separated point to evaluate at.
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<f64>>,
    },
    /// Run every task of a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Report path; overrides the config's output path and writes JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Config file whose manifolds and maps become available by name.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FamilyArg {
    Dilation,
    ScaledProjection,
}

enum Failure {
    Usage(String),
    Config(Diagnostics),
}

type Outcome = Result<i32, Failure>;

fn main() -> ExitCode {
    if let Some(n) = std::env::var("SYMPHONIC_THREADS").ok().and_then(|s| s.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cli = Cli::parse();
    let status = match dispatch(cli.command) {
        Ok(s) => s,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Config(d)) => {
            eprintln!("{d}");
            2
        }
    };
    ExitCode::from(status as u8)
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::CheckMap { zoo, map, common } => {
            let name = match (zoo, map) {
                (Some(z), None) => z,
                (None, Some(m)) => m,
                _ => return Err(Failure::Usage("check-map needs --zoo ID or --map NAME".into())),
            };
            let mut cfg = base_config(&common)?;
            for pred in [
                PredicateKind::PSymphonic,
                PredicateKind::HorizontallyConformal,
                PredicateKind::TotallyGeodesic,
            ] {
                let mut t = task(TaskKind::Predicate, &common);
                t.name = Some(pred.name().into());
                t.predicate = Some(pred);
                t.map = Some(name.clone());
                if pred != PredicateKind::PSymphonic {
                    t.p = None;
                }
                cfg.tasks.push(t);
            }
            execute(cfg, common.json.as_deref(), None)
        }
        Command::Verify { identity, u, f, common } => {
            let mut cfg = base_config(&common)?;
            let mut t = task(TaskKind::Identity, &common);
            t.name = Some(identity.name().into());
            t.identity = Some(identity);
            t.u = Some(u);
            t.f = Some(f);
            cfg.tasks.push(t);
            execute(cfg, common.json.as_deref(), None)
        }
        Command::Sweep {
            identity,
            lambdas,
            f,
            family,
            exponent_tol,
            common,
        } => {
            let mut cfg = base_config(&common)?;
            let mut t = task(TaskKind::Sweep, &common);
            t.name = Some(format!("{}_sweep", identity.name()));
            t.identity = Some(identity);
            t.f = Some(f);
            t.lambdas = Some(lambdas);
            t.exponent_tol = Some(exponent_tol);
            t.family = Some(match family {
                FamilyArg::Dilation => FamilyKind::Dilation,
                FamilyArg::ScaledProjection => FamilyKind::ScaledProjection,
            });
            cfg.tasks.push(t);
            execute(cfg, common.json.as_deref(), None)
        }
        Command::Zoo { check, json } => zoo_listing(check, json.as_deref()),
        Command::Parse { expression, arity, at } => parse(&expression, arity, at),
        Command::Run { config, json } => {
            let cfg = RunConfig::load(&config).map_err(|e| Failure::Config(e.into()))?;
            let base = config.parent().unwrap_or(Path::new("."));
            execute(cfg, json.as_deref(), Some(base))
        }
    }
}

/// Objects from `--config` (tasks dropped) or an empty config.
fn base_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path).map_err(|e| Failure::Config(e.into()))?,
        None => RunConfig::default(),
    };
    cfg.tasks.clear();
    cfg.output = None;
    Ok(cfg)
}

fn task(kind: TaskKind, c: &Common) -> TaskSpec {
    let mut t = TaskSpec::new(kind);
    t.p = c.p;
    t.m = c.m;
    t.samples = c.samples;
    t.seed = c.seed;
    t.tol = c.tol;
    t
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Validates, runs, prints the table and writes the report.
fn execute(cfg: RunConfig, json: Option<&Path>, base: Option<&Path>) -> Outcome {
    let plan = cfg.resolve().map_err(Failure::Config)?;
    let report: Report = runner::run(&cfg, &plan);
    print!("{}", report.to_text());
    if let Some(path) = json {
        write(path, &report.to_json())?;
    } else if let (Some(out), Some(base)) = (&cfg.output, base) {
        if let Some(p) = &out.path {
            let text = match out.format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            write(&base.join(p), &text)?;
        }
    }
    Ok(report.exit_status())
}

#[derive(serde::Serialize)]
struct ZooRow {
    id: String,
    kind: &'static str,
    signature: String,
    description: String,
    tags: Vec<symphonic::zoo::CertifiedTag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tags_hold: Option<bool>,
}

fn zoo_listing(check: bool, json: Option<&Path>) -> Outcome {
    let mut rows = Vec::new();
    let mut status = 0;
    for e in zoo::catalog() {
        let (kind, signature) = match &e.object {
            ZooObject::Manifold(m) => ("manifold", format!("dim {}", m.dim())),
            ZooObject::Map(m) => ("map", format!("{} → {}", m.source().name(), m.target().name())),
        };
        let tags_hold = if check && e.map().is_some() {
            let ok = zoo::verify_entry(&e, symphonic::sampling::DEFAULT_SAMPLES, 1e-7)
                .map(|cs| cs.iter().all(|c| c.holds))
                .unwrap_or(false);
            if !ok {
                status = 1;
            }
            Some(ok)
        } else {
            None
        };
        rows.push(ZooRow {
            id: e.id.clone(),
            kind,
            signature,
            description: e.description.clone(),
            tags: e.tags.clone(),
            tags_hold,
        });
    }
    let w = rows.iter().map(|r| r.id.len()).max().unwrap_or(2);
    let sw = rows.iter().map(|r| r.signature.chars().count()).max().unwrap_or(2);
    for r in &rows {
        let tags: Vec<String> = r.tags.iter().map(|t| tag_label(&t.tag)).collect();
        let check = match r.tags_hold {
            Some(true) => "  [verified]",
            Some(false) => "  [TAG FAILURE]",
            None => "",
        };
        let pad = sw - r.signature.chars().count();
        println!(
            "{:<w$}  {:<8}  {}{}  {}  {}{check}",
            r.id,
            r.kind,
            r.signature,
            " ".repeat(pad),
            r.description,
            tags.join(", ")
        );
    }
    if let Some(p) = json {
        let mut text = serde_json::to_string_pretty(&rows).expect("zoo rows serialize");
        text.push('\n');
        write(p, &text)?;
    }
    Ok(status)
}

fn tag_label(t: &symphonic::zoo::Tag) -> String {
    use symphonic::zoo::Tag::*;
    match t {
        TotallyGeodesic => "totally geodesic".into(),
        NotTotallyGeodesic => "not totally geodesic".into(),
        HorizontallyConformal { lambda: Some(l) } => format!("horizontally conformal λ={l}"),
        HorizontallyConformal { lambda: None } => "horizontally conformal".into(),
        NotHorizontallyConformal => "not horizontally conformal".into(),
        Conformal { lambda: Some(l) } => format!("conformal λ={l}"),
        Conformal { lambda: None } => "conformal".into(),
        Isometry => "isometry".into(),
        PSymphonic { p } => format!("{p}-symphonic"),
        NotPSymphonic { p } => format!("not {p}-symphonic"),
    }
}

fn parse(src: &str, arity: Option<usize>, at: Option<Vec<f64>>) -> Outcome {
    if let (Some(n), Some(x)) = (arity, &at) {
        if x.len() != n {
            return Err(Failure::Usage(format!(
                "--at has {} coordinates but --arity is {n}",
                x.len()
            )));
        }
    }
    let arity = arity.or(at.as_ref().map(Vec::len)).unwrap_or(16);
    let e = match Expression::parse(src, arity) {
        Ok(e) => e,
        Err(err) => {
            let col = src[..err.offset().min(src.len())].chars().count();
            eprintln!("{src}\n{}^\nerror: {err}", " ".repeat(col));
            return Ok(2);
        }
    };
    println!("{}", e.root());
    match e.root().max_var() {
        Some(k) => println!("variables: x1..x{}", k + 1),
        None => println!("variables: none"),
    }
    if let Some(x) = at {
        match e.evaluate(&x) {
            Ok(v) => println!("value: {v}"),
            Err(err) => {
                eprintln!("error: {err}");
                return Ok(1);
            }
        }
    }
    Ok(0)
}
