//! Built-in charts, maps and scalar fields with certified properties.
//!
//! Entries are addressed by id; parametrized families use `name:arg[:arg]`,
//! e.g. `dilation:2.5:3` or `radial_2p_harmonic:3`. Every tag carried by an
//! entry is checked by [`verify_tag`] in the test suite.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::analysis::{horizontal_conformality, is_p_symphonic, is_totally_geodesic};
use crate::domain::{Domain, Interval};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{ChartManifold, Metric};
use crate::maps::SmoothMap;
use crate::sampling::{sample_points, DEFAULT_SEED};

type Chart = Arc<ChartManifold<f64>>;

/// A property certified for a zoo map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Tag {
    TotallyGeodesic,
    NotTotallyGeodesic,
    /// Constant dilation `λ`, or pointwise when `None`.
    HorizontallyConformal {
        lambda: Option<f64>,
    },
    NotHorizontallyConformal,
    /// Horizontal conformality between charts of equal dimension.
    Conformal {
        lambda: Option<f64>,
    },
    Isometry,
    PSymphonic {
        p: f64,
    },
    NotPSymphonic {
        p: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedTag {
    pub tag: Tag,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZooObject {
    Manifold(Chart),
    Map(SmoothMap<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZooEntry {
    pub id: String,
    pub description: String,
    pub object: ZooObject,
    pub tags: Vec<CertifiedTag>,
}

impl ZooEntry {
    pub fn map(&self) -> Option<&SmoothMap<f64>> {
        match &self.object {
            ZooObject::Map(m) => Some(m),
            ZooObject::Manifold(_) => None,
        }
    }

    pub fn manifold(&self) -> Option<&Chart> {
        match &self.object {
            ZooObject::Manifold(c) => Some(c),
            ZooObject::Map(_) => None,
        }
    }

    pub fn has_tag(&self, pred: impl Fn(&Tag) -> bool) -> bool {
        self.tags.iter().any(|t| pred(&t.tag))
    }
}

/// Ids listed by [`catalog`]; parametrized families appear with representative arguments.
pub const CATALOG_IDS: &[&str] = &[
    "euclidean:1",
    "euclidean:2",
    "euclidean:3",
    "euclidean:4",
    "sphere_a",
    "sphere_b",
    "sphere_a_overlap",
    "sphere_b_overlap",
    "s3_stereo",
    "s2_stereo",
    "poincare_disk",
    "circle",
    "punctured_r3",
    "box3",
    "dilation:2",
    "dilation:0.5:3",
    "dilation:1.5:4",
    "identity:2",
    "scaled_projection:2",
    "rotation:0.7",
    "rotation3",
    "scaled_rotation:1.3",
    "hopf",
    "stereographic",
    "equator",
    "chart_transition_ab",
    "chart_transition_ba",
    "cube_map",
    "square_projection",
    "poly_quadratic",
    "trig_map",
    "cubic_map",
    "mixed_map",
    "quartic_map4",
    "poly_scalar",
    "linear_form:2",
    "linear_form:3",
    "coord:1:2",
    "coord:2:3",
    "radial_2p_harmonic:2",
    "radial_2p_harmonic:3",
    "quadratic_x1sq",
];

/// All representative entries.
pub fn catalog() -> Vec<ZooEntry> {
    CATALOG_IDS
        .iter()
        .map(|id| lookup(id).unwrap_or_else(|e| panic!("built-in zoo entry {id}: {e}")))
        .collect()
}

fn tag(tag: Tag, provenance: &str) -> CertifiedTag {
    CertifiedTag {
        tag,
        provenance: provenance.to_string(),
    }
}

fn num(s: &str, id: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::arg(format!("bad numeric argument `{s}` in zoo id `{id}`")))
}

fn int(s: &str, id: &str) -> Result<usize> {
    s.parse::<usize>()
        .ok()
        .filter(|&v| v >= 1)
        .ok_or_else(|| Error::arg(format!("bad integer argument `{s}` in zoo id `{id}`")))
}

fn lit(v: f64) -> String {
    format!("({v:?})")
}

fn chart(name: &str, domain: Domain<f64>, metric: Metric) -> Result<Chart> {
    Ok(Arc::new(ChartManifold::new(name, domain, metric)?))
}

fn conformal(src: &str, n: usize) -> Result<Metric> {
    Ok(Metric::Conformal(Expression::parse(src, n)?))
}

fn boxed(bounds: &[(f64, f64)]) -> Result<Domain<f64>> {
    Domain::new(bounds.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect())
}

fn euclid(n: usize) -> Chart {
    Arc::new(ChartManifold::euclidean(n))
}

fn sphere_metric() -> Result<Metric> {
    Ok(Metric::Diagonal(vec![
        Expression::parse("1", 2)?,
        Expression::parse("sin(x1)^2", 2)?,
    ]))
}

/// Chart by id.
pub fn manifold(id: &str) -> Result<Chart> {
    let parts: Vec<&str> = id.split(':').collect();
    let margin = 0.2;
    match parts.as_slice() {
        ["euclidean", n] => Ok(euclid(int(n, id)?)),
        ["line"] => Ok(euclid(1)),
        ["sphere_a"] => chart(
            "sphere_a",
            boxed(&[(margin, PI - margin), (-3.0, 3.0)])?,
            sphere_metric()?,
        ),
        ["sphere_b"] => chart(
            "sphere_b",
            boxed(&[(margin, PI - margin), (-3.0, 3.0)])?,
            sphere_metric()?,
        ),
        ["sphere_a_overlap"] => chart("sphere_a_overlap", boxed(&[(0.6, 1.4), (0.5, 1.2)])?, sphere_metric()?),
        ["sphere_b_overlap"] => chart("sphere_b_overlap", boxed(&[(0.6, 1.4), (0.5, 1.2)])?, sphere_metric()?),
        ["s3_stereo"] => chart(
            "s3_stereo",
            boxed(&[(-0.5, 0.5), (-0.5, 0.5), (0.3, 1.0)])?,
            conformal("4/(1 + x1^2 + x2^2 + x3^2)^2", 3)?,
        ),
        ["s2_stereo"] => chart(
            "s2_stereo",
            Domain::unbounded(2),
            conformal("4/(1 + x1^2 + x2^2)^2", 2)?,
        ),
        ["poincare_disk"] => chart(
            "poincare_disk",
            boxed(&[(-0.7, 0.7), (-0.7, 0.7)])?,
            conformal("4/(1 - x1^2 - x2^2)^2", 2)?,
        ),
        ["circle"] => chart("circle", boxed(&[(-3.0, 3.0)])?, Metric::Euclidean),
        ["punctured_r3"] => chart("punctured_r3", Domain::cube(3, 0.1, 2.0), Metric::Euclidean),
        ["punctured_r", n] => {
            let n = int(n, id)?;
            chart(&format!("punctured_r{n}"), Domain::cube(n, 0.1, 2.0), Metric::Euclidean)
        }
        ["box3"] => chart(
            "box3",
            boxed(&[(0.5, 1.5), (0.2, 1.2), (-1.0, 1.0)])?,
            Metric::Euclidean,
        ),
        _ => Err(Error::arg(format!("unknown zoo manifold `{id}`"))),
    }
}

fn make_map(name: &str, src: Chart, tgt: Chart, comps: &[String]) -> Result<SmoothMap<f64>> {
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    SmoothMap::from_strs(name, src, tgt, &refs)
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// `λ·id` on `ℝⁿ`.
pub fn dilation(lambda: f64, n: usize) -> Result<SmoothMap<f64>> {
    let comps: Vec<String> = (1..=n).map(|k| format!("{}*x{k}", lit(lambda))).collect();
    make_map(&format!("dilation:{lambda}:{n}"), euclid(n), euclid(n), &comps)
}

/// `c·(x1, x2)` from `ℝ³` to `ℝ²`.
pub fn scaled_projection(c: f64) -> Result<SmoothMap<f64>> {
    make_map(
        &format!("scaled_projection:{c}"),
        euclid(3),
        euclid(2),
        &[format!("{}*x1", lit(c)), format!("{}*x2", lit(c))],
    )
}

fn rotation3_matrix() -> [[f64; 3]; 3] {
    // Rotation by 0.9 about the axis (1, 1, 1)/√3 (Rodrigues formula).
    let (s, c) = 0.9f64.sin_cos();
    let k = 1.0 / 3.0f64.sqrt();
    let a = [k, k, k];
    let mut r = [[0.0; 3]; 3];
    let cross = [[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            r[i][j] = c * id + s * cross[i][j] + (1.0 - c) * a[i] * a[j];
        }
    }
    r
}

fn linear_components(rows: &[Vec<f64>]) -> Vec<String> {
    rows.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| format!("{}*x{}", lit(v), j + 1))
                .collect::<Vec<_>>()
                .join(" + ")
        })
        .collect()
}

fn rotation2(theta: f64, scale: f64) -> Vec<Vec<f64>> {
    let (s, c) = theta.sin_cos();
    vec![vec![scale * c, -scale * s], vec![scale * s, scale * c]]
}

/// Smooth map by id.
pub fn map(id: &str) -> Result<SmoothMap<f64>> {
    let entry = lookup(id)?;
    match entry.object {
        ZooObject::Map(m) => Ok(m),
        ZooObject::Manifold(_) => Err(Error::arg(format!("zoo id `{id}` names a manifold, not a map"))),
    }
}

/// Entry by id, manifolds included.
pub fn lookup(id: &str) -> Result<ZooEntry> {
    if let Ok(c) = manifold(id) {
        return Ok(ZooEntry {
            id: id.to_string(),
            description: format!("chart {} of dimension {}", c.name(), c.dim()),
            object: ZooObject::Manifold(c),
            tags: vec![],
        });
    }
    let parts: Vec<&str> = id.split(':').collect();
    let entry = |description: &str, m: SmoothMap<f64>, tags: Vec<CertifiedTag>| ZooEntry {
        id: id.to_string(),
        description: description.to_string(),
        object: ZooObject::Map(m.with_name(id)),
        tags,
    };
    let linear = "constant differential";
    let e = match parts.as_slice() {
        ["dilation", l] | ["dilation", l, _] => {
            let lambda = num(l, id)?;
            let n = match parts.get(2) {
                Some(n) => int(n, id)?,
                None => 2,
            };
            let mut tags = vec![
                tag(Tag::TotallyGeodesic, linear),
                tag(
                    Tag::HorizontallyConformal {
                        lambda: Some(lambda.abs()),
                    },
                    "du = λ·I",
                ),
            ];
            if lambda.abs() == 1.0 {
                tags.push(tag(Tag::Isometry, "du orthogonal"));
            }
            entry("λ·identity on ℝⁿ", dilation(lambda, n)?, tags)
        }
        ["identity", n] => {
            let n = int(n, id)?;
            entry(
                "identity on ℝⁿ",
                dilation(1.0, n)?,
                vec![
                    tag(Tag::TotallyGeodesic, linear),
                    tag(Tag::HorizontallyConformal { lambda: Some(1.0) }, "du = I"),
                    tag(Tag::Isometry, "du = I"),
                ],
            )
        }
        ["scaled_projection", c] => {
            let c = num(c, id)?;
            entry(
                "c·(x1, x2) from ℝ³ to ℝ²",
                scaled_projection(c)?,
                vec![
                    tag(Tag::TotallyGeodesic, linear),
                    tag(Tag::HorizontallyConformal { lambda: Some(c.abs()) }, "du duᵀ = c²·I"),
                ],
            )
        }
        ["rotation", th] => {
            let th = num(th, id)?;
            entry(
                "rotation of ℝ² by θ",
                make_map(id, euclid(2), euclid(2), &linear_components(&rotation2(th, 1.0)))?,
                vec![
                    tag(Tag::TotallyGeodesic, linear),
                    tag(Tag::HorizontallyConformal { lambda: Some(1.0) }, "du orthogonal"),
                    tag(Tag::Isometry, "du orthogonal"),
                ],
            )
        }
        ["scaled_rotation", c] => {
            let c = num(c, id)?;
            entry(
                "c·rotation of ℝ² by 0.7",
                make_map(id, euclid(2), euclid(2), &linear_components(&rotation2(0.7, c)))?,
                vec![
                    tag(Tag::TotallyGeodesic, linear),
                    tag(Tag::Conformal { lambda: Some(c.abs()) }, "du = c·orthogonal"),
                ],
            )
        }
        ["rotation3"] => {
            let r = rotation3_matrix();
            let rows: Vec<Vec<f64>> = r.iter().map(|row| row.to_vec()).collect();
            entry(
                "rotation of ℝ³ by 0.9 about (1,1,1)",
                make_map(id, euclid(3), euclid(3), &linear_components(&rows))?,
                vec![
                    tag(Tag::TotallyGeodesic, linear),
                    tag(Tag::HorizontallyConformal { lambda: Some(1.0) }, "du orthogonal"),
                    tag(Tag::Isometry, "du orthogonal"),
                ],
            )
        }
        ["hopf"] => {
            let (a, b, c, d) = ("(2*x1)", "(2*x2)", "(2*x3)", "(x1^2 + x2^2 + x3^2 - 1)");
            let den = format!("({c}^2 + {d}^2)");
            let comps = vec![
                format!("({a}*{c} + {b}*{d})/{den}"),
                format!("({b}*{c} - {a}*{d})/{den}"),
            ];
            entry(
                "Hopf map S³ → S² in stereographic charts",
                make_map(id, manifold("s3_stereo")?, manifold("s2_stereo")?, &comps)?,
                vec![
                    tag(
                        Tag::HorizontallyConformal { lambda: Some(2.0) },
                        "Riemannian submersion onto S²(1/2), rescaled",
                    ),
                    tag(Tag::NotTotallyGeodesic, "O'Neill tensor does not vanish"),
                ],
            )
        }
        ["stereographic"] => {
            let r = "(sin(x1)/(1 - cos(x1)))";
            entry(
                "stereographic projection of S² from the north pole",
                make_map(
                    id,
                    manifold("sphere_a")?,
                    euclid(2),
                    &[format!("{r}*cos(x2)"), format!("{r}*sin(x2)")],
                )?,
                vec![
                    tag(Tag::Conformal { lambda: None }, "conformal with pointwise dilation"),
                    tag(Tag::NotTotallyGeodesic, "pointwise dilation varies"),
                ],
            )
        }
        ["equator"] => entry(
            "equatorial embedding S¹ → S²",
            make_map(id, manifold("circle")?, manifold("sphere_a")?, &strs(&["pi/2", "x1"]))?,
            vec![tag(Tag::TotallyGeodesic, "great circle")],
        ),
        ["chart_transition_ab"] => entry(
            "transition between the two polar charts of S²",
            make_map(
                id,
                manifold("sphere_a_overlap")?,
                manifold("sphere_b")?,
                &strs(&[
                    "atan2(sqrt((sin(x1)*sin(x2))^2 + cos(x1)^2), sin(x1)*cos(x2))",
                    "atan2(cos(x1), sin(x1)*sin(x2))",
                ]),
            )?,
            vec![
                tag(Tag::TotallyGeodesic, "identity of S² in two charts"),
                tag(Tag::HorizontallyConformal { lambda: Some(1.0) }, "isometry"),
                tag(Tag::Isometry, "identity of S² in two charts"),
            ],
        ),
        ["chart_transition_ba"] => entry(
            "transition between the two polar charts of S²",
            make_map(
                id,
                manifold("sphere_b_overlap")?,
                manifold("sphere_a")?,
                &strs(&[
                    "atan2(sqrt(cos(x1)^2 + (sin(x1)*cos(x2))^2), sin(x1)*sin(x2))",
                    "atan2(sin(x1)*cos(x2), cos(x1))",
                ]),
            )?,
            vec![
                tag(Tag::TotallyGeodesic, "identity of S² in two charts"),
                tag(Tag::HorizontallyConformal { lambda: Some(1.0) }, "isometry"),
                tag(Tag::Isometry, "identity of S² in two charts"),
            ],
        ),
        ["cube_map"] => entry(
            "(x1, x2³)",
            make_map(id, euclid(2), euclid(2), &strs(&["x1", "x2^3"]))?,
            vec![
                tag(Tag::NotHorizontallyConformal, "du duᵀ = diag(1, 9x2⁴)"),
                tag(Tag::NotTotallyGeodesic, "∂²u² = 6x2"),
            ],
        ),
        ["square_projection"] => entry(
            "z ↦ z² on the first two coordinates of ℝ³",
            make_map(id, manifold("box3")?, euclid(2), &strs(&["x1^2 - x2^2", "2*x1*x2"]))?,
            vec![
                tag(Tag::HorizontallyConformal { lambda: None }, "holomorphic, λ = 2|z|"),
                tag(Tag::NotTotallyGeodesic, "nonzero second derivatives"),
            ],
        ),
        ["poly_quadratic"] => entry(
            "(y1², y1·y2)",
            make_map(id, euclid(2), euclid(2), &strs(&["x1^2", "x1*x2"]))?,
            vec![tag(Tag::NotTotallyGeodesic, "nonzero second derivatives")],
        ),
        ["trig_map"] => entry(
            "(sin y1 + y2, y1·cos y2)",
            make_map(id, euclid(2), euclid(2), &strs(&["sin(x1) + x2", "x1*cos(x2)"]))?,
            vec![],
        ),
        ["cubic_map"] => entry(
            "ℝ² → ℝ³ cubic",
            make_map(id, euclid(2), euclid(3), &strs(&["x1^3 - x2", "x1*x2^2", "x1 + x2^2"]))?,
            vec![],
        ),
        ["mixed_map"] => entry(
            "(e^{0.3 y1}·y2, y1 + sin y2)",
            make_map(id, euclid(2), euclid(2), &strs(&["exp(0.3*x1)*x2", "x1 + sin(x2)"]))?,
            vec![],
        ),
        ["quartic_map4"] => entry(
            "ℝ⁴ → ℝ⁴ quadratic",
            make_map(
                id,
                euclid(4),
                euclid(4),
                &strs(&["x1^2 + x2", "x2*x3", "x3 + x4^2", "x1*x4"]),
            )?,
            vec![],
        ),
        ["poly_scalar"] => entry(
            "y1²·y2 − y2³ + y1",
            make_map(id, euclid(2), euclid(1), &strs(&["x1^2*x2 - x2^3 + x1"]))?,
            vec![],
        ),
        ["linear_form", n] => {
            let n = int(n, id)?;
            let comp = (1..=n).map(|k| format!("{k}*x{k}")).collect::<Vec<_>>().join(" + ");
            entry(
                "Σ k·x_k",
                make_map(id, euclid(n), euclid(1), &[comp])?,
                vec![
                    tag(Tag::TotallyGeodesic, linear),
                    tag(Tag::PSymphonic { p: 2.0 }, "constant gradient"),
                    tag(Tag::PSymphonic { p: 3.0 }, "constant gradient"),
                ],
            )
        }
        ["coord", k] | ["coord", k, _] => {
            let k = int(k, id)?;
            let n = match parts.get(2) {
                Some(n) => int(n, id)?,
                None => k.max(2),
            };
            if k > n {
                return Err(Error::arg(format!("coordinate {k} exceeds dimension {n} in `{id}`")));
            }
            entry(
                "coordinate function x_k",
                make_map(id, euclid(n), euclid(1), &[format!("x{k}")])?,
                vec![
                    tag(Tag::TotallyGeodesic, linear),
                    tag(Tag::PSymphonic { p: 1.5 }, "constant gradient"),
                    tag(Tag::PSymphonic { p: 2.0 }, "constant gradient"),
                    tag(Tag::PSymphonic { p: 3.0 }, "constant gradient"),
                ],
            )
        }
        ["radial_2p_harmonic", p] | ["radial_2p_harmonic", p, _] => {
            let p = num(p, id)?;
            let n = match parts.get(2) {
                Some(n) => int(n, id)?,
                None => 3,
            };
            if !(p >= 1.0) {
                return Err(Error::arg(format!("exponent p = {p} must be at least 1 in `{id}`")));
            }
            let a = (2.0 * p - n as f64) / (2.0 * p - 1.0);
            let r2 = (1..=n).map(|k| format!("x{k}^2")).collect::<Vec<_>>().join(" + ");
            let src = if n == 3 {
                manifold("punctured_r3")?
            } else {
                manifold(&format!("punctured_r:{n}"))?
            };
            entry(
                "|x|^a with a = (2p − n)/(2p − 1)",
                make_map(id, src, euclid(1), &[format!("({r2})^{}", lit(a / 2.0))])?,
                vec![tag(Tag::PSymphonic { p }, "radial 2p-harmonic exponent")],
            )
        }
        ["quadratic_x1sq"] => entry(
            "x1²",
            make_map(id, euclid(2), euclid(1), &strs(&["x1^2"]))?,
            vec![
                tag(Tag::NotPSymphonic { p: 2.0 }, "div(|∇f|²∇f) = 24·x1²"),
                tag(Tag::NotTotallyGeodesic, "Hessian diag(2, 0)"),
            ],
        ),
        _ => return Err(Error::arg(format!("unknown zoo id `{id}`"))),
    };
    Ok(e)
}

/// Outcome of re-checking a tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TagCheck {
    pub tag: Tag,
    pub holds: bool,
    pub residual: f64,
    pub detail: String,
}

/// Re-runs the predicate behind `tag` on `samples`.
pub fn verify_tag(map: &SmoothMap<f64>, tag: Tag, samples: &[Vec<f64>], tol: f64) -> Result<TagCheck> {
    let conformal_check = |lambda: Option<f64>, equal_dims: bool| -> Result<(bool, f64, String)> {
        let rep = horizontal_conformality(map, samples, tol)?;
        let mut holds = rep.verdict && (!equal_dims || map.source_dim() == map.target_dim());
        let mut detail = format!("λ ∈ [{:.12}, {:.12}]", rep.lambda_min, rep.lambda_max);
        if let Some(l) = lambda {
            let off = (rep.lambda_min - l).abs().max((rep.lambda_max - l).abs());
            holds &= off < tol;
            detail.push_str(&format!(", expected {l}"));
        }
        Ok((holds, rep.max_residual, detail))
    };
    let (holds, residual, detail) = match tag {
        Tag::TotallyGeodesic => {
            let r = is_totally_geodesic(map, samples, tol)?;
            (r.verdict, r.max_residual, String::new())
        }
        Tag::NotTotallyGeodesic => {
            let r = is_totally_geodesic(map, samples, tol)?;
            (!r.verdict && r.max_residual.is_finite(), r.max_residual, String::new())
        }
        Tag::HorizontallyConformal { lambda } => conformal_check(lambda, false)?,
        Tag::Conformal { lambda } => conformal_check(lambda, true)?,
        Tag::Isometry => conformal_check(Some(1.0), true)?,
        Tag::NotHorizontallyConformal => {
            let rep = horizontal_conformality(map, samples, tol)?;
            (!rep.verdict, rep.max_residual, String::new())
        }
        Tag::PSymphonic { p } => {
            let r = is_p_symphonic(map, p, samples, tol)?;
            (r.verdict, r.max_residual, format!("{} excluded", r.excluded.len()))
        }
        Tag::NotPSymphonic { p } => {
            let r = is_p_symphonic(map, p, samples, tol)?;
            (!r.verdict && !r.per_point.is_empty(), r.max_residual, String::new())
        }
    };
    Ok(TagCheck {
        tag,
        holds,
        residual,
        detail,
    })
}

/// Re-checks every tag of an entry on default samples of its source chart.
pub fn verify_entry(entry: &ZooEntry, count: usize, tol: f64) -> Result<Vec<TagCheck>> {
    let Some(m) = entry.map() else {
        return Ok(vec![]);
    };
    let samples = sample_points(m.source().domain(), count, DEFAULT_SEED);
    entry.tags.iter().map(|t| verify_tag(m, t.tag, &samples, tol)).collect()
}
