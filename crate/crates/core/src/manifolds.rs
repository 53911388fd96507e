//! Built-in chart catalog and custom chart loading. A manifold here is a
//! single chart: metric and structure tensors as expression fields, a
//! sampling domain that stays clear of singular loci, and the torsion
//! class the condition suites should certify.

use std::collections::BTreeMap;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{Params, ScalarExpr};
use crate::geometry::MetricField;
use crate::structure::{FramePoint, StructureField, TorsionClass};

/// Per-coordinate box, optionally intersected with a radial band over the
/// leading coordinates (used to keep punctured charts away from both the
/// puncture and infinity).
#[derive(Clone, Debug)]
pub struct SamplingDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub radial: Option<RadialBand>,
}

#[derive(Clone, Copy, Debug)]
pub struct RadialBand {
    pub coords: usize,
    pub min: f64,
    pub max: f64,
}

impl SamplingDomain {
    fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> SamplingDomain {
        SamplingDomain {
            lower,
            upper,
            radial: None,
        }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        let inside_box = point
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (lo, hi))| lo <= x && x <= hi);
        inside_box
            && self.radial.is_none_or(|band| {
                let r = point[..band.coords]
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt();
                band.min < r && r < band.max
            })
    }
}

/// A fully specified chart, ready for sampling and frame assembly.
#[derive(Clone, Debug)]
pub struct ManifoldSpec {
    pub name: String,
    pub dim: usize,
    pub metric: MetricField,
    pub structure: StructureField,
    pub class: TorsionClass,
    pub params: Params,
    pub domain: SamplingDomain,
    /// For product charts: the factor whose torsion and deformed metric
    /// the product is compared against.
    pub base: Option<Box<ManifoldSpec>>,
}

impl ManifoldSpec {
    pub fn frame_at(&self, point: &[f64]) -> Result<FramePoint> {
        FramePoint::build(&self.metric, &self.structure, self.class, point, &self.params)
    }
}

/// Standard block complex structure pairing consecutive coordinates
/// starting at `offset`: the first of each pair maps to the second.
fn block_structure(n: usize, offset: usize) -> Vec<ScalarExpr> {
    let mut j = vec![ScalarExpr::number(0.0, n); n * n];
    let mut lo = offset;
    while lo + 1 < n {
        j[(lo + 1) * n + lo] = ScalarExpr::number(1.0, n);
        j[lo * n + (lo + 1)] = ScalarExpr::number(-1.0, n);
        lo += 2;
    }
    j
}

/// Conformally flat chart `exp(-2f) delta` with the standard complex
/// structure; the Lee form is `-2 df`, computed symbolically from `f`.
pub fn build_conformal_euclidean(n: usize, f: &ScalarExpr) -> Result<ManifoldSpec> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::Config(format!(
            "conformal-euclidean needs an even dimension of at least 4, got {n}"
        )));
    }
    if f.dim() != n {
        return Err(Error::Dimension(format!(
            "conformal factor parsed over dimension {}, chart has {n}",
            f.dim()
        )));
    }
    let metric = MetricField::diagonal((0..n).map(|_| f.scale(-2.0).exp()).collect());
    let theta: Vec<ScalarExpr> = (0..n).map(|k| f.derivative(k).scale(-2.0)).collect();
    let structure = StructureField::hermitian(block_structure(n, 0), theta)?;
    let spec = ManifoldSpec {
        name: "conformal-euclidean".to_string(),
        dim: n,
        metric,
        structure,
        class: TorsionClass::W4,
        params: Params::new(),
        domain: SamplingDomain::boxed(vec![-1.0; n], vec![1.0; n]),
        base: None,
    };
    probe_domain(&spec)?;
    Ok(spec)
}

/// Punctured Euclidean chart with metric `delta / r^2` and the standard
/// complex structure. The Lee form `-2 d(log r)` is parallel, and sampling
/// stays inside the annulus `0.5 < r < 2`.
pub fn build_hopf_cover(n: usize) -> Result<ManifoldSpec> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::Config(format!(
            "hopf needs an even dimension of at least 4, got {n}"
        )));
    }
    let r2 = (1..=n)
        .map(|k| format!("x{k}^2"))
        .collect::<Vec<_>>()
        .join(" + ");
    let f = ScalarExpr::parse(&format!("log({r2})"), n)?.scale(0.5);
    let metric = MetricField::diagonal((0..n).map(|_| f.scale(-2.0).exp()).collect());
    let theta: Vec<ScalarExpr> = (0..n).map(|k| f.derivative(k).scale(-2.0)).collect();
    let structure = StructureField::hermitian(block_structure(n, 0), theta)?;
    let spec = ManifoldSpec {
        name: "hopf".to_string(),
        dim: n,
        metric,
        structure,
        class: TorsionClass::W4,
        params: Params::new(),
        domain: SamplingDomain {
            lower: vec![-2.0; n],
            upper: vec![2.0; n],
            radial: Some(RadialBand {
                coords: n,
                min: 0.5,
                max: 2.0,
            }),
        },
        base: None,
    };
    probe_domain(&spec)?;
    Ok(spec)
}

/// Constant-curvature half-space chart `delta / (c x1)^2` with Reeb field
/// `c x1 d1` and the block structure on the remaining coordinates. The
/// torsion is proportional to the Reeb form with factor `alpha = -c`.
pub fn build_hyperbolic_kenmotsu(n: usize, c: f64) -> Result<ManifoldSpec> {
    if n < 3 || n % 2 != 1 {
        return Err(Error::Config(format!(
            "hyperbolic needs an odd dimension of at least 3, got {n}"
        )));
    }
    if c == 0.0 || !c.is_finite() {
        return Err(Error::Config(format!(
            "hyperbolic needs a nonzero finite curvature scale, got c = {c}"
        )));
    }
    let entry = ScalarExpr::parse("1/(c^2*x1^2)", n)?;
    let metric = MetricField::diagonal(vec![entry; n]);
    let mut zeta = vec![ScalarExpr::number(0.0, n); n];
    zeta[0] = ScalarExpr::parse("c*x1", n)?;
    let alpha = ScalarExpr::parse("-c", n)?;
    let structure = StructureField::contact(block_structure(n, 1), zeta, alpha)?;
    let mut lower = vec![-1.0; n];
    let mut upper = vec![1.0; n];
    lower[0] = 0.5;
    upper[0] = 2.0;
    let spec = ManifoldSpec {
        name: "hyperbolic".to_string(),
        dim: n,
        metric,
        structure,
        class: TorsionClass::C5,
        params: [("c".to_string(), c)].into_iter().collect(),
        domain: SamplingDomain::boxed(lower, upper),
        base: None,
    };
    probe_domain(&spec)?;
    Ok(spec)
}

/// Product of a unitary chart with a line: the new coordinate is last, the
/// Reeb field points along it, and the structure endomorphism restricts to
/// the base one. The base spec is kept for transfer checks.
pub fn product_with_line(base: ManifoldSpec) -> Result<ManifoldSpec> {
    let n = base.dim;
    let dim = n + 1;
    let (j, _theta) = match &base.structure {
        StructureField::Hermitian { j, theta } => (j, theta),
        StructureField::Contact { .. } => {
            return Err(Error::Config(
                "the line product extends a unitary chart".to_string(),
            ));
        }
    };
    let line = MetricField::diagonal(vec![ScalarExpr::number(1.0, 1)]);
    let metric = base.metric.block_sum(&line)?;
    let mut phi = vec![ScalarExpr::number(0.0, dim); dim * dim];
    for a in 0..n {
        for b in 0..n {
            phi[a * dim + b] = j[a * n + b].promote(dim)?;
        }
    }
    let mut zeta = vec![ScalarExpr::number(0.0, dim); dim];
    zeta[n] = ScalarExpr::number(1.0, dim);
    let structure = StructureField::contact(phi, zeta, ScalarExpr::number(0.0, dim))?;
    let mut lower = base.domain.lower.clone();
    let mut upper = base.domain.upper.clone();
    lower.push(-1.0);
    upper.push(1.0);
    let domain = SamplingDomain {
        lower,
        upper,
        radial: base.domain.radial,
    };
    let spec = ManifoldSpec {
        name: format!("product ({} x line)", base.name),
        dim,
        metric,
        structure,
        class: TorsionClass::C4,
        params: base.params.clone(),
        domain,
        base: Some(Box::new(base)),
    };
    probe_domain(&spec)?;
    Ok(spec)
}

pub const CATALOG_NAMES: [&str; 4] = ["hyperbolic", "hopf", "conformal-euclidean", "product"];

/// One line of `catalog` output: name, what the chart is, and the defaults
/// the CLI fills in.
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub defaults: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "hyperbolic",
            summary: "constant negative curvature half-space chart with a unit Reeb field; \
                      contact torsion proportional to the Reeb form (class C5)",
            defaults: "n=5, c=1",
        },
        CatalogEntry {
            name: "hopf",
            summary: "punctured Euclidean chart with metric delta/r^2 and the block complex \
                      structure; parallel Lee form, sampled on the annulus 0.5 < r < 2 (class W4)",
            defaults: "n=4",
        },
        CatalogEntry {
            name: "conformal-euclidean",
            summary: "conformally flat chart exp(-2f) delta with the block complex structure; \
                      Lee form -2 df derived from the supplied potential f (class W4)",
            defaults: "n=4, f=0",
        },
        CatalogEntry {
            name: "product",
            summary: "hopf chart times a line, with the Reeb field along the line; torsion \
                      transfers from the base (class C4)",
            defaults: "n=4 (chart dimension 5)",
        },
    ]
}

/// Build a catalog chart by name, filling in defaults for anything not
/// supplied. `f` only applies to conformal-euclidean and `c` only to
/// hyperbolic; passing them elsewhere is an error rather than silence.
pub fn build_named(
    name: &str,
    n: Option<usize>,
    c: Option<f64>,
    f: Option<&str>,
) -> Result<ManifoldSpec> {
    if f.is_some() && name != "conformal-euclidean" {
        return Err(Error::Config(format!(
            "a conformal potential applies only to conformal-euclidean, not {name}"
        )));
    }
    if c.is_some() && name != "hyperbolic" {
        return Err(Error::Config(format!(
            "the curvature scale applies only to hyperbolic, not {name}"
        )));
    }
    match name {
        "hyperbolic" => build_hyperbolic_kenmotsu(n.unwrap_or(5), c.unwrap_or(1.0)),
        "hopf" => build_hopf_cover(n.unwrap_or(4)),
        "conformal-euclidean" => {
            let n = n.unwrap_or(4);
            let f = ScalarExpr::parse(f.unwrap_or("0"), n)?;
            build_conformal_euclidean(n, &f)
        }
        "product" => product_with_line(build_hopf_cover(n.unwrap_or(4))?),
        other => Err(Error::Config(format!(
            "unknown manifold '{other}'; built-ins: {}",
            CATALOG_NAMES.join(", ")
        ))),
    }
}

/// Deterministic uniform sampling over the domain: rejection against the
/// radial band and against positive definiteness of the metric, with a
/// generous attempt cap so degenerate domains fail instead of spinning.
pub fn sample_points(spec: &ManifoldSpec, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::Sampling("requested zero sample points".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let cap = count * 10_000;
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > cap {
            return Err(Error::Sampling(format!(
                "only {} of {count} points found in {cap} attempts; the domain is nearly empty",
                out.len()
            )));
        }
        let point: Vec<f64> = spec
            .domain
            .lower
            .iter()
            .zip(&spec.domain.upper)
            .map(|(lo, hi)| rng.random_range(*lo..*hi))
            .collect();
        if !spec.domain.contains(&point) {
            continue;
        }
        if spec.metric.eval_values(&point, &spec.params).is_err() {
            continue;
        }
        out.push(point);
    }
    Ok(out)
}

/// Check the declared domain against the metric: corners of the box (those
/// inside the radial band) and a fixed spread of interior points must all
/// produce a positive-definite metric.
fn probe_domain(spec: &ManifoldSpec) -> Result<()> {
    let n = spec.dim;
    let mut probes: Vec<Vec<f64>> = Vec::new();
    if n <= 10 {
        for mask in 0..(1usize << n) {
            let corner: Vec<f64> = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        spec.domain.upper[i]
                    } else {
                        spec.domain.lower[i]
                    }
                })
                .collect();
            if spec.domain.contains(&corner) {
                probes.push(corner);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37);
    let mut attempts = 0usize;
    while probes.len() < 1000 {
        attempts += 1;
        if attempts > 200_000 {
            break;
        }
        let point: Vec<f64> = spec
            .domain
            .lower
            .iter()
            .zip(&spec.domain.upper)
            .map(|(lo, hi)| rng.random_range(*lo..*hi))
            .collect();
        if spec.domain.contains(&point) {
            probes.push(point);
        }
    }
    for point in &probes {
        if let Err(e) = spec.metric.eval_values(point, &spec.params) {
            return Err(Error::Config(format!(
                "domain probe at {point:?} hit a bad metric: {e}"
            )));
        }
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifoldFile {
    name: Option<String>,
    dim: usize,
    class: String,
    metric: MetricSection,
    structure: StructureSection,
    domain: DomainSection,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricSection {
    diagonal: Option<Vec<String>>,
    /// Row-major `n*n` entries; only the upper triangle is read, the lower
    /// one mirrors it.
    entries: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureSection {
    kind: String,
    j: Option<Vec<String>>,
    theta: Option<Vec<String>>,
    phi: Option<Vec<String>>,
    zeta: Option<Vec<String>>,
    alpha: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainSection {
    lower: Vec<f64>,
    upper: Vec<f64>,
    radial_coords: Option<usize>,
    radial_min: Option<f64>,
    radial_max: Option<f64>,
}

fn parse_all(texts: &[String], n: usize, what: &str) -> Result<Vec<ScalarExpr>> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            ScalarExpr::parse(t, n)
                .map_err(|e| Error::Config(format!("{what} entry {i} ({t:?}): {e}")))
        })
        .collect()
}

/// Load a chart description from a TOML file. The schema mirrors the
/// built-in specs: metric entries, structure tensors, and the Lee data as
/// expression strings; see the repository documentation for the field
/// list.
pub fn load_manifold(path: &Path) -> Result<ManifoldSpec> {
    let text = std::fs::read_to_string(path)?;
    let file: ManifoldFile = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let n = file.dim;
    if n == 0 {
        return Err(Error::Config("dim must be positive".to_string()));
    }
    let metric = match (&file.metric.diagonal, &file.metric.entries) {
        (Some(diag), None) => {
            if diag.len() != n {
                return Err(Error::Config(format!(
                    "metric diagonal has {} entries, expected {n}",
                    diag.len()
                )));
            }
            MetricField::diagonal(parse_all(diag, n, "metric")?)
        }
        (None, Some(entries)) => {
            if entries.len() != n * n {
                return Err(Error::Config(format!(
                    "metric has {} entries, expected {}",
                    entries.len(),
                    n * n
                )));
            }
            let parsed = parse_all(entries, n, "metric")?;
            MetricField::from_upper(n, |i, j| parsed[i * n + j].clone())
        }
        _ => {
            return Err(Error::Config(
                "metric needs exactly one of `diagonal` or `entries`".to_string(),
            ));
        }
    };
    let class = match file.class.as_str() {
        "w4" => TorsionClass::W4,
        "c4" => TorsionClass::C4,
        "c5" => TorsionClass::C5,
        other => {
            return Err(Error::Config(format!(
                "unknown class {other:?}; expected w4, c4 or c5"
            )));
        }
    };
    let structure = match file.structure.kind.as_str() {
        "hermitian" => {
            let (Some(j), Some(theta)) = (&file.structure.j, &file.structure.theta) else {
                return Err(Error::Config(
                    "hermitian structure needs `j` and `theta`".to_string(),
                ));
            };
            if class != TorsionClass::W4 {
                return Err(Error::Config(
                    "hermitian charts certify class w4".to_string(),
                ));
            }
            StructureField::hermitian(parse_all(j, n, "j")?, parse_all(theta, n, "theta")?)?
        }
        "contact" => {
            let (Some(phi), Some(zeta), Some(alpha)) = (
                &file.structure.phi,
                &file.structure.zeta,
                &file.structure.alpha,
            ) else {
                return Err(Error::Config(
                    "contact structure needs `phi`, `zeta` and `alpha`".to_string(),
                ));
            };
            if class == TorsionClass::W4 {
                return Err(Error::Config(
                    "contact charts certify class c4 or c5".to_string(),
                ));
            }
            let alpha = ScalarExpr::parse(alpha, n)
                .map_err(|e| Error::Config(format!("alpha ({alpha:?}): {e}")))?;
            StructureField::contact(parse_all(phi, n, "phi")?, parse_all(zeta, n, "zeta")?, alpha)?
        }
        other => {
            return Err(Error::Config(format!(
                "unknown structure kind {other:?}; expected hermitian or contact"
            )));
        }
    };
    if file.domain.lower.len() != n || file.domain.upper.len() != n {
        return Err(Error::Config(format!(
            "domain bounds need {n} entries each, got {} and {}",
            file.domain.lower.len(),
            file.domain.upper.len()
        )));
    }
    if file
        .domain
        .lower
        .iter()
        .zip(&file.domain.upper)
        .any(|(lo, hi)| lo >= hi)
    {
        return Err(Error::Config(
            "domain lower bounds must be below upper bounds".to_string(),
        ));
    }
    let radial = match (
        file.domain.radial_coords,
        file.domain.radial_min,
        file.domain.radial_max,
    ) {
        (None, None, None) => None,
        (Some(coords), Some(min), Some(max)) => {
            if coords == 0 || coords > n || min < 0.0 || min >= max {
                return Err(Error::Config(
                    "radial band needs 0 < coords <= dim and 0 <= min < max".to_string(),
                ));
            }
            Some(RadialBand { coords, min, max })
        }
        _ => {
            return Err(Error::Config(
                "radial band needs all of radial_coords, radial_min, radial_max".to_string(),
            ));
        }
    };
    let spec = ManifoldSpec {
        name: file
            .name
            .unwrap_or_else(|| path.display().to_string()),
        dim: n,
        metric,
        structure,
        class,
        params: file.params.into_iter().collect(),
        domain: SamplingDomain {
            lower: file.domain.lower,
            upper: file.domain.upper,
            radial,
        },
        base: None,
    };
    probe_domain(&spec)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::StructurePoint;

    #[test]
    fn catalog_builders_produce_working_frames() {
        for (name, point) in [
            ("hyperbolic", vec![1.0, 0.2, -0.4, 0.7, 0.1]),
            ("hopf", vec![0.8, -0.3, 0.5, 0.4]),
            ("conformal-euclidean", vec![0.2, -0.6, 0.1, 0.9]),
            ("product", vec![0.8, -0.3, 0.5, 0.4, 0.6]),
        ] {
            let spec = build_named(name, None, None, None).unwrap();
            assert_eq!(spec.dim, point.len(), "{name}");
            let fp = spec.frame_at(&point).unwrap();
            assert_eq!(fp.class, spec.class);
        }
    }

    #[test]
    fn product_structure_points_along_the_line() {
        let spec = build_named("product", None, None, None).unwrap();
        let fp = spec.frame_at(&[0.8, -0.3, 0.5, 0.4, 0.6]).unwrap();
        let StructurePoint::Contact(c) = &fp.structure else {
            panic!("product chart should carry a contact structure");
        };
        let zeta = c.zeta.value();
        let phi = c.phi.value();
        let n = fp.dim();
        for k in 0..n {
            let want = if k == n - 1 { 1.0 } else { 0.0 };
            assert_eq!(zeta.get(&[k]), want);
            assert_eq!(phi.get(&[k, n - 1]), 0.0);
            assert_eq!(phi.get(&[n - 1, k]), 0.0);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_domain() {
        let spec = build_named("hopf", None, None, None).unwrap();
        let a = sample_points(&spec, 64, 42).unwrap();
        let b = sample_points(&spec, 64, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_points(&spec, 64, 43).unwrap();
        assert_ne!(a, c);
        for p in &a {
            let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(0.5 < r && r < 2.0, "sample escaped the annulus: r = {r}");
        }
    }

    #[test]
    fn hyperbolic_samples_respect_the_half_space() {
        let spec = build_named("hyperbolic", None, Some(2.0), None).unwrap();
        for p in sample_points(&spec, 40, 7).unwrap() {
            assert!(p[0] >= 0.5 && p[0] <= 2.0);
        }
    }

    #[test]
    fn builder_preconditions() {
        assert!(matches!(
            build_named("hyperbolic", Some(4), None, None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_named("hyperbolic", None, Some(0.0), None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_named("conformal-euclidean", Some(5), None, None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_named("hopf", None, None, Some("x1")),
            Err(Error::Config(_))
        ));
        let err = build_named("torus", None, None, None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("hyperbolic") && msg.contains("product"), "{msg}");
    }

    #[test]
    fn custom_file_round_trip() {
        let dir = std::env::temp_dir();
        let path = dir.join("gtorsion_custom_chart.toml");
        std::fs::write(
            &path,
            r#"
name = "half-space"
dim = 3
class = "c5"

[metric]
diagonal = ["1/(c^2*x1^2)", "1/(c^2*x1^2)", "1/(c^2*x1^2)"]

[structure]
kind = "contact"
phi = ["0", "0", "0", "0", "0", "-1", "0", "1", "0"]
zeta = ["c*x1", "0", "0"]
alpha = "-c"

[domain]
lower = [0.5, -1.0, -1.0]
upper = [2.0, 1.0, 1.0]

[params]
c = 1.5
"#,
        )
        .unwrap();
        let spec = load_manifold(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(spec.dim, 3);
        assert_eq!(spec.class, TorsionClass::C5);
        let points = sample_points(&spec, 5, 11).unwrap();
        for p in &points {
            spec.frame_at(p).unwrap();
        }
    }

    #[test]
    fn indefinite_domain_is_rejected_at_load() {
        // x1 runs negative inside the declared box, so the first metric
        // entry goes indefinite and a corner probe must catch it.
        let dir = std::env::temp_dir();
        let path = dir.join("gtorsion_bad_chart.toml");
        std::fs::write(
            &path,
            r#"
dim = 3
class = "c5"

[metric]
diagonal = ["x1", "1", "1"]

[structure]
kind = "contact"
phi = ["0", "0", "0", "0", "0", "-1", "0", "1", "0"]
zeta = ["x1", "0", "0"]
alpha = "-1"

[domain]
lower = [-1.0, -1.0, -1.0]
upper = [1.0, 1.0, 1.0]
"#,
        )
        .unwrap();
        let err = load_manifold(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, Error::Config(_)), "{err:?}");
    }
}
