//! Batch verification runs and deterministic report files.
//!
//! A run is described by a [`RunConfig`]: which chart, how many seeded
//! sample points, which conditions, and the two tolerances separating pass
//! from fail. [`run_suite`] evaluates every requested condition at every
//! point (points in parallel, assembly single-threaded) and returns a
//! [`ConditionReport`] whose JSON and CSV renderings are byte-identical
//! across reruns: keys are sorted, floats are printed with seventeen
//! significant digits in scientific notation, and nothing time- or
//! machine-dependent is recorded.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::conditions::{evaluate, Condition};
use crate::error::{Error, Result};
use crate::manifolds::{self, ManifoldSpec};

fn default_samples() -> usize {
    64
}

fn default_seed() -> u64 {
    42
}

fn default_pass_tol() -> f64 {
    1e-7
}

fn default_fail_tol() -> f64 {
    1e-4
}

/// Residual thresholds: below `pass` a condition holds, above `fail` it is
/// violated, anything in between is inconclusive.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_pass_tol")]
    pub pass: f64,
    #[serde(default = "default_fail_tol")]
    pub fail: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pass: default_pass_tol(),
            fail: default_fail_tol(),
        }
    }
}

/// Knobs for the built-in charts. `n` picks the chart dimension, `c` the
/// hyperbolic curvature scale, `f` the conformal potential; a chart file
/// fixes all of its own data, so none of these combine with one.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunParams {
    pub n: Option<usize>,
    pub c: Option<f64>,
    pub f: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl ReportFormat {
    pub fn parse(text: &str) -> Result<ReportFormat> {
        match text.trim() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown report format `{other}`; expected json or csv"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

/// One verification run: chart selection, sampling, conditions, tolerances,
/// output. Loadable from a TOML document with `[params]` and `[tolerances]`
/// tables; every field except `manifold` has a default.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Catalog name or path to a chart description file.
    pub manifold: String,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Condition names to evaluate; defaults to every condition that
    /// applies to the chart.
    #[serde(default)]
    pub conditions: Option<Vec<String>>,
    /// Where to write the report; the CLI prints to stdout when unset.
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub format: ReportFormat,
    /// Include the per-point value table in JSON output.
    #[serde(default)]
    pub detail: bool,
    #[serde(default)]
    pub params: RunParams,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn new(manifold: &str) -> RunConfig {
        RunConfig {
            manifold: manifold.to_string(),
            samples: default_samples(),
            seed: default_seed(),
            conditions: None,
            report: None,
            format: ReportFormat::Json,
            detail: false,
            params: RunParams::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".to_string()));
        }
        let t = self.tolerances;
        if !(t.pass.is_finite() && t.fail.is_finite() && t.pass > 0.0) {
            return Err(Error::Config(format!(
                "tolerances must be finite and positive, got pass={:e} fail={:e}",
                t.pass, t.fail
            )));
        }
        if t.pass >= t.fail {
            return Err(Error::Config(format!(
                "pass tolerance {:e} must be strictly below fail tolerance {:e}",
                t.pass, t.fail
            )));
        }
        Ok(())
    }

    /// Build the chart this config names: catalog names win, anything else
    /// is read as a file path.
    pub fn resolve_manifold(&self) -> Result<ManifoldSpec> {
        if manifolds::CATALOG_NAMES.contains(&self.manifold.as_str()) {
            return manifolds::build_named(
                &self.manifold,
                self.params.n,
                self.params.c,
                self.params.f.as_deref(),
            );
        }
        let path = Path::new(&self.manifold);
        if path.exists() {
            if self.params.n.is_some() || self.params.c.is_some() || self.params.f.is_some() {
                return Err(Error::Config(
                    "n, c and f select catalog charts; a chart file fixes its own data"
                        .to_string(),
                ));
            }
            return manifolds::load_manifold(path);
        }
        Err(Error::Config(format!(
            "unknown manifold `{}` and no such file; built-ins: {}",
            self.manifold,
            manifolds::CATALOG_NAMES.join(", ")
        )))
    }

    /// The conditions to run, in evaluation order. Explicitly requested
    /// conditions must apply to the chart; the default set is whatever
    /// applies.
    pub fn condition_list(&self, spec: &ManifoldSpec) -> Result<Vec<Condition>> {
        let Some(names) = &self.conditions else {
            return Ok(Condition::default_set(spec));
        };
        let mut out = Vec::new();
        for name in names {
            let cond = Condition::parse(name)?;
            if !cond.applies(spec) {
                return Err(Error::Config(format!(
                    "condition `{}` does not apply to this chart",
                    cond.name()
                )));
            }
            if !out.contains(&cond) {
                out.push(cond);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("the conditions list is empty".to_string()));
        }
        Ok(out)
    }
}

/// Read and validate a TOML run configuration.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let config: RunConfig = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    /// The condition evaluated nowhere (for example the four-form identity
    /// on a chart too small to carry two independent Lee-orthogonal
    /// planes); it neither passes nor blocks the run.
    NotApplicable,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

/// Aggregate of one condition over all sampled points.
#[derive(Clone, Debug)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub worst_point: Option<Vec<f64>>,
    pub verdict: Verdict,
    /// Per-point residuals in sampling order; `None` where the condition
    /// did not evaluate.
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug)]
pub struct PointError {
    pub condition: Condition,
    pub point_index: usize,
    pub message: String,
}

/// Everything a run produced, ready to render. The same report always
/// renders to the same bytes.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub config: RunConfig,
    pub conditions: Vec<Condition>,
    pub points: Vec<Vec<f64>>,
    pub results: Vec<ConditionSummary>,
    pub errors: Vec<PointError>,
    pub version: &'static str,
}

impl ConditionReport {
    /// 0 all pass, 1 any failure or evaluation error, 2 inconclusive
    /// results but no failures.
    pub fn exit_code(&self) -> i32 {
        if !self.errors.is_empty() || self.results.iter().any(|r| r.verdict == Verdict::Fail) {
            1
        } else if self
            .results
            .iter()
            .any(|r| r.verdict == Verdict::Inconclusive)
        {
            2
        } else {
            0
        }
    }
}

/// Evaluate the configured conditions at every sampled point. Points run
/// in a parallel map; per-point evaluation errors are recorded and the run
/// continues.
pub fn run_suite(config: &RunConfig) -> Result<ConditionReport> {
    config.validate()?;
    let spec = config.resolve_manifold()?;
    let conds = config.condition_list(&spec)?;
    let points = manifolds::sample_points(&spec, config.samples, config.seed)?;

    let rows: Vec<Vec<std::result::Result<Option<f64>, String>>> = points
        .par_iter()
        .map(|point| match spec.frame_at(point) {
            Ok(fp) => conds
                .iter()
                .map(|&cond| evaluate(&spec, &fp, cond).map_err(|e| e.to_string()))
                .collect(),
            Err(e) => {
                let message = e.to_string();
                conds.iter().map(|_| Err(message.clone())).collect()
            }
        })
        .collect();

    let mut results = Vec::with_capacity(conds.len());
    let mut errors = Vec::new();
    for (ci, &cond) in conds.iter().enumerate() {
        let mut values = Vec::with_capacity(points.len());
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut worst = None;
        for (pi, row) in rows.iter().enumerate() {
            match &row[ci] {
                Ok(Some(v)) => {
                    values.push(Some(*v));
                    sum += v;
                    count += 1;
                    if *v > max {
                        max = *v;
                        worst = Some(pi);
                    }
                }
                Ok(None) => values.push(None),
                Err(message) => {
                    values.push(None);
                    errors.push(PointError {
                        condition: cond,
                        point_index: pi,
                        message: message.clone(),
                    });
                }
            }
        }
        results.push(match worst {
            None => ConditionSummary {
                condition: cond,
                max: None,
                mean: None,
                worst_point: None,
                verdict: Verdict::NotApplicable,
                values,
            },
            Some(pi) => ConditionSummary {
                condition: cond,
                max: Some(max),
                mean: Some(sum / count as f64),
                worst_point: Some(points[pi].clone()),
                verdict: if max < config.tolerances.pass {
                    Verdict::Pass
                } else if max > config.tolerances.fail {
                    Verdict::Fail
                } else {
                    Verdict::Inconclusive
                },
                values,
            },
        });
    }

    Ok(ConditionReport {
        config: config.clone(),
        conditions: conds,
        points,
        results,
        errors,
        version: env!("CARGO_PKG_VERSION"),
    })
}

fn push_float(out: &mut String, v: f64) {
    if v.is_finite() {
        let _ = write!(out, "{v:.16e}");
    } else {
        out.push_str("null");
    }
}

fn push_string(out: &mut String, text: &str) {
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn push_point(out: &mut String, point: &[f64]) {
    out.push('[');
    for (i, x) in point.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_float(out, *x);
    }
    out.push(']');
}

/// JSON rendering: all object keys sorted, floats as seventeen significant
/// digits in scientific notation, no whitespace.
pub fn render_json(report: &ConditionReport) -> String {
    let mut out = String::new();
    out.push_str("{\"config\":{\"conditions\":[");
    for (i, cond) in report.conditions.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_string(&mut out, cond.name());
    }
    let _ = write!(out, "],\"detail\":{},\"fail_tol\":", report.config.detail);
    push_float(&mut out, report.config.tolerances.fail);
    out.push_str(",\"format\":");
    push_string(&mut out, report.config.format.name());
    out.push_str(",\"manifold\":");
    push_string(&mut out, &report.config.manifold);
    out.push_str(",\"params\":{");
    let mut first = true;
    if let Some(c) = report.config.params.c {
        out.push_str("\"c\":");
        push_float(&mut out, c);
        first = false;
    }
    if let Some(f) = &report.config.params.f {
        if !first {
            out.push(',');
        }
        out.push_str("\"f\":");
        push_string(&mut out, f);
        first = false;
    }
    if let Some(n) = report.config.params.n {
        if !first {
            out.push(',');
        }
        let _ = write!(out, "\"n\":{n}");
    }
    out.push_str("},\"pass_tol\":");
    push_float(&mut out, report.config.tolerances.pass);
    let _ = write!(
        out,
        ",\"samples\":{},\"seed\":{}}}",
        report.config.samples, report.config.seed
    );

    out.push_str(",\"errors\":[");
    for (i, err) in report.errors.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"condition\":");
        push_string(&mut out, err.condition.name());
        out.push_str(",\"message\":");
        push_string(&mut out, &err.message);
        let _ = write!(out, ",\"point_index\":{}}}", err.point_index);
    }
    out.push(']');

    if report.config.detail {
        out.push_str(",\"points\":[");
        for (pi, point) in report.points.iter().enumerate() {
            if pi > 0 {
                out.push(',');
            }
            out.push_str("{\"coords\":");
            push_point(&mut out, point);
            out.push_str(",\"values\":{");
            let mut sorted: Vec<&ConditionSummary> = report.results.iter().collect();
            sorted.sort_by_key(|r| r.condition.name());
            for (i, result) in sorted.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                push_string(&mut out, result.condition.name());
                out.push(':');
                match result.values[pi] {
                    Some(v) => push_float(&mut out, v),
                    None => out.push_str("null"),
                }
            }
            out.push_str("}}");
        }
        out.push(']');
    }

    out.push_str(",\"results\":{");
    let mut sorted: Vec<&ConditionSummary> = report.results.iter().collect();
    sorted.sort_by_key(|r| r.condition.name());
    for (i, result) in sorted.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_string(&mut out, result.condition.name());
        out.push_str(":{\"max\":");
        match result.max {
            Some(v) => push_float(&mut out, v),
            None => out.push_str("null"),
        }
        out.push_str(",\"mean\":");
        match result.mean {
            Some(v) => push_float(&mut out, v),
            None => out.push_str("null"),
        }
        out.push_str(",\"verdict\":");
        push_string(&mut out, result.verdict.name());
        out.push_str(",\"worst_point\":");
        match &result.worst_point {
            Some(p) => push_point(&mut out, p),
            None => out.push_str("null"),
        }
        out.push('}');
    }
    let _ = write!(
        out,
        "}},\"seed\":{},\"version\":",
        report.config.seed
    );
    push_string(&mut out, report.version);
    out.push_str("}\n");
    out
}

/// CSV rendering: one row per (condition, point) with the residual, a
/// status column, and the point coordinates.
pub fn render_csv(report: &ConditionReport) -> String {
    let dim = report.points.first().map_or(0, |p| p.len());
    let mut out = String::from("condition,point_index,value,status");
    for i in 1..=dim {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    let errored: BTreeSet<(&'static str, usize)> = report
        .errors
        .iter()
        .map(|e| (e.condition.name(), e.point_index))
        .collect();
    for result in &report.results {
        for (pi, point) in report.points.iter().enumerate() {
            let _ = write!(out, "{},{pi},", result.condition.name());
            let status = match result.values[pi] {
                Some(v) => {
                    let _ = write!(out, "{v:.16e}");
                    "ok"
                }
                None if errored.contains(&(result.condition.name(), pi)) => "error",
                None => "not-applicable",
            };
            out.push(',');
            out.push_str(status);
            for x in point {
                let _ = write!(out, ",{x:.16e}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn render(report: &ConditionReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => render_json(report),
        ReportFormat::Csv => render_csv(report),
    }
}

/// Write the rendered report to `path`, or to stdout when `path` is none.
pub fn emit_report(
    report: &ConditionReport,
    format: ReportFormat,
    path: Option<&Path>,
) -> Result<()> {
    let text = render(report, format);
    match path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
