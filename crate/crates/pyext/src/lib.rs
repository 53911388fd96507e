//! Python bindings: chart construction, sampling, condition residuals and
//! whole verification runs, mirroring the command-line surface.

use std::collections::BTreeMap;
use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use gtorsion::conditions::{evaluate, Condition, ALL_CONDITIONS};
use gtorsion::manifolds::{self, ManifoldSpec};
use gtorsion::report::{render_json, run_suite, RunConfig};

fn raise(e: gtorsion::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A chart with a metric and a compatible structure, ready to evaluate
/// conditions at points.
#[pyclass(frozen)]
struct Manifold {
    spec: ManifoldSpec,
}

#[pymethods]
impl Manifold {
    /// Build a catalog chart by name; `n`, `c` and `f` fill the same
    /// slots as the CLI flags.
    #[staticmethod]
    #[pyo3(signature = (name, n=None, c=None, f=None))]
    fn named(name: &str, n: Option<usize>, c: Option<f64>, f: Option<&str>) -> PyResult<Self> {
        let spec = manifolds::build_named(name, n, c, f).map_err(raise)?;
        Ok(Manifold { spec })
    }

    /// Load a chart description from a TOML file.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let spec = manifolds::load_manifold(Path::new(path)).map_err(raise)?;
        Ok(Manifold { spec })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.spec.name
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.dim
    }

    #[getter]
    fn torsion_class(&self) -> &'static str {
        self.spec.class.label()
    }

    /// Names of the conditions that apply to this chart.
    fn conditions(&self) -> Vec<&'static str> {
        Condition::default_set(&self.spec)
            .into_iter()
            .map(Condition::name)
            .collect()
    }

    /// Deterministic sample points inside the chart's domain.
    #[pyo3(signature = (count, seed=42))]
    fn sample(&self, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        manifolds::sample_points(&self.spec, count, seed).map_err(raise)
    }

    /// Residual of one condition at one point; `None` when the condition
    /// is vacuous there.
    fn evaluate(&self, point: Vec<f64>, condition: &str) -> PyResult<Option<f64>> {
        let cond = Condition::parse(condition).map_err(raise)?;
        if !cond.applies(&self.spec) {
            return Err(raise(gtorsion::Error::Config(format!(
                "condition `{}` does not apply to this chart",
                cond.name()
            ))));
        }
        let fp = self.spec.frame_at(&point).map_err(raise)?;
        evaluate(&self.spec, &fp, cond).map_err(raise)
    }

    /// All applicable residuals at one point, keyed by condition name.
    fn residuals(&self, point: Vec<f64>) -> PyResult<BTreeMap<&'static str, Option<f64>>> {
        let fp = self.spec.frame_at(&point).map_err(raise)?;
        let mut out = BTreeMap::new();
        for cond in Condition::default_set(&self.spec) {
            out.insert(cond.name(), evaluate(&self.spec, &fp, cond).map_err(raise)?);
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Manifold(name={:?}, dim={}, class={:?})",
            self.spec.name,
            self.spec.dim,
            self.spec.class.label()
        )
    }
}

/// The built-in charts as dicts with `name`, `summary` and `defaults`.
#[pyfunction]
fn catalog() -> Vec<BTreeMap<&'static str, &'static str>> {
    manifolds::catalog()
        .into_iter()
        .map(|entry| {
            BTreeMap::from([
                ("name", entry.name),
                ("summary", entry.summary),
                ("defaults", entry.defaults),
            ])
        })
        .collect()
}

/// Every condition name the engine knows.
#[pyfunction]
fn condition_names() -> Vec<&'static str> {
    ALL_CONDITIONS.into_iter().map(Condition::name).collect()
}

/// Run a verification suite and return `(json_report, exit_code)`; the
/// report is the same byte-stable document the CLI writes.
#[pyfunction]
#[pyo3(signature = (
    manifold, samples=64, seed=42, conditions=None, n=None, c=None, f=None,
    pass_tol=1e-7, fail_tol=1e-4, detail=false
))]
#[allow(clippy::too_many_arguments)]
fn verify(
    manifold: &str,
    samples: usize,
    seed: u64,
    conditions: Option<Vec<String>>,
    n: Option<usize>,
    c: Option<f64>,
    f: Option<String>,
    pass_tol: f64,
    fail_tol: f64,
    detail: bool,
) -> PyResult<(String, i32)> {
    let mut config = RunConfig::new(manifold);
    config.samples = samples;
    config.seed = seed;
    config.conditions = conditions;
    config.params.n = n;
    config.params.c = c;
    config.params.f = f;
    config.tolerances.pass = pass_tol;
    config.tolerances.fail = fail_tol;
    config.detail = detail;
    config.validate().map_err(raise)?;
    let report = run_suite(&config).map_err(raise)?;
    Ok((render_json(&report), report.exit_code()))
}

#[pymodule]
fn gtorsion_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Manifold>()?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(condition_names, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
