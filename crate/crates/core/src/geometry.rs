//! Metric fields in a chart and the Levi-Civita data derived from them.
//!
//! The whole pipeline runs through second-order jets: metric entries are
//! expressions, their evaluation yields value, gradient and Hessian at the
//! point, and the Koszul formula assembled over first-order jets produces
//! Christoffel symbols *with* their exact first partials. Curvature then
//! needs no differencing at all.

use crate::error::{Error, Result};
use crate::expr::{Params, ScalarExpr};
use crate::jet::{Dual, Jet2};
use crate::tensor::{
    dual_matrix_inverse, DualTensor, JetTensor, MultiIndex, PointMetric, TensorValue, Variance,
};

/// A symmetric matrix of scalar expressions, one per metric entry.
#[derive(Clone, Debug)]
pub struct MetricField {
    dim: usize,
    entries: Vec<ScalarExpr>,
}

impl MetricField {
    /// Build from the upper triangle; the lower triangle mirrors it, so the
    /// field is symmetric by construction.
    pub fn from_upper(dim: usize, f: impl Fn(usize, usize) -> ScalarExpr) -> MetricField {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                entries.push(f(a, b));
            }
        }
        MetricField { dim, entries }
    }

    pub fn diagonal(diag: Vec<ScalarExpr>) -> MetricField {
        let dim = diag.len();
        MetricField::from_upper(dim, |i, j| {
            if i == j {
                diag[i].clone()
            } else {
                ScalarExpr::number(0.0, dim)
            }
        })
    }

    /// Block sum with another metric over the product chart, this one's
    /// coordinates first.
    pub fn block_sum(&self, other: &MetricField) -> Result<MetricField> {
        let n = self.dim;
        let m = other.dim;
        let dim = n + m;
        let zero = ScalarExpr::number(0.0, dim);
        let mut entries = vec![zero; dim * dim];
        for i in 0..n {
            for j in 0..n {
                entries[i * dim + j] = self.entries[i * n + j].promote(dim)?;
            }
        }
        for i in 0..m {
            for j in 0..m {
                entries[(n + i) * dim + (n + j)] =
                    other.entries[i * m + j].shift_coords(n, dim)?;
            }
        }
        Ok(MetricField { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.entries[i * self.dim + j]
    }

    pub fn eval_values(&self, point: &[f64], params: &Params) -> Result<PointMetric> {
        let n = self.dim;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = self.entries[i * n + j].eval_value(point, params)?;
            }
        }
        PointMetric::new(g, n, "metric evaluation")
    }

    fn eval_jets(&self, point: &[f64], params: &Params) -> Result<Vec<Jet2>> {
        self.entries
            .iter()
            .map(|e| e.eval_jet(point, params))
            .collect()
    }
}

/// Everything the Levi-Civita connection knows at one point: the metric and
/// its inverse as first-order jets, and the Christoffel symbols as
/// first-order jets (so curvature reads their partials directly).
#[derive(Clone, Debug)]
pub struct ChartGeometry {
    dim: usize,
    pub point: Vec<f64>,
    pub metric: PointMetric,
    g_jets: Vec<Jet2>,
    g_dual: Vec<Dual>,
    g_inv_dual: Vec<Dual>,
    gamma: Vec<Dual>,
}

impl ChartGeometry {
    pub fn at_point(field: &MetricField, point: &[f64], params: &Params) -> Result<ChartGeometry> {
        let n = field.dim();
        if point.len() != n {
            return Err(Error::Dimension(format!(
                "point of length {} in a chart of dimension {n}",
                point.len()
            )));
        }
        let jets = field.eval_jets(point, params)?;
        let metric = PointMetric::new(jets.iter().map(|j| j.v).collect(), n, "metric evaluation")?;
        let g_dual: Vec<Dual> = jets.iter().map(|j| j.value_dual()).collect();
        let g_inv_dual = dual_matrix_inverse(&g_dual, n, "metric inverse")?;

        // dg[a][i*n + j] = d_a g_ij carrying second derivatives of g
        let mut dg: Vec<Vec<Dual>> = Vec::with_capacity(n);
        for a in 0..n {
            dg.push(jets.iter().map(|j| j.partial_dual(a)).collect());
        }

        // Koszul: Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
        let mut gamma = vec![Dual::zero(n); n * n * n];
        for i in 0..n {
            for j in 0..=i {
                for k in 0..n {
                    let mut s = Dual::zero(n);
                    for l in 0..n {
                        let bracket = dg[i][j * n + l]
                            .add(&dg[j][i * n + l])
                            .sub(&dg[l][i * n + j]);
                        s.acc_mul(&g_inv_dual[k * n + l], &bracket);
                    }
                    let s = s.scale(0.5);
                    gamma[k * n * n + i * n + j] = s.clone();
                    gamma[k * n * n + j * n + i] = s;
                }
            }
        }

        Ok(ChartGeometry {
            dim: n,
            point: point.to_vec(),
            metric,
            g_jets: jets,
            g_dual,
            g_inv_dual,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[k * self.dim * self.dim + i * self.dim + j].v
    }

    pub fn gamma_dual(&self, k: usize, i: usize, j: usize) -> &Dual {
        &self.gamma[k * self.dim * self.dim + i * self.dim + j]
    }

    pub fn metric_dual(&self, i: usize, j: usize) -> &Dual {
        &self.g_dual[i * self.dim + j]
    }

    pub fn metric_jet(&self, i: usize, j: usize) -> &Jet2 {
        &self.g_jets[i * self.dim + j]
    }

    pub fn inverse_dual(&self, i: usize, j: usize) -> &Dual {
        &self.g_inv_dual[i * self.dim + j]
    }

    /// The metric as a rank-two field with its first partials.
    pub fn metric_tensor(&self) -> DualTensor {
        let n = self.dim;
        DualTensor::from_fn(n, vec![Variance::Down, Variance::Down], |idx| {
            self.g_dual[idx[0] * n + idx[1]].clone()
        })
    }

    /// The metric as a rank-two field with two orders of derivatives.
    pub fn metric_tensor_jets(&self) -> JetTensor {
        let n = self.dim;
        JetTensor::from_fn(n, vec![Variance::Down, Variance::Down], |idx| {
            self.g_jets[idx[0] * n + idx[1]].clone()
        })
    }

    /// Curvature of the Levi-Civita connection at the point.
    pub fn curvature(&self) -> CurvaturePoint {
        let n = self.dim;
        let mut riemann = vec![0.0; n * n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut r = self.gamma_dual(l, j, k).grad[i]
                            - self.gamma_dual(l, i, k).grad[j];
                        for m in 0..n {
                            r += self.gamma(l, i, m) * self.gamma(m, j, k)
                                - self.gamma(l, j, m) * self.gamma(m, i, k);
                        }
                        riemann[((l * n + i) * n + j) * n + k] = r;
                    }
                }
            }
        }
        let mut ricci = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += riemann[((i * n + i) * n + j) * n + k];
                }
                ricci[j * n + k] = s;
            }
        }
        let mut scalar = 0.0;
        for j in 0..n {
            for k in 0..n {
                scalar += self.metric.inverse[j * n + k] * ricci[j * n + k];
            }
        }
        CurvaturePoint {
            dim: n,
            riemann,
            ricci,
            scalar,
        }
    }

    /// Total covariant derivative: one extra down slot in front for the
    /// direction. Components come straight off the jets, so the result is
    /// exact up to rounding.
    pub fn covariant_derivative(&self, t: &DualTensor) -> Result<TensorValue> {
        if t.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "field over dimension {} in a chart of dimension {}",
                t.dim(),
                self.dim
            )));
        }
        let n = self.dim;
        let rank = t.rank();
        let mut variance = vec![Variance::Down];
        variance.extend_from_slice(t.variance());
        let mut out = TensorValue::zeros(n, variance);
        let mut src = vec![0usize; rank];
        for full in MultiIndex::new(n, rank + 1) {
            let a = full[0];
            let idx = &full[1..];
            let mut s = t.get(idx).grad[a];
            for (slot, var) in t.variance().iter().enumerate() {
                src.copy_from_slice(idx);
                match var {
                    Variance::Up => {
                        for m in 0..n {
                            src[slot] = m;
                            s += self.gamma(idx[slot], a, m) * t.get(&src).v;
                        }
                    }
                    Variance::Down => {
                        for m in 0..n {
                            src[slot] = m;
                            s -= self.gamma(m, a, idx[slot]) * t.get(&src).v;
                        }
                    }
                }
            }
            out.set(&full, s);
        }
        Ok(out)
    }

    /// `nabla_X V` for a vector field carried as jets and a direction given
    /// by plain components.
    pub fn nabla_vector(&self, x: &[f64], v: &DualTensor) -> Result<Vec<f64>> {
        let full = self.covariant_derivative(v)?;
        let contracted = full.contract_vector(0, x)?;
        Ok(contracted.comps().to_vec())
    }

    /// Covariant derivative of a second-order field, keeping one order: the
    /// result's own partials come from the field's Hessians and the
    /// Christoffel jets.
    pub fn covariant_derivative_jets(&self, t: &JetTensor) -> Result<DualTensor> {
        if t.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "field over dimension {} in a chart of dimension {}",
                t.dim(),
                self.dim
            )));
        }
        let n = self.dim;
        let rank = t.rank();
        let mut variance = vec![Variance::Down];
        variance.extend_from_slice(t.variance());
        let mut out = DualTensor::zeros(n, variance, n);
        let mut src = vec![0usize; rank];
        for full in MultiIndex::new(n, rank + 1) {
            let a = full[0];
            let idx = &full[1..];
            let mut s = t.get(idx).partial_dual(a);
            for (slot, var) in t.variance().iter().enumerate() {
                src.copy_from_slice(idx);
                match var {
                    Variance::Up => {
                        for m in 0..n {
                            src[slot] = m;
                            s.acc_mul(self.gamma_dual(idx[slot], a, m), &t.get(&src).value_dual());
                        }
                    }
                    Variance::Down => {
                        for m in 0..n {
                            src[slot] = m;
                            s.acc_mul_scaled(
                                -1.0,
                                self.gamma_dual(m, a, idx[slot]),
                                &t.get(&src).value_dual(),
                            );
                        }
                    }
                }
            }
            out.set(&full, s);
        }
        Ok(out)
    }
}

/// `[X, Y]` for two vector fields carried as jets.
pub fn lie_bracket(x: &DualTensor, y: &DualTensor) -> Result<TensorValue> {
    if x.rank() != 1 || y.rank() != 1 || x.variance()[0] != Variance::Up {
        return Err(Error::Slot(
            "lie bracket needs two vector fields".to_string(),
        ));
    }
    let n = x.dim();
    Ok(TensorValue::from_fn(n, vec![Variance::Up], |idx| {
        let k = idx[0];
        let mut s = 0.0;
        for a in 0..n {
            s += x.get(&[a]).v * y.get(&[k]).grad[a] - y.get(&[a]).v * x.get(&[k]).grad[a];
        }
        s
    }))
}

/// Exterior derivative of a one-form or an antisymmetric two-form.
pub fn exterior_derivative(t: &DualTensor) -> Result<TensorValue> {
    if t.variance().iter().any(|v| *v != Variance::Down) {
        return Err(Error::Variance(
            "exterior derivative applies to forms".to_string(),
        ));
    }
    let n = t.dim();
    match t.rank() {
        1 => Ok(TensorValue::from_fn(
            n,
            vec![Variance::Down, Variance::Down],
            |idx| t.get(&[idx[1]]).grad[idx[0]] - t.get(&[idx[0]]).grad[idx[1]],
        )),
        2 => Ok(TensorValue::from_fn(
            n,
            vec![Variance::Down; 3],
            |idx| {
                let (a, b, c) = (idx[0], idx[1], idx[2]);
                t.get(&[b, c]).grad[a] - t.get(&[a, c]).grad[b] + t.get(&[a, b]).grad[c]
            },
        )),
        r => Err(Error::Slot(format!(
            "exterior derivative implemented for ranks 1 and 2, got {r}"
        ))),
    }
}

/// Riemann tensor values with the convention
/// `R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y]`,
/// stored as `R(d_i, d_j) d_k = R^l_{ijk} d_l`.
#[derive(Clone, Debug)]
pub struct CurvaturePoint {
    dim: usize,
    riemann: Vec<f64>,
    ricci: Vec<f64>,
    pub scalar: f64,
}

impl CurvaturePoint {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn riemann_comp(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim;
        self.riemann[((l * n + i) * n + j) * n + k]
    }

    pub fn ricci_comp(&self, j: usize, k: usize) -> f64 {
        self.ricci[j * self.dim + k]
    }

    /// `R(x, y) z` by components.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for l in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    if y[j] == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        s += self.riemann_comp(l, i, j, k) * x[i] * y[j] * z[k];
                    }
                }
            }
            out[l] = s;
        }
        out
    }

    /// `Ric(x, y)` as a bilinear form.
    pub fn ricci_form(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                s += self.ricci[j * n + k] * x[j] * y[k];
            }
        }
        s
    }

    /// The Ricci operator applied to a vector: `g(ric(x), y) = Ric(x, y)`.
    pub fn ricci_operator(&self, g: &PointMetric, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let lowered: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|k| self.ricci[j * n + k] * x[k]).sum())
            .collect();
        g.sharp(&lowered)
    }

    /// Sectional curvature of the plane spanned by `x` and `y`.
    pub fn sectional(&self, g: &PointMetric, x: &[f64], y: &[f64]) -> f64 {
        let rxyy = self.apply(x, y, y);
        let num = g.inner(&rxyy, x);
        let den = g.inner(x, x) * g.inner(y, y) - g.inner(x, y).powi(2);
        num / den
    }

    /// Fully lowered values `R(d_i, d_j, d_k, d_w) = g(R(d_i, d_j) d_k, d_w)`.
    pub fn lowered(&self, g: &PointMetric) -> TensorValue {
        let n = self.dim;
        TensorValue::from_fn(n, vec![Variance::Down; 4], |idx| {
            let (i, j, k, w) = (idx[0], idx[1], idx[2], idx[3]);
            (0..n)
                .map(|l| g.components[w * n + l] * self.riemann_comp(l, i, j, k))
                .sum()
        })
    }
}

/// `L_ij = d_i d_j f + d_i f d_j f` for a conformal potential, the flat
/// building block of the curvature of `exp(-2f) delta`.
pub fn conformal_l_tensor(f: &ScalarExpr, point: &[f64], params: &Params) -> Result<TensorValue> {
    let jet = f.eval_jet(point, params)?;
    let n = point.len();
    Ok(TensorValue::from_fn(
        n,
        vec![Variance::Down, Variance::Down],
        |idx| jet.hess_at(idx[0], idx[1]) + jet.grad[idx[0]] * jet.grad[idx[1]],
    ))
}

/// Closed-form lowered curvature of `g0 = exp(-2f) delta`, used as an
/// independent reference against the jet pipeline:
///
/// ```text
/// R0(X,Y,Z,W) = -[ L(X,Z) g0(Y,W) + L(Y,W) g0(X,Z)
///                - L(X,W) g0(Y,Z) - L(Y,Z) g0(X,W) ]
///               + |df|_0^2 ( g0(X,Z) g0(Y,W) - g0(Y,Z) g0(X,W) )
/// ```
pub fn conformal_curvature_reference(
    f: &ScalarExpr,
    point: &[f64],
    params: &Params,
) -> Result<TensorValue> {
    let n = point.len();
    let jet = f.eval_jet(point, params)?;
    let scale = (-2.0 * jet.v).exp();
    let l = conformal_l_tensor(f, point, params)?;
    // |df|_0^2 = g0^{ab} d_a f d_b f with g0^{ab} = exp(2f) delta^{ab}
    let df2: f64 = jet.grad.iter().map(|d| d * d).sum::<f64>() / scale;
    let g0 = |a: usize, b: usize| if a == b { scale } else { 0.0 };
    Ok(TensorValue::from_fn(n, vec![Variance::Down; 4], |idx| {
        let (x, y, z, w) = (idx[0], idx[1], idx[2], idx[3]);
        -(l.get(&[x, z]) * g0(y, w) + l.get(&[y, w]) * g0(x, z)
            - l.get(&[x, w]) * g0(y, z)
            - l.get(&[y, z]) * g0(x, w))
            + df2 * (g0(x, z) * g0(y, w) - g0(y, z) * g0(x, w))
    }))
}
