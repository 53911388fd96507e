//! Unitary and contact structure tensors on a chart, and everything built
//! from them: the intrinsic torsion by two independent routes, the deformed
//! metric, projections, and the curvature contractions that enter the
//! harmonicity and minimality conditions.
//!
//! Conventions used throughout:
//!
//! - an endomorphism-valued object with a direction slot is stored like the
//!   Christoffel symbols, `t[k, i, j] = (T_{d_i} d_j)^k`;
//! - `J` and `phi` are component matrices `J^i_j` acting on vectors from the
//!   left;
//! - the fundamental two-form is `Omega(X, Y) = g(X, JY)`;
//! - `eta` is never supplied by hand, it is the metric dual of the Reeb
//!   field.

use crate::error::{Error, Result};
use crate::expr::{Params, ScalarExpr};
use crate::geometry::{exterior_derivative, ChartGeometry, CurvaturePoint, MetricField};
use crate::jet::{Dual, Jet2};
use crate::tensor::{
    coordinate_seeds, gram_schmidt, DualTensor, FrameBasis, JetTensor, PointMetric, TensorValue,
    Variance,
};

/// Torsion classes the engine knows closed forms or transfer relations for.
/// The names follow the standard sixteen-class notation for unitary
/// structures and its contact analogue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorsionClass {
    W4,
    C4,
    C5,
}

impl TorsionClass {
    pub fn label(self) -> &'static str {
        match self {
            TorsionClass::W4 => "W4",
            TorsionClass::C4 => "C4",
            TorsionClass::C5 => "C5",
        }
    }
}

/// Structure tensors as expression fields over the chart.
#[derive(Clone, Debug)]
pub enum StructureField {
    Hermitian {
        j: Vec<ScalarExpr>,
        theta: Vec<ScalarExpr>,
    },
    Contact {
        phi: Vec<ScalarExpr>,
        zeta: Vec<ScalarExpr>,
        alpha: ScalarExpr,
    },
}

impl StructureField {
    /// An almost complex structure `j` (row-major `J^i_j`) with its Lee
    /// form components.
    pub fn hermitian(j: Vec<ScalarExpr>, theta: Vec<ScalarExpr>) -> Result<StructureField> {
        let n = theta.len();
        if j.len() != n * n {
            return Err(Error::Dimension(format!(
                "structure matrix has {} entries, expected {}",
                j.len(),
                n * n
            )));
        }
        Ok(StructureField::Hermitian { j, theta })
    }

    /// An almost contact structure: endomorphism `phi`, Reeb field `zeta`,
    /// and the proportionality function `alpha` of its Lee form.
    pub fn contact(
        phi: Vec<ScalarExpr>,
        zeta: Vec<ScalarExpr>,
        alpha: ScalarExpr,
    ) -> Result<StructureField> {
        let n = zeta.len();
        if phi.len() != n * n {
            return Err(Error::Dimension(format!(
                "structure matrix has {} entries, expected {}",
                phi.len(),
                n * n
            )));
        }
        Ok(StructureField::Contact { phi, zeta, alpha })
    }

    pub fn dim(&self) -> usize {
        match self {
            StructureField::Hermitian { theta, .. } => theta.len(),
            StructureField::Contact { zeta, .. } => zeta.len(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        matches!(self, StructureField::Hermitian { .. })
    }

    /// Evaluate the fields at the chart point with two orders of
    /// derivatives on board.
    pub fn eval(&self, geo: &ChartGeometry, params: &Params) -> Result<StructurePoint> {
        let n = geo.dim();
        if self.dim() != n {
            return Err(Error::Dimension(format!(
                "structure over dimension {} in a chart of dimension {n}",
                self.dim()
            )));
        }
        let point = &geo.point;
        let up_down = vec![Variance::Up, Variance::Down];
        match self {
            StructureField::Hermitian { j, theta } => {
                let j_jets = eval_jets(j, point, params)?;
                let theta_jets = eval_jets(theta, point, params)?;
                Ok(StructurePoint::Hermitian(HermitianPoint {
                    j: JetTensor::from_fn(n, up_down, |idx| j_jets[idx[0] * n + idx[1]].clone()),
                    theta: JetTensor::from_fn(n, vec![Variance::Down], |idx| {
                        theta_jets[idx[0]].clone()
                    }),
                }))
            }
            StructureField::Contact { phi, zeta, alpha } => {
                let phi_jets = eval_jets(phi, point, params)?;
                let zeta_jets = eval_jets(zeta, point, params)?;
                let zeta =
                    JetTensor::from_fn(n, vec![Variance::Up], |idx| zeta_jets[idx[0]].clone());
                let eta = JetTensor::from_fn(n, vec![Variance::Down], |idx| {
                    let i = idx[0];
                    let mut s = Jet2::constant(0.0, n);
                    for m in 0..n {
                        s = s.add(&geo.metric_jet(i, m).mul(&zeta_jets[m]));
                    }
                    s
                });
                Ok(StructurePoint::Contact(ContactPoint {
                    phi: JetTensor::from_fn(n, up_down, |idx| {
                        phi_jets[idx[0] * n + idx[1]].clone()
                    }),
                    zeta,
                    eta,
                    alpha: alpha.eval_jet(point, params)?,
                }))
            }
        }
    }
}

fn eval_jets(exprs: &[ScalarExpr], point: &[f64], params: &Params) -> Result<Vec<Jet2>> {
    exprs.iter().map(|e| e.eval_jet(point, params)).collect()
}

/// Unitary structure tensors evaluated at a point.
#[derive(Clone, Debug)]
pub struct HermitianPoint {
    pub j: JetTensor,
    pub theta: JetTensor,
}

impl HermitianPoint {
    /// The Lee vector `theta^sharp` with its first partials.
    pub fn theta_sharp(&self, geo: &ChartGeometry) -> DualTensor {
        let n = geo.dim();
        DualTensor::from_fn(n, vec![Variance::Up], |idx| {
            let mut s = Dual::zero(n);
            for m in 0..n {
                s.acc_mul(geo.inverse_dual(idx[0], m), &self.theta.get(&[m]).value_dual());
            }
            s
        })
    }

    /// `J theta^sharp` with its first partials.
    pub fn j_theta_sharp(&self, geo: &ChartGeometry) -> DualTensor {
        let n = geo.dim();
        let sharp = self.theta_sharp(geo);
        DualTensor::from_fn(n, vec![Variance::Up], |idx| {
            let mut s = Dual::zero(n);
            for m in 0..n {
                s.acc_mul(&self.j.get(&[idx[0], m]).value_dual(), sharp.get(&[m]));
            }
            s
        })
    }

    /// `|theta^sharp|^2` with its first partials.
    pub fn lee_norm_square(&self, geo: &ChartGeometry) -> Dual {
        let n = geo.dim();
        let sharp = self.theta_sharp(geo);
        let mut s = Dual::zero(n);
        for m in 0..n {
            s.acc_mul(&self.theta.get(&[m]).value_dual(), sharp.get(&[m]));
        }
        s
    }
}

/// Contact structure tensors evaluated at a point.
#[derive(Clone, Debug)]
pub struct ContactPoint {
    pub phi: JetTensor,
    pub zeta: JetTensor,
    pub eta: JetTensor,
    pub alpha: Jet2,
}

#[derive(Clone, Debug)]
pub enum StructurePoint {
    Hermitian(HermitianPoint),
    Contact(ContactPoint),
}

impl StructurePoint {
    pub fn hermitian(&self) -> Option<&HermitianPoint> {
        match self {
            StructurePoint::Hermitian(h) => Some(h),
            StructurePoint::Contact(_) => None,
        }
    }

    pub fn contact(&self) -> Option<&ContactPoint> {
        match self {
            StructurePoint::Contact(c) => Some(c),
            StructurePoint::Hermitian(_) => None,
        }
    }
}

const INVARIANT_TOL: f64 = 1e-8;

fn check_invariant(name: &str, residual: f64) -> Result<()> {
    if residual.is_finite() && residual < INVARIANT_TOL {
        Ok(())
    } else {
        Err(Error::Invariant {
            name: name.to_string(),
            residual,
        })
    }
}

/// Algebraic compatibility of the structure tensors with the metric. Every
/// torsion formula downstream silently assumes these, so they gate the
/// pipeline.
pub fn validate(geo: &ChartGeometry, sp: &StructurePoint) -> Result<()> {
    let n = geo.dim();
    let g = &geo.metric;
    match sp {
        StructurePoint::Hermitian(h) => {
            let j = h.j.value();
            let mut sq: f64 = 0.0;
            let mut comp: f64 = 0.0;
            for i in 0..n {
                for k in 0..n {
                    let mut jj = 0.0;
                    let mut gjj = 0.0;
                    for m in 0..n {
                        jj += j.get(&[i, m]) * j.get(&[m, k]);
                        gjj += j.get(&[m, i])
                            * (0..n)
                                .map(|l| g.components[m * n + l] * j.get(&[l, k]))
                                .sum::<f64>();
                    }
                    let id = if i == k { 1.0 } else { 0.0 };
                    sq = sq.max((jj + id).abs());
                    comp = comp.max((gjj - g.components[i * n + k]).abs());
                }
            }
            check_invariant("J^2 = -Id", sq)?;
            check_invariant("g(JX, JY) = g(X, Y)", comp)
        }
        StructurePoint::Contact(c) => {
            let phi = c.phi.value();
            let zeta = c.zeta.value();
            let eta = c.eta.value();
            let mut sq: f64 = 0.0;
            let mut comp: f64 = 0.0;
            for i in 0..n {
                for k in 0..n {
                    let mut pp = 0.0;
                    let mut gpp = 0.0;
                    for m in 0..n {
                        pp += phi.get(&[i, m]) * phi.get(&[m, k]);
                        gpp += phi.get(&[m, i])
                            * (0..n)
                                .map(|l| g.components[m * n + l] * phi.get(&[l, k]))
                                .sum::<f64>();
                    }
                    let id = if i == k { 1.0 } else { 0.0 };
                    sq = sq.max((pp + id - eta.get(&[k]) * zeta.get(&[i])).abs());
                    let want = g.components[i * n + k] - eta.get(&[i]) * eta.get(&[k]);
                    comp = comp.max((gpp - want).abs());
                }
            }
            check_invariant("phi^2 = -Id + eta (x) zeta", sq)?;
            let unit = (g.inner(zeta.comps(), zeta.comps()) - 1.0).abs();
            check_invariant("|zeta| = 1", unit)?;
            check_invariant("g(phi X, phi Y) = g(X, Y) - eta(X) eta(Y)", comp)
        }
    }
}

/// Intrinsic torsion of a unitary structure, `xi_X = -1/2 J (nabla_X J)`,
/// carried with its first partials.
pub fn torsion_unitary_general(geo: &ChartGeometry, h: &HermitianPoint) -> Result<DualTensor> {
    let n = geo.dim();
    let nabla_j = geo.covariant_derivative_jets(&h.j)?;
    let jd = h.j.dual();
    let mut out = DualTensor::zeros(
        n,
        vec![Variance::Up, Variance::Down, Variance::Down],
        n,
    );
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = Dual::zero(n);
                for m in 0..n {
                    s.acc_mul_scaled(-0.5, jd.get(&[k, m]), nabla_j.get(&[i, m, j]));
                }
                out.set(&[k, i, j], s);
            }
        }
    }
    Ok(out)
}

/// Intrinsic torsion of a contact structure,
/// `xi_X Y = 1/2 (nabla_X phi) phi Y + 1/2 ((nabla_X eta) Y) zeta
///  - eta(Y) nabla_X zeta`, carried with its first partials.
pub fn torsion_contact_general(geo: &ChartGeometry, c: &ContactPoint) -> Result<DualTensor> {
    let n = geo.dim();
    let nabla_phi = geo.covariant_derivative_jets(&c.phi)?;
    let nabla_eta = geo.covariant_derivative_jets(&c.eta)?;
    let nabla_zeta = geo.covariant_derivative_jets(&c.zeta)?;
    let phi = c.phi.dual();
    let zeta = c.zeta.dual();
    let eta = c.eta.dual();
    let mut out = DualTensor::zeros(
        n,
        vec![Variance::Up, Variance::Down, Variance::Down],
        n,
    );
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = Dual::zero(n);
                for m in 0..n {
                    s.acc_mul_scaled(0.5, nabla_phi.get(&[i, k, m]), phi.get(&[m, j]));
                }
                s.acc_mul_scaled(0.5, nabla_eta.get(&[i, j]), zeta.get(&[k]));
                s.acc_mul_scaled(-1.0, eta.get(&[j]), nabla_zeta.get(&[i, k]));
                out.set(&[k, i, j], s);
            }
        }
    }
    Ok(out)
}

/// Closed-form torsion when the whole intrinsic torsion sits in the
/// Lee-form component of a unitary structure:
/// `xi_X Y = -1/4 (theta(Y) X + theta(JY) JX - g(X,Y) theta^sharp
///  - g(X,JY) J theta^sharp)`.
pub fn torsion_w4_closed(geo: &ChartGeometry, h: &HermitianPoint) -> Result<TensorValue> {
    let n = geo.dim();
    let theta = h.theta.value();
    let j = h.j.value();
    let sharp = h.theta_sharp(geo).value();
    let jsharp = h.j_theta_sharp(geo).value();
    let g = &geo.metric;
    let theta_j: Vec<f64> = (0..n)
        .map(|b| (0..n).map(|m| theta.get(&[m]) * j.get(&[m, b])).sum())
        .collect();
    let omega = |i: usize, b: usize| -> f64 {
        (0..n).map(|m| g.components[i * n + m] * j.get(&[m, b])).sum()
    };
    Ok(TensorValue::from_fn(
        n,
        vec![Variance::Up, Variance::Down, Variance::Down],
        |idx| {
            let (k, i, j_ix) = (idx[0], idx[1], idx[2]);
            let mut s = theta_j[j_ix] * j.get(&[k, i]);
            if k == i {
                s += theta.get(&[j_ix]);
            }
            s -= g.components[i * n + j_ix] * sharp.get(&[k]);
            s -= omega(i, j_ix) * jsharp.get(&[k]);
            -0.25 * s
        },
    ))
}

/// Closed-form torsion when the contact torsion is proportional to the
/// Reeb form: `xi_X Y = alpha (g(X,Y) zeta - eta(Y) X)`.
pub fn torsion_c5_closed(geo: &ChartGeometry, c: &ContactPoint) -> Result<TensorValue> {
    let n = geo.dim();
    let zeta = c.zeta.value();
    let eta = c.eta.value();
    let alpha = c.alpha.v;
    let g = &geo.metric;
    Ok(TensorValue::from_fn(
        n,
        vec![Variance::Up, Variance::Down, Variance::Down],
        |idx| {
            let (k, i, j) = (idx[0], idx[1], idx[2]);
            let mut s = g.components[i * n + j] * zeta.get(&[k]);
            if k == i {
                s -= eta.get(&[j]);
            }
            alpha * s
        },
    ))
}

/// Projection of an endomorphism onto the complement of the unitary
/// stabilizer algebra: `1/2 (A + J A J)`.
pub fn proj_unitary(h: &HermitianPoint, a: &TensorValue) -> TensorValue {
    let n = a.dim();
    let j = h.j.value();
    TensorValue::from_fn(n, vec![Variance::Up, Variance::Down], |idx| {
        let (k, w) = (idx[0], idx[1]);
        let mut s = a.get(&[k, w]);
        for p in 0..n {
            for q in 0..n {
                s += j.get(&[k, p]) * a.get(&[p, q]) * j.get(&[q, w]);
            }
        }
        0.5 * s
    })
}

/// Projection of an endomorphism onto the complement of the contact
/// stabilizer algebra:
/// `1/2 (A + phi A phi + eta(A .) zeta + eta (x) A zeta)`.
pub fn proj_contact(c: &ContactPoint, a: &TensorValue) -> TensorValue {
    let n = a.dim();
    let phi = c.phi.value();
    let zeta = c.zeta.value();
    let eta = c.eta.value();
    let a_zeta: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|b| a.get(&[k, b]) * zeta.get(&[b])).sum())
        .collect();
    TensorValue::from_fn(n, vec![Variance::Up, Variance::Down], |idx| {
        let (k, w) = (idx[0], idx[1]);
        let mut s = a.get(&[k, w]);
        for p in 0..n {
            for q in 0..n {
                s += phi.get(&[k, p]) * a.get(&[p, q]) * phi.get(&[q, w]);
            }
        }
        for p in 0..n {
            s += eta.get(&[p]) * a.get(&[p, w]) * zeta.get(&[k]);
        }
        s += eta.get(&[w]) * a_zeta[k];
        0.5 * s
    })
}

/// The deformed metric `g~(X, Y) = g(X, Y) + sum_j g(xi_X e_j, xi_Y e_j)`,
/// evaluated without picking a basis: completeness of any orthonormal
/// `e_j` turns the sum into a contraction with the inverse metric. The
/// result keeps first partials so its own Levi-Civita data stays exact.
pub fn deformed_metric_dual(geo: &ChartGeometry, xi: &DualTensor) -> Result<DualTensor> {
    let n = geo.dim();
    if xi.rank() != 3 || xi.dim() != n {
        return Err(Error::Slot(
            "deformed metric expects the torsion with one direction and two endomorphism slots"
                .to_string(),
        ));
    }
    // t[a][q*n + m] = g_pq xi^p_{a m},  u[b][q*n + m] = xi^q_{b l} g^{l m}
    let mut t: Vec<Vec<Dual>> = vec![vec![Dual::zero(n); n * n]; n];
    let mut u: Vec<Vec<Dual>> = vec![vec![Dual::zero(n); n * n]; n];
    for a in 0..n {
        for q in 0..n {
            for m in 0..n {
                let mut s_t = Dual::zero(n);
                let mut s_u = Dual::zero(n);
                for p in 0..n {
                    s_t.acc_mul(geo.metric_dual(p, q), xi.get(&[p, a, m]));
                    s_u.acc_mul(xi.get(&[q, a, p]), geo.inverse_dual(p, m));
                }
                t[a][q * n + m] = s_t;
                u[a][q * n + m] = s_u;
            }
        }
    }
    let mut out = DualTensor::zeros(n, vec![Variance::Down, Variance::Down], n);
    for a in 0..n {
        for b in 0..=a {
            let mut s = geo.metric_dual(a, b).clone();
            for qm in 0..n * n {
                s.acc_mul(&t[a][qm], &u[b][qm]);
            }
            out.set(&[a, b], s.clone());
            out.set(&[b, a], s);
        }
    }
    Ok(out)
}

/// The same deformed metric as an explicit sum over a supplied
/// g-orthonormal frame. Kept separate so the contraction route above has
/// an independent cross-check, and to expose basis independence.
pub fn deformed_metric_basis_sum(
    geo: &ChartGeometry,
    xi: &TensorValue,
    frame: &FrameBasis,
) -> TensorValue {
    let n = geo.dim();
    let g = &geo.metric;
    let mut out = TensorValue::zeros(n, vec![Variance::Down, Variance::Down]);
    let mut xa = vec![0.0; n];
    let mut xb = vec![0.0; n];
    for a in 0..n {
        for b in 0..=a {
            let mut s = g.components[a * n + b];
            for e in &frame.vectors {
                for p in 0..n {
                    xa[p] = (0..n).map(|m| xi.get(&[p, a, m]) * e[m]).sum();
                    xb[p] = (0..n).map(|m| xi.get(&[p, b, m]) * e[m]).sum();
                }
                s += g.inner(&xa, &xb);
            }
            out.set(&[a, b], s);
            out.set(&[b, a], s);
        }
    }
    out
}

/// Closed form of the deformed metric for Lee-form unitary torsion:
/// `(1 + 1/4 |theta^sharp|^2) g - 1/4 (theta (x) theta + thetaJ (x) thetaJ)`.
pub fn deformed_metric_w4_closed(geo: &ChartGeometry, h: &HermitianPoint) -> TensorValue {
    let n = geo.dim();
    let theta = h.theta.value();
    let j = h.j.value();
    let s = h.lee_norm_square(geo).v;
    let g = &geo.metric;
    let theta_j: Vec<f64> = (0..n)
        .map(|b| (0..n).map(|m| theta.get(&[m]) * j.get(&[m, b])).sum())
        .collect();
    TensorValue::from_fn(n, vec![Variance::Down, Variance::Down], |idx| {
        let (a, b) = (idx[0], idx[1]);
        (1.0 + 0.25 * s) * g.components[a * n + b]
            - 0.25 * (theta.get(&[a]) * theta.get(&[b]) + theta_j[a] * theta_j[b])
    })
}

/// Closed form of the deformed metric for Reeb-proportional contact
/// torsion: `(1 + 2 alpha^2) g - 2 alpha^2 eta (x) eta`.
pub fn deformed_metric_c5_closed(geo: &ChartGeometry, c: &ContactPoint) -> TensorValue {
    let n = geo.dim();
    let eta = c.eta.value();
    let a2 = c.alpha.v * c.alpha.v;
    let g = &geo.metric;
    TensorValue::from_fn(n, vec![Variance::Down, Variance::Down], |idx| {
        let (a, b) = (idx[0], idx[1]);
        (1.0 + 2.0 * a2) * g.components[a * n + b] - 2.0 * a2 * eta.get(&[a]) * eta.get(&[b])
    })
}

/// Fundamental two-form `Omega_ij = g(d_i, J d_j)` with first partials.
pub fn fundamental_form_dual(geo: &ChartGeometry, h: &HermitianPoint) -> DualTensor {
    let n = geo.dim();
    let jd = h.j.dual();
    DualTensor::from_fn(n, vec![Variance::Down, Variance::Down], |idx| {
        let mut s = Dual::zero(n);
        for m in 0..n {
            s.acc_mul(geo.metric_dual(idx[0], m), jd.get(&[m, idx[1]]));
        }
        s
    })
}

/// Fundamental two-form of a contact structure,
/// `Phi_ij = g(d_i, phi d_j)`, with first partials.
pub fn contact_fundamental_dual(geo: &ChartGeometry, c: &ContactPoint) -> DualTensor {
    let n = geo.dim();
    let pd = c.phi.dual();
    DualTensor::from_fn(n, vec![Variance::Down, Variance::Down], |idx| {
        let mut s = Dual::zero(n);
        for m in 0..n {
            s.acc_mul(geo.metric_dual(idx[0], m), pd.get(&[m, idx[1]]));
        }
        s
    })
}

/// Largest component of `d Omega - theta wedge Omega`. Zero certifies that
/// the supplied one-form is the Lee form of the structure.
pub fn verify_lee_form(geo: &ChartGeometry, h: &HermitianPoint) -> Result<f64> {
    let n = geo.dim();
    let omega = fundamental_form_dual(geo, h);
    let d_omega = exterior_derivative(&omega)?;
    let theta = h.theta.value();
    let om = omega.value();
    let wedge = TensorValue::from_fn(n, vec![Variance::Down; 3], |idx| {
        let (a, b, c) = (idx[0], idx[1], idx[2]);
        theta.get(&[a]) * om.get(&[b, c]) - theta.get(&[b]) * om.get(&[a, c])
            + theta.get(&[c]) * om.get(&[a, b])
    });
    Ok(d_omega.sub(&wedge)?.max_abs())
}

/// Curvature of an endomorphism summed over an orthonormal basis,
/// `R_T(X) = sum_j R(e_j, T e_j) X`. Completeness removes the basis:
/// `(R_T)^l_k = g^{ab} T^m_b R^l_{a m k}`.
pub fn r_endomorphism(
    geo: &ChartGeometry,
    curv: &CurvaturePoint,
    t: &TensorValue,
) -> Result<TensorValue> {
    let n = geo.dim();
    if t.rank() != 2 || t.dim() != n {
        return Err(Error::Slot(
            "curvature trace expects an endomorphism".to_string(),
        ));
    }
    let g_inv = &geo.metric.inverse;
    // raised[a][m] = g^{ab} T^m_b
    let raised: Vec<f64> = {
        let mut r = vec![0.0; n * n];
        for a in 0..n {
            for m in 0..n {
                r[a * n + m] = (0..n).map(|b| g_inv[a * n + b] * t.get(&[m, b])).sum();
            }
        }
        r
    };
    Ok(TensorValue::from_fn(
        n,
        vec![Variance::Up, Variance::Down],
        |idx| {
            let (l, k) = (idx[0], idx[1]);
            let mut s = 0.0;
            for a in 0..n {
                for m in 0..n {
                    s += raised[a * n + m] * curv.riemann_comp(l, a, m, k);
                }
            }
            s
        },
    ))
}

/// The star Ricci operator `Ric*(X) = sum_j R(X, J e_j) e_j` as an
/// endomorphism: `(Ric*)^l_k = R^l_{k a b} J^a_m g^{m b}`.
pub fn ric_star(geo: &ChartGeometry, curv: &CurvaturePoint, h: &HermitianPoint) -> TensorValue {
    let n = geo.dim();
    let j = h.j.value();
    let g_inv = &geo.metric.inverse;
    // jg[a][b] = J^a_m g^{m b}
    let jg: Vec<f64> = {
        let mut r = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                r[a * n + b] = (0..n).map(|m| j.get(&[a, m]) * g_inv[m * n + b]).sum();
            }
        }
        r
    };
    TensorValue::from_fn(n, vec![Variance::Up, Variance::Down], |idx| {
        let (l, k) = (idx[0], idx[1]);
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += curv.riemann_comp(l, k, a, b) * jg[a * n + b];
            }
        }
        s
    })
}

/// The curvature vector `Ric(theta^sharp) - Ric*(J theta^sharp)` that
/// drives the Lee-form minimality conditions.
pub fn script_r(geo: &ChartGeometry, curv: &CurvaturePoint, h: &HermitianPoint) -> Vec<f64> {
    let n = geo.dim();
    let sharp = h.theta_sharp(geo).value();
    let jsharp = h.j_theta_sharp(geo).value();
    let ric = curv.ricci_operator(&geo.metric, sharp.comps());
    let star = ric_star(geo, curv, h);
    (0..n)
        .map(|l| {
            ric[l]
                - (0..n)
                    .map(|k| star.get(&[l, k]) * jsharp.get(&[k]))
                    .sum::<f64>()
        })
        .collect()
}

/// `X' = sum_j g(X, e~_j) e~_j` over a g~-orthonormal basis; equivalently
/// the solution of `g~(X', .) = g(X, .)`, which is how it is computed.
pub fn prime_map(g: &PointMetric, gtilde: &PointMetric, x: &[f64]) -> Vec<f64> {
    gtilde.sharp(&g.flat(x))
}

/// Field-level orthogonal projector onto the complement of the plane
/// spanned by `theta^sharp` and `J theta^sharp`, carried with first
/// partials so projected coordinate fields remain differentiable. Callers
/// must handle the Kaehler degeneration (`|theta^sharp| = 0`) themselves.
pub fn lee_plane_projector(geo: &ChartGeometry, h: &HermitianPoint) -> Result<DualTensor> {
    let n = geo.dim();
    let sharp = h.theta_sharp(geo);
    let jsharp = h.j_theta_sharp(geo);
    let s = h.lee_norm_square(geo);
    if s.v.abs() < 1e-18 {
        return Err(Error::Singular(
            "Lee form vanishes; the Lee plane is degenerate".to_string(),
        ));
    }
    let inv_s = s.recip();
    let flat = |v: &DualTensor, i: usize| -> Dual {
        let mut s = Dual::zero(n);
        for m in 0..n {
            s.acc_mul(geo.metric_dual(i, m), v.get(&[m]));
        }
        s
    };
    Ok(DualTensor::from_fn(
        n,
        vec![Variance::Up, Variance::Down],
        |idx| {
            let (k, i) = (idx[0], idx[1]);
            let mut s = Dual::zero(n);
            s.acc_mul(sharp.get(&[k]), &flat(&sharp, i));
            s.acc_mul(jsharp.get(&[k]), &flat(&jsharp, i));
            let mut out = s.mul(&inv_s).neg();
            if k == i {
                out = out.add(&Dual::constant(1.0, n));
            }
            out
        },
    ))
}

/// A chart point with its full structure payload: geometry, curvature,
/// structure tensors, general-route torsion, deformed metric, and
/// orthonormal frames for both metrics.
#[derive(Clone, Debug)]
pub struct FramePoint {
    pub class: TorsionClass,
    pub geo: ChartGeometry,
    pub curv: CurvaturePoint,
    pub structure: StructurePoint,
    pub xi: DualTensor,
    pub gtilde_dual: DualTensor,
    pub gtilde: PointMetric,
    pub frame: FrameBasis,
    pub frame_tilde: FrameBasis,
}

impl FramePoint {
    pub fn build(
        metric: &MetricField,
        structure: &StructureField,
        class: TorsionClass,
        point: &[f64],
        params: &Params,
    ) -> Result<FramePoint> {
        let geo = ChartGeometry::at_point(metric, point, params)?;
        let n = geo.dim();
        let sp = structure.eval(&geo, params)?;
        validate(&geo, &sp)?;
        let xi = match &sp {
            StructurePoint::Hermitian(h) => torsion_unitary_general(&geo, h)?,
            StructurePoint::Contact(c) => torsion_contact_general(&geo, c)?,
        };
        let gtilde_dual = deformed_metric_dual(&geo, &xi)?;
        let gtilde = PointMetric::new(gtilde_dual.value().comps().to_vec(), n, "deformed metric")?;
        let seeds = coordinate_seeds(n);
        let frame = gram_schmidt(&seeds, &geo.metric, "orthonormal frame")?;
        let frame_tilde = gram_schmidt(&seeds, &gtilde, "deformed orthonormal frame")?;
        let curv = geo.curvature();
        Ok(FramePoint {
            class,
            geo,
            curv,
            structure: sp,
            xi,
            gtilde_dual,
            gtilde,
            frame,
            frame_tilde,
        })
    }

    pub fn dim(&self) -> usize {
        self.geo.dim()
    }

    /// The torsion endomorphism `xi_X` for a fixed direction.
    pub fn xi_endo(&self, x: &[f64]) -> TensorValue {
        let n = self.dim();
        TensorValue::from_fn(n, vec![Variance::Up, Variance::Down], |idx| {
            let (k, j) = (idx[0], idx[1]);
            (0..n).map(|i| x[i] * self.xi.get(&[k, i, j]).v).sum()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::coordinate_seeds;

    fn params(pairs: &[(&str, f64)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    /// Conformally flat unitary sample: metric `exp(-2f) delta`, block
    /// complex structure, Lee form `-2 df`.
    fn conformal_sample(n: usize, f: &ScalarExpr) -> (MetricField, StructureField) {
        let metric = MetricField::diagonal((0..n).map(|_| f.scale(-2.0).exp()).collect());
        let mut j = vec![ScalarExpr::number(0.0, n); n * n];
        for b in 0..n / 2 {
            j[(2 * b + 1) * n + 2 * b] = ScalarExpr::number(1.0, n);
            j[2 * b * n + (2 * b + 1)] = ScalarExpr::number(-1.0, n);
        }
        let theta: Vec<ScalarExpr> = (0..n).map(|k| f.derivative(k).scale(-2.0)).collect();
        (metric, StructureField::hermitian(j, theta).unwrap())
    }

    fn hopf_potential(n: usize) -> ScalarExpr {
        let r2 = (1..=n)
            .map(|k| format!("x{k}^2"))
            .collect::<Vec<_>>()
            .join(" + ");
        ScalarExpr::parse(&format!("log({r2})"), n).unwrap().scale(0.5)
    }

    /// Constant-curvature contact sample: metric `delta / (c x1)^2`, Reeb
    /// field `c x1 d1`, block structure on the remaining coordinates.
    fn hyperbolic_sample(n: usize) -> (MetricField, StructureField) {
        let entry = ScalarExpr::parse("1/(c^2*x1^2)", n).unwrap();
        let metric = MetricField::diagonal(vec![entry; n]);
        let mut phi = vec![ScalarExpr::number(0.0, n); n * n];
        for b in 0..(n - 1) / 2 {
            let (lo, hi) = (2 * b + 1, 2 * b + 2);
            phi[hi * n + lo] = ScalarExpr::number(1.0, n);
            phi[lo * n + hi] = ScalarExpr::number(-1.0, n);
        }
        let mut zeta = vec![ScalarExpr::number(0.0, n); n];
        zeta[0] = ScalarExpr::parse("c*x1", n).unwrap();
        let alpha = ScalarExpr::parse("-c", n).unwrap();
        (metric, StructureField::contact(phi, zeta, alpha).unwrap())
    }

    fn hermitian_frame(point: &[f64]) -> FramePoint {
        let n = point.len();
        let f = ScalarExpr::parse("x1^2 + x2", n).unwrap();
        let (metric, structure) = conformal_sample(n, &f);
        FramePoint::build(&metric, &structure, TorsionClass::W4, point, &Params::new()).unwrap()
    }

    fn contact_frame(point: &[f64], c: f64) -> FramePoint {
        let (metric, structure) = hyperbolic_sample(point.len());
        let p = params(&[("c", c)]);
        FramePoint::build(&metric, &structure, TorsionClass::C5, point, &p).unwrap()
    }

    #[test]
    fn broken_complex_structure_is_rejected() {
        let n = 4;
        let f = ScalarExpr::number(0.0, n);
        let (metric, structure) = conformal_sample(n, &f);
        let mut j = match structure {
            StructureField::Hermitian { j, .. } => j,
            _ => unreachable!(),
        };
        j[0] = ScalarExpr::number(0.3, n);
        let theta = vec![ScalarExpr::number(0.0, n); n];
        let broken = StructureField::hermitian(j, theta).unwrap();
        let err = FramePoint::build(
            &metric,
            &broken,
            TorsionClass::W4,
            &[0.2, -0.4, 1.0, 0.3],
            &Params::new(),
        )
        .unwrap_err();
        match err {
            Error::Invariant { name, .. } => assert!(name.contains("J^2")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn two_route_torsion_agrees_for_unitary_sample() {
        let fp = hermitian_frame(&[0.3, -0.6, 1.1, 0.2]);
        let h = fp.structure.hermitian().unwrap();
        let closed = torsion_w4_closed(&fp.geo, h).unwrap();
        let diff = fp.xi.value().sub(&closed).unwrap().max_abs();
        assert!(diff < 1e-12, "route disagreement {diff}");
    }

    #[test]
    fn two_route_torsion_agrees_for_contact_sample() {
        for c in [0.5, 1.0, 2.0] {
            let fp = contact_frame(&[1.2, 0.4, -0.3, 0.8, -1.0], c);
            let cp = fp.structure.contact().unwrap();
            let closed = torsion_c5_closed(&fp.geo, cp).unwrap();
            let diff = fp.xi.value().sub(&closed).unwrap().max_abs();
            assert!(diff < 1e-12, "route disagreement {diff} at c={c}");
        }
    }

    #[test]
    fn torsion_is_skew_adjoint_and_anticommutes() {
        let fp = hermitian_frame(&[0.3, -0.6, 1.1, 0.2]);
        let n = fp.dim();
        let h = fp.structure.hermitian().unwrap();
        let j = h.j.value();
        let g = &fp.geo.metric;
        for i in 0..n {
            let mut x = vec![0.0; n];
            x[i] = 1.0;
            let xi_x = fp.xi_endo(&x);
            for a in 0..n {
                for b in 0..n {
                    // skew adjointness: g(xi_X d_a, d_b) = -g(xi_X d_b, d_a)
                    let lhs: f64 = (0..n)
                        .map(|k| g.components[k * n + b] * xi_x.get(&[k, a]))
                        .sum();
                    let rhs: f64 = (0..n)
                        .map(|k| g.components[k * n + a] * xi_x.get(&[k, b]))
                        .sum();
                    assert!((lhs + rhs).abs() < 1e-12);
                    // the complement of the stabilizer anticommutes with J
                    let anti: f64 = (0..n)
                        .map(|k| {
                            xi_x.get(&[a, k]) * j.get(&[k, b]) + j.get(&[a, k]) * xi_x.get(&[k, b])
                        })
                        .sum();
                    assert!(anti.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn torsion_vanishes_on_the_lee_plane() {
        let fp = hermitian_frame(&[0.3, -0.6, 1.1, 0.2]);
        let h = fp.structure.hermitian().unwrap();
        let sharp = h.theta_sharp(&fp.geo).value();
        let jsharp = h.j_theta_sharp(&fp.geo).value();
        assert!(fp.xi_endo(sharp.comps()).max_abs() < 1e-12);
        assert!(fp.xi_endo(jsharp.comps()).max_abs() < 1e-12);
    }

    #[test]
    fn projection_fixes_torsion_and_is_idempotent() {
        let fp = hermitian_frame(&[0.3, -0.6, 1.1, 0.2]);
        let n = fp.dim();
        let h = fp.structure.hermitian().unwrap();
        let xi_1 = fp.xi_endo(&coordinate_seeds(n)[0]);
        let fixed = proj_unitary(h, &xi_1);
        assert!(fixed.sub(&xi_1).unwrap().max_abs() < 1e-12);

        // a made-up skew endomorphism: projection is idempotent and the
        // complementary part commutes with J
        let g = &fp.geo.metric;
        let skew_form = TensorValue::from_fn(n, vec![Variance::Down, Variance::Down], |idx| {
            (idx[0] as f64 - idx[1] as f64) * 0.3
        });
        let a = skew_form.raise_lower(0, g).unwrap();
        let pa = proj_unitary(h, &a);
        let ppa = proj_unitary(h, &pa);
        assert!(ppa.sub(&pa).unwrap().max_abs() < 1e-12);
        let rest = a.sub(&pa).unwrap();
        let j = h.j.value();
        for p in 0..n {
            for q in 0..n {
                let comm: f64 = (0..n)
                    .map(|k| rest.get(&[p, k]) * j.get(&[k, q]) - j.get(&[p, k]) * rest.get(&[k, q]))
                    .sum();
                assert!(comm.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contact_projection_fixes_torsion() {
        let fp = contact_frame(&[1.2, 0.4, -0.3, 0.8, -1.0], 1.0);
        let n = fp.dim();
        let cp = fp.structure.contact().unwrap();
        for i in 0..n {
            let mut x = vec![0.0; n];
            x[i] = 1.0;
            let xi_x = fp.xi_endo(&x);
            let fixed = proj_contact(cp, &xi_x);
            assert!(fixed.sub(&xi_x).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn deformed_metric_routes_agree() {
        let fp = hermitian_frame(&[0.3, -0.6, 1.1, 0.2]);
        let n = fp.dim();
        let h = fp.structure.hermitian().unwrap();
        let from_dual = fp.gtilde_dual.value();
        let closed = deformed_metric_w4_closed(&fp.geo, h);
        assert!(from_dual.sub(&closed).unwrap().max_abs() < 1e-12);

        let sum = deformed_metric_basis_sum(&fp.geo, &fp.xi.value(), &fp.frame);
        assert!(from_dual.sub(&sum).unwrap().max_abs() < 1e-12);

        // a different orthonormal frame must give the same sum
        let mut seeds = coordinate_seeds(n);
        seeds.reverse();
        seeds[0][1] = 0.7;
        let other = gram_schmidt(&seeds, &fp.geo.metric, "test frame").unwrap();
        let sum_other = deformed_metric_basis_sum(&fp.geo, &fp.xi.value(), &other);
        assert!(sum.sub(&sum_other).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn deformed_metric_contact_closed_form() {
        let fp = contact_frame(&[1.2, 0.4, -0.3, 0.8, -1.0], 2.0);
        let cp = fp.structure.contact().unwrap();
        let closed = deformed_metric_c5_closed(&fp.geo, cp);
        assert!(fp.gtilde_dual.value().sub(&closed).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn lee_form_certificate() {
        let n = 4;
        let point = [0.7, -0.4, 0.5, 1.1];
        let f = hopf_potential(n);
        let (metric, structure) = conformal_sample(n, &f);
        let fp =
            FramePoint::build(&metric, &structure, TorsionClass::W4, &point, &Params::new())
                .unwrap();
        let h = fp.structure.hermitian().unwrap();
        assert!(verify_lee_form(&fp.geo, h).unwrap() < 1e-12);

        // halving the form (the d f convention) must fail loudly
        let wrong = match &structure {
            StructureField::Hermitian { j, theta } => StructureField::hermitian(
                j.clone(),
                theta.iter().map(|t| t.scale(0.5)).collect(),
            )
            .unwrap(),
            _ => unreachable!(),
        };
        let sp = wrong.eval(&fp.geo, &Params::new()).unwrap();
        let residual = verify_lee_form(&fp.geo, sp.hermitian().unwrap()).unwrap();
        assert!(residual > 1e-2, "wrong Lee form slipped through: {residual}");
    }

    #[test]
    fn lee_vector_norm_on_hopf_sample() {
        let n = 4;
        let point = [0.7, -0.4, 0.5, 1.1];
        let f = hopf_potential(n);
        let (metric, structure) = conformal_sample(n, &f);
        let fp =
            FramePoint::build(&metric, &structure, TorsionClass::W4, &point, &Params::new())
                .unwrap();
        let h = fp.structure.hermitian().unwrap();
        let s = h.lee_norm_square(&fp.geo);
        assert!((s.v - 4.0).abs() < 1e-12);
        for a in 0..n {
            assert!(s.grad[a].abs() < 1e-11, "norm square drifts along {a}");
        }
    }

    #[test]
    fn curvature_trace_matches_basis_sum() {
        let fp = hermitian_frame(&[0.3, -0.6, 1.1, 0.2]);
        let n = fp.dim();
        let t = fp.xi_endo(&coordinate_seeds(n)[1]);
        let traced = r_endomorphism(&fp.geo, &fp.curv, &t).unwrap();
        for w in 0..n {
            let mut x = vec![0.0; n];
            x[w] = 1.0;
            let mut want = vec![0.0; n];
            for e in &fp.frame.vectors {
                let te: Vec<f64> = (0..n)
                    .map(|k| (0..n).map(|b| t.get(&[k, b]) * e[b]).sum())
                    .collect();
                let r = fp.curv.apply(e, &te, &x);
                for l in 0..n {
                    want[l] += r[l];
                }
            }
            for l in 0..n {
                assert!((traced.get(&[l, w]) - want[l]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn prime_map_properties() {
        let fp = hermitian_frame(&[0.3, -0.6, 1.1, 0.2]);
        let n = fp.dim();
        let h = fp.structure.hermitian().unwrap();
        let sharp = h.theta_sharp(&fp.geo).value();
        let jsharp = h.j_theta_sharp(&fp.geo).value();
        let s = h.lee_norm_square(&fp.geo).v;
        let g = &fp.geo.metric;
        let j = h.j.value();
        let theta = h.theta.value();

        // fixed on the Lee plane
        let p_sharp = prime_map(g, &fp.gtilde, sharp.comps());
        for k in 0..n {
            assert!((p_sharp[k] - sharp.get(&[k])).abs() < 1e-11);
        }

        // scaled by 1/(1 + s/4) transverse to it
        let mut y = vec![0.0; n];
        y[2] = 1.0;
        let c = g.inner(&y, sharp.comps()) / s;
        let cj = g.inner(&y, jsharp.comps()) / s;
        for k in 0..n {
            y[k] -= c * sharp.get(&[k]) + cj * jsharp.get(&[k]);
        }
        let py = prime_map(g, &fp.gtilde, &y);
        for k in 0..n {
            assert!((py[k] - y[k] / (1.0 + 0.25 * s)).abs() < 1e-11);
        }

        // commutes with J, preserves theta, and is g-self-adjoint
        let mut x = vec![0.0; n];
        x[0] = 0.4;
        x[3] = -1.2;
        let px = prime_map(g, &fp.gtilde, &x);
        let jx: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|m| j.get(&[k, m]) * x[m]).sum())
            .collect();
        let pjx = prime_map(g, &fp.gtilde, &jx);
        let jpx: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|m| j.get(&[k, m]) * px[m]).sum())
            .collect();
        for k in 0..n {
            assert!((pjx[k] - jpx[k]).abs() < 1e-11);
        }
        let tx: f64 = (0..n).map(|k| theta.get(&[k]) * x[k]).sum();
        let tpx: f64 = (0..n).map(|k| theta.get(&[k]) * px[k]).sum();
        assert!((tx - tpx).abs() < 1e-11);
        let y2 = vec![0.3, 0.0, -0.9, 0.5];
        let py2 = prime_map(g, &fp.gtilde, &y2);
        assert!((g.inner(&px, &y2) - g.inner(&x, &py2)).abs() < 1e-11);
    }

    #[test]
    fn lee_plane_projector_splits_correctly() {
        let fp = hermitian_frame(&[0.3, -0.6, 1.1, 0.2]);
        let n = fp.dim();
        let h = fp.structure.hermitian().unwrap();
        let proj = lee_plane_projector(&fp.geo, h).unwrap();
        let pv = proj.value();
        let sharp = h.theta_sharp(&fp.geo).value();
        let g = &fp.geo.metric;
        // kills the Lee vector
        let killed: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|m| pv.get(&[k, m]) * sharp.get(&[m])).sum())
            .collect();
        assert!(killed.iter().all(|v| v.abs() < 1e-12));
        // idempotent, and its image is g-orthogonal to the Lee vector
        for a in 0..n {
            let col: Vec<f64> = (0..n).map(|k| pv.get(&[k, a])).collect();
            let twice: Vec<f64> = (0..n)
                .map(|k| (0..n).map(|m| pv.get(&[k, m]) * col[m]).sum())
                .collect();
            for k in 0..n {
                assert!((twice[k] - col[k]).abs() < 1e-12);
            }
            assert!(g.inner(&col, sharp.comps()).abs() < 1e-12);
        }
    }

    #[test]
    fn contact_reeb_derivative_is_proportional_to_projection() {
        // nabla_X zeta = alpha (X - eta(X) zeta) characterizes the class
        // the hyperbolic sample sits in.
        let fp = contact_frame(&[1.2, 0.4, -0.3, 0.8, -1.0], 0.7);
        let n = fp.dim();
        let cp = fp.structure.contact().unwrap();
        let nabla_zeta = fp
            .geo
            .covariant_derivative_jets(&cp.zeta)
            .unwrap()
            .value();
        let zeta = cp.zeta.value();
        let eta = cp.eta.value();
        let alpha = cp.alpha.v;
        for i in 0..n {
            for k in 0..n {
                let id = if i == k { 1.0 } else { 0.0 };
                let want = alpha * (id - eta.get(&[i]) * zeta.get(&[k]));
                assert!((nabla_zeta.get(&[i, k]) - want).abs() < 1e-11);
            }
        }
    }
}
