//! Residuals of the harmonicity and minimality criteria.
//!
//! Every function here reduces a tensor identity to a single nonnegative
//! number that vanishes exactly when the identity holds at the chart
//! point. Endomorphism-valued defects are measured as the largest frame
//! component `|g(e_a, E e_b)|`, vector-valued defects by their g-norm,
//! scalar identities by absolute value. The measuring frame is always the
//! canonical g-orthonormal frame of the `FramePoint`; the frames appearing
//! inside the defining sums are arguments, so basis-independence can be
//! tested by feeding a different one.

use crate::error::{Error, Result};
use crate::geometry::lie_bracket;
use crate::jet::Dual;
use crate::manifolds::ManifoldSpec;
use crate::structure::{
    contact_fundamental_dual, deformed_metric_c5_closed, deformed_metric_w4_closed, prime_map,
    proj_contact, proj_unitary, r_endomorphism, script_r, torsion_c5_closed, torsion_w4_closed,
    verify_lee_form, FramePoint, HermitianPoint, StructurePoint, TorsionClass,
};
use crate::tensor::{DualTensor, FrameBasis, TensorValue, Variance};

/// Below this squared Lee-vector norm the structure is treated as Kaehler:
/// the Lee plane degenerates and the reduced conditions hold vacuously.
const DEGENERATE_LEE: f64 = 1e-18;

/// The conditions a verification run can evaluate at sampled points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Harmonic,
    HarmonicMap,
    Minimal,
    Lck4,
    Lck2,
    Kenmotsu,
    C4Product,
    Structure,
}

pub const ALL_CONDITIONS: [Condition; 8] = [
    Condition::Harmonic,
    Condition::HarmonicMap,
    Condition::Minimal,
    Condition::Lck4,
    Condition::Lck2,
    Condition::Kenmotsu,
    Condition::C4Product,
    Condition::Structure,
];

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Harmonic => "harmonic",
            Condition::HarmonicMap => "harmonic_map",
            Condition::Minimal => "minimal",
            Condition::Lck4 => "lck4",
            Condition::Lck2 => "lck2",
            Condition::Kenmotsu => "kenmotsu",
            Condition::C4Product => "c4product",
            Condition::Structure => "structure",
        }
    }

    pub fn parse(text: &str) -> Result<Condition> {
        let token = text.trim();
        ALL_CONDITIONS
            .into_iter()
            .find(|c| c.name() == token)
            .ok_or_else(|| {
                let names: Vec<&str> = ALL_CONDITIONS.iter().map(|c| c.name()).collect();
                Error::Config(format!(
                    "unknown condition `{token}`; expected one of {}",
                    names.join(", ")
                ))
            })
    }

    /// Whether the condition is meaningful on the given manifold. The
    /// reduced conformal conditions need a complex structure, the Reeb
    /// criterion needs torsion proportional to the Reeb form, and the
    /// product check needs a recorded factor to compare against.
    pub fn applies(self, spec: &ManifoldSpec) -> bool {
        match self {
            Condition::Harmonic
            | Condition::HarmonicMap
            | Condition::Minimal
            | Condition::Structure => true,
            Condition::Lck4 | Condition::Lck2 => spec.structure.is_hermitian(),
            Condition::Kenmotsu => spec.class == TorsionClass::C5,
            Condition::C4Product => spec.base.is_some(),
        }
    }

    pub fn default_set(spec: &ManifoldSpec) -> Vec<Condition> {
        ALL_CONDITIONS
            .into_iter()
            .filter(|c| c.applies(spec))
            .collect()
    }
}

/// Largest frame component `|g(e_a, E e_b)|` of an endomorphism, measured
/// in the canonical g-orthonormal frame.
pub fn endo_norm(fp: &FramePoint, e: &TensorValue) -> f64 {
    let n = fp.dim();
    let g = &fp.geo.metric;
    let frame = &fp.frame;
    let mut worst = 0.0f64;
    let mut image = vec![0.0; n];
    for b in 0..frame.len() {
        let eb = frame.vector(b);
        for (k, slot) in image.iter_mut().enumerate() {
            *slot = (0..n).map(|m| e.get(&[k, m]) * eb[m]).sum();
        }
        for a in 0..frame.len() {
            worst = worst.max(g.inner(frame.vector(a), &image).abs());
        }
    }
    worst
}

/// `sum_j (nabla_{f_j} xi)_{f_j}` over the given frame, as an endomorphism.
pub fn torsion_divergence(fp: &FramePoint, frame: &FrameBasis) -> Result<TensorValue> {
    let n = fp.dim();
    let nabla_xi = fp.geo.covariant_derivative(&fp.xi)?;
    let mut out = TensorValue::zeros(n, vec![Variance::Up, Variance::Down]);
    for j in 0..frame.len() {
        let f = frame.vector(j);
        for k in 0..n {
            for m in 0..n {
                let mut s = out.get(&[k, m]);
                for a in 0..n {
                    if f[a] == 0.0 {
                        continue;
                    }
                    for i in 0..n {
                        s += f[a] * f[i] * nabla_xi.get(&[a, k, i, m]);
                    }
                }
                out.set(&[k, m], s);
            }
        }
    }
    Ok(out)
}

/// `sum_j R_{xi_{f_j}}(f_j)` over the given frame.
pub fn curvature_torsion_sum(fp: &FramePoint, frame: &FrameBasis) -> Result<Vec<f64>> {
    let n = fp.dim();
    let mut out = vec![0.0; n];
    for j in 0..frame.len() {
        let f = frame.vector(j);
        let rt = r_endomorphism(&fp.geo, &fp.curv, &fp.xi_endo(f))?;
        for (l, slot) in out.iter_mut().enumerate() {
            *slot += (0..n).map(|k| rt.get(&[l, k]) * f[k]).sum::<f64>();
        }
    }
    Ok(out)
}

/// The minimality defect `sum_j (nabla_{f_j} xi)_{f_j} + xi_{R_{xi_{f_j}}(f_j)}`
/// over a frame orthonormal for the deformed metric. The covariant
/// derivative is the one of the undeformed metric throughout.
pub fn minimal_sum(fp: &FramePoint, frame: &FrameBasis) -> Result<TensorValue> {
    let div = torsion_divergence(fp, frame)?;
    let rsum = curvature_torsion_sum(fp, frame)?;
    div.add(&fp.xi_endo(&rsum))
}

pub fn harmonic_residual(fp: &FramePoint) -> Result<f64> {
    Ok(endo_norm(fp, &torsion_divergence(fp, &fp.frame)?))
}

pub fn harmonic_map_residual(fp: &FramePoint) -> Result<f64> {
    Ok(fp.geo.metric.norm(&curvature_torsion_sum(fp, &fp.frame)?))
}

pub fn minimal_residual(fp: &FramePoint) -> Result<f64> {
    Ok(endo_norm(fp, &minimal_sum(fp, &fp.frame_tilde)?))
}

fn hermitian_of(fp: &FramePoint) -> Result<&HermitianPoint> {
    fp.structure.hermitian().ok_or_else(|| {
        Error::Config("this condition needs a complex structure with a Lee form".to_string())
    })
}

/// Scalar residual of the full minimality identity at one pair of vectors:
/// `(nabla_{Z'}theta)Y - (nabla_{Y'}theta)Z - (nabla_{JZ'}theta)JY
///  + (nabla_{JY'}theta)JZ` minus the curvature correction
/// `1/2 (1 + s/4)^{-1} (theta(Y) g(R,Z) - theta(Z) g(R,Y)
///  - theta(JY) Omega(R,Z) + theta(JZ) Omega(R,Y))` with `s = |theta^sharp|^2`
/// and `R = Ric(theta^sharp) - Ric*(J theta^sharp)`.
pub fn lck_minimal_full(fp: &FramePoint, y: &[f64], z: &[f64]) -> Result<f64> {
    let h = hermitian_of(fp)?;
    let n = fp.dim();
    let geo = &fp.geo;
    let g = &geo.metric;
    let jv = h.j.value();
    let theta = h.theta.value();
    let nabla_theta = geo.covariant_derivative(&h.theta.dual())?;
    let s = h.lee_norm_square(geo).v;
    let rr = script_r(geo, &fp.curv, h);

    let jmul = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|k| (0..n).map(|m| jv.get(&[k, m]) * x[m]).sum())
            .collect()
    };
    let th = |x: &[f64]| -> f64 { (0..n).map(|i| theta.get(&[i]) * x[i]).sum() };
    let nabla_th = |x: &[f64], w: &[f64]| -> f64 {
        let mut acc = 0.0;
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for i in 0..n {
                acc += x[a] * w[i] * nabla_theta.get(&[a, i]);
            }
        }
        acc
    };

    let yp = prime_map(g, &fp.gtilde, y);
    let zp = prime_map(g, &fp.gtilde, z);
    let jy = jmul(y);
    let jz = jmul(z);
    let jyp = jmul(&yp);
    let jzp = jmul(&zp);

    let derivative_part =
        nabla_th(&zp, y) - nabla_th(&yp, z) - nabla_th(&jzp, &jy) + nabla_th(&jyp, &jz);
    let curvature_part = th(y) * g.inner(&rr, z) - th(z) * g.inner(&rr, y)
        - th(&jy) * g.inner(&rr, &jz)
        + th(&jz) * g.inner(&rr, &jy);
    Ok((derivative_part - 0.5 / (1.0 + 0.25 * s) * curvature_part).abs())
}

/// Max of the full identity over all coordinate pairs plus representatives
/// of the reduced cases: both Lee-plane directions against each projected
/// coordinate field, and the Lee-plane pair itself.
pub fn lck_full_spanning(fp: &FramePoint) -> Result<f64> {
    let h = hermitian_of(fp)?;
    let n = fp.dim();
    let seeds = crate::tensor::coordinate_seeds(n);
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in (a + 1)..n {
            worst = worst.max(lck_minimal_full(fp, &seeds[a], &seeds[b])?);
        }
    }
    if h.lee_norm_square(&fp.geo).v.abs() >= DEGENERATE_LEE {
        let sharp = h.theta_sharp(&fp.geo).value().comps().to_vec();
        let jsharp = h.j_theta_sharp(&fp.geo).value().comps().to_vec();
        worst = worst.max(lck_minimal_full(fp, &sharp, &jsharp)?);
        let proj = crate::structure::lee_plane_projector(&fp.geo, h)?.value();
        for seed in &seeds {
            let projected: Vec<f64> = (0..n)
                .map(|k| (0..n).map(|m| proj.get(&[k, m]) * seed[m]).sum())
                .collect();
            worst = worst.max(lck_minimal_full(fp, &projected, &sharp)?);
            worst = worst.max(lck_minimal_full(fp, &projected, &jsharp)?);
        }
    }
    Ok(worst)
}

/// Coordinate fields pushed through the Lee-plane projector, carried with
/// first partials so brackets and covariant derivatives see the projection
/// and not just its pointwise value.
fn projected_seed_fields(fp: &FramePoint, h: &HermitianPoint) -> Result<Vec<DualTensor>> {
    let n = fp.dim();
    let proj = crate::structure::lee_plane_projector(&fp.geo, h)?;
    Ok((0..n)
        .map(|a| {
            DualTensor::from_fn(n, vec![Variance::Up], |idx| proj.get(&[idx[0], a]).clone())
        })
        .collect())
}

/// A vector field multiplied pointwise by the complex structure, partials
/// included.
fn j_vector_field(h: &HermitianPoint, y: &DualTensor) -> DualTensor {
    let n = y.dim();
    let jd = h.j.dual();
    DualTensor::from_fn(n, vec![Variance::Up], |idx| {
        let mut s = Dual::zero(n);
        for m in 0..n {
            s.acc_mul(jd.get(&[idx[0], m]), y.get(&[m]));
        }
        s
    })
}

/// `theta([Y,Z]) - theta([JY,JZ])` over pairs of projected coordinate
/// fields tangent to the complement of the Lee plane. Returns `None` when
/// that complement cannot hold two independent directions.
pub fn lck_reduced_4(fp: &FramePoint) -> Result<Option<f64>> {
    let h = hermitian_of(fp)?;
    let n = fp.dim();
    if n < 4 {
        return Ok(None);
    }
    if h.lee_norm_square(&fp.geo).v.abs() < DEGENERATE_LEE {
        return Ok(Some(0.0));
    }
    let fields = projected_seed_fields(fp, h)?;
    let theta = h.theta.value();
    let th = |v: &TensorValue| -> f64 { (0..n).map(|i| theta.get(&[i]) * v.get(&[i])).sum() };
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in (a + 1)..n {
            let br = lie_bracket(&fields[a], &fields[b])?;
            let jbr = lie_bracket(
                &j_vector_field(h, &fields[a]),
                &j_vector_field(h, &fields[b]),
            )?;
            worst = worst.max((th(&br) - th(&jbr)).abs());
        }
    }
    Ok(Some(worst))
}

/// Residual of the reduced Lee-direction condition
/// `(1 + s/4) theta(nabla_{J theta^sharp} JY - nabla_{theta^sharp} Y)
///  = 1/2 Y(s) + theta(nabla_{JY} J theta^sharp) - 1/2 s g(R, Y)`
/// over projected coordinate fields `Y`.
pub fn lck_reduced_2(fp: &FramePoint) -> Result<f64> {
    let h = hermitian_of(fp)?;
    let n = fp.dim();
    let geo = &fp.geo;
    let s = h.lee_norm_square(geo);
    if s.v.abs() < DEGENERATE_LEE {
        return Ok(0.0);
    }
    let fields = projected_seed_fields(fp, h)?;
    let theta = h.theta.value();
    let sharp = h.theta_sharp(geo);
    let jsharp = h.j_theta_sharp(geo);
    let sharp_v = sharp.value();
    let jsharp_v = jsharp.value();
    let nabla_jsharp = geo.covariant_derivative(&jsharp)?;
    let rr = script_r(geo, &fp.curv, h);
    let mut worst = 0.0f64;
    for y in &fields {
        let yv = y.value();
        let jy = j_vector_field(h, y);
        let jyv = jy.value();
        let nabla_y = geo.covariant_derivative(y)?;
        let nabla_jy = geo.covariant_derivative(&jy)?;
        let mut lhs = 0.0;
        for k in 0..n {
            let along_jsharp: f64 = (0..n)
                .map(|c| jsharp_v.get(&[c]) * nabla_jy.get(&[c, k]))
                .sum();
            let along_sharp: f64 = (0..n)
                .map(|c| sharp_v.get(&[c]) * nabla_y.get(&[c, k]))
                .sum();
            lhs += theta.get(&[k]) * (along_jsharp - along_sharp);
        }
        lhs *= 1.0 + 0.25 * s.v;
        let y_of_s: f64 = (0..n).map(|c| yv.get(&[c]) * s.grad[c]).sum();
        let mut transported = 0.0;
        for k in 0..n {
            let d: f64 = (0..n)
                .map(|c| jyv.get(&[c]) * nabla_jsharp.get(&[c, k]))
                .sum();
            transported += theta.get(&[k]) * d;
        }
        let curvature = 0.5 * s.v * geo.metric.inner(&rr, yv.comps());
        worst = worst.max((lhs - 0.5 * y_of_s - transported + curvature).abs());
    }
    Ok(worst)
}

/// `|Y alpha - 2 alpha^2 Ric(zeta, Y)|` over a spanning set of the kernel
/// of the Reeb form, `Y = d_a - eta(d_a) zeta`.
pub fn kenmotsu_residual(fp: &FramePoint) -> Result<f64> {
    let c = fp.structure.contact().ok_or_else(|| {
        Error::Config("the Reeb criterion needs an almost contact structure".to_string())
    })?;
    let n = fp.dim();
    let zeta = c.zeta.value();
    let eta = c.eta.value();
    let mut worst = 0.0f64;
    for a in 0..n {
        let mut y: Vec<f64> = (0..n).map(|k| -eta.get(&[a]) * zeta.get(&[k])).collect();
        y[a] += 1.0;
        let y_alpha: f64 = (0..n).map(|k| y[k] * c.alpha.grad[k]).sum();
        let ric = fp.curv.ricci_form(zeta.comps(), &y);
        worst = worst.max((y_alpha - 2.0 * c.alpha.v * c.alpha.v * ric).abs());
    }
    Ok(worst)
}

/// Product-structure certificate. The torsion of the product must vanish
/// whenever a slot touches the line factor, restrict to the factor torsion
/// on the remaining slots, and the deformed metric must be the factor's
/// deformed metric extended by the flat line.
pub fn c4_product_check(spec: &ManifoldSpec, fp: &FramePoint) -> Result<f64> {
    let base = spec.base.as_deref().ok_or_else(|| {
        Error::Config("the product check needs a manifold built as a product with a line".to_string())
    })?;
    let m = base.dim;
    let n = fp.dim();
    if n != m + 1 {
        return Err(Error::Dimension(format!(
            "product of dimension {n} over a factor of dimension {m}"
        )));
    }
    let base_fp = base.frame_at(&fp.geo.point[..m])?;
    let mut worst = 0.0f64;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let v = fp.xi.get(&[k, i, j]).v;
                let dev = if k < m && i < m && j < m {
                    v - base_fp.xi.get(&[k, i, j]).v
                } else {
                    v
                };
                worst = worst.max(dev.abs());
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            let got = fp.gtilde.components[a * n + b];
            let want = if a < m && b < m {
                base_fp.gtilde.components[a * m + b]
            } else if a == b {
                1.0
            } else {
                0.0
            };
            worst = worst.max((got - want).abs());
        }
    }
    Ok(worst)
}

/// `S = 1/2 g~^{kl} (nabla_i g~_jl + nabla_j g~_il - nabla_l g~_ij)`, the
/// difference between the Levi-Civita connections of the deformed and the
/// original metric, symmetric in its lower slots by construction.
pub fn difference_tensor(fp: &FramePoint) -> Result<TensorValue> {
    let n = fp.dim();
    let nab = fp.geo.covariant_derivative(&fp.gtilde_dual)?;
    let mut out = TensorValue::zeros(n, vec![Variance::Up, Variance::Down, Variance::Down]);
    for i in 0..n {
        for j in 0..=i {
            let lowered: Vec<f64> = (0..n)
                .map(|l| 0.5 * (nab.get(&[i, j, l]) + nab.get(&[j, i, l]) - nab.get(&[l, i, j])))
                .collect();
            let raised = fp.gtilde.sharp(&lowered);
            for (k, value) in raised.iter().enumerate() {
                out.set(&[k, i, j], *value);
                out.set(&[k, j, i], *value);
            }
        }
    }
    Ok(out)
}

/// Gaps of the two identities tying the deformed-frame torsion sums to the
/// connection difference: `sum_j (nabla_{e~_j} xi)_{e~_j} = sum_j xi_{S_{e~_j} e~_j}`
/// and `sum_j R_{xi_{e~_j}}(e~_j) = -sum_j S_{e~_j} e~_j`. Both vanish
/// exactly when the section into the structure bundle is a harmonic map
/// out of the deformed metric, so they are sharp on minimal examples.
pub fn harm_identity_gaps(fp: &FramePoint) -> Result<(f64, f64)> {
    let n = fp.dim();
    let s = difference_tensor(fp)?;
    let frame = &fp.frame_tilde;
    let mut s_sum = vec![0.0; n];
    for j in 0..frame.len() {
        let f = frame.vector(j);
        for (k, slot) in s_sum.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                if f[i] == 0.0 {
                    continue;
                }
                for m in 0..n {
                    acc += s.get(&[k, i, m]) * f[i] * f[m];
                }
            }
            *slot += acc;
        }
    }
    let div = torsion_divergence(fp, frame)?;
    let first = endo_norm(fp, &div.sub(&fp.xi_endo(&s_sum))?);
    let rsum = curvature_torsion_sum(fp, frame)?;
    let total: Vec<f64> = (0..n).map(|k| rsum[k] + s_sum[k]).collect();
    Ok((first, fp.geo.metric.norm(&total)))
}

/// Largest deviation of the torsion from its projection onto the
/// complement of the stabilizer algebra; the intrinsic torsion lives in
/// that complement whatever the class, so this certifies the assembly.
pub fn stabilizer_complement_gap(fp: &FramePoint) -> Result<f64> {
    let n = fp.dim();
    let mut worst = 0.0f64;
    for a in 0..n {
        let mut dir = vec![0.0; n];
        dir[a] = 1.0;
        let endo = fp.xi_endo(&dir);
        let projected = match &fp.structure {
            StructurePoint::Hermitian(h) => proj_unitary(h, &endo),
            StructurePoint::Contact(c) => proj_contact(c, &endo),
        };
        worst = worst.max(endo.sub(&projected)?.max_abs());
    }
    Ok(worst)
}

/// Difference between the general-route torsion and the closed form of the
/// declared class.
pub fn torsion_route_gap(fp: &FramePoint) -> Result<f64> {
    let closed = match (&fp.structure, fp.class) {
        (StructurePoint::Hermitian(h), TorsionClass::W4) => torsion_w4_closed(&fp.geo, h)?,
        (StructurePoint::Contact(c), TorsionClass::C5) => torsion_c5_closed(&fp.geo, c)?,
        _ => {
            return Err(Error::Config(
                "no closed-form torsion for this structure class".to_string(),
            ))
        }
    };
    Ok(fp.xi.value().sub(&closed)?.max_abs())
}

/// Difference between the contraction-route deformed metric and the closed
/// form of the declared class.
pub fn metric_route_gap(fp: &FramePoint) -> Result<f64> {
    let closed = match (&fp.structure, fp.class) {
        (StructurePoint::Hermitian(h), TorsionClass::W4) => deformed_metric_w4_closed(&fp.geo, h),
        (StructurePoint::Contact(c), TorsionClass::C5) => deformed_metric_c5_closed(&fp.geo, c),
        _ => {
            return Err(Error::Config(
                "no closed-form deformed metric for this structure class".to_string(),
            ))
        }
    };
    Ok(fp.gtilde_dual.value().sub(&closed)?.max_abs())
}

/// Gap in the curvature-sum identity
/// `sum_j R_{xi_{e~_j}}(e~_j) = -1/2 (1 + s/4)^{-1} (Ric(theta^sharp) - Ric*(J theta^sharp))`.
pub fn curvature_sum_identity_gap(fp: &FramePoint) -> Result<f64> {
    let h = hermitian_of(fp)?;
    let n = fp.dim();
    let rsum = curvature_torsion_sum(fp, &fp.frame_tilde)?;
    let rr = script_r(&fp.geo, &fp.curv, h);
    let s = h.lee_norm_square(&fp.geo).v;
    let scale = 0.5 / (1.0 + 0.25 * s);
    let gap: Vec<f64> = (0..n).map(|l| rsum[l] + scale * rr[l]).collect();
    Ok(fp.geo.metric.norm(&gap))
}

/// Defect of `(nabla_X Phi)(Y,Z) = -alpha (Phi(X,Z) eta(Y) - Phi(X,Y) eta(Z))`,
/// the identity that pins the contact torsion to the Reeb form.
pub fn reeb_derivative_gap(fp: &FramePoint) -> Result<f64> {
    let c = fp.structure.contact().ok_or_else(|| {
        Error::Config("the Reeb derivative identity needs an almost contact structure".to_string())
    })?;
    let n = fp.dim();
    let phi_form = contact_fundamental_dual(&fp.geo, c);
    let nab = fp.geo.covariant_derivative(&phi_form)?;
    let phi_v = phi_form.value();
    let eta = c.eta.value();
    let alpha = c.alpha.v;
    let mut worst = 0.0f64;
    for a in 0..n {
        for i in 0..n {
            for j in 0..n {
                let want = -alpha
                    * (phi_v.get(&[a, j]) * eta.get(&[i]) - phi_v.get(&[a, i]) * eta.get(&[j]));
                worst = worst.max((nab.get(&[a, i, j]) - want).abs());
            }
        }
    }
    Ok(worst)
}

/// Max-abs of `nabla theta`; zero means the Lee form is parallel.
pub fn lee_parallel_defect(fp: &FramePoint) -> Result<f64> {
    let h = hermitian_of(fp)?;
    Ok(fp.geo.covariant_derivative(&h.theta.dual())?.max_abs())
}

/// Gap of the rescaling identity
/// `sum_j (nabla_{e~_j} xi)_{e~_j} = (1 + s/4)^{-1} sum_j (nabla_{e_j} xi)_{e_j}`,
/// valid when the Lee form is parallel.
pub fn parallel_lee_scaling_gap(fp: &FramePoint) -> Result<f64> {
    let h = hermitian_of(fp)?;
    let s = h.lee_norm_square(&fp.geo).v;
    let tilde = torsion_divergence(fp, &fp.frame_tilde)?;
    let plain = torsion_divergence(fp, &fp.frame)?.scale(1.0 / (1.0 + 0.25 * s));
    Ok(endo_norm(fp, &tilde.sub(&plain)?))
}

/// The named sub-residuals certifying that the point really carries a
/// structure of the declared class, with all internal routes agreeing.
pub fn structure_items(spec: &ManifoldSpec, fp: &FramePoint) -> Result<Vec<(&'static str, f64)>> {
    let mut items = vec![("stabilizer complement", stabilizer_complement_gap(fp)?)];
    match fp.class {
        TorsionClass::W4 => {
            let h = hermitian_of(fp)?;
            items.push(("torsion routes", torsion_route_gap(fp)?));
            items.push(("deformed metric routes", metric_route_gap(fp)?));
            items.push(("lee form", verify_lee_form(&fp.geo, h)?));
            items.push(("curvature sum identity", curvature_sum_identity_gap(fp)?));
        }
        TorsionClass::C5 => {
            items.push(("torsion routes", torsion_route_gap(fp)?));
            items.push(("deformed metric routes", metric_route_gap(fp)?));
            items.push(("reeb derivative", reeb_derivative_gap(fp)?));
        }
        TorsionClass::C4 => {
            if spec.base.is_some() {
                items.push(("product transfer", c4_product_check(spec, fp)?));
            }
        }
    }
    Ok(items)
}

pub fn structure_residual(spec: &ManifoldSpec, fp: &FramePoint) -> Result<f64> {
    Ok(structure_items(spec, fp)?
        .into_iter()
        .fold(0.0f64, |acc, (_, v)| acc.max(v)))
}

/// Evaluate one condition at a prepared frame point. `None` marks a
/// condition that is structurally inapplicable at this dimension.
pub fn evaluate(spec: &ManifoldSpec, fp: &FramePoint, cond: Condition) -> Result<Option<f64>> {
    match cond {
        Condition::Harmonic => harmonic_residual(fp).map(Some),
        Condition::HarmonicMap => harmonic_map_residual(fp).map(Some),
        Condition::Minimal => minimal_residual(fp).map(Some),
        Condition::Lck4 => lck_reduced_4(fp),
        Condition::Lck2 => lck_reduced_2(fp).map(Some),
        Condition::Kenmotsu => kenmotsu_residual(fp).map(Some),
        Condition::C4Product => c4_product_check(spec, fp).map(Some),
        Condition::Structure => structure_residual(spec, fp).map(Some),
    }
}
