//! Dense tensors with explicit variance, and the pointwise linear algebra
//! the rest of the crate leans on: SPD factorizations, index raising and
//! lowering, Gram-Schmidt frames.
//!
//! Everything here is small and dense on purpose. Charts stay below ten
//! dimensions and tensors below rank five, so `Vec<f64>` with row-major
//! strides beats any sparse cleverness.

use crate::error::{Error, Result};
use crate::jet::{Dual, Jet2};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Up,
    Down,
}

impl Variance {
    pub fn flip(self) -> Variance {
        match self {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        }
    }
}

impl fmt::Display for Variance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variance::Up => write!(f, "up"),
            Variance::Down => write!(f, "down"),
        }
    }
}

/// A dense tensor at a point: components indexed row-major, one variance
/// marker per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorValue {
    dim: usize,
    variance: Vec<Variance>,
    comps: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(dim: usize, variance: Vec<Variance>) -> TensorValue {
        let len = dim.pow(variance.len() as u32);
        TensorValue {
            dim,
            variance,
            comps: vec![0.0; len],
        }
    }

    pub fn from_fn(
        dim: usize,
        variance: Vec<Variance>,
        f: impl Fn(&[usize]) -> f64,
    ) -> TensorValue {
        let mut t = TensorValue::zeros(dim, variance);
        let rank = t.rank();
        for (flat, idx) in MultiIndex::new(dim, rank).enumerate() {
            t.comps[flat] = f(&idx);
        }
        t
    }

    pub fn vector(comps: Vec<f64>) -> TensorValue {
        TensorValue {
            dim: comps.len(),
            variance: vec![Variance::Up],
            comps,
        }
    }

    pub fn one_form(comps: Vec<f64>) -> TensorValue {
        TensorValue {
            dim: comps.len(),
            variance: vec![Variance::Down],
            comps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let mut f = 0;
        for &i in idx {
            debug_assert!(i < self.dim);
            f = f * self.dim + i;
        }
        f
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.comps[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let f = self.flat(idx);
        self.comps[f] = v;
    }

    pub fn add(&self, o: &TensorValue) -> Result<TensorValue> {
        self.check_same_shape(o)?;
        let comps = self
            .comps
            .iter()
            .zip(&o.comps)
            .map(|(a, b)| a + b)
            .collect();
        Ok(TensorValue {
            dim: self.dim,
            variance: self.variance.clone(),
            comps,
        })
    }

    pub fn sub(&self, o: &TensorValue) -> Result<TensorValue> {
        self.check_same_shape(o)?;
        let comps = self
            .comps
            .iter()
            .zip(&o.comps)
            .map(|(a, b)| a - b)
            .collect();
        Ok(TensorValue {
            dim: self.dim,
            variance: self.variance.clone(),
            comps,
        })
    }

    pub fn scale(&self, c: f64) -> TensorValue {
        TensorValue {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(|a| a * c).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn outer(&self, o: &TensorValue) -> Result<TensorValue> {
        if self.dim != o.dim {
            return Err(Error::Dimension(format!(
                "outer product of tensors over dimensions {} and {}",
                self.dim, o.dim
            )));
        }
        let mut variance = self.variance.clone();
        variance.extend_from_slice(&o.variance);
        let mut comps = Vec::with_capacity(self.comps.len() * o.comps.len());
        for a in &self.comps {
            for b in &o.comps {
                comps.push(a * b);
            }
        }
        Ok(TensorValue {
            dim: self.dim,
            variance,
            comps,
        })
    }

    /// Trace over slots `a` and `b`, which must carry opposite variance.
    pub fn contract(&self, a: usize, b: usize) -> Result<TensorValue> {
        let rank = self.rank();
        if a >= rank || b >= rank || a == b {
            return Err(Error::Slot(format!(
                "contraction slots ({a}, {b}) invalid for rank {rank}"
            )));
        }
        if self.variance[a] == self.variance[b] {
            return Err(Error::Variance(format!(
                "contraction needs one up and one down slot, got ({}, {})",
                self.variance[a], self.variance[b]
            )));
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut variance = self.variance.clone();
        variance.remove(hi);
        variance.remove(lo);
        let mut out = TensorValue::zeros(self.dim, variance);
        let out_rank = rank - 2;
        let mut full = vec![0usize; rank];
        for (flat, idx) in MultiIndex::new(self.dim, out_rank).enumerate() {
            let mut s = 0.0;
            for k in 0..self.dim {
                let mut pos = 0;
                for slot in 0..rank {
                    full[slot] = if slot == lo || slot == hi {
                        k
                    } else {
                        let v = idx[pos];
                        pos += 1;
                        v
                    };
                }
                s += self.get(&full);
            }
            out.comps[flat] = s;
        }
        Ok(out)
    }

    /// Flip the variance of one slot with the metric (`Down -> Up` uses the
    /// inverse components, `Up -> Down` the metric itself).
    pub fn raise_lower(&self, slot: usize, m: &PointMetric) -> Result<TensorValue> {
        if slot >= self.rank() {
            return Err(Error::Slot(format!(
                "slot {slot} out of range for rank {}",
                self.rank()
            )));
        }
        if self.dim != m.dim() {
            return Err(Error::Dimension(format!(
                "tensor over dimension {} against a metric over {}",
                self.dim,
                m.dim()
            )));
        }
        let mat = match self.variance[slot] {
            Variance::Down => &m.inverse,
            Variance::Up => &m.components,
        };
        let mut variance = self.variance.clone();
        variance[slot] = variance[slot].flip();
        let mut out = TensorValue::zeros(self.dim, variance);
        let rank = self.rank();
        let mut src = vec![0usize; rank];
        for (flat, idx) in MultiIndex::new(self.dim, rank).enumerate() {
            let mut s = 0.0;
            for k in 0..self.dim {
                src.copy_from_slice(&idx);
                src[slot] = k;
                s += mat[idx[slot] * self.dim + k] * self.get(&src);
            }
            out.comps[flat] = s;
        }
        Ok(out)
    }

    /// Contract one slot against plain vector components and drop it.
    pub fn contract_vector(&self, slot: usize, x: &[f64]) -> Result<TensorValue> {
        if slot >= self.rank() {
            return Err(Error::Slot(format!(
                "slot {slot} out of range for rank {}",
                self.rank()
            )));
        }
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "vector of length {} against dimension {}",
                x.len(),
                self.dim
            )));
        }
        let mut variance = self.variance.clone();
        variance.remove(slot);
        let rank = self.rank();
        let mut out = TensorValue::zeros(self.dim, variance);
        let mut full = vec![0usize; rank];
        for (flat, idx) in MultiIndex::new(self.dim, rank - 1).enumerate() {
            let mut s = 0.0;
            for k in 0..self.dim {
                let mut pos = 0;
                for dst in 0..rank {
                    full[dst] = if dst == slot {
                        k
                    } else {
                        let v = idx[pos];
                        pos += 1;
                        v
                    };
                }
                s += x[k] * self.get(&full);
            }
            out.comps[flat] = s;
        }
        Ok(out)
    }

    fn check_same_shape(&self, o: &TensorValue) -> Result<()> {
        if self.dim != o.dim {
            return Err(Error::Dimension(format!(
                "tensors over dimensions {} and {}",
                self.dim, o.dim
            )));
        }
        if self.variance != o.variance {
            return Err(Error::Variance(format!(
                "mismatched slot variances {:?} and {:?}",
                self.variance, o.variance
            )));
        }
        Ok(())
    }
}

/// A tensor whose components are first-order jets: the value of the field
/// at a point together with each component's partials along the chart.
/// Every derived field in the frame assembly (structure tensors, intrinsic
/// torsion, the deformed metric) is carried in this form so covariant
/// derivatives never fall back to differencing.
#[derive(Clone, Debug)]
pub struct DualTensor {
    dim: usize,
    variance: Vec<Variance>,
    comps: Vec<Dual>,
}

impl DualTensor {
    pub fn zeros(dim: usize, variance: Vec<Variance>, grad_dim: usize) -> DualTensor {
        let len = dim.pow(variance.len() as u32);
        DualTensor {
            dim,
            variance,
            comps: vec![Dual::zero(grad_dim); len],
        }
    }

    pub fn from_fn(
        dim: usize,
        variance: Vec<Variance>,
        f: impl Fn(&[usize]) -> Dual,
    ) -> DualTensor {
        let rank = variance.len();
        let mut comps = Vec::with_capacity(dim.pow(rank as u32));
        for idx in MultiIndex::new(dim, rank) {
            comps.push(f(&idx));
        }
        DualTensor {
            dim,
            variance,
            comps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let mut f = 0;
        for &i in idx {
            f = f * self.dim + i;
        }
        f
    }

    pub fn get(&self, idx: &[usize]) -> &Dual {
        &self.comps[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: Dual) {
        let f = self.flat(idx);
        self.comps[f] = v;
    }

    pub fn comps(&self) -> &[Dual] {
        &self.comps
    }

    /// Forget the derivatives.
    pub fn value(&self) -> TensorValue {
        TensorValue {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(|d| d.v).collect(),
        }
    }

    /// Plain partial derivative of every component along coordinate `a`.
    pub fn partial(&self, a: usize) -> TensorValue {
        TensorValue {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(|d| d.grad[a]).collect(),
        }
    }
}

/// A tensor whose components are second-order jets. Structure fields enter
/// the pipeline in this form: with Hessians on board, their covariant
/// derivatives are still fields (a [`DualTensor`]), not just values.
#[derive(Clone, Debug)]
pub struct JetTensor {
    dim: usize,
    variance: Vec<Variance>,
    comps: Vec<Jet2>,
}

impl JetTensor {
    pub fn from_fn(
        dim: usize,
        variance: Vec<Variance>,
        f: impl Fn(&[usize]) -> Jet2,
    ) -> JetTensor {
        let rank = variance.len();
        let mut comps = Vec::with_capacity(dim.pow(rank as u32));
        for idx in MultiIndex::new(dim, rank) {
            comps.push(f(&idx));
        }
        JetTensor {
            dim,
            variance,
            comps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let mut f = 0;
        for &i in idx {
            f = f * self.dim + i;
        }
        f
    }

    pub fn get(&self, idx: &[usize]) -> &Jet2 {
        &self.comps[self.flat(idx)]
    }

    pub fn comps(&self) -> &[Jet2] {
        &self.comps
    }

    pub fn value(&self) -> TensorValue {
        TensorValue {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(|j| j.v).collect(),
        }
    }

    /// Drop the Hessians, keeping value and gradient.
    pub fn dual(&self) -> DualTensor {
        DualTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(|j| j.value_dual()).collect(),
        }
    }

    /// Partial derivative along coordinate `a`, still carrying one order.
    pub fn partial_dual(&self, a: usize) -> DualTensor {
        DualTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(|j| j.partial_dual(a)).collect(),
        }
    }
}

/// Row-major odometer over all multi-indices of a given rank.
pub struct MultiIndex {
    dim: usize,
    idx: Vec<usize>,
    done: bool,
}

impl MultiIndex {
    pub fn new(dim: usize, rank: usize) -> MultiIndex {
        MultiIndex {
            dim,
            idx: vec![0; rank],
            done: dim == 0 && rank > 0,
        }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.idx.clone();
        let mut k = self.idx.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.idx[k] += 1;
            if self.idx[k] < self.dim {
                break;
            }
            self.idx[k] = 0;
        }
        Some(current)
    }
}

/// The metric evaluated at a point: components, inverse, and the Cholesky
/// factor that certified positive definiteness.
#[derive(Clone, Debug)]
pub struct PointMetric {
    dim: usize,
    pub components: Vec<f64>,
    pub inverse: Vec<f64>,
    pub cholesky: Vec<f64>,
}

impl PointMetric {
    pub fn new(components: Vec<f64>, dim: usize, stage: &str) -> Result<PointMetric> {
        if components.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "metric needs {} components, got {}",
                dim * dim,
                components.len()
            )));
        }
        let cholesky = cholesky(&components, dim, stage)?;
        let inverse = spd_inverse_from_cholesky(&cholesky, dim);
        let kappa = inf_norm(&components, dim) * inf_norm(&inverse, dim);
        if !kappa.is_finite() || kappa > 1e12 {
            return Err(Error::Singular(format!(
                "{stage}: metric condition estimate {kappa:.3e} beyond 1e12"
            )));
        }
        Ok(PointMetric {
            dim,
            components,
            inverse,
            cholesky,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.components[i * n + j] * x[i] * y[j];
            }
        }
        s
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Lower a vector to its metric dual one-form.
    pub fn flat(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.components, x, self.dim)
    }

    /// Raise a one-form to its metric dual vector.
    pub fn sharp(&self, omega: &[f64]) -> Vec<f64> {
        mat_vec(&self.inverse, omega, self.dim)
    }
}

fn mat_vec(a: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

fn inf_norm(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &[f64], n: usize, stage: &str) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 1e-14 * a[i * n + i].abs().max(1.0) {
                    return Err(Error::NotPositiveDefinite {
                        pivot: s,
                        stage: stage.to_string(),
                    });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

fn spd_inverse_from_cholesky(l: &[f64], n: usize) -> Vec<f64> {
    // Invert by solving L L^T X = e_k column by column.
    let mut inv = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for k in 0..n {
        col.iter_mut().for_each(|c| *c = 0.0);
        col[k] = 1.0;
        // forward substitution L y = e_k
        for i in 0..n {
            let mut s = col[i];
            for j in 0..i {
                s -= l[i * n + j] * col[j];
            }
            col[i] = s / l[i * n + i];
        }
        // back substitution L^T x = y
        for i in (0..n).rev() {
            let mut s = col[i];
            for j in (i + 1)..n {
                s -= l[j * n + i] * col[j];
            }
            col[i] = s / l[i * n + i];
        }
        for i in 0..n {
            inv[i * n + k] = col[i];
        }
    }
    // symmetrize away the last rounding
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (inv[i * n + j] + inv[j * n + i]);
            inv[i * n + j] = m;
            inv[j * n + i] = m;
        }
    }
    inv
}

/// A g-orthonormal frame: row `j` holds the chart components of `e_j`.
#[derive(Clone, Debug)]
pub struct FrameBasis {
    pub vectors: Vec<Vec<f64>>,
}

impl FrameBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j]
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self, m: &PointMetric) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, u) in self.vectors.iter().enumerate() {
            for (j, w) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((m.inner(u, w) - target).abs());
            }
        }
        worst
    }
}

/// The coordinate directions as frame seeds.
pub fn coordinate_seeds(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Gram-Schmidt against the metric inner product, with one full
/// reorthogonalization pass to hold the defect near machine precision.
/// Seeds that collapse below `1e-12` of their original length fail with
/// the stage recorded.
pub fn gram_schmidt(seeds: &[Vec<f64>], m: &PointMetric, stage: &str) -> Result<FrameBasis> {
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(seeds.len());
    for (s_idx, seed) in seeds.iter().enumerate() {
        let mut v = seed.clone();
        let original = m.norm(&v).max(f64::MIN_POSITIVE);
        for _ in 0..2 {
            for u in &frame {
                let c = m.inner(&v, u);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= c * ui;
                }
            }
        }
        let len = m.norm(&v);
        if len <= 1e-12 * original {
            return Err(Error::RankDeficient {
                stage: format!("{stage}: seed {s_idx}"),
            });
        }
        for vi in v.iter_mut() {
            *vi /= len;
        }
        frame.push(v);
    }
    Ok(FrameBasis { vectors: frame })
}

/// Invert a matrix of first-order jets by Gauss-Jordan with partial
/// pivoting on the values. Derivatives ride along exactly.
pub fn dual_matrix_inverse(a: &[Dual], n: usize, stage: &str) -> Result<Vec<Dual>> {
    assert_eq!(a.len(), n * n);
    let grad_dim = a[0].dim();
    let mut work = a.to_vec();
    let mut inv: Vec<Dual> = (0..n * n)
        .map(|f| Dual::constant(if f % (n + 1) == 0 { 1.0 } else { 0.0 }, grad_dim))
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                work[r1 * n + col]
                    .v
                    .abs()
                    .total_cmp(&work[r2 * n + col].v.abs())
            })
            .unwrap();
        if work[pivot_row * n + col].v.abs() < 1e-14 {
            return Err(Error::Singular(format!(
                "{stage}: pivot {:.3e} in column {col}",
                work[pivot_row * n + col].v
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                work.swap(col * n + j, pivot_row * n + j);
                inv.swap(col * n + j, pivot_row * n + j);
            }
        }
        let pivot = work[col * n + col].clone();
        for j in 0..n {
            work[col * n + j] = work[col * n + j].div(&pivot);
            inv[col * n + j] = inv[col * n + j].div(&pivot);
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = work[row * n + col].clone();
            if factor.v == 0.0 && factor.grad.iter().all(|g| *g == 0.0) {
                continue;
            }
            for j in 0..n {
                let t = factor.mul(&work[col * n + j]);
                work[row * n + j] = work[row * n + j].sub(&t);
                let t = factor.mul(&inv[col * n + j]);
                inv[row * n + j] = inv[row * n + j].sub(&t);
            }
        }
    }
    Ok(inv)
}
