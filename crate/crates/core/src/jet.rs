//! Forward-mode jets over chart coordinates.
//!
//! A [`Jet2`] carries a value together with its exact gradient and Hessian
//! with respect to the `n` chart coordinates; arithmetic follows truncated
//! Taylor expansion, so second derivatives of metric and structure fields
//! come out exact up to rounding (no differencing step anywhere).
//!
//! A [`Dual`] keeps one derivative order. Frame assembly works in `Dual`
//! arithmetic: evaluating a tensor formula over duals yields the tensor
//! together with its first partials, which is exactly what covariant
//! derivatives and Christoffel symbols of derived metrics need.

/// Value + gradient + Hessian. The Hessian is stored dense row-major
/// (`n * n`) and kept symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(v: f64, n: usize) -> Self {
        Jet2 {
            v,
            grad: vec![0.0; n],
            hess: vec![0.0; n * n],
        }
    }

    /// Seed for the `k`-th coordinate (0-based): value `v`, unit gradient.
    pub fn coordinate(v: f64, n: usize, k: usize) -> Self {
        let mut j = Jet2::constant(v, n);
        j.grad[k] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            grad: zip_with(&self.grad, &o.grad, |a, b| a + b),
            hess: zip_with(&self.hess, &o.hess, |a, b| a + b),
        }
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            v: self.v - o.v,
            grad: zip_with(&self.grad, &o.grad, |a, b| a - b),
            hess: zip_with(&self.hess, &o.hess, |a, b| a - b),
        }
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 {
            v: -self.v,
            grad: self.grad.iter().map(|a| -a).collect(),
            hess: self.hess.iter().map(|a| -a).collect(),
        }
    }

    /// (fg)'' = (f''g + fg'') + (f'g' + g'f'), grouped so that swapping the
    /// operands reorders only commutative IEEE additions and the product
    /// stays bitwise symmetric.
    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = (self.hess[i * n + j] * o.v + o.hess[i * n + j] * self.v)
                    + (self.grad[i] * o.grad[j] + self.grad[j] * o.grad[i]);
            }
        }
        Jet2 {
            v: self.v * o.v,
            grad: self
                .grad
                .iter()
                .zip(&o.grad)
                .map(|(a, b)| a * o.v + self.v * b)
                .collect(),
            hess,
        }
    }

    pub fn div(&self, o: &Jet2) -> Jet2 {
        self.mul(&o.recip())
    }

    pub fn recip(&self) -> Jet2 {
        let v = self.v;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet2 {
        let v = self.v;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sin(&self) -> Jet2 {
        self.chain(self.v.sin(), self.v.cos(), -self.v.sin())
    }

    pub fn cos(&self) -> Jet2 {
        self.chain(self.v.cos(), -self.v.sin(), -self.v.cos())
    }

    pub fn sqrt(&self) -> Jet2 {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    /// Rational power `p/q`. The caller is responsible for domain checks
    /// (fractional exponents need a positive base, negative exponents a
    /// nonzero one).
    pub fn pow_rational(&self, p: i64, q: i64) -> Jet2 {
        let (u, du, ddu) = pow_derivatives(self.v, p, q);
        self.chain(u, du, ddu)
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            v: self.v * c,
            grad: self.grad.iter().map(|a| a * c).collect(),
            hess: self.hess.iter().map(|a| a * c).collect(),
        }
    }

    /// Chain rule for a scalar function `u(f)` with derivatives `du`, `ddu`
    /// evaluated at the current value.
    fn chain(&self, u: f64, du: f64, ddu: f64) -> Jet2 {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = du * self.hess[i * n + j] + ddu * self.grad[i] * self.grad[j];
            }
        }
        Jet2 {
            v: u,
            grad: self.grad.iter().map(|a| du * a).collect(),
            hess,
        }
    }

    /// The value together with its gradient, as a first-order jet.
    pub fn value_dual(&self) -> Dual {
        Dual {
            v: self.v,
            grad: self.grad.clone(),
        }
    }

    /// The `k`-th first partial together with its gradient (the `k`-th
    /// Hessian row), as a first-order jet.
    pub fn partial_dual(&self, k: usize) -> Dual {
        let n = self.dim();
        Dual {
            v: self.grad[k],
            grad: self.hess[k * n..(k + 1) * n].to_vec(),
        }
    }
}

/// Value + gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub grad: Vec<f64>,
}

impl Dual {
    pub fn constant(v: f64, n: usize) -> Self {
        Dual {
            v,
            grad: vec![0.0; n],
        }
    }

    pub fn zero(n: usize) -> Self {
        Dual::constant(0.0, n)
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn add(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            grad: zip_with(&self.grad, &o.grad, |a, b| a + b),
        }
    }

    pub fn sub(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            grad: zip_with(&self.grad, &o.grad, |a, b| a - b),
        }
    }

    pub fn neg(&self) -> Dual {
        Dual {
            v: -self.v,
            grad: self.grad.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            grad: self
                .grad
                .iter()
                .zip(&o.grad)
                .map(|(a, b)| a * o.v + self.v * b)
                .collect(),
        }
    }

    pub fn div(&self, o: &Dual) -> Dual {
        let v = self.v / o.v;
        Dual {
            v,
            grad: self
                .grad
                .iter()
                .zip(&o.grad)
                .map(|(a, b)| (a - v * b) / o.v)
                .collect(),
        }
    }

    pub fn recip(&self) -> Dual {
        self.chain(1.0 / self.v, -1.0 / (self.v * self.v))
    }

    pub fn sqrt(&self) -> Dual {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }

    pub fn scale(&self, c: f64) -> Dual {
        Dual {
            v: self.v * c,
            grad: self.grad.iter().map(|a| a * c).collect(),
        }
    }

    /// `self += a * b`, the accumulation step used all over frame assembly.
    pub fn acc_mul(&mut self, a: &Dual, b: &Dual) {
        self.v += a.v * b.v;
        for (g, (ga, gb)) in self.grad.iter_mut().zip(a.grad.iter().zip(&b.grad)) {
            *g += ga * b.v + a.v * gb;
        }
    }

    /// `self += c * a * b` for a plain scalar `c`.
    pub fn acc_mul_scaled(&mut self, c: f64, a: &Dual, b: &Dual) {
        self.v += c * a.v * b.v;
        for (g, (ga, gb)) in self.grad.iter_mut().zip(a.grad.iter().zip(&b.grad)) {
            *g += c * (ga * b.v + a.v * gb);
        }
    }

    fn chain(&self, u: f64, du: f64) -> Dual {
        Dual {
            v: u,
            grad: self.grad.iter().map(|a| du * a).collect(),
        }
    }
}

fn zip_with(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

/// Value and first two derivatives of `x^(p/q)` at `x = v`.
fn pow_derivatives(v: f64, p: i64, q: i64) -> (f64, f64, f64) {
    let r = p as f64 / q as f64;
    // Vanishing coefficients short-circuit before the power is formed, so
    // x^1 at zero does not turn 0 * (1/x) into a NaN.
    let c1 = r;
    let c2 = r * (r - 1.0);
    if q == 1 {
        // Integer exponents keep exact semantics at zero and for negative
        // bases; powi with 0^0 == 1 makes the generic formula hold there.
        let u = powi(v, p);
        let du = if c1 == 0.0 { 0.0 } else { c1 * powi(v, p - 1) };
        let ddu = if c2 == 0.0 { 0.0 } else { c2 * powi(v, p - 2) };
        (u, du, ddu)
    } else {
        let u = v.powf(r);
        let du = if c1 == 0.0 { 0.0 } else { c1 * v.powf(r - 1.0) };
        let ddu = if c2 == 0.0 { 0.0 } else { c2 * v.powf(r - 2.0) };
        (u, du, ddu)
    }
}

fn powi(v: f64, p: i64) -> f64 {
    if p >= i32::MIN as i64 && p <= i32::MAX as i64 {
        v.powi(p as i32)
    } else {
        v.powf(p as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_fn(x: &[f64]) -> f64 {
        // exp(-2 x0) * sin(x1) + x0^2 / (3 + cos(x2)) + sqrt(2 + x1^2)
        (-2.0 * x[0]).exp() * x[1].sin() + x[0] * x[0] / (3.0 + x[2].cos())
            + (2.0 + x[1] * x[1]).sqrt()
    }

    fn sample_jet(x: &[f64]) -> Jet2 {
        let n = x.len();
        let x0 = Jet2::coordinate(x[0], n, 0);
        let x1 = Jet2::coordinate(x[1], n, 1);
        let x2 = Jet2::coordinate(x[2], n, 2);
        let t1 = x0.scale(-2.0).exp().mul(&x1.sin());
        let t2 = x0.mul(&x0).div(&x2.cos().add(&Jet2::constant(3.0, n)));
        let t3 = x1.mul(&x1).add(&Jet2::constant(2.0, n)).sqrt();
        t1.add(&t2).add(&t3)
    }

    #[test]
    fn gradient_matches_central_differences() {
        let x = [0.4, -0.7, 1.3];
        let jet = sample_jet(&x);
        let h = 1e-5;
        for k in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (sample_fn(&xp) - sample_fn(&xm)) / (2.0 * h);
            let rel = (jet.grad[k] - fd).abs() / fd.abs().max(1.0);
            assert!(rel < 1e-8, "grad[{k}]: jet {} vs fd {}", jet.grad[k], fd);
        }
    }

    #[test]
    fn hessian_matches_central_differences() {
        let x = [0.4, -0.7, 1.3];
        let jet = sample_jet(&x);
        let h = 1e-4;
        for i in 0..3 {
            for j in 0..3 {
                let mut xpp = x;
                let mut xpm = x;
                let mut xmp = x;
                let mut xmm = x;
                xpp[i] += h;
                xpp[j] += h;
                xpm[i] += h;
                xpm[j] -= h;
                xmp[i] -= h;
                xmp[j] += h;
                xmm[i] -= h;
                xmm[j] -= h;
                let fd = (sample_fn(&xpp) - sample_fn(&xpm) - sample_fn(&xmp)
                    + sample_fn(&xmm))
                    / (4.0 * h * h);
                let rel = (jet.hess_at(i, j) - fd).abs() / fd.abs().max(1.0);
                assert!(rel < 1e-6, "hess[{i}][{j}]: jet {} vs fd {}", jet.hess_at(i, j), fd);
            }
        }
    }

    #[test]
    fn hessian_is_symmetric() {
        let jet = sample_jet(&[0.9, 0.2, -1.1]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(jet.hess_at(i, j), jet.hess_at(j, i));
            }
        }
    }

    #[test]
    fn add_and_mul_commute_bitwise() {
        let a = sample_jet(&[0.3, 1.0, -0.2]);
        let b = sample_jet(&[1.7, -0.4, 0.8]).recip();
        assert_eq!(a.add(&b), b.add(&a));
        assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn integer_powers_at_zero() {
        let x = Jet2::coordinate(0.0, 1, 0);
        let sq = x.pow_rational(2, 1);
        assert_eq!(sq.v, 0.0);
        assert_eq!(sq.grad[0], 0.0);
        assert_eq!(sq.hess_at(0, 0), 2.0);
        let lin = x.pow_rational(1, 1);
        assert_eq!(lin.grad[0], 1.0);
        assert_eq!(lin.hess_at(0, 0), 0.0);
    }

    #[test]
    fn rational_power_derivatives() {
        let x = Jet2::coordinate(2.0, 1, 0);
        let j = x.pow_rational(-3, 2); // x^(-3/2)
        let r = -1.5f64;
        assert!((j.v - 2.0f64.powf(r)).abs() < 1e-15);
        assert!((j.grad[0] - r * 2.0f64.powf(r - 1.0)).abs() < 1e-15);
        assert!((j.hess_at(0, 0) - r * (r - 1.0) * 2.0f64.powf(r - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn dual_tracks_jet_first_order() {
        let x = [0.4, -0.7, 1.3];
        let jet = sample_jet(&x);
        let d = jet.value_dual();
        assert_eq!(d.v, jet.v);
        assert_eq!(d.grad, jet.grad);
        let p1 = jet.partial_dual(1);
        assert_eq!(p1.v, jet.grad[1]);
        assert_eq!(p1.grad[2], jet.hess_at(1, 2));
    }

    #[test]
    fn dual_quotient_rule() {
        let n = 2;
        let a = Dual { v: 3.0, grad: vec![1.0, 2.0] };
        let b = Dual { v: 2.0, grad: vec![-1.0, 0.5] };
        let q = a.div(&b);
        // (a/b)' = (a'b - ab') / b^2
        assert!((q.v - 1.5).abs() < 1e-15);
        assert!((q.grad[0] - (1.0 * 2.0 - 3.0 * -1.0) / 4.0).abs() < 1e-15);
        assert!((q.grad[1] - (2.0 * 2.0 - 3.0 * 0.5) / 4.0).abs() < 1e-15);
        let _ = n;
    }
}
