//! Forward-mode differentiation.
//!
//! [`Dual`] carries one directional derivative. [`HyperDual`] carries two
//! first-order parts and their mixed second-order part, so a single pass
//! seeded on directions `(α, β)` yields `∂_α f`, `∂_β f` and `∂_α∂_β f`
//! without subtractive cancellation. [`evaluate_jet2`] runs the
//! `n(n+1)/2` paired passes and assembles a [`Jet2`].
//!
//! [`finite_difference_jet2`] is an independent central-difference oracle
//! with `O(step²)` truncation error.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{Real, Scalar};

/// A function of chart coordinates evaluable on any [`Scalar`].
pub trait CoordinateFn<T: Real> {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;

    /// Rejects points outside the function's declared domain.
    fn check_domain(&self, _x: &[T]) -> Result<()> {
        Ok(())
    }

    fn eval<S: Scalar<Real = T>>(&self, x: &[S]) -> Result<Vec<S>>;
}

// ---------------------------------------------------------------------------
// Dual

/// `re + eps·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    pub fn variable(re: T) -> Self {
        Dual { re, eps: T::lit(1.0) }
    }

    fn chain(self, f: T, df: T) -> Self {
        Dual {
            re: f,
            eps: df * self.eps,
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual::new(q, (self.eps - q * o.eps) / o.re)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Real> Scalar for Dual<T> {
    type Real = T;

    fn constant(r: T) -> Self {
        Dual::new(r, T::lit(0.0))
    }
    fn re(&self) -> T {
        self.re
    }
    fn all_finite(&self) -> bool {
        self.re.all_finite() && self.eps.all_finite()
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, T::lit(1.0) + t * t)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::lit(1.0) / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::lit(0.5) / s)
    }
    fn abs(self) -> Self {
        self.chain(self.re.abs(), self.re.signum_or_zero())
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = x.re * x.re + self.re * self.re;
        Dual::new(self.re.atan2(x.re), (x.re * self.eps - self.re * x.eps) / r2)
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => self.chain(self.re.powi(n), T::lit(n as f64) * self.re.powi(n - 1)),
        }
    }
    fn powf(self, e: T) -> Self {
        self.chain(self.re.powf(e), e * self.re.powf(e - T::lit(1.0)))
    }
}

// ---------------------------------------------------------------------------
// HyperDual

/// `re + e1·ε₁ + e2·ε₂ + e12·ε₁ε₂` with `ε₁² = ε₂² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HyperDual<T> {
    pub re: T,
    pub e1: T,
    pub e2: T,
    pub e12: T,
}

impl<T: Real> HyperDual<T> {
    pub fn new(re: T, e1: T, e2: T, e12: T) -> Self {
        HyperDual { re, e1, e2, e12 }
    }

    /// Coordinate `x_k` seeded for the pass on directions `(a, b)`.
    pub fn seeded(re: T, k: usize, a: usize, b: usize) -> Self {
        let one = T::lit(1.0);
        let zero = T::lit(0.0);
        HyperDual::new(
            re,
            if k == a { one } else { zero },
            if k == b { one } else { zero },
            zero,
        )
    }

    /// Applies `f` with value `f0`, first derivative `f1`, second `f2`.
    fn chain(self, f0: T, f1: T, f2: T) -> Self {
        HyperDual {
            re: f0,
            e1: f1 * self.e1,
            e2: f1 * self.e2,
            e12: f1 * self.e12 + f2 * self.e1 * self.e2,
        }
    }
}

impl<T: Real> Add for HyperDual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        HyperDual::new(self.re + o.re, self.e1 + o.e1, self.e2 + o.e2, self.e12 + o.e12)
    }
}

impl<T: Real> Sub for HyperDual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        HyperDual::new(self.re - o.re, self.e1 - o.e1, self.e2 - o.e2, self.e12 - o.e12)
    }
}

impl<T: Real> Mul for HyperDual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        HyperDual::new(
            self.re * o.re,
            self.re * o.e1 + self.e1 * o.re,
            self.re * o.e2 + self.e2 * o.re,
            self.re * o.e12 + self.e1 * o.e2 + self.e2 * o.e1 + self.e12 * o.re,
        )
    }
}

impl<T: Real> Div for HyperDual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.re.powi(-1);
        let recip = o.chain(inv, -inv * inv, T::lit(2.0) * inv * inv * inv);
        // Keep the value bit-identical to plain division.
        HyperDual {
            re: self.re / o.re,
            ..self * recip
        }
    }
}

impl<T: Real> Neg for HyperDual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        HyperDual::new(-self.re, -self.e1, -self.e2, -self.e12)
    }
}

impl<T: Real> Scalar for HyperDual<T> {
    type Real = T;

    fn constant(r: T) -> Self {
        let z = T::lit(0.0);
        HyperDual::new(r, z, z, z)
    }
    fn re(&self) -> T {
        self.re
    }
    fn all_finite(&self) -> bool {
        self.re.all_finite() && self.e1.all_finite() && self.e2.all_finite() && self.e12.all_finite()
    }
    fn sin(self) -> Self {
        let (s, c) = (self.re.sin(), self.re.cos());
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = (self.re.sin(), self.re.cos());
        self.chain(c, -s, -c)
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        let sec2 = T::lit(1.0) + t * t;
        self.chain(t, sec2, T::lit(2.0) * t * sec2)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let inv = T::lit(1.0) / self.re;
        self.chain(self.re.ln(), inv, -inv * inv)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        let d1 = T::lit(0.5) / s;
        self.chain(s, d1, -d1 / (T::lit(2.0) * self.re))
    }
    fn abs(self) -> Self {
        self.chain(self.re.abs(), self.re.signum_or_zero(), T::lit(0.0))
    }
    fn atan2(self, x: Self) -> Self {
        // f(y, x) = atan2(y, x); a = y (self), b = x.
        let (y, xr) = (self.re, x.re);
        let r2 = xr * xr + y * y;
        let r4 = r2 * r2;
        let two = T::lit(2.0);
        let fa = xr / r2;
        let fb = -y / r2;
        let faa = -two * xr * y / r4;
        let fbb = two * xr * y / r4;
        let fab = (y * y - xr * xr) / r4;
        HyperDual {
            re: y.atan2(xr),
            e1: fa * self.e1 + fb * x.e1,
            e2: fa * self.e2 + fb * x.e2,
            e12: fa * self.e12
                + fb * x.e12
                + faa * self.e1 * self.e2
                + fab * (self.e1 * x.e2 + self.e2 * x.e1)
                + fbb * x.e1 * x.e2,
        }
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => {
                let nf = T::lit(n as f64);
                self.chain(
                    self.re.powi(n),
                    nf * self.re.powi(n - 1),
                    nf * T::lit((n - 1) as f64) * self.re.powi(n - 2),
                )
            }
        }
    }
    fn powf(self, e: T) -> Self {
        let one = T::lit(1.0);
        self.chain(
            self.re.powf(e),
            e * self.re.powf(e - one),
            e * (e - one) * self.re.powf(e - T::lit(2.0)),
        )
    }
}

// ---------------------------------------------------------------------------
// Jet2

/// Value, gradient and Hessian of a scalar function at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2<T> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Mat<T>,
}

impl<T: Real> Jet2<T> {
    pub fn constant(value: T, n: usize) -> Self {
        Jet2 {
            value,
            grad: vec![T::lit(0.0); n],
            hess: Mat::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// Leibniz rule: jet of the product of the two underlying functions.
    pub fn product(&self, other: &Jet2<T>) -> Jet2<T> {
        let n = self.dim();
        let (a, b) = (self, other);
        Jet2 {
            value: a.value * b.value,
            grad: (0..n).map(|i| a.value * b.grad[i] + b.value * a.grad[i]).collect(),
            hess: Mat::from_fn(n, n, |i, j| {
                a.value * b.hess[(i, j)] + b.value * a.hess[(i, j)] + a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i]
            }),
        }
    }

    /// Jet of `φ ∘ f` given `φ(v)`, `φ'(v)`, `φ''(v)` at `v = f(x)`.
    pub fn chain(&self, phi: T, dphi: T, ddphi: T) -> Jet2<T> {
        let n = self.dim();
        Jet2 {
            value: phi,
            grad: self.grad.iter().map(|&g| dphi * g).collect(),
            hess: Mat::from_fn(n, n, |i, j| {
                dphi * self.hess[(i, j)] + ddphi * self.grad[i] * self.grad[j]
            }),
        }
    }

    /// Largest entrywise difference, relative where the entry of `other`
    /// exceeds 1 in magnitude.
    pub fn max_scaled_diff(&self, other: &Jet2<T>) -> T {
        let one = T::lit(1.0);
        let d = |a: T, b: T| (a - b).abs() / b.abs().max_of(one);
        let mut m = d(self.value, other.value);
        for (&a, &b) in self.grad.iter().zip(&other.grad) {
            m = m.max_of(d(a, b));
        }
        for (&a, &b) in self.hess.as_slice().iter().zip(other.hess.as_slice()) {
            m = m.max_of(d(a, b));
        }
        m
    }

    /// Largest absolute difference over value, gradient and Hessian entries.
    pub fn max_abs_diff(&self, other: &Jet2<T>) -> T {
        let g = self
            .grad
            .iter()
            .zip(&other.grad)
            .fold(T::lit(0.0), |m, (&a, &b)| m.max_of((a - b).abs()));
        (self.value - other.value)
            .abs()
            .max_of(g)
            .max_of(self.hess.max_abs_diff(&other.hess))
    }
}

/// Jets of every output component of `f` at `x`.
///
/// Runs one [`HyperDual`] pass per unordered direction pair; each pass
/// evaluates all components at once.
pub fn evaluate_jets2<T: Real, F: CoordinateFn<T> + ?Sized>(f: &F, x: &[T]) -> Result<Vec<Jet2<T>>> {
    let n = f.input_dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            what: "jet evaluation point".into(),
            expected: n,
            found: x.len(),
        });
    }
    f.check_domain(x)?;
    let m = f.output_dim();
    if n == 0 {
        let v = f.eval::<T>(x)?;
        return Ok(v.into_iter().map(|value| Jet2::constant(value, 0)).collect());
    }
    let mut jets: Vec<Jet2<T>> = (0..m).map(|_| Jet2::constant(T::lit(0.0), n)).collect();
    let mut seeds = Vec::with_capacity(n);
    for a in 0..n {
        for b in a..n {
            seeds.clear();
            seeds.extend((0..n).map(|k| HyperDual::seeded(x[k], k, a, b)));
            let out = f.eval(&seeds)?;
            for (jet, h) in jets.iter_mut().zip(&out) {
                if !h.all_finite() {
                    return Err(Error::NonFinite {
                        what: "derivative".into(),
                        point: x.iter().map(|v| v.to_f64_lossy()).collect(),
                    });
                }
                if a == 0 && b == 0 {
                    jet.value = h.re;
                }
                if a == b {
                    jet.grad[a] = h.e1;
                }
                jet.hess[(a, b)] = h.e12;
                jet.hess[(b, a)] = h.e12;
            }
        }
    }
    Ok(jets)
}

/// Jet of a scalar-valued coordinate function.
pub fn evaluate_jet2<T: Real, F: CoordinateFn<T> + ?Sized>(f: &F, x: &[T]) -> Result<Jet2<T>> {
    if f.output_dim() != 1 {
        return Err(Error::DimensionMismatch {
            what: "scalar function outputs".into(),
            expected: 1,
            found: f.output_dim(),
        });
    }
    Ok(evaluate_jets2(f, x)?.remove(0))
}

/// Finite-difference step sizes for gradient and Hessian estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    pub grad: f64,
    pub hess: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps { grad: 1e-4, hess: 1e-3 }
    }
}

/// Central-difference jet with a single step for both orders.
pub fn finite_difference_jet2<T: Real, F: CoordinateFn<T> + ?Sized>(f: &F, x: &[T], step: T) -> Result<Jet2<T>> {
    let s = step.to_f64_lossy();
    finite_difference_jet2_with(f, x, FdSteps { grad: s, hess: s })
}

/// Central-difference jet of the first output of `f`.
///
/// Gradient and Hessian use `O(step²)` stencils: `(f₊ − f₋)/2h`,
/// `(f₊ − 2f + f₋)/h²` on the diagonal and the four-point cross stencil off it.
pub fn finite_difference_jet2_with<T: Real, F: CoordinateFn<T> + ?Sized>(
    f: &F,
    x: &[T],
    steps: FdSteps,
) -> Result<Jet2<T>> {
    if !(steps.grad > 0.0) || !(steps.hess > 0.0) {
        return Err(Error::arg("finite-difference step must be positive"));
    }
    let n = f.input_dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            what: "finite-difference point".into(),
            expected: n,
            found: x.len(),
        });
    }
    let eval = |p: &[T]| -> Result<T> {
        f.check_domain(p)?;
        Ok(f.eval::<T>(p)?[0])
    };
    let shifted = |moves: &[(usize, T)]| -> Vec<T> {
        let mut p = x.to_vec();
        for &(k, d) in moves {
            p[k] = p[k] + d;
        }
        p
    };
    let f0 = eval(x)?;
    let hg = T::lit(steps.grad);
    let hh = T::lit(steps.hess);
    let two = T::lit(2.0);
    let mut grad = vec![T::lit(0.0); n];
    let mut hess = Mat::zeros(n, n);
    for a in 0..n {
        let fp = eval(&shifted(&[(a, hg)]))?;
        let fm = eval(&shifted(&[(a, -hg)]))?;
        grad[a] = (fp - fm) / (two * hg);

        let fp = eval(&shifted(&[(a, hh)]))?;
        let fm = eval(&shifted(&[(a, -hh)]))?;
        hess[(a, a)] = (fp - two * f0 + fm) / (hh * hh);
        for b in 0..a {
            let fpp = eval(&shifted(&[(a, hh), (b, hh)]))?;
            let fpm = eval(&shifted(&[(a, hh), (b, -hh)]))?;
            let fmp = eval(&shifted(&[(a, -hh), (b, hh)]))?;
            let fmm = eval(&shifted(&[(a, -hh), (b, -hh)]))?;
            let v = (fpp - fpm - fmp + fmm) / (T::lit(4.0) * hh * hh);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    Ok(Jet2 { value: f0, grad, hess })
}

/// Central-difference jet with the default steps (1e-4 gradient, 1e-3 Hessian).
pub fn finite_difference_jet2_default<T: Real, F: CoordinateFn<T> + ?Sized>(f: &F, x: &[T]) -> Result<Jet2<T>> {
    finite_difference_jet2_with(f, x, FdSteps::default())
}
