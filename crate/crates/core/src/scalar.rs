//! Scalar abstractions.
//!
//! [`Real`] is the base floating-point type (`f32` or `f64`). [`Scalar`] is
//! anything that behaves like a real number under the elementary operations
//! of the expression language: plain reals, and the forward-mode dual types
//! in [`crate::autodiff`]. Every geometric construction in this crate is
//! written once against `Scalar` and instantiated with whichever
//! differentiation depth it needs.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{FromPrimitive, ToPrimitive};

/// Arithmetic closed under the elementary functions of the expression language.
///
/// Derivative-carrying implementations propagate exact derivatives through
/// every method. `abs` uses derivative 0 at the kink.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Real: Real;

    /// Lifts a real constant (all derivative parts zero).
    fn constant(r: Self::Real) -> Self;
    /// The primal value.
    fn re(&self) -> Self::Real;
    /// True when the value and every derivative part are finite.
    fn all_finite(&self) -> bool;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    /// Four-quadrant arctangent of `self / x`.
    fn atan2(self, x: Self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, e: Self::Real) -> Self;

    fn zero() -> Self {
        Self::constant(Self::Real::lit(0.0))
    }

    fn one() -> Self {
        Self::constant(Self::Real::lit(1.0))
    }

    fn scale(self, r: Self::Real) -> Self {
        self * Self::constant(r)
    }
}

/// Base floating-point type: `f32` or `f64`.
pub trait Real: Scalar<Real = Self> + PartialOrd + FromPrimitive + ToPrimitive + Display + Default + 'static {
    const PI: Self;
    const EPSILON: Self;

    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn signum_or_zero(self) -> Self {
        let zero = Self::lit(0.0);
        if self > zero {
            Self::lit(1.0)
        } else if self < zero {
            Self::lit(-1.0)
        } else {
            zero
        }
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;

            fn constant(r: $t) -> Self {
                r
            }
            fn re(&self) -> $t {
                *self
            }
            fn all_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            fn tan(self) -> Self {
                <$t>::tan(self)
            }
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            fn atan2(self, x: Self) -> Self {
                <$t>::atan2(self, x)
            }
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
            fn powf(self, e: $t) -> Self {
                <$t>::powf(self, e)
            }
        }

        impl Real for $t {
            const PI: $t = std::f64::consts::PI as $t;
            const EPSILON: $t = <$t>::EPSILON;

            fn lit(x: f64) -> Self {
                x as $t
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    fn hypot<S: Scalar>(a: S, b: S) -> S {
        (a * a + b * b).sqrt()
    }

    #[test]
    fn generic_code_runs_on_both_widths() {
        assert_eq!(hypot(3.0f64, 4.0), 5.0);
        assert_eq!(hypot(3.0f32, 4.0), 5.0);
    }

    #[test]
    fn real_helpers() {
        assert_eq!(2.0f64.max_of(3.0), 3.0);
        assert_eq!(2.0f64.min_of(3.0), 2.0);
        assert_eq!((-0.5f64).signum_or_zero(), -1.0);
        assert_eq!(0.0f64.signum_or_zero(), 0.0);
        assert!(!f64::NAN.all_finite());
    }
}
