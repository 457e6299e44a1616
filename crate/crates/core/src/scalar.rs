//! Scalar types the symbolic layer can evaluate into.
//!
//! Expression evaluation and the chart coefficient formulas are generic over
//! [`Scalar`], so the same code runs in `f32`, `f64` and exact rationals.
//! Transcendental functions return `None` when the result is not representable
//! in the type (an irrational value in [`Rational`]).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, Num, One, ToPrimitive, Zero};

/// Exact rational numbers.
pub type Rational = BigRational;

/// Values an [`crate::expr::Expr`] can be evaluated into.
pub trait Scalar: Num + Neg<Output = Self> + Clone + PartialOrd + Debug + Send + Sync {
    /// Converts an exact literal, rounding if the type is inexact.
    fn from_rational(r: &Rational) -> Self;

    /// Converts a literal whose nearest `f64` is already known.
    fn from_literal(exact: &Rational, _approx: f64) -> Self {
        Self::from_rational(exact)
    }

    fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn approx_f64(&self) -> f64;

    fn magnitude(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn checked_sqrt(&self) -> Option<Self>;
    fn checked_sin(&self) -> Option<Self>;
    fn checked_cos(&self) -> Option<Self>;
    fn checked_exp(&self) -> Option<Self>;

    /// Integer power by repeated squaring; `None` for `0^n` with `n < 0`.
    fn powi_checked(&self, n: i32) -> Option<Self> {
        let mut base = if n < 0 {
            if self.is_zero() {
                return None;
            }
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        Some(acc)
    }
}

/// Floating-point scalars used by the numerical drivers.
pub trait Real: Scalar + Float + Copy + Default + 'static {}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_rational(r: &Rational) -> Self {
                // Ratio<BigInt>::to_f64 rounds correctly for huge numerators.
                r.to_f64().unwrap_or(f64::NAN) as $t
            }
            fn from_literal(_exact: &Rational, approx: f64) -> Self {
                approx as $t
            }
            fn from_int(n: i64) -> Self {
                n as $t
            }
            fn approx_f64(&self) -> f64 {
                *self as f64
            }
            fn magnitude(&self) -> Self {
                self.abs()
            }
            fn checked_sqrt(&self) -> Option<Self> {
                (*self >= 0.0).then(|| self.sqrt())
            }
            fn checked_sin(&self) -> Option<Self> {
                Some(self.sin())
            }
            fn checked_cos(&self) -> Option<Self> {
                Some(self.cos())
            }
            fn checked_exp(&self) -> Option<Self> {
                Some(self.exp())
            }
            fn powi_checked(&self, n: i32) -> Option<Self> {
                if n < 0 && *self == 0.0 {
                    None
                } else {
                    Some(self.powi(n))
                }
            }
        }
        impl Real for $t {}
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn checked_sqrt(&self) -> Option<Self> {
        if *self < Self::zero() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Rational::new(n, d))
    }
    fn checked_sin(&self) -> Option<Self> {
        self.is_zero().then(Self::zero)
    }
    fn checked_cos(&self) -> Option<Self> {
        self.is_zero().then(Self::one)
    }
    fn checked_exp(&self) -> Option<Self> {
        self.is_zero().then(Self::one)
    }
}

/// Ring-with-division operations shared by scalars and jets, so closed-form
/// formulas can be written once and evaluated at any derivative order.
pub trait Arith:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn half(self) -> Self;
}

impl<T: Scalar> Arith for T {
    fn half(self) -> Self {
        self / (T::one() + T::one())
    }
}
