//! Truncated Taylor jets in three variables.
//!
//! The symbolic derivative table supplies every partial of ξ; jets only carry
//! the chain rule through the chart formulas, so the gradient and Hessian of
//! e, f, g and K come out of the same expression that defines them.

// Products and quotients of jets expand by the Leibniz rule.
#![allow(clippy::suspicious_arithmetic_impl)]

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{Arith, Scalar};

/// Value and gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Grad<T> {
    pub v: T,
    pub g: [T; 3],
}

/// Value, gradient and Hessian (symmetric).
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T> {
    pub v: T,
    pub g: [T; 3],
    pub h: [[T; 3]; 3],
}

impl<T: Scalar> Grad<T> {
    pub fn constant(v: T) -> Self {
        Self { v, g: [T::zero(), T::zero(), T::zero()] }
    }
}

impl<T: Scalar> Jet<T> {
    pub fn constant(v: T) -> Self {
        let z = || [T::zero(), T::zero(), T::zero()];
        Self { v, g: z(), h: [z(), z(), z()] }
    }

    fn recip(&self) -> Self {
        let r = T::one() / self.v.clone();
        let r2 = r.clone() * r.clone();
        let two_r3 = (r2.clone() * r.clone()) * T::from_int(2);
        let g = std::array::from_fn(|i| -(self.g[i].clone() * r2.clone()));
        let h = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                two_r3.clone() * self.g[i].clone() * self.g[j].clone() - self.h[i][j].clone() * r2.clone()
            })
        });
        Self { v: r, g, h }
    }
}

impl<T: Scalar> Add for Grad<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let [a, b, c] = self.g;
        let [d, e, f] = o.g;
        Self { v: self.v + o.v, g: [a + d, b + e, c + f] }
    }
}

impl<T: Scalar> Sub for Grad<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Scalar> Neg for Grad<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, g: self.g.map(|x| -x) }
    }
}

impl<T: Scalar> Mul for Grad<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let g = std::array::from_fn(|i| self.v.clone() * o.g[i].clone() + o.v.clone() * self.g[i].clone());
        Self { v: self.v * o.v, g }
    }
}

impl<T: Scalar> Div for Grad<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v.clone() / o.v.clone();
        let g = std::array::from_fn(|i| (self.g[i].clone() - q.clone() * o.g[i].clone()) / o.v.clone());
        Self { v: q, g }
    }
}

impl<T: Scalar> Arith for Grad<T> {
    fn half(self) -> Self {
        let two = T::from_int(2);
        Self { v: self.v / two.clone(), g: self.g.map(|x| x / two.clone()) }
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            g: std::array::from_fn(|i| self.g[i].clone() + o.g[i].clone()),
            h: std::array::from_fn(|i| std::array::from_fn(|j| self.h[i][j].clone() + o.h[i][j].clone())),
        }
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, g: self.g.map(|x| -x), h: self.h.map(|r| r.map(|x| -x)) }
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self, &o);
        Self {
            v: a.v.clone() * b.v.clone(),
            g: std::array::from_fn(|i| a.v.clone() * b.g[i].clone() + b.v.clone() * a.g[i].clone()),
            h: std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    a.v.clone() * b.h[i][j].clone()
                        + b.v.clone() * a.h[i][j].clone()
                        + a.g[i].clone() * b.g[j].clone()
                        + a.g[j].clone() * b.g[i].clone()
                })
            }),
        }
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Scalar> Arith for Jet<T> {
    fn half(self) -> Self {
        self * Jet::constant(T::one() / T::from_int(2))
    }
}
