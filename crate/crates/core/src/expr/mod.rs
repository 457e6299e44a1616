//! Symbolic expressions over `x`, `y`, `z`.
//!
//! Literals are exact rationals; `f64` evaluation uses a cached rounding.
//! [`Expr`]'s `Display` output reparses to a structurally equal tree: every
//! constant and every compound node is parenthesized.

mod diff;
mod parse;

use std::fmt;

use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::scalar::{Rational, Scalar};

pub use diff::differentiate;
pub use parse::{parse, ParseError};

/// A coordinate variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X, Var::Y, Var::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["x", "y", "z"][self.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// An exact literal with its nearest `f64`.
#[derive(Clone, Debug)]
pub struct Number {
    exact: Rational,
    approx: f64,
}

impl Number {
    pub fn new(exact: Rational) -> Self {
        let approx = exact.to_f64().unwrap_or(f64::NAN);
        Self { exact, approx }
    }

    pub fn int(n: i64) -> Self {
        Self::new(Rational::from_integer(n.into()))
    }

    pub fn exact(&self) -> &Rational {
        &self.exact
    }

    pub fn approx(&self) -> f64 {
        self.approx
    }

    fn to<T: Scalar>(&self) -> T {
        T::from_literal(&self.exact, self.approx)
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact.is_integer() {
            write!(f, "({})", self.exact.numer())
        } else {
            write!(f, "({}/{})", self.exact.numer(), self.exact.denom())
        }
    }
}

/// Expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Number),
    Var(Var),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power.
    Pow(Box<Expr>, i32),
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("square root of a negative value in `{0}`")]
    NegativeSqrt(String),
    #[error("`{0}` has no exact rational value")]
    NotRepresentable(String),
}

impl Expr {
    pub fn constant(r: Rational) -> Self {
        Expr::Const(Number::new(r))
    }

    pub fn int(n: i64) -> Self {
        Expr::Const(Number::int(n))
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(n) => Some(&n.exact),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(_) => true,
            Expr::Neg(e) | Expr::Func(_, e) | Expr::Pow(e, _) => e.contains_var(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                l.contains_var() || r.contains_var()
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(e) | Expr::Func(_, e) | Expr::Pow(e, _) => 1 + e.size(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Evaluates at `p = (x, y, z)`.
    pub fn eval<T: Scalar>(&self, p: &[T; 3]) -> Result<T, EvalError> {
        Ok(match self {
            Expr::Const(n) => n.to(),
            Expr::Var(v) => p[v.index()].clone(),
            Expr::Neg(e) => -e.eval(p)?,
            Expr::Add(l, r) => l.eval(p)? + r.eval(p)?,
            Expr::Sub(l, r) => l.eval(p)? - r.eval(p)?,
            Expr::Mul(l, r) => l.eval(p)? * r.eval(p)?,
            Expr::Div(l, r) => {
                let d = r.eval(p)?;
                if d.is_zero() {
                    return Err(EvalError::DivisionByZero(self.to_string()));
                }
                l.eval(p)? / d
            }
            Expr::Pow(b, n) => {
                b.eval(p)?.powi_checked(*n).ok_or_else(|| EvalError::DivisionByZero(self.to_string()))?
            }
            Expr::Func(f, e) => {
                let u = e.eval(p)?;
                let r = match f {
                    Func::Sin => u.checked_sin(),
                    Func::Cos => u.checked_cos(),
                    Func::Exp => u.checked_exp(),
                    Func::Sqrt => {
                        if u < T::zero() {
                            return Err(EvalError::NegativeSqrt(self.to_string()));
                        }
                        u.checked_sqrt()
                    }
                };
                r.ok_or_else(|| EvalError::NotRepresentable(self.to_string()))?
            }
        })
    }

    /// Exact value of a variable-free expression.
    pub fn const_value(&self) -> Option<Rational> {
        if self.contains_var() {
            return None;
        }
        let origin = [Rational::zero(), Rational::zero(), Rational::zero()];
        self.eval(&origin).ok()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(n) => n.fmt(f),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Func(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "({l} * {r})"),
            Expr::Div(l, r) => write!(f, "({l} / {r})"),
            Expr::Pow(b, n) if *n < 0 => write!(f, "({b}^({n}))"),
            Expr::Pow(b, n) => write!(f, "({b}^{n})"),
        }
    }
}

// Constructors that fold constants and drop additive zeros and
// multiplicative ones. No other rewriting is done.

pub fn neg(e: Expr) -> Expr {
    match e {
        Expr::Const(n) => Expr::constant(-n.exact),
        Expr::Neg(inner) => *inner,
        e => Expr::Neg(Box::new(e)),
    }
}

pub fn add(l: Expr, r: Expr) -> Expr {
    match (l.as_const(), r.as_const()) {
        (Some(a), Some(b)) => Expr::constant(a + b),
        (Some(a), _) if a.is_zero() => r,
        (_, Some(b)) if b.is_zero() => l,
        _ => Expr::Add(Box::new(l), Box::new(r)),
    }
}

pub fn sub(l: Expr, r: Expr) -> Expr {
    match (l.as_const(), r.as_const()) {
        (Some(a), Some(b)) => Expr::constant(a - b),
        (Some(a), _) if a.is_zero() => neg(r),
        (_, Some(b)) if b.is_zero() => l,
        _ => Expr::Sub(Box::new(l), Box::new(r)),
    }
}

pub fn mul(l: Expr, r: Expr) -> Expr {
    match (l.as_const(), r.as_const()) {
        (Some(a), Some(b)) => Expr::constant(a * b),
        (Some(a), _) | (_, Some(a)) if a.is_zero() => Expr::int(0),
        (Some(a), _) if a.is_one() => r,
        (_, Some(b)) if b.is_one() => l,
        (Some(a), _) if (-a).is_one() => neg(r),
        (_, Some(b)) if (-b).is_one() => neg(l),
        _ => Expr::Mul(Box::new(l), Box::new(r)),
    }
}

pub fn div(l: Expr, r: Expr) -> Expr {
    match (l.as_const(), r.as_const()) {
        (_, Some(b)) if b.is_zero() => Expr::Div(Box::new(l), Box::new(r)),
        (Some(a), Some(b)) => Expr::constant(a / b),
        (Some(a), _) if a.is_zero() => Expr::int(0),
        (_, Some(b)) if b.is_one() => l,
        _ => Expr::Div(Box::new(l), Box::new(r)),
    }
}

pub fn pow(b: Expr, n: i32) -> Expr {
    match (n, b.as_const()) {
        (0, _) => Expr::int(1),
        (1, _) => b,
        (_, Some(c)) if !(c.is_zero() && n < 0) => Expr::constant(pow_rational(c, n)),
        _ => Expr::Pow(Box::new(b), n),
    }
}

pub fn func(f: Func, e: Expr) -> Expr {
    Expr::Func(f, Box::new(e))
}

fn pow_rational(c: &Rational, n: i32) -> Rational {
    let p = num_traits::pow(c.clone(), n.unsigned_abs() as usize);
    if n < 0 {
        p.recip()
    } else {
        p
    }
}

/// The literal as an `i32`, if it is an integer in range.
fn as_i32(r: &Rational) -> Option<i32> {
    if r.is_integer() {
        r.numer().to_i32()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn evaluates_examples() {
        assert_eq!(p("x^2 - y").eval(&[1.0, 2.0, 0.0]), Ok(-1.0));
        assert_eq!(p("x*y - y").eval(&[0.0, -1.0, 0.0]), Ok(1.0));
        let err = p("1/x").eval(&[0.0, 0.0, 0.0]).unwrap_err();
        assert_eq!(err, EvalError::DivisionByZero("((1) / x)".into()));
        assert!(matches!(p("sqrt(x)").eval(&[-1.0, 0.0, 0.0]), Err(EvalError::NegativeSqrt(_))));
    }

    #[test]
    fn exact_evaluation() {
        let e = p("(2/3)*x^3 - y + x*y + z");
        let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let v = e.eval(&[q(1, 2), q(-1, 3), q(0, 1)]).unwrap();
        // 2/3 * 1/8 + 1/3 - 1/6 = 1/12 + 2/12
        assert_eq!(v, q(1, 4));
        assert!(p("sin(x)").eval(&[q(1, 1), q(0, 1), q(0, 1)]).is_err());
        assert_eq!(p("cos(x)").eval(&[q(0, 1), q(0, 1), q(0, 1)]), Ok(q(1, 1)));
    }

    #[test]
    fn f32_evaluation() {
        let v: f32 = p("x^2 + 1/4").eval(&[0.5f32, 0.0, 0.0]).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn smart_constructors_fold() {
        let x = Expr::var(Var::X);
        assert_eq!(add(Expr::int(0), x.clone()), x);
        assert_eq!(mul(Expr::int(1), x.clone()), x);
        assert_eq!(mul(x.clone(), Expr::int(0)), Expr::int(0));
        assert_eq!(mul(Expr::int(2), Expr::int(3)), Expr::int(6));
        assert_eq!(pow(x.clone(), 1), x);
        assert_eq!(neg(neg(x.clone())), x);
        assert_eq!(div(Expr::int(1), Expr::int(0)).to_string(), "((1) / (0))");
    }
}
