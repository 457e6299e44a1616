//! Symbolic partial derivatives.

use super::{add, div, func, mul, neg, pow, sub, Expr, Func, Var};

/// Exact partial derivative of `e` with respect to `v`.
pub fn differentiate(e: &Expr, v: Var) -> Expr {
    match e {
        Expr::Const(_) => Expr::int(0),
        Expr::Var(w) => Expr::int(i64::from(*w == v)),
        Expr::Neg(u) => neg(differentiate(u, v)),
        Expr::Add(l, r) => add(differentiate(l, v), differentiate(r, v)),
        Expr::Sub(l, r) => sub(differentiate(l, v), differentiate(r, v)),
        Expr::Mul(l, r) => add(mul(differentiate(l, v), (**r).clone()), mul((**l).clone(), differentiate(r, v))),
        Expr::Div(l, r) => {
            let (dl, dr) = (differentiate(l, v), differentiate(r, v));
            if dr.is_zero() {
                return div(dl, (**r).clone());
            }
            div(sub(mul(dl, (**r).clone()), mul((**l).clone(), dr)), pow((**r).clone(), 2))
        }
        Expr::Pow(b, n) => {
            let db = differentiate(b, v);
            if db.is_zero() {
                return Expr::int(0);
            }
            mul(mul(Expr::int(i64::from(*n)), pow((**b).clone(), n - 1)), db)
        }
        Expr::Func(f, u) => {
            let du = differentiate(u, v);
            if du.is_zero() {
                return Expr::int(0);
            }
            let u = (**u).clone();
            let outer = match f {
                Func::Sin => func(Func::Cos, u),
                Func::Cos => neg(func(Func::Sin, u)),
                Func::Exp => func(Func::Exp, u),
                Func::Sqrt => return div(du, mul(Expr::int(2), func(Func::Sqrt, u))),
            };
            mul(outer, du)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn d(src: &str, v: Var) -> Expr {
        differentiate(&parse(src).unwrap(), v)
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(d("x^2 - y", Var::X), parse("(2)*x").unwrap());
        assert_eq!(d("x*y - y", Var::Y), parse("x - (1)").unwrap());
        assert_eq!(d("x + y", Var::Z), Expr::int(0));
    }

    #[test]
    fn chain_rule_values() {
        let p = [0.3, -0.7, 1.1];
        let cases = [
            ("sin(x*y)", Var::X, (-0.21f64).cos() * -0.7),
            ("exp(2*z)", Var::Z, 2.0 * (2.2f64).exp()),
            ("sqrt(1 + x^2)", Var::X, 0.3 / (1.09f64).sqrt()),
            ("1/(1 + y^2)", Var::Y, 1.4 / (1.49f64 * 1.49)),
            ("cos(z)^-2", Var::Z, 2.0 * (1.1f64).sin() / (1.1f64).cos().powi(3)),
        ];
        for (src, v, want) in cases {
            let got = d(src, v).eval(&p).unwrap();
            assert!((got - want).abs() < 1e-13, "{src}: {got} vs {want}");
        }
    }
}
