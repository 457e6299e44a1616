//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 'y' | 'z' | func '(' expr ')' | '(' expr ')'
//! func    := 'sin' | 'cos' | 'exp' | 'sqrt'
//! number  := digits ('.' digits)? (('e' | 'E') ('+' | '-')? digits)?
//! ```
//!
//! A bare integer literal divided by a bare integer literal folds into one
//! rational literal, and `-` directly before a bare literal folds into the
//! literal, so `-2/3` is the constant −2/3. Exponents must be constant
//! integers.

use num_bigint::BigInt;
use num_traits::{Pow, Zero};
use thiserror::Error;

use super::{as_i32, Expr, Func, Var};
use crate::scalar::Rational;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("exponent at offset {offset} is not a constant integer")]
    NonIntegerExponent { offset: usize },
}

impl ParseError {
    /// Byte offset into the input.
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::NonIntegerExponent { offset } => *offset,
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?.expr;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parsed {
    expr: Expr,
    /// A literal token, optionally negated, outside any parentheses.
    bare: bool,
    /// Literal was written as an integer.
    integer: bool,
}

impl Parsed {
    fn node(expr: Expr) -> Self {
        Self { expr, bare: false, integer: false }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: message.into() }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else if self.pos >= self.src.len() {
            Err(self.syntax(format!("expected `{}`, found end of input", c as char)))
        } else {
            Err(self.syntax(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Parsed, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?.expr;
            let (l, r) = (Box::new(lhs.expr), Box::new(rhs));
            lhs = Parsed::node(if op == b'+' { Expr::Add(l, r) } else { Expr::Sub(l, r) });
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Parsed, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            if op == b'/' && lhs.bare && lhs.integer && rhs.bare && rhs.integer && !rhs.expr.is_zero() {
                let (Some(n), Some(d)) = (lhs.expr.as_const(), rhs.expr.as_const()) else {
                    unreachable!("bare literals are constants")
                };
                lhs = Parsed::node(Expr::constant(n / d));
                continue;
            }
            let (l, r) = (Box::new(lhs.expr), Box::new(rhs.expr));
            lhs = Parsed::node(if op == b'*' { Expr::Mul(l, r) } else { Expr::Div(l, r) });
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Parsed, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(match inner.expr {
                Expr::Const(n) if inner.bare => {
                    Parsed { expr: Expr::constant(-n.exact().clone()), bare: true, integer: inner.integer }
                }
                e => Parsed::node(Expr::Neg(Box::new(e))),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Parsed, ParseError> {
        let base = self.primary()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let at = self.pos;
        let exp = self.unary()?.expr;
        let n = exp.const_value().as_ref().and_then(as_i32).ok_or(ParseError::NonIntegerExponent { offset: at })?;
        Ok(Parsed::node(Expr::Pow(Box::new(base.expr), n)))
    }

    fn primary(&mut self) -> Result<Parsed, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?.expr;
                self.expect(b')')?;
                Ok(Parsed::node(inner))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn identifier(&mut self) -> Result<Parsed, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let var = match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "z" => Some(Var::Z),
            _ => None,
        };
        if let Some(v) = var {
            return Ok(Parsed::node(Expr::Var(v)));
        }
        let Some(f) = Func::from_name(name) else {
            return Err(ParseError::UnknownIdentifier { offset: start, name: name.to_string() });
        };
        self.expect(b'(')?;
        let arg = self.expr()?.expr;
        self.expect(b')')?;
        Ok(Parsed::node(Expr::Func(f, Box::new(arg))))
    }

    fn number(&mut self) -> Result<Parsed, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            std::str::from_utf8(&p.src[s..p.pos]).expect("ascii").to_string()
        };
        let int_part = digits(self);
        let mut frac_part = String::new();
        let mut integer = true;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac_part = digits(self);
            integer = false;
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ParseError::Syntax { offset: start, message: "malformed number".into() });
        }
        let mut exponent: i64 = 0;
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            integer = false;
            self.pos += 1;
            let negative = match self.src.get(self.pos) {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let e = digits(self);
            exponent = e
                .parse::<i64>()
                .ok()
                .filter(|v| *v <= 4096)
                .ok_or_else(|| ParseError::Syntax { offset: self.pos, message: "malformed exponent".into() })?;
            if negative {
                exponent = -exponent;
            }
        }
        let mantissa: BigInt = format!("{int_part}{frac_part}").parse().unwrap_or_else(|_| BigInt::zero());
        let scale = exponent - frac_part.len() as i64;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            Rational::from_integer(mantissa * Pow::pow(&ten, scale as u64))
        } else {
            Rational::new(mantissa, Pow::pow(&ten, (-scale) as u64))
        };
        Ok(Parsed { expr: Expr::constant(value), bare: true, integer })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Expr {
        Expr::constant(Rational::new(n.into(), d.into()))
    }

    fn x() -> Expr {
        Expr::Var(Var::X)
    }

    fn y() -> Expr {
        Expr::Var(Var::Y)
    }

    #[test]
    fn grammar_examples() {
        assert_eq!(parse("x^2 - y").unwrap(), Expr::Sub(Box::new(Expr::Pow(Box::new(x()), 2)), Box::new(y())));
        let e = parse("(2/3)*x^3 + 2*y^2*x").unwrap();
        let Expr::Add(l, _) = &e else { panic!("{e:?}") };
        let Expr::Mul(c, _) = l.as_ref() else { panic!("{l:?}") };
        assert_eq!(**c, q(2, 3));
    }

    #[test]
    fn trailing_operator_reports_end_offset() {
        let err = parse("x +").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
        assert_eq!(err.offset(), 3);
    }

    #[test]
    fn identifier_and_exponent_errors() {
        assert_eq!(parse("x + w").unwrap_err(), ParseError::UnknownIdentifier { offset: 4, name: "w".into() });
        assert_eq!(parse("x^y").unwrap_err(), ParseError::NonIntegerExponent { offset: 2 });
        assert_eq!(parse("x^0.5").unwrap_err(), ParseError::NonIntegerExponent { offset: 2 });
        assert_eq!(parse("2x").unwrap_err().offset(), 1);
        assert_eq!(parse("sin x").unwrap_err().offset(), 4);
        assert_eq!(parse("(x").unwrap_err().offset(), 2);
    }

    #[test]
    fn literal_folding() {
        assert_eq!(parse("-2/3").unwrap(), q(-2, 3));
        assert_eq!(parse("1.25").unwrap(), q(5, 4));
        assert_eq!(parse("1e-3").unwrap(), q(1, 1000));
        // Decimals are not folded into ratios.
        assert_eq!(parse("1.5/3").unwrap(), Expr::Div(Box::new(q(3, 2)), Box::new(q(3, 1))));
        assert_eq!(parse("-x").unwrap(), Expr::Neg(Box::new(x())));
        assert_eq!(parse("-2^2").unwrap(), Expr::Neg(Box::new(Expr::Pow(Box::new(q(2, 1)), 2))));
        assert_eq!(parse("x^-2").unwrap(), Expr::Pow(Box::new(x()), -2));
        assert_eq!(parse("x^2^2").unwrap(), Expr::Pow(Box::new(x()), 4));
        assert_eq!(parse("1/0").unwrap(), Expr::Div(Box::new(q(1, 1)), Box::new(q(0, 1))));
    }

    #[test]
    fn print_then_parse_roundtrips() {
        for src in [
            "x^2 - y",
            "(2/3)*x^3 - y + x*y + z",
            "-(2) * -x / (3/4) - -2/3",
            "sqrt(x^2 + 1) * exp(-y) + sin(cos(z))^-3",
            "1/0 + (1)/(2) + 0.125",
            "x^2*y*z + y^3*z - x^2*y - y^3 + x*z - 2*y*z + y",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }
}
