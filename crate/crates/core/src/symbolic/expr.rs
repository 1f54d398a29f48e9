//! Observable expressions: a small arithmetic language over the chart
//! variables with exact rational literals.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' integer)?
//! base   := identifier | number | '(' expr ')'
//! ```
//!
//! Numbers are unsigned integers or decimals (`0.25` is the exact rational
//! 1/4). Exponents are integers and may carry a leading minus sign.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::Var;
use super::ratfun::RatFun;
use super::SymbolicError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ident {
    X,
    Y,
    Px,
    Py,
    T,
    Chi,
    H,
    L,
    M,
    Hbar,
}

impl Ident {
    pub const ALL: [Ident; 10] = [
        Ident::X,
        Ident::Y,
        Ident::Px,
        Ident::Py,
        Ident::T,
        Ident::Chi,
        Ident::H,
        Ident::L,
        Ident::M,
        Ident::Hbar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ident::X => "x",
            Ident::Y => "y",
            Ident::Px => "px",
            Ident::Py => "py",
            Ident::T => "T",
            Ident::Chi => "chi",
            Ident::H => "H",
            Ident::L => "L",
            Ident::M => "M",
            Ident::Hbar => "hbar",
        }
    }

    pub fn from_name(s: &str) -> Result<Ident, SymbolicError> {
        Ident::ALL
            .iter()
            .copied()
            .find(|i| i.name() == s)
            .ok_or_else(|| SymbolicError::UnknownVariable(s.to_string()))
    }

    pub fn ring_var(self) -> Option<Var> {
        Some(match self {
            Ident::X => Var::X,
            Ident::Y => Var::Y,
            Ident::Px => Var::Px,
            Ident::Py => Var::Py,
            Ident::T => Var::T,
            Ident::Chi => Var::Chi,
            Ident::H => Var::H,
            Ident::L => Var::L,
            Ident::M => Var::M,
            Ident::Hbar => return None,
        })
    }
}

/// Numeric types an expression can be evaluated in (plain floats, dual
/// numbers for derivatives, ...).
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn powi(&self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(BigRational),
    Var(Ident),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(i: Ident) -> Expr {
        Expr::Var(i)
    }

    pub fn parse(text: &str) -> Result<Expr, SymbolicError> {
        parse_observable(text)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) | Expr::Pow(..) => 3,
            Expr::Num(_) | Expr::Var(_) => 4,
        }
    }

    pub fn mentions(&self, id: Ident) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == id,
            Expr::Neg(a) | Expr::Pow(a, _) => a.mentions(id),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.mentions(id) || b.mentions(id)
            }
        }
    }

    /// Evaluate with a lookup supplying values for the identifiers used.
    pub fn eval_with<S: Scalar>(
        &self,
        lookup: &dyn Fn(Ident) -> Option<S>,
    ) -> Result<S, SymbolicError> {
        Ok(match self {
            Expr::Num(c) => S::from_f64(c.to_f64().unwrap_or(f64::NAN)),
            Expr::Var(i) => lookup(*i).ok_or_else(|| SymbolicError::Unbound(i.name().into()))?,
            Expr::Neg(a) => -a.eval_with(lookup)?,
            Expr::Add(a, b) => a.eval_with(lookup)? + b.eval_with(lookup)?,
            Expr::Sub(a, b) => a.eval_with(lookup)? - b.eval_with(lookup)?,
            Expr::Mul(a, b) => a.eval_with(lookup)? * b.eval_with(lookup)?,
            Expr::Div(a, b) => a.eval_with(lookup)? / b.eval_with(lookup)?,
            Expr::Pow(a, n) => a.eval_with(lookup)?.powi(*n),
        })
    }

    /// Evaluate at a point given as `(identifier, value)` pairs.
    pub fn eval(&self, point: &[(Ident, f64)]) -> Result<f64, SymbolicError> {
        self.eval_with(&|id| point.iter().find(|(i, _)| *i == id).map(|(_, v)| *v))
    }

    /// Symbolic partial derivative. Only trivial zero/one folding is done.
    pub fn derivative(&self, id: Ident) -> Expr {
        match self {
            Expr::Num(_) => Expr::int(0),
            Expr::Var(v) => Expr::int(if *v == id { 1 } else { 0 }),
            Expr::Neg(a) => neg(a.derivative(id)),
            Expr::Add(a, b) => add(a.derivative(id), b.derivative(id)),
            Expr::Sub(a, b) => sub(a.derivative(id), b.derivative(id)),
            Expr::Mul(a, b) => add(
                mul(a.derivative(id), (**b).clone()),
                mul((**a).clone(), b.derivative(id)),
            ),
            Expr::Div(a, b) => {
                let num = sub(
                    mul(a.derivative(id), (**b).clone()),
                    mul((**a).clone(), b.derivative(id)),
                );
                div(num, Expr::Pow(b.clone(), 2))
            }
            Expr::Pow(a, n) => {
                let inner = if *n - 1 == 1 {
                    (**a).clone()
                } else if *n - 1 == 0 {
                    Expr::int(1)
                } else {
                    Expr::Pow(a.clone(), n - 1)
                };
                mul(mul(Expr::int(*n as i64), inner), a.derivative(id))
            }
        }
    }

    pub fn derivative_by_name(&self, name: &str) -> Result<Expr, SymbolicError> {
        Ok(self.derivative(Ident::from_name(name)?))
    }

    /// Convert to a canonical rational function. `hbar` is rejected.
    pub fn to_ratfun(&self) -> Result<RatFun, SymbolicError> {
        Ok(match self {
            Expr::Num(c) => RatFun::constant(c.clone()),
            Expr::Var(i) => RatFun::var(i.ring_var().ok_or(SymbolicError::HbarInRing)?),
            Expr::Neg(a) => a.to_ratfun()?.neg(),
            Expr::Add(a, b) => a.to_ratfun()?.add(&b.to_ratfun()?),
            Expr::Sub(a, b) => a.to_ratfun()?.sub(&b.to_ratfun()?),
            Expr::Mul(a, b) => a.to_ratfun()?.mul(&b.to_ratfun()?),
            Expr::Div(a, b) => a.to_ratfun()?.div(&b.to_ratfun()?)?,
            Expr::Pow(a, n) => a.to_ratfun()?.pow(*n)?,
        })
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(c) if c.is_zero())
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(c) if c.is_one())
}

fn neg(a: Expr) -> Expr {
    if is_zero(&a) {
        a
    } else {
        Expr::Neg(Box::new(a))
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (is_zero(&a), is_zero(&b)) {
        (true, _) => b,
        (_, true) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (is_zero(&a), is_zero(&b)) {
        (_, true) => a,
        (true, _) => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        Expr::int(0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        Expr::Mul(Box::new(a), Box::new(b))
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        Expr::int(0)
    } else {
        Expr::Div(Box::new(a), Box::new(b))
    }
}

/// True when the rational has a terminating decimal expansion.
fn is_decimal(c: &BigRational) -> bool {
    let mut d = c.denom().clone();
    for p in [2u32, 5] {
        let p = BigInt::from(p);
        while d.is_multiple_of(&p) {
            d /= &p;
        }
    }
    d.is_one()
}

fn fmt_number(c: &BigRational) -> String {
    if c.is_integer() {
        return c.numer().to_string();
    }
    if is_decimal(c) {
        let mut digits = 0usize;
        let mut scaled = c.abs();
        while !scaled.is_integer() {
            scaled *= BigRational::from_integer(BigInt::from(10));
            digits += 1;
        }
        let s = scaled.numer().to_string();
        let s = format!("{:0>width$}", s, width = digits + 1);
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if c.is_negative() { "-" } else { "" };
        return format!("{}{}.{}", sign, int, frac);
    }
    format!("({}/{})", c.numer(), c.denom())
}

impl Expr {
    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.precedence();
        let wrap = p < min;
        if wrap {
            write!(f, "(")?;
        }
        match self {
            Expr::Num(c) => {
                let s = fmt_number(c);
                if c.is_negative() && !s.starts_with('(') {
                    write!(f, "({})", s)?;
                } else {
                    write!(f, "{}", s)?;
                }
            }
            Expr::Var(i) => write!(f, "{}", i.name())?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_prec(f, 3)?;
            }
            Expr::Add(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " + ")?;
                b.write_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " - ")?;
                b.write_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, "*")?;
                b.write_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, "/")?;
                b.write_prec(f, 3)?;
            }
            Expr::Pow(a, n) => {
                a.write_prec(f, 4)?;
                write!(f, "^{}", n)?;
            }
        }
        if wrap {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, SymbolicError> {
        Err(SymbolicError::Syntax {
            position: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expr(&mut self) -> Result<Expr, SymbolicError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SymbolicError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, SymbolicError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.integer()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32, SymbolicError> {
        let mut negative = false;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            negative = true;
        }
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error(&["integer"]);
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let n: i32 = match text.parse() {
            Ok(n) => n,
            Err(_) => {
                self.pos = start;
                return self.error(&["integer"]);
            }
        };
        Ok(if negative { -n } else { n })
    }

    fn base(&mut self) -> Result<Expr, SymbolicError> {
        const EXPECTED: [&str; 4] = ["identifier", "number", "'('", "'-'"];
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.error(&["')'", "'+'", "'-'", "'*'", "'/'", "'^'"]);
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                Ok(Expr::Var(Ident::from_name(name)?))
            }
            _ => self.error(&EXPECTED),
        }
    }

    fn number(&mut self) -> Result<Expr, SymbolicError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let mut value = BigRational::from_integer(int.parse::<BigInt>().expect("digits"));
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let fstart = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if fstart == self.pos {
                return self.error(&["digit"]);
            }
            let frac = std::str::from_utf8(&self.src[fstart..self.pos]).expect("ascii");
            let scale = BigInt::from(10).pow(frac.len() as u32);
            value += BigRational::new(frac.parse::<BigInt>().expect("digits"), scale);
        }
        Ok(Expr::Num(value))
    }
}

/// Parse observable text. Errors carry the byte offset of the offending
/// token and the set of tokens that would have been accepted there.
pub fn parse_observable(text: &str) -> Result<Expr, SymbolicError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.error(&["end of input", "'+'", "'-'", "'*'", "'/'", "'^'"]);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angular_momentum_text() {
        let e = parse_observable("x*py - y*px").unwrap();
        let v = e
            .eval(&[(Ident::X, 3.0), (Ident::Y, 4.0), (Ident::Px, 0.0), (Ident::Py, 2.0)])
            .unwrap();
        assert_eq!(v, 6.0);
    }

    #[test]
    fn energy_text() {
        let e = parse_observable("(px^2+py^2)/(2*M)").unwrap();
        let v = e
            .eval(&[(Ident::Px, 0.0), (Ident::Py, 2.0), (Ident::M, 1.0)])
            .unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn unterminated_group_reports_offset() {
        match parse_observable("x*(") {
            Err(SymbolicError::Syntax { position, expected }) => {
                assert_eq!(position, 3);
                assert!(expected.contains(&"identifier".to_string()));
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse_observable("x + z"),
            Err(SymbolicError::UnknownVariable("z".into()))
        );
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = parse_observable("-x^2 + 2*3^2 - 1/4").unwrap();
        let v = e.eval(&[(Ident::X, 3.0)]).unwrap();
        assert_eq!(v, -9.0 + 18.0 - 0.25);
        assert_eq!(e.to_string(), "-x^2 + 2*3^2 - 1/4");
    }

    #[test]
    fn decimals_are_exact() {
        let e = parse_observable("0.25*H").unwrap();
        assert_eq!(e.to_ratfun().unwrap().to_string(), "1/4*H");
        assert_eq!(e.to_string(), "0.25*H");
    }

    #[test]
    fn derivative_matches_ratfun_derivative() {
        let e = parse_observable("(px^2+py^2)/(2*M)").unwrap();
        let d = e.derivative_by_name("px").unwrap().to_ratfun().unwrap();
        let expect = parse_observable("px/M").unwrap().to_ratfun().unwrap();
        assert_eq!(d, expect);
        assert!(e.derivative_by_name("q").is_err());
    }

    #[test]
    fn hbar_is_not_a_ring_element() {
        let e = parse_observable("hbar*x").unwrap();
        assert_eq!(e.to_ratfun(), Err(SymbolicError::HbarInRing));
    }
}
