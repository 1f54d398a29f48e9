//! Rational functions in canonical form.
//!
//! A [`RatFun`] is always stored with numerator and denominator coprime and
//! the denominator monic under the grlex order, so structural equality is
//! mathematical equality. Zero is `0/1`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{gcd, rat, Poly, Var, NVARS};
use super::SymbolicError;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl Default for RatFun {
    fn default() -> Self {
        RatFun::zero()
    }
}

impl RatFun {
    pub fn zero() -> Self {
        RatFun {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RatFun::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFun {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        RatFun::from_poly(Poly::from_int(n))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        RatFun::constant(rat(n, d))
    }

    pub fn constant(c: BigRational) -> Self {
        RatFun::from_poly(Poly::constant(c))
    }

    pub fn var(v: Var) -> Self {
        RatFun::from_poly(Poly::var(v))
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self, SymbolicError> {
        if den.is_zero() {
            return Err(SymbolicError::DivisionByZero);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFun::zero();
        }
        let (num, den) = if let Some((m, c)) = den.as_monomial() {
            // Monomial denominator: only monomial factors can cancel.
            let common = num.monomial_content().gcd(&m);
            let inv = BigRational::one() / c;
            let num = num
                .div_monomial(&common)
                .expect("common monomial divides")
                .scale(&inv);
            let den = Poly::term(BigRational::one(), m.div(&common).expect("divides"));
            (num, den)
        } else {
            let g = gcd(&num, &den);
            let (num, den) = if g.is_one() {
                (num, den)
            } else {
                (
                    num.exact_div(&g).expect("gcd divides numerator"),
                    den.exact_div(&g).expect("gcd divides denominator"),
                )
            };
            let lc = den.leading_coeff();
            let inv = BigRational::one() / lc;
            (num.scale(&inv), den.scale(&inv))
        };
        RatFun { num, den }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.num.contains_var(v) || self.den.contains_var(v)
    }

    pub fn add(&self, other: &RatFun) -> RatFun {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Self::canonical(self.num.add(&other.num), self.den.clone());
        }
        if let (Some((ma, _)), Some((mb, _))) = (self.den.as_monomial(), other.den.as_monomial()) {
            // Both denominators are monic monomials: bring to their lcm.
            let g = ma.gcd(&mb);
            let lcm = ma.mul(&mb).div(&g).expect("gcd divides product");
            let fa = lcm.div(&ma).expect("divides");
            let fb = lcm.div(&mb).expect("divides");
            let num = self.num.mul_monomial(&fa).add(&other.num.mul_monomial(&fb));
            return Self::canonical(num, Poly::term(BigRational::one(), lcm));
        }
        // With g = gcd(b, d), any factor shared by the new numerator and
        // denominator must divide g.
        let g = gcd(&self.den, &other.den);
        let b1 = self.den.exact_div(&g).expect("gcd divides");
        let d1 = other.den.exact_div(&g).expect("gcd divides");
        let num = self.num.mul(&d1).add(&other.num.mul(&b1));
        if num.is_zero() {
            return RatFun::zero();
        }
        let g2 = gcd(&num, &g);
        let num = num.exact_div(&g2).expect("gcd divides");
        let g = g.exact_div(&g2).expect("gcd divides");
        Self::normalized(num, b1.mul(&d1).mul(&g))
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFun) -> RatFun {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFun) -> RatFun {
        if self.is_zero() || other.is_zero() {
            return RatFun::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return RatFun::from_poly(self.num.mul(&other.num));
        }
        Self::cross_reduced(&self.num, &self.den, &other.num, &other.den)
    }

    /// (a/b)·(c/d) for reduced inputs: only a with d and c with b can share
    /// factors.
    fn cross_reduced(a: &Poly, b: &Poly, c: &Poly, d: &Poly) -> RatFun {
        let g1 = gcd(a, d);
        let g2 = gcd(c, b);
        let a = a.exact_div(&g1).expect("gcd divides");
        let d = d.exact_div(&g1).expect("gcd divides");
        let c = c.exact_div(&g2).expect("gcd divides");
        let b = b.exact_div(&g2).expect("gcd divides");
        Self::normalized(a.mul(&c), b.mul(&d))
    }

    /// Make the denominator monic; the caller guarantees coprimality.
    fn normalized(num: Poly, den: Poly) -> RatFun {
        if num.is_zero() {
            return RatFun::zero();
        }
        let lc = den.leading_coeff();
        if lc.is_one() {
            return RatFun { num, den };
        }
        let inv = BigRational::one() / lc;
        RatFun {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    pub fn scale(&self, c: &BigRational) -> RatFun {
        if c.is_zero() {
            return RatFun::zero();
        }
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Result<RatFun, SymbolicError> {
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &RatFun) -> Result<RatFun, SymbolicError> {
        if other.is_zero() {
            return Err(SymbolicError::DivisionByZero);
        }
        Ok(Self::cross_reduced(&self.num, &self.den, &other.den, &other.num))
    }

    pub fn pow(&self, e: i32) -> Result<RatFun, SymbolicError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let n = e.unsigned_abs();
        Ok(RatFun {
            num: base.num.pow(n),
            den: base.den.pow(n),
        })
    }

    /// Partial derivative treating every ring variable as independent.
    pub fn derivative(&self, v: Var) -> RatFun {
        let dn = self.num.derivative(v);
        let dd = self.den.derivative(v);
        if dd.is_zero() {
            return Self::canonical(dn, self.den.clone());
        }
        // Shared factors all divide the old denominator; peel them off
        // until nothing is left in common.
        let mut num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        let mut den = self.den.mul(&self.den);
        let mut factor = self.den.clone();
        loop {
            let g = gcd(&num, &factor);
            if g.is_one() || num.is_zero() {
                break;
            }
            num = num.exact_div(&g).expect("gcd divides");
            den = den.exact_div(&g).expect("gcd divides");
            factor = gcd(&g, &den);
        }
        Self::normalized(num, den)
    }

    /// Partial derivative with respect to a chart variable when the
    /// expression may contain the auxiliary symbols cos χ, sin χ and
    /// √(2MH). The chain rule through those symbols is applied and the
    /// result is reduced modulo their algebraic relations.
    pub fn derivative_ext(&self, v: Var) -> RatFun {
        let mut out = self.derivative(v);
        match v {
            Var::Chi => {
                let dc = self.derivative(Var::CosChi).mul(&RatFun::var(Var::SinChi).neg());
                let ds = self.derivative(Var::SinChi).mul(&RatFun::var(Var::CosChi));
                out = out.add(&dc).add(&ds);
            }
            Var::H => {
                let droot = RatFun::var(Var::Root)
                    .mul(&RatFun::var(Var::H).pow(-1).expect("nonzero").scale(&rat(1, 2)));
                out = out.add(&self.derivative(Var::Root).mul(&droot));
            }
            Var::M => {
                let droot = RatFun::var(Var::Root)
                    .mul(&RatFun::var(Var::M).pow(-1).expect("nonzero").scale(&rat(1, 2)));
                out = out.add(&self.derivative(Var::Root).mul(&droot));
            }
            _ => {}
        }
        out.reduce_aux()
    }

    /// Reduce modulo sin²χ + cos²χ = 1 and (√(2MH))² = 2MH, after moving
    /// the auxiliary symbols out of the denominator.
    pub fn reduce_aux(&self) -> RatFun {
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        for v in [Var::Root, Var::SinChi] {
            den = reduce_poly(&den);
            num = reduce_poly(&num);
            if den.contains_var(v) {
                // After reduction den = a + b·v with v-free a, b.
                let coeffs = den.coefficients_in(v);
                let a = coeffs[0].clone();
                let b = coeffs.get(1).cloned().unwrap_or_else(Poly::zero);
                let conj = a.sub(&b.mul(&Poly::var(v)));
                num = reduce_poly(&num.mul(&conj));
                den = reduce_poly(&den.mul(&conj));
            }
        }
        Self::canonical(reduce_poly(&num), reduce_poly(&den))
    }

    pub fn substitute(&self, subs: &[Option<Poly>; NVARS]) -> Result<RatFun, SymbolicError> {
        RatFun::new(self.num.substitute(subs), self.den.substitute(subs))
    }

    pub fn eval(&self, point: &[f64; NVARS]) -> f64 {
        self.num.eval(point) / self.den.eval(point)
    }
}

fn reduce_poly(p: &Poly) -> Poly {
    let mut out = Poly::zero();
    let two_mh = Poly::var(Var::M)
        .mul(&Poly::var(Var::H))
        .scale(&rat(2, 1));
    let one_minus_c2 = Poly::one().sub(&Poly::var(Var::CosChi).pow(2));
    for (m, c) in p.terms() {
        let mut mono = *m;
        let er = mono.0[Var::Root.index()];
        let es = mono.0[Var::SinChi.index()];
        mono.0[Var::Root.index()] = er % 2;
        mono.0[Var::SinChi.index()] = es % 2;
        let t = Poly::term(c.clone(), mono)
            .mul(&two_mh.pow((er / 2) as u32))
            .mul(&one_minus_c2.pow((es / 2) as u32));
        out = out.add(&t);
    }
    out
}

impl fmt::Display for RatFun {
    /// `L/(2*H^2)`, `-1/(2*H)`, `(H + L)/H`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let (num, den) = match self.num.as_monomial() {
            Some((m, c)) => {
                let sign = if c.is_negative() { "-" } else { "" };
                let p = Poly::term(BigRational::from_integer(c.numer().abs()), m);
                let q = BigRational::from_integer(c.denom().clone());
                (format!("{}{}", sign, p), self.den.scale(&q))
            }
            None => (format!("({})", self.num), self.den.clone()),
        };
        let den_text = den.to_string();
        if den.num_terms() == 1 && !den_text.contains(['*', '^']) {
            write!(f, "{}/{}", num, den_text)
        } else {
            write!(f, "{}/({})", num, den_text)
        }
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFun({})", self)
    }
}

impl From<Poly> for RatFun {
    fn from(p: Poly) -> Self {
        RatFun::from_poly(p)
    }
}
