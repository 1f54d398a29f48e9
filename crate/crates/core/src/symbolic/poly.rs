//! Sparse multivariate polynomials over exact rationals.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose ordering is
//! graded lexicographic over the fixed variable order of [`Var`]. The last
//! entry of the map is therefore the leading term.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Number of ring variables known to the coefficient algebra.
pub const NVARS: usize = 12;

/// Ring variables, in the fixed order used for monomial comparison.
///
/// The last three are auxiliary symbols used when transporting data
/// between charts: `CosChi` and `SinChi` stand for cos χ and sin χ, `Root`
/// stands for √(2MH). They never survive into a reduced connection table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X = 0,
    Y,
    Px,
    Py,
    T,
    Chi,
    H,
    L,
    M,
    CosChi,
    SinChi,
    Root,
}

impl Var {
    pub const ALL: [Var; NVARS] = [
        Var::X,
        Var::Y,
        Var::Px,
        Var::Py,
        Var::T,
        Var::Chi,
        Var::H,
        Var::L,
        Var::M,
        Var::CosChi,
        Var::SinChi,
        Var::Root,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Var {
        Var::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Px => "px",
            Var::Py => "py",
            Var::T => "T",
            Var::Chi => "chi",
            Var::H => "H",
            Var::L => "L",
            Var::M => "M",
            Var::CosChi => "cos(chi)",
            Var::SinChi => "sin(chi)",
            Var::Root => "sqrt(2*M*H)",
        }
    }
}

/// Exponent vector with graded lexicographic ordering.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u16; NVARS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; NVARS])
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; NVARS];
        e[v.index()] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exp(&self, v: Var) -> u16 {
        self.0[v.index()]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a += *b;
        }
        Monomial(e)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            if *a < *b {
                return None;
            }
            *a -= *b;
        }
        Some(Monomial(e))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a = (*a).min(*b);
        }
        Monomial(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", MonomialDisplay(self))
    }
}

struct MonomialDisplay<'a>(&'a Monomial);

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0 .0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}", Var::from_index(i).name())?;
            if e > 1 {
                write!(f, "^{}", e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Multivariate polynomial with rational coefficients. No zero coefficient
/// is ever stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(BigRational::one(), Monomial::var(v))
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.contains_key(&Monomial::one()))
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Monomial::one())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    /// Constant term value when the polynomial is constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            Some(BigRational::zero())
        } else if self.is_constant() {
            self.terms.get(&Monomial::one()).cloned()
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exp(v) > 0)
    }

    pub fn degree_in(&self, v: Var) -> u16 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.mul(mono), c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let i = v.index();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = *m;
            dm.0[i] -= 1;
            out.add_term(dm, c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Substitute polynomials for variables (`subs[v] = Some(p)` replaces v).
    pub fn substitute(&self, subs: &[Option<Poly>; NVARS]) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut kept = *m;
            let mut factor = Poly::constant(c.clone());
            for (i, sub) in subs.iter().enumerate() {
                if let Some(p) = sub {
                    let e = m.0[i];
                    if e > 0 {
                        factor = factor.mul(&p.pow(e as u32));
                    }
                    kept.0[i] = 0;
                }
            }
            out = out.add(&factor.mul_monomial(&kept));
        }
        out
    }

    pub fn eval(&self, point: &[f64; NVARS]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = c.to_f64().unwrap_or(f64::NAN);
                for (i, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        v *= point[i].powi(e as i32);
                    }
                }
                v
            })
            .sum()
    }

    /// Coefficients with respect to `v`: `result[k]` multiplies `v^k`.
    pub fn coefficients_in(&self, v: Var) -> Vec<Poly> {
        let i = v.index();
        let mut out = vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let k = m.0[i] as usize;
            let mut rest = *m;
            rest.0[i] = 0;
            out[k].add_term(rest, c.clone());
        }
        out
    }

    fn lead_coeff_in(&self, v: Var) -> Poly {
        self.coefficients_in(v).pop().unwrap_or_else(Poly::zero)
    }

    /// Greatest common divisor of all monomials.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(),
            Some(first) => it.fold(*first, |acc, m| acc.gcd(m)),
        }
    }

    pub fn as_monomial(&self) -> Option<(Monomial, BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (*m, c.clone()))
        } else {
            None
        }
    }

    /// Divide by a monomial that is known to divide every term.
    pub fn div_monomial(&self, mono: &Monomial) -> Option<Poly> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            terms.insert(m.div(mono)?, c.clone());
        }
        Some(Poly { terms })
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if let Some((m, c)) = divisor.as_monomial() {
            return self
                .div_monomial(&m)
                .map(|p| p.scale(&(BigRational::one() / c)));
        }
        let (lm, lc) = divisor.leading().map(|(m, c)| (*m, c.clone()))?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (*m, c.clone())) {
            let qm = rm.div(&lm)?;
            let qc = rc / &lc;
            let t = Poly::term(qc, qm);
            rem = rem.sub(&t.mul(divisor));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Scale so the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        let lc = self.leading_coeff();
        if lc.is_zero() || lc.is_one() {
            self.clone()
        } else {
            self.scale(&(BigRational::one() / lc))
        }
    }

    fn highest_var(&self) -> Option<Var> {
        let mut best: Option<usize> = None;
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 && best.map(|b| i > b).unwrap_or(true) {
                    best = Some(i);
                }
            }
        }
        best.map(Var::from_index)
    }

    /// Content with respect to `v`: gcd of the coefficients of powers of `v`.
    fn content_in(&self, v: Var) -> Poly {
        self.coefficients_in(v)
            .into_iter()
            .filter(|c| !c.is_zero())
            .fold(Poly::zero(), |acc, c| gcd(&acc, &c))
    }

    /// Pseudo-remainder of `self` by `b` viewed as univariate in `v`.
    fn pseudo_rem(&self, b: &Poly, v: Var) -> Poly {
        let db = b.degree_in(v);
        let lcb = b.lead_coeff_in(v);
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(v) >= db {
            let dr = r.degree_in(v);
            let lcr = r.lead_coeff_in(v);
            let mut shift = Monomial::one();
            shift.0[v.index()] = dr - db;
            r = r.mul(&lcb).sub(&lcr.mul(b).mul_monomial(&shift));
        }
        r
    }
}

/// Monic gcd of two polynomials over Q (recursive primitive PRS).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let mono = a.monomial_content().gcd(&b.monomial_content());
    if a.num_terms() == 1 || b.num_terms() == 1 {
        return Poly::term(BigRational::one(), mono);
    }
    let a = a.div_monomial(&mono).expect("monomial content divides");
    let b = b.div_monomial(&mono).expect("monomial content divides");
    let g = gcd_no_monomial(&a, &b);
    g.mul_monomial(&mono).monic()
}

fn gcd_no_monomial(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let v = match (a.highest_var(), b.highest_var()) {
        (Some(x), Some(y)) => x.max(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => return Poly::one(),
    };
    if !a.contains_var(v) {
        return gcd(a, &b.content_in(v));
    }
    if !b.contains_var(v) {
        return gcd(&a.content_in(v), b);
    }
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let c = gcd(&ca, &cb);
    if images_coprime(a, b, v) {
        return c;
    }
    let pa = a.exact_div(&ca).expect("content divides");
    let pb = b.exact_div(&cb).expect("content divides");
    let (mut r0, mut r1) = if pa.degree_in(v) >= pb.degree_in(v) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    let g = loop {
        let r = r0.pseudo_rem(&r1, v);
        if r.is_zero() {
            break r1;
        }
        if r.degree_in(v) == 0 {
            break Poly::one();
        }
        r0 = r1;
        let cr = r.content_in(v);
        r1 = r.exact_div(&cr).expect("content divides");
    };
    let g = if g.contains_var(v) {
        let cg = g.content_in(v);
        g.exact_div(&cg).expect("content divides")
    } else {
        Poly::one()
    };
    c.mul(&g).monic()
}

/// Univariate image of `p` in `v` after substituting `point` for every
/// other variable.
fn univariate_image(p: &Poly, v: Var, point: &[i64; NVARS]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); p.degree_in(v) as usize + 1];
    for (m, c) in &p.terms {
        let mut val = c.clone();
        for (i, &e) in m.0.iter().enumerate() {
            if i != v.index() && e > 0 {
                val *= BigRational::from_integer(BigInt::from(point[i]).pow(e as u32));
            }
        }
        out[m.exp(v) as usize] += val;
    }
    out
}

fn univariate_gcd_degree(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> usize {
    let trim = |p: &mut Vec<BigRational>| {
        while p.last().map(|c| c.is_zero()).unwrap_or(false) {
            p.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let lb = b.last().expect("nonempty").clone();
        while a.len() >= b.len() {
            let q = a.last().expect("nonempty").clone() / &lb;
            let shift = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                a[i + shift] -= &q * c;
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Cheap sufficient test that `a` and `b` share no factor involving `v`:
/// their images at a point where both leading coefficients survive are
/// coprime.
fn images_coprime(a: &Poly, b: &Poly, v: Var) -> bool {
    let la = a.lead_coeff_in(v);
    let lb = b.lead_coeff_in(v);
    for attempt in 0..3i64 {
        let mut point = [0i64; NVARS];
        for (i, p) in point.iter_mut().enumerate() {
            *p = 3 + 7 * attempt + 2 * i as i64 + (i as i64 * i as i64 + attempt) % 5;
        }
        let pa = univariate_image(&la, v, &point);
        let pb = univariate_image(&lb, v, &point);
        if pa[0].is_zero() || pb[0].is_zero() {
            continue;
        }
        let da = univariate_image(a, v, &point);
        let db = univariate_image(b, v, &point);
        return univariate_gcd_degree(da, db) == 0;
    }
    false
}

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    /// Terms in descending monomial order, e.g. `2*H*L - 1/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if m.is_one() {
                write!(f, "{}", fmt_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{}", MonomialDisplay(m))?;
            } else {
                write!(f, "{}*{}", fmt_rational(&abs), MonomialDisplay(m))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> Poly {
        Poly::var(Var::H)
    }
    fn l() -> Poly {
        Poly::var(Var::L)
    }

    #[test]
    fn grlex_orders_by_degree_first() {
        let a = Monomial::var(Var::Root).mul(&Monomial::var(Var::Root));
        let b = Monomial::var(Var::X);
        assert!(a > b);
        assert!(Monomial::var(Var::X) > Monomial::var(Var::Y));
    }

    #[test]
    fn exact_division_and_failure() {
        let p = h().add(&l()).mul(&h().sub(&l()));
        let q = p.exact_div(&h().add(&l())).unwrap();
        assert_eq!(q, h().sub(&l()));
        assert!(h().add(&Poly::one()).exact_div(&l()).is_none());
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let common = h().mul(&l()).add(&Poly::from_int(3));
        let a = common.mul(&h().add(&Poly::var(Var::M)));
        let b = common.mul(&l().sub(&Poly::from_int(2))).mul(&h());
        let g = gcd(&a, &b);
        assert_eq!(g, common.monic());
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let a = h().pow(2).add(&Poly::one());
        let b = h().add(&l());
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn derivative_power_rule() {
        let p = h().pow(3).mul(&l());
        assert_eq!(p.derivative(Var::H), h().pow(2).mul(&l()).scale(&rat(3, 1)));
        assert!(p.derivative(Var::X).is_zero());
    }
}
