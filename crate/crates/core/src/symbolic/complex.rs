//! Gaussian-rational extension: `re + i·im` with both parts in the
//! rational-function ring, and formal series in ħ over it.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::poly::{Var, NVARS};
use super::ratfun::RatFun;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct CRat {
    pub re: RatFun,
    pub im: RatFun,
}

impl CRat {
    pub fn new(re: RatFun, im: RatFun) -> Self {
        CRat { re, im }
    }

    pub fn zero() -> Self {
        CRat::default()
    }

    pub fn one() -> Self {
        CRat::real(RatFun::one())
    }

    pub fn i() -> Self {
        CRat::new(RatFun::zero(), RatFun::one())
    }

    pub fn real(re: RatFun) -> Self {
        CRat::new(re, RatFun::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &CRat) -> CRat {
        CRat::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &CRat) -> CRat {
        CRat::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn neg(&self) -> CRat {
        CRat::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> CRat {
        CRat::new(self.re.clone(), self.im.neg())
    }

    pub fn mul(&self, o: &CRat) -> CRat {
        if self.im.is_zero() && o.im.is_zero() {
            return CRat::real(self.re.mul(&o.re));
        }
        CRat::new(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }

    pub fn mul_real(&self, r: &RatFun) -> CRat {
        CRat::new(self.re.mul(r), self.im.mul(r))
    }

    pub fn scale(&self, c: &BigRational) -> CRat {
        CRat::new(self.re.scale(c), self.im.scale(c))
    }

    /// Multiply by `i^n`.
    pub fn mul_i_pow(&self, n: u32) -> CRat {
        match n % 4 {
            0 => self.clone(),
            1 => CRat::new(self.im.neg(), self.re.clone()),
            2 => self.neg(),
            _ => CRat::new(self.im.clone(), self.re.neg()),
        }
    }

    pub fn derivative(&self, v: Var) -> CRat {
        CRat::new(self.re.derivative(v), self.im.derivative(v))
    }

    pub fn eval(&self, point: &[f64; NVARS]) -> Complex64 {
        let re = if self.re.is_zero() { 0.0 } else { self.re.eval(point) };
        let im = if self.im.is_zero() { 0.0 } else { self.im.eval(point) };
        Complex64::new(re, im)
    }
}

fn imaginary_text(im: &RatFun) -> String {
    if let Some(c) = im.as_constant() {
        let p = c.numer().clone();
        let q = c.denom().clone();
        let sign = if p.is_negative() { "-" } else { "" };
        let pa = p.abs();
        let head = if pa.is_one() {
            format!("{}i", sign)
        } else {
            format!("{}{}*i", sign, pa)
        };
        if q.is_one() {
            head
        } else {
            format!("{}/{}", head, q)
        }
    } else {
        format!("i*({})", im)
    }
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}", imaginary_text(&self.im)),
            (false, false) => write!(f, "{} + {}", self.re, imaginary_text(&self.im)),
        }
    }
}

impl fmt::Debug for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CRat({})", self)
    }
}

/// Finite formal series `Σ ħ^k c_k`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct HbarSeries {
    terms: BTreeMap<u32, CRat>,
}

impl HbarSeries {
    pub fn zero() -> Self {
        HbarSeries::default()
    }

    pub fn constant(c: CRat) -> Self {
        let mut s = HbarSeries::zero();
        s.add_term(0, c);
        s
    }

    pub fn add_term(&mut self, k: u32, c: CRat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(k).or_default();
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn coeff(&self, k: u32) -> CRat {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u32, &CRat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn add(&self, o: &HbarSeries) -> HbarSeries {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &HbarSeries) -> HbarSeries {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> HbarSeries {
        HbarSeries {
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn conj(&self) -> HbarSeries {
        HbarSeries {
            terms: self.terms.iter().map(|(k, c)| (*k, c.conj())).collect(),
        }
    }

    /// Drop every order above `k`.
    pub fn truncate(&self, k: u32) -> HbarSeries {
        HbarSeries {
            terms: self.terms.range(..=k).map(|(a, b)| (*a, b.clone())).collect(),
        }
    }

    /// Divide by `iħ`; `None` if an ħ⁰ term is present.
    pub fn div_i_hbar(&self) -> Option<HbarSeries> {
        if self.terms.contains_key(&0) {
            return None;
        }
        Some(HbarSeries {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k - 1, c.mul_i_pow(3)))
                .collect(),
        })
    }

    pub fn eval(&self, point: &[f64; NVARS], hbar: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| c.eval(point) * hbar.powi(*k as i32))
            .sum()
    }
}

impl fmt::Display for HbarSeries {
    /// `x*px + (i/2)*hbar`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let text = c.to_string();
            match k {
                0 => write!(f, "{}", text)?,
                _ => {
                    let simple = text.chars().all(|ch| ch.is_alphanumeric() || ch == '_');
                    if simple {
                        write!(f, "{}*", text)?;
                    } else {
                        write!(f, "({})*", text)?;
                    }
                    if *k == 1 {
                        write!(f, "hbar")?;
                    } else {
                        write!(f, "hbar^{}", k)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for HbarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HbarSeries({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat;

    #[test]
    fn star_of_position_and_momentum_prints() {
        let mut s = HbarSeries::zero();
        s.add_term(0, CRat::real(RatFun::var(Var::X).mul(&RatFun::var(Var::Px))));
        s.add_term(1, CRat::i().scale(&rat(1, 2)));
        assert_eq!(s.to_string(), "x*px + (i/2)*hbar");
    }

    #[test]
    fn powers_of_i() {
        let one = CRat::one();
        assert_eq!(one.mul_i_pow(2), one.neg());
        assert_eq!(one.mul_i_pow(1).mul(&CRat::i()), one.neg());
        assert_eq!(CRat::i().mul_i_pow(3), one);
    }
}
