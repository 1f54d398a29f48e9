//! Coefficients that may depend on an undetermined function `g` through its
//! partial derivatives ("jet variables").
//!
//! A [`JetCoeff`] is a finite sum `c₀ + Σ_α c_α ∂^α g` where the `c`s are
//! complex rational functions of the chart coordinates. Products are only
//! defined when at most one factor mentions `g`, which is all the star
//! product extraction ever needs.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

use crate::symbolic::{CRat, RatFun, Var};

/// `None` is the `g`-free part; `Some(α)` multiplies `∂^α g`.
pub type Jet = Option<[u8; 4]>;

#[derive(Clone, PartialEq, Eq, Default)]
pub struct JetCoeff {
    terms: BTreeMap<Jet, CRat>,
}

impl JetCoeff {
    pub fn zero() -> Self {
        JetCoeff::default()
    }

    pub fn plain(c: CRat) -> Self {
        let mut j = JetCoeff::zero();
        j.add_term(None, c);
        j
    }

    pub fn real(r: RatFun) -> Self {
        JetCoeff::plain(CRat::real(r))
    }

    /// The undetermined function itself, `∂^0 g`.
    pub fn generic() -> Self {
        let mut j = JetCoeff::zero();
        j.add_term(Some([0; 4]), CRat::one());
        j
    }

    pub fn add_term(&mut self, jet: Jet, c: CRat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(jet).or_default();
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&jet);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Jet, &CRat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_jets(&self) -> bool {
        self.terms.keys().any(|k| k.is_some())
    }

    pub fn plain_part(&self) -> CRat {
        self.terms.get(&None).cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &JetCoeff) -> JetCoeff {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> JetCoeff {
        JetCoeff {
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> JetCoeff {
        let mut out = JetCoeff::zero();
        for (k, v) in &self.terms {
            out.add_term(*k, v.scale(c));
        }
        out
    }

    pub fn mul_i_pow(&self, n: u32) -> JetCoeff {
        JetCoeff {
            terms: self.terms.iter().map(|(k, c)| (*k, c.mul_i_pow(n))).collect(),
        }
    }

    pub fn mul_crat(&self, c: &CRat) -> JetCoeff {
        let mut out = JetCoeff::zero();
        for (k, v) in &self.terms {
            out.add_term(*k, v.mul(c));
        }
        out
    }

    /// Product; `None` when both factors depend on `g`.
    pub fn mul(&self, o: &JetCoeff) -> Option<JetCoeff> {
        if self.has_jets() && o.has_jets() {
            return None;
        }
        let mut out = JetCoeff::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                out.add_term(ka.or(*kb), ca.mul(cb));
            }
        }
        Some(out)
    }

    /// Total derivative along chart coordinate `i` (ring variable `v`):
    /// `∂_i(c ∂^α g) = (∂_i c) ∂^α g + c ∂^{α+e_i} g`.
    pub fn derivative(&self, i: usize, v: Var) -> JetCoeff {
        let mut out = JetCoeff::zero();
        for (k, c) in &self.terms {
            out.add_term(*k, c.derivative(v));
            if let Some(alpha) = k {
                let mut beta = *alpha;
                beta[i] += 1;
                out.add_term(Some(beta), c.clone());
            }
        }
        out
    }
}

impl fmt::Display for JetCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            match k {
                None => write!(f, "({})", c)?,
                Some(a) => write!(f, "({})*g[{},{},{},{}]", c, a[0], a[1], a[2], a[3])?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for JetCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetCoeff({})", self)
    }
}
