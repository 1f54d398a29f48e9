use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::jet::JetCoeff;
use super::{TruncationConfig, WeylError};
use crate::charts::{Chart, ChartKind};
use crate::symbolic::rat;

/// `ħ^k y^μ dx^S`; `forms` is a bitmask over the chart coordinates, so
/// the index set is automatically strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeylKey {
    pub k: u32,
    pub mu: [u8; 4],
    pub forms: u8,
}

impl WeylKey {
    pub fn new(k: u32, mu: [u8; 4], forms: &[usize]) -> Self {
        let forms = forms.iter().fold(0u8, |acc, &i| acc | (1 << i));
        WeylKey { k, mu, forms }
    }

    pub fn scalar() -> Self {
        WeylKey { k: 0, mu: [0; 4], forms: 0 }
    }

    pub fn deg_y(&self) -> u32 {
        self.mu.iter().map(|&a| a as u32).sum()
    }

    pub fn grade(&self) -> u32 {
        self.deg_y() + 2 * self.k
    }

    pub fn form_degree(&self) -> u32 {
        self.forms.count_ones()
    }

    pub fn form_indices(&self) -> Vec<usize> {
        (0..4).filter(|i| self.forms & (1 << i) != 0).collect()
    }
}

/// `dx^i ∧ dx^S`: `None` if `i ∈ S`, else the sign and the new set.
pub(crate) fn insert_form(i: usize, forms: u8) -> Option<(bool, u8)> {
    if forms & (1 << i) != 0 {
        return None;
    }
    let below = (forms & ((1u8 << i) - 1)).count_ones();
    Some((below % 2 == 1, forms | (1 << i)))
}

/// `dx^S1 ∧ dx^S2`: sign counts the pairs that have to be swapped.
fn wedge(s1: u8, s2: u8) -> Option<(bool, u8)> {
    if s1 & s2 != 0 {
        return None;
    }
    let mut swaps = 0;
    for j in 0..4 {
        if s2 & (1 << j) != 0 {
            swaps += (s1 >> (j + 1)).count_ones();
        }
    }
    Some((swaps % 2 == 1, s1 | s2))
}

fn falling(n: u8, r: u8) -> BigInt {
    (0..r).fold(BigInt::one(), |acc, t| acc * BigInt::from(n - t))
}

fn factorial(n: u8) -> BigInt {
    falling(n, n)
}

/// One contraction order of `y^μ ∘ y^ν`: ħ-power `n`, rational factor
/// (already including `(1/2)^n` and the Poisson signs; the `i^n` is applied
/// by the caller) and resulting monomial.
type Contraction = (u32, BigRational, [u8; 4]);

/// The fiber product contracts `y^q` (index `j`) with `y^p` (index `j+2`)
/// using the Poisson tensor `Λ^{qp} = +1 = −Λ^{pq}`; pairs are independent.
fn contract(mu: [u8; 4], nu: [u8; 4]) -> Vec<Contraction> {
    let mut per_pair: Vec<Vec<(u32, BigRational, u8, u8)>> = Vec::with_capacity(2);
    for j in 0..2 {
        let (aq, ap, bq, bp) = (mu[j], mu[j + 2], nu[j], nu[j + 2]);
        let mut opts = Vec::new();
        for r in 0..=aq.min(bp) {
            for s in 0..=ap.min(bq) {
                let num = falling(aq, r) * falling(ap, s) * falling(bp, r) * falling(bq, s);
                let den = factorial(r) * factorial(s);
                let mut c = BigRational::new(num, den);
                if s % 2 == 1 {
                    c = -c;
                }
                opts.push(((r + s) as u32, c, aq - r + bq - s, ap - s + bp - r));
            }
        }
        per_pair.push(opts);
    }
    let mut out = Vec::new();
    for (n0, c0, q0, p0) in &per_pair[0] {
        for (n1, c1, q1, p1) in &per_pair[1] {
            let n = n0 + n1;
            let c = c0 * c1 / BigRational::from_integer(BigInt::from(2).pow(n));
            out.push((n, c, [*q0, *q1, *p0, *p1]));
        }
    }
    out
}

#[derive(Default)]
struct ContractionCache(HashMap<([u8; 4], [u8; 4]), Vec<Contraction>>);

impl ContractionCache {
    fn get(&mut self, mu: [u8; 4], nu: [u8; 4]) -> &[Contraction] {
        self.0.entry((mu, nu)).or_insert_with(|| contract(mu, nu))
    }
}

#[derive(Clone, PartialEq)]
pub struct WeylElement {
    chart: ChartKind,
    trunc: TruncationConfig,
    terms: BTreeMap<WeylKey, JetCoeff>,
}

impl WeylElement {
    pub fn zero(chart: ChartKind, trunc: TruncationConfig) -> Self {
        WeylElement { chart, trunc, terms: BTreeMap::new() }
    }

    /// `f · 1`, the zero-grade element carrying a function.
    pub fn scalar(chart: ChartKind, trunc: TruncationConfig, f: JetCoeff) -> Self {
        let mut e = WeylElement::zero(chart, trunc);
        e.add_term(WeylKey::scalar(), f);
        e
    }

    pub fn monomial(chart: ChartKind, trunc: TruncationConfig, key: WeylKey, c: JetCoeff) -> Self {
        let mut e = WeylElement::zero(chart, trunc);
        e.add_term(key, c);
        e
    }

    pub fn chart(&self) -> ChartKind {
        self.chart
    }

    pub fn truncation(&self) -> TruncationConfig {
        self.trunc
    }

    /// Same terms under another bound; terms above it are dropped.
    pub fn with_truncation(&self, trunc: TruncationConfig) -> Self {
        let mut e = WeylElement::zero(self.chart, trunc);
        for (k, c) in &self.terms {
            e.add_term(*k, c.clone());
        }
        e
    }

    /// Terms above the grade bound are silently discarded.
    pub fn add_term(&mut self, key: WeylKey, c: JetCoeff) {
        if c.is_zero() || key.grade() > self.trunc.max_grade {
            return;
        }
        let slot = self.terms.entry(key).or_default();
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WeylKey, &JetCoeff)> {
        self.terms.iter()
    }

    pub fn get(&self, key: &WeylKey) -> JetCoeff {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Part of exact grade `g`.
    pub fn grade_part(&self, g: u32) -> WeylElement {
        self.filter(|k| k.grade() == g)
    }

    pub fn filter(&self, keep: impl Fn(&WeylKey) -> bool) -> WeylElement {
        WeylElement {
            chart: self.chart,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    fn same_chart(&self, o: &WeylElement) -> Result<(), WeylError> {
        if self.chart != o.chart {
            return Err(WeylError::ChartMismatch(self.chart, o.chart));
        }
        Ok(())
    }

    fn min_trunc(&self, o: &WeylElement) -> TruncationConfig {
        if self.trunc.max_grade <= o.trunc.max_grade {
            self.trunc
        } else {
            o.trunc
        }
    }

    pub fn add(&self, o: &WeylElement) -> Result<WeylElement, WeylError> {
        self.same_chart(o)?;
        let mut out = self.with_truncation(self.min_trunc(o));
        for (k, c) in &o.terms {
            out.add_term(*k, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &WeylElement) -> Result<WeylElement, WeylError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> WeylElement {
        WeylElement {
            chart: self.chart,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> WeylElement {
        let mut out = WeylElement::zero(self.chart, self.trunc);
        for (k, v) in &self.terms {
            out.add_term(*k, v.scale(c));
        }
        out
    }

    pub fn mul_i_pow(&self, n: u32) -> WeylElement {
        WeylElement {
            chart: self.chart,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(k, c)| (*k, c.mul_i_pow(n))).collect(),
        }
    }

    /// All terms `ħ^{ka+kb+n} (ca·cb) y^… dx^{S1∧S2}` of `a•b` whose grade
    /// stays within `bound`, keeping only contraction orders `n` accepted
    /// by `orders`.
    fn raw_product(
        &self,
        o: &WeylElement,
        bound: u32,
        orders: impl Fn(u32) -> bool,
    ) -> Result<Vec<(WeylKey, JetCoeff)>, WeylError> {
        let mut cache = ContractionCache::default();
        let mut out = Vec::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                if ka.grade() + kb.grade() > bound {
                    continue;
                }
                let Some((negate, forms)) = wedge(ka.forms, kb.forms) else {
                    continue;
                };
                let mut coeff = ca.mul(cb).ok_or(WeylError::MixedJets)?;
                if negate {
                    coeff = coeff.neg();
                }
                for (n, r, mu) in cache.get(ka.mu, kb.mu) {
                    if !orders(*n) {
                        continue;
                    }
                    let key = WeylKey { k: ka.k + kb.k + n, mu: *mu, forms };
                    out.push((key, coeff.scale(r).mul_i_pow(*n)));
                }
            }
        }
        Ok(out)
    }

    fn collect(&self, trunc: TruncationConfig, terms: Vec<(WeylKey, JetCoeff)>) -> WeylElement {
        let mut acc: BTreeMap<WeylKey, JetCoeff> = BTreeMap::new();
        for (k, c) in terms {
            let slot = acc.entry(k).or_default();
            *slot = slot.add(&c);
        }
        let mut out = WeylElement::zero(self.chart, trunc);
        for (k, c) in acc {
            out.add_term(k, c);
        }
        out
    }

    /// Fiber `∘` product combined with the exterior product of form parts,
    /// truncated at the smaller of the two grade bounds.
    pub fn graded_product(&self, o: &WeylElement) -> Result<WeylElement, WeylError> {
        self.same_chart(o)?;
        let trunc = self.min_trunc(o);
        let raw = self.raw_product(o, trunc.max_grade, |_| true)?;
        Ok(self.collect(trunc, raw))
    }

    /// `[a, b] = a•b − (−1)^{q₁q₂} b•a`. Reversing the factors flips the sign
    /// of every odd contraction order and, for the forms, contributes exactly
    /// `(−1)^{q₁q₂}`, so the commutator is twice the odd-order part of `a•b`.
    pub fn graded_commutator(&self, o: &WeylElement) -> Result<WeylElement, WeylError> {
        self.same_chart(o)?;
        let trunc = self.min_trunc(o);
        let raw = self.raw_product(o, trunc.max_grade, |n| n % 2 == 1)?;
        Ok(self.collect(trunc, raw).scale(&rat(2, 1)))
    }

    /// Commutator kept up to an explicit grade bound, for the connection
    /// terms whose left factor carries extra grade that the `i/ħ` removes.
    pub(crate) fn commutator_within(&self, o: &WeylElement, bound: u32) -> Result<WeylElement, WeylError> {
        self.same_chart(o)?;
        let raw = self.raw_product(o, bound, |n| n % 2 == 1)?;
        let wide = TruncationConfig::new(bound, 0).expect("zero hbar order always fits");
        Ok(self.collect(wide, raw).scale(&rat(2, 1)))
    }

    /// Keep the `y`-free part.
    pub fn project_p(&self) -> WeylElement {
        self.filter(|k| k.deg_y() == 0)
    }

    /// `δa = dx^k ∧ ∂a/∂y^k`.
    pub fn delta(&self) -> WeylElement {
        let mut out = WeylElement::zero(self.chart, self.trunc);
        for (key, c) in &self.terms {
            for i in 0..4 {
                if key.mu[i] == 0 {
                    continue;
                }
                let Some((negate, forms)) = insert_form(i, key.forms) else {
                    continue;
                };
                let mut mu = key.mu;
                mu[i] -= 1;
                let f = rat(key.mu[i] as i64, 1);
                let f = if negate { -f } else { f };
                out.add_term(WeylKey { k: key.k, mu, forms }, c.scale(&f));
            }
        }
        out
    }

    /// `δ⁻¹(y^μ dx^{j₁}…dx^{j_q}) = (1/(l+q)) Σ_r (−1)^{r+1} y^{j_r} y^μ dx^{…ĵ_r…}`
    /// and zero when `l + q = 0`.
    pub fn delta_inv(&self) -> WeylElement {
        let mut out = WeylElement::zero(self.chart, self.trunc);
        for (key, c) in &self.terms {
            let q = key.form_degree();
            if q == 0 {
                continue;
            }
            let total = key.deg_y() + q;
            for (r, j) in key.form_indices().into_iter().enumerate() {
                let mut mu = key.mu;
                mu[j] += 1;
                let forms = key.forms & !(1 << j);
                let f = rat(if r % 2 == 0 { 1 } else { -1 }, total as i64);
                out.add_term(WeylKey { k: key.k, mu, forms }, c.scale(&f));
            }
        }
        out
    }

    /// Exterior derivative acting on the coefficient functions.
    pub fn exterior_d(&self) -> WeylElement {
        let vars = Chart::from_kind(self.chart).vars();
        let mut out = WeylElement::zero(self.chart, self.trunc);
        for (key, c) in &self.terms {
            for (i, v) in vars.iter().enumerate() {
                let Some((negate, forms)) = insert_form(i, key.forms) else {
                    continue;
                };
                let dc = c.derivative(i, *v);
                if dc.is_zero() {
                    continue;
                }
                let dc = if negate { dc.neg() } else { dc };
                out.add_term(WeylKey { forms, ..*key }, dc);
            }
        }
        out
    }

    /// Terms with `μ = 0`, no forms and `k ≤ kmax`, as coefficients per ħ-order.
    pub fn symbol(&self, kmax: u32) -> BTreeMap<u32, JetCoeff> {
        self.terms
            .iter()
            .filter(|(k, _)| k.deg_y() == 0 && k.forms == 0 && k.k <= kmax)
            .map(|(k, c)| (k.k, c.clone()))
            .collect()
    }

    /// `σ(a∘b)` for two 0-forms without building the full product: only
    /// `y^μ` against `y^ν` with `ν_q = μ_p`, `ν_p = μ_q` survives the
    /// projection, with weight `(iħ/2)^{|μ|} Π (−1)^{μ_p} μ_q! μ_p!`.
    pub fn sigma_of_product(&self, o: &WeylElement, kmax: u32) -> Result<BTreeMap<u32, JetCoeff>, WeylError> {
        self.same_chart(o)?;
        let mut out: BTreeMap<u32, JetCoeff> = BTreeMap::new();
        for (ka, ca) in self.terms.iter().filter(|(k, _)| k.forms == 0) {
            let n = ka.deg_y();
            let mu = ka.mu;
            let swapped = [mu[2], mu[3], mu[0], mu[1]];
            if ka.k + n > kmax {
                continue;
            }
            for kb_k in 0..=kmax - ka.k - n {
                let kb = WeylKey { k: kb_k, mu: swapped, forms: 0 };
                let Some(cb) = o.terms.get(&kb) else { continue };
                let mut w = BigRational::one();
                for j in 0..2 {
                    w *= BigRational::from_integer(factorial(mu[j]) * factorial(mu[j + 2]));
                    if mu[j + 2] % 2 == 1 {
                        w = -w;
                    }
                }
                w /= BigRational::from_integer(BigInt::from(2).pow(n));
                let c = ca.mul(cb).ok_or(WeylError::MixedJets)?.scale(&w).mul_i_pow(n);
                let slot = out.entry(ka.k + n + kb_k).or_default();
                *slot = slot.add(&c);
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = Chart::from_kind(self.chart).var_names();
        for (n, (key, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{}]", c)?;
            if key.k > 0 {
                write!(f, "*hbar^{}", key.k)?;
            }
            for (i, e) in key.mu.iter().enumerate() {
                if *e > 0 {
                    write!(f, "*y{}^{}", i + 1, e)?;
                }
            }
            for i in key.form_indices() {
                write!(f, "*d{}", names[i])?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeylElement({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{CRat, RatFun};

    fn trunc() -> TruncationConfig {
        TruncationConfig::new(6, 3).unwrap()
    }

    fn mono(k: u32, mu: [u8; 4], forms: &[usize], c: i64) -> WeylElement {
        WeylElement::monomial(ChartKind::Cartesian, trunc(), WeylKey::new(k, mu, forms), JetCoeff::real(RatFun::from_int(c)))
    }

    fn sum(parts: &[WeylElement]) -> WeylElement {
        parts.iter().fold(WeylElement::zero(ChartKind::Cartesian, trunc()), |acc, p| acc.add(p).unwrap())
    }

    #[test]
    fn position_times_momentum() {
        let got = mono(0, [1, 0, 0, 0], &[], 1).graded_product(&mono(0, [0, 0, 1, 0], &[], 1)).unwrap();
        let mut want = mono(0, [1, 0, 1, 0], &[], 1);
        want.add_term(WeylKey::new(1, [0; 4], &[]), JetCoeff::plain(CRat::i().scale(&rat(1, 2))));
        assert_eq!(got, want);
    }

    #[test]
    fn wedge_signs() {
        assert_eq!(wedge(0b0010, 0b0001), Some((true, 0b0011)));
        assert_eq!(wedge(0b0001, 0b0010), Some((false, 0b0011)));
        assert_eq!(wedge(0b0110, 0b1001), Some((false, 0b1111)));
        assert_eq!(wedge(0b1010, 0b0101), Some((true, 0b1111)));
        assert_eq!(wedge(0b0011, 0b0010), None);
        assert_eq!(insert_form(2, 0b1011), Some((false, 0b1111)));
        assert_eq!(insert_form(0, 0b0110), Some((false, 0b0111)));
        assert_eq!(insert_form(1, 0b0101), Some((true, 0b0111)));
    }

    #[test]
    fn delta_inverse_examples() {
        assert_eq!(mono(0, [0; 4], &[0], 1).delta_inv(), mono(0, [1, 0, 0, 0], &[], 1));
        let got = mono(0, [0, 1, 0, 0], &[0], 1).delta_inv();
        assert_eq!(got, mono(0, [1, 1, 0, 0], &[], 1).scale(&rat(1, 2)));
        assert!(mono(0, [1, 1, 0, 0], &[], 1).delta_inv().is_zero());
        let two_form = mono(0, [0; 4], &[1, 3], 1).delta_inv();
        let want = sum(&[mono(0, [0, 1, 0, 0], &[3], 1), mono(0, [0, 0, 0, 1], &[1], -1)]).scale(&rat(1, 2));
        assert_eq!(two_form, want);
    }

    #[test]
    fn projection_keeps_constants() {
        let a = sum(&[mono(0, [1, 1, 0, 0], &[], 1), mono(0, [0; 4], &[], 3), mono(1, [0, 0, 1, 0], &[], 1)]);
        assert_eq!(a.project_p(), mono(0, [0; 4], &[], 3));
    }

    #[test]
    fn commutator_matches_its_definition() {
        let a = sum(&[mono(0, [2, 0, 1, 0], &[1], 2), mono(1, [0, 1, 0, 1], &[0], -1)]);
        let b = sum(&[mono(0, [0, 1, 2, 1], &[], 1), mono(0, [1, 0, 0, 0], &[2, 3], 5)]);
        for (x, y) in [(&a, &b), (&b, &a), (&a, &a)] {
            let mut direct = x.graded_product(y).unwrap();
            for (kx, cx) in x.terms() {
                for (ky, cy) in y.terms() {
                    let lhs = WeylElement::monomial(ChartKind::Cartesian, trunc(), *ky, cy.clone());
                    let rhs = WeylElement::monomial(ChartKind::Cartesian, trunc(), *kx, cx.clone());
                    let back = lhs.graded_product(&rhs).unwrap();
                    let sign = (kx.form_degree() * ky.form_degree()) % 2 == 1;
                    direct = if sign { direct.add(&back) } else { direct.sub(&back) }.unwrap();
                }
            }
            assert_eq!(x.graded_commutator(y).unwrap(), direct);
        }
    }

    #[test]
    fn delta_squares_to_zero_and_homotopy() {
        let a = sum(&[mono(0, [2, 0, 1, 0], &[1], 2), mono(1, [0, 1, 0, 1], &[0, 2], -1), mono(0, [0; 4], &[3], 4)]);
        assert!(a.delta().delta().is_zero());
        let h = a.delta().delta_inv().add(&a.delta_inv().delta()).unwrap();
        assert_eq!(h, a);
    }
}
