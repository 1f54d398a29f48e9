//! Reference Moyal product in a canonical chart: the exponential
//! bidifferential series and, for Gaussian-times-polynomial functions, the
//! closed-form evaluation of the eight-dimensional integral kernel.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::symbolic::{CRat, HbarSeries, Poly, RatFun, Var, NVARS};

pub const DEFAULT_ORDER: u32 = 6;

const CARTESIAN: [Var; 4] = [Var::X, Var::Y, Var::Px, Var::Py];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoyalError {
    #[error("quadratic form is not positive semidefinite: the integral diverges")]
    NonConvergent,
    #[error("combined quadratic form is singular")]
    Singular,
    #[error("matrix is not symmetric")]
    Asymmetric,
    #[error("coefficient is not a polynomial")]
    NotPolynomial,
    #[error("bracket has a term without hbar")]
    NonCommutingCoefficients,
}

/// Every `(α, β)` with weight `w` such that the order-`k` term of the
/// series is `(iħ)^k Σ w ∂^α f ∂^β g`. Built by enumerating all `4^k`
/// ordered choices of Poisson-tensor entries, one per derivative pair.
pub fn bidifferential_terms(order: u32) -> Vec<(u32, [u8; 4], [u8; 4], BigRational)> {
    // (left index, right index, sign) for Λ^{x p_x} = Λ^{y p_y} = +1.
    let entries: [(usize, usize, i64); 4] = [(0, 2, 1), (2, 0, -1), (1, 3, 1), (3, 1, -1)];
    let mut out = Vec::new();
    let mut level: BTreeMap<([u8; 4], [u8; 4]), BigInt> = BTreeMap::new();
    level.insert(([0; 4], [0; 4]), BigInt::from(1));
    let mut norm = BigInt::from(1);
    for k in 0..=order {
        if k > 0 {
            let mut next = BTreeMap::new();
            for ((a, b), w) in &level {
                for (i, j, s) in entries {
                    let (mut a2, mut b2) = (*a, *b);
                    a2[i] += 1;
                    b2[j] += 1;
                    *next.entry((a2, b2)).or_insert_with(BigInt::zero) += w * s;
                }
            }
            level = next;
            norm *= BigInt::from(2 * k);
        }
        for ((a, b), w) in &level {
            if !w.is_zero() {
                out.push((k, *a, *b, BigRational::new(w.clone(), norm.clone())));
            }
        }
    }
    out
}

fn derivative_cached(cache: &mut HashMap<[u8; 4], CRat>, vars: [Var; 4], alpha: [u8; 4]) -> CRat {
    if let Some(c) = cache.get(&alpha) {
        return c.clone();
    }
    let i = alpha.iter().position(|&e| e > 0).expect("zero multi-index is seeded");
    let mut lower = alpha;
    lower[i] -= 1;
    let d = derivative_cached(cache, vars, lower).derivative(vars[i]);
    cache.insert(alpha, d.clone());
    d
}

/// `f ⋆ g` through ħ^`order` in a canonical chart whose coordinates are
/// `vars = (q₁, q₂, p₁, p₂)`.
pub fn canonical_moyal(vars: [Var; 4], f: &CRat, g: &CRat, order: u32) -> HbarSeries {
    let mut fc = HashMap::from([([0u8; 4], f.clone())]);
    let mut gc = HashMap::from([([0u8; 4], g.clone())]);
    let mut out = HbarSeries::zero();
    for (k, a, b, w) in bidifferential_terms(order) {
        let da = derivative_cached(&mut fc, vars, a);
        if da.is_zero() {
            continue;
        }
        let db = derivative_cached(&mut gc, vars, b);
        out.add_term(k, da.mul(&db).scale(&w).mul_i_pow(k));
    }
    out
}

/// Moyal product in the Cartesian chart `(x, y, p_x, p_y)`.
pub fn moyal_differential(f: &CRat, g: &CRat, order: u32) -> HbarSeries {
    canonical_moyal(CARTESIAN, f, g, order)
}

/// `(f⋆g − g⋆f)/(iħ)`, through ħ^`order - 1`.
pub fn canonical_bracket(vars: [Var; 4], f: &CRat, g: &CRat, order: u32) -> Result<HbarSeries, MoyalError> {
    let d = canonical_moyal(vars, f, g, order).sub(&canonical_moyal(vars, g, f, order));
    d.div_i_hbar().ok_or(MoyalError::NonCommutingCoefficients)
}

pub fn moyal_bracket(f: &CRat, g: &CRat, order: u32) -> Result<HbarSeries, MoyalError> {
    canonical_bracket(CARTESIAN, f, g, order)
}

/// `P(v) · exp(−½ vᵀAv + bᵀv)` over the Cartesian phase space, with `P`
/// a complex polynomial and `A` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolynomial {
    poly: CRat,
    a: [[BigRational; 4]; 4],
    b: [BigRational; 4],
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn real_matrix(a: &[[BigRational; 4]; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| to_f64(&a[i][j]))
}

impl GaussianPolynomial {
    pub fn new(poly: CRat, a: [[BigRational; 4]; 4], b: [BigRational; 4]) -> Result<Self, MoyalError> {
        if !poly.re.is_polynomial() || !poly.im.is_polynomial() {
            return Err(MoyalError::NotPolynomial);
        }
        for i in 0..4 {
            for j in 0..i {
                if a[i][j] != a[j][i] {
                    return Err(MoyalError::Asymmetric);
                }
            }
        }
        let eig = SymmetricEigen::new(real_matrix(&a));
        if eig.eigenvalues.iter().any(|&l| l < -1e-12) {
            return Err(MoyalError::NonConvergent);
        }
        Ok(GaussianPolynomial { poly, a, b })
    }

    /// A plain polynomial (zero quadratic form).
    pub fn polynomial(poly: CRat) -> Result<Self, MoyalError> {
        let z = || BigRational::zero();
        GaussianPolynomial::new(poly, std::array::from_fn(|_| std::array::from_fn(|_| z())), std::array::from_fn(|_| z()))
    }

    /// `poly · exp(−s (x² + y² + p_x² + p_y²))`.
    pub fn isotropic(poly: CRat, s: BigRational) -> Result<Self, MoyalError> {
        let two_s = &s + &s;
        let a = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { two_s.clone() } else { BigRational::zero() }));
        GaussianPolynomial::new(poly, a, std::array::from_fn(|_| BigRational::zero()))
    }

    pub fn poly(&self) -> &CRat {
        &self.poly
    }

    /// `∂_i Q` for the exponent `Q`, a linear polynomial.
    fn exponent_gradient(&self, i: usize) -> RatFun {
        let mut p = Poly::constant(self.b[i].clone());
        for j in 0..4 {
            if !self.a[i][j].is_zero() {
                p = p.sub(&Poly::var(CARTESIAN[j]).scale(&self.a[i][j]));
            }
        }
        RatFun::from_poly(p)
    }

    /// Exact partial derivative along Cartesian coordinate `i`; the result
    /// stays in the class.
    pub fn derivative(&self, i: usize) -> GaussianPolynomial {
        let v = CARTESIAN[i];
        let poly = self.poly.derivative(v).add(&self.poly.mul_real(&self.exponent_gradient(i)));
        GaussianPolynomial { poly, a: self.a.clone(), b: self.b.clone() }
    }

    pub fn eval(&self, pt: [f64; 4]) -> Complex64 {
        let mut q = 0.0;
        for i in 0..4 {
            q += to_f64(&self.b[i]) * pt[i];
            for j in 0..4 {
                q -= 0.5 * pt[i] * to_f64(&self.a[i][j]) * pt[j];
            }
        }
        self.poly.eval(&ring_point(pt)) * q.exp()
    }
}

fn ring_point(pt: [f64; 4]) -> [f64; NVARS] {
    let mut p = [0.0; NVARS];
    for (v, x) in CARTESIAN.iter().zip(pt) {
        p[v.index()] = x;
    }
    p
}

/// Series value of `f ⋆ g` at a point for polynomial `f`; the series
/// terminates once the derivatives of `f` vanish.
pub fn moyal_differential_gaussian(f: &CRat, g: &GaussianPolynomial, pt: [f64; 4], hbar: f64, order: u32) -> Complex64 {
    let mut fc = HashMap::from([([0u8; 4], f.clone())]);
    let mut gc: HashMap<[u8; 4], GaussianPolynomial> = HashMap::from([([0u8; 4], g.clone())]);
    let rp = ring_point(pt);
    let mut total = Complex64::zero();
    for (k, a, b, w) in bidifferential_terms(order) {
        let da = derivative_cached(&mut fc, CARTESIAN, a);
        if da.is_zero() {
            continue;
        }
        let db = gaussian_derivative(&mut gc, b);
        let term = da.eval(&rp) * db.eval(pt) * to_f64(&w);
        total += term * (Complex64::i() * hbar).powu(k);
    }
    total
}

fn gaussian_derivative(cache: &mut HashMap<[u8; 4], GaussianPolynomial>, alpha: [u8; 4]) -> GaussianPolynomial {
    if let Some(g) = cache.get(&alpha) {
        return g.clone();
    }
    let i = alpha.iter().position(|&e| e > 0).expect("zero multi-index is seeded");
    let mut lower = alpha;
    lower[i] -= 1;
    let d = gaussian_derivative(cache, lower).derivative(i);
    cache.insert(alpha, d.clone());
    d
}

/// Complex polynomial in the eight integration variables.
type Poly8 = HashMap<[u8; 8], Complex64>;

fn numeric_terms(c: &CRat) -> Result<Vec<([u8; 4], Complex64)>, MoyalError> {
    let mut out: BTreeMap<[u8; 4], Complex64> = BTreeMap::new();
    for (part, unit) in [(&c.re, Complex64::new(1.0, 0.0)), (&c.im, Complex64::i())] {
        if part.is_zero() {
            continue;
        }
        let den = part.denom().as_constant().ok_or(MoyalError::NotPolynomial)?;
        for (m, coef) in part.numer().terms() {
            let e = [m.exp(Var::X) as u8, m.exp(Var::Y) as u8, m.exp(Var::Px) as u8, m.exp(Var::Py) as u8];
            *out.entry(e).or_insert_with(Complex64::zero) += unit * to_f64(&(coef / &den));
        }
    }
    Ok(out.into_iter().collect())
}

fn binomial(n: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// Substitute `w = μ + u` into `Σ c z^α` placed at slots `offset..offset+4`.
fn shifted(terms: &[([u8; 4], Complex64)], mu: &[Complex64], offset: usize) -> Poly8 {
    let mut out: Poly8 = HashMap::new();
    for (alpha, c) in terms {
        let mut partial: Vec<([u8; 8], Complex64)> = vec![([0; 8], *c)];
        for i in 0..4 {
            let n = alpha[i];
            let mut next = Vec::new();
            for (e, v) in &partial {
                for k in 0..=n {
                    let mut e2 = *e;
                    e2[offset + i] = k;
                    next.push((e2, v * binomial(n, k) * mu[offset + i].powu((n - k) as u32)));
                }
            }
            partial = next;
        }
        for (e, v) in partial {
            *out.entry(e).or_insert_with(Complex64::zero) += v;
        }
    }
    out
}

/// `E[u^γ]` for a centred (complex) Gaussian with covariance `Σ`, by the
/// recursion `E[u_i u^β] = Σ_j Σ_ij β_j E[u^{β−e_j}]`.
fn moment(gamma: [u8; 8], sigma: &DMatrix<Complex64>, memo: &mut HashMap<[u8; 8], Complex64>) -> Complex64 {
    let total: u32 = gamma.iter().map(|&e| e as u32).sum();
    if total == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if total % 2 == 1 {
        return Complex64::zero();
    }
    if let Some(v) = memo.get(&gamma) {
        return *v;
    }
    let i = gamma.iter().position(|&e| e > 0).unwrap();
    let mut beta = gamma;
    beta[i] -= 1;
    let mut acc = Complex64::zero();
    for j in 0..8 {
        if beta[j] == 0 {
            continue;
        }
        let mut lower = beta;
        lower[j] -= 1;
        acc += sigma[(i, j)] * beta[j] as f64 * moment(lower, sigma, memo);
    }
    memo.insert(gamma, acc);
    acc
}

/// `(f ⋆ g)(pt)` from the integral kernel
/// `(πħ)^{-4} ∫ f(z′) g(z″) exp((2i/ħ)[(r−r′)(p−p″) − (r−r″)(p−p′)])`,
/// evaluated in closed form by completing the square.
pub fn moyal_integral_gaussian(
    f: &GaussianPolynomial,
    g: &GaussianPolynomial,
    pt: [f64; 4],
    hbar: f64,
) -> Result<Complex64, MoyalError> {
    let i2h = Complex64::new(0.0, 2.0 / hbar);
    let mut m = DMatrix::<Complex64>::zeros(8, 8);
    let mut c = DVector::<Complex64>::zeros(8);
    for (off, h) in [(0, f), (4, g)] {
        for i in 0..4 {
            c[off + i] += to_f64(&h.b[i]);
            for j in 0..4 {
                m[(off + i, off + j)] += to_f64(&h.a[i][j]);
            }
        }
    }
    // Quadratic part r′·p″ − r″·p′, written as −½ wᵀKw.
    for d in 0..2 {
        let (r1, p1, r2, p2) = (d, 2 + d, 4 + d, 6 + d);
        m[(r1, p2)] -= i2h;
        m[(p2, r1)] -= i2h;
        m[(r2, p1)] += i2h;
        m[(p1, r2)] += i2h;
        // Linear part r·p′ − p·r′ − r·p″ + p·r″.
        let (r, p) = (pt[d], pt[2 + d]);
        c[p1] += i2h * r;
        c[r1] -= i2h * p;
        c[p2] -= i2h * r;
        c[r2] += i2h * p;
    }
    let real = m.map(|z| z.re);
    let eig = SymmetricEigen::new(real.clone());
    if eig.eigenvalues.iter().any(|&l| l < -1e-12) {
        return Err(MoyalError::NonConvergent);
    }
    // Eigenvalues of A + iB with A ⪰ 0 lie in the closed right half-plane,
    // where the principal square root is the continuation from B = 0.
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    let mut root_det = Complex64::new(1.0, 0.0);
    for k in 0..8 {
        let l = t[(k, k)];
        if l.norm() < 1e-300 {
            return Err(MoyalError::Singular);
        }
        root_det *= l.sqrt();
    }
    let sigma = m.clone().try_inverse().ok_or(MoyalError::Singular)?;
    let mu = &sigma * &c;
    let exponent = 0.5 * (c.transpose() * &mu)[(0, 0)];

    let mu_v: Vec<Complex64> = mu.iter().copied().collect();
    let pf = shifted(&numeric_terms(&f.poly)?, &mu_v, 0);
    let pg = shifted(&numeric_terms(&g.poly)?, &mu_v, 4);
    let mut memo = HashMap::new();
    let mut expectation = Complex64::zero();
    for (ea, va) in &pf {
        for (eb, vb) in &pg {
            let mut e = *ea;
            for k in 4..8 {
                e[k] = eb[k];
            }
            expectation += va * vb * moment(e, &sigma, &mut memo);
        }
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let gauss = two_pi.powi(4) / root_det * exponent.exp();
    Ok(gauss * expectation / (std::f64::consts::PI * hbar).powi(4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse_observable;

    fn c(s: &str) -> CRat {
        CRat::real(parse_observable(s).unwrap().to_ratfun().unwrap())
    }

    #[test]
    fn position_momentum() {
        assert_eq!(moyal_differential(&c("x"), &c("px"), DEFAULT_ORDER).to_string(), "x*px + (i/2)*hbar");
    }

    #[test]
    fn series_weights_at_order_two() {
        let terms = bidifferential_terms(2);
        let w = terms
            .iter()
            .find(|(k, a, b, _)| *k == 2 && *a == [2, 0, 0, 0] && *b == [0, 0, 2, 0])
            .map(|t| t.3.clone())
            .unwrap();
        assert_eq!(w, crate::symbolic::rat(1, 8));
        let mixed = terms
            .iter()
            .find(|(k, a, b, _)| *k == 2 && *a == [1, 0, 1, 0] && *b == [1, 0, 1, 0])
            .map(|t| t.3.clone())
            .unwrap();
        assert_eq!(mixed, crate::symbolic::rat(-1, 4));
    }
}
