//! Complex forward-mode jets truncated at second order in four variables.
//!
//! Used to get exact partial derivatives of closed forms without going
//! through the symbolic kernel, so residual checks compare two unrelated
//! code paths.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: C,
    pub g: [C; 4],
    pub h: [[C; 4]; 4],
}

impl Jet2 {
    pub fn constant(v: C) -> Self {
        Jet2 { v, g: [ZERO; 4], h: [[ZERO; 4]; 4] }
    }

    pub fn real(v: f64) -> Self {
        Self::constant(C::new(v, 0.0))
    }

    /// The coordinate function `x_i` at value `v`.
    pub fn var(v: f64, i: usize) -> Self {
        let mut j = Self::real(v);
        j.g[i] = C::new(1.0, 0.0);
        j
    }

    /// Seeds all four coordinates at once.
    pub fn coords(x: [f64; 4]) -> [Jet2; 4] {
        [0, 1, 2, 3].map(|i| Jet2::var(x[i], i))
    }

    /// `f(self)` from `f`, `f'` and `f''` at the current value.
    fn chain(self, f0: C, f1: C, f2: C) -> Self {
        let mut out = Jet2::constant(f0);
        for i in 0..4 {
            out.g[i] = f1 * self.g[i];
            for j in 0..4 {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }

    pub fn recip(self) -> Self {
        let r = self.v.inv();
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn cos(self) -> Self {
        let (c, s) = (self.v.cos(), self.v.sin());
        self.chain(c, -s, -c)
    }

    pub fn sin(self) -> Self {
        let (c, s) = (self.v.cos(), self.v.sin());
        self.chain(s, c, -s)
    }

    pub fn acos(self) -> Self {
        let one_minus = 1.0 - self.v * self.v;
        let d = -one_minus.sqrt().inv();
        self.chain(self.v.acos(), d, d * self.v / one_minus)
    }

    pub fn scale(self, c: C) -> Self {
        let mut out = self;
        out.v *= c;
        for i in 0..4 {
            out.g[i] *= c;
            for j in 0..4 {
                out.h[i][j] *= c;
            }
        }
        out
    }

    /// `∂^α` for `|α| ≤ 2`; `None` beyond the truncation.
    pub fn deriv(&self, alpha: [u8; 4]) -> Option<C> {
        let idx: Vec<usize> = (0..4).flat_map(|i| std::iter::repeat(i).take(alpha[i] as usize)).collect();
        match idx.as_slice() {
            [] => Some(self.v),
            [i] => Some(self.g[*i]),
            [i, j] => Some(self.h[*i][*j]),
            _ => None,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let mut out = self;
        out.v += o.v;
        for i in 0..4 {
            out.g[i] += o.g[i];
            for j in 0..4 {
                out.h[i][j] += o.h[i][j];
            }
        }
        out
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(C::new(-1.0, 0.0))
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v * o.v);
        for i in 0..4 {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..4 {
                out.h[i][j] = self.h[i][j] * o.v + self.g[i] * o.g[j] + self.g[j] * o.g[i] + self.v * o.h[i][j];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, c: f64) -> Jet2 {
        let mut out = self;
        out.v += c;
        out
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, j: Jet2) -> Jet2 {
        -j + self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(C::new(c, 0.0))
    }
}

impl Mul<C> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: C) -> Jet2 {
        self.scale(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C, b: f64) -> bool {
        (a - b).norm() < 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn product_and_quotient_rules() {
        let [x, y, ..] = Jet2::coords([1.5, -0.4, 0.0, 0.0]);
        let f = x * x * y / (x + 1.0);
        // f = x²y/(x+1)
        let (xv, yv) = (1.5f64, -0.4f64);
        assert!(close(f.v, xv * xv * yv / (xv + 1.0)));
        assert!(close(f.g[0], yv * (xv * xv + 2.0 * xv) / (xv + 1.0).powi(2)));
        assert!(close(f.g[1], xv * xv / (xv + 1.0)));
        assert!(close(f.h[0][0], 2.0 * yv / (xv + 1.0).powi(3)));
        assert!(close(f.h[0][1], (xv * xv + 2.0 * xv) / (xv + 1.0).powi(2)));
        assert_eq!(f.h[0][1], f.h[1][0]);
    }

    #[test]
    fn elementary_functions_against_finite_differences() {
        let g = |x: f64| ((x.sqrt() * 0.7).cos() + (0.3 * x).exp() * x.sin()) / (x.cos() + 2.0).recip() + (x / 4.0).acos();
        let j = {
            let x = Jet2::var(1.3, 2);
            ((x.sqrt() * 0.7).cos() + (x * 0.3).exp() * x.sin()) / (x.cos() + 2.0).recip() + (x * 0.25).acos()
        };
        let h = 1e-4;
        let d1 = (g(1.3 + h) - g(1.3 - h)) / (2.0 * h);
        let d2 = (g(1.3 + h) - 2.0 * g(1.3) + g(1.3 - h)) / (h * h);
        assert!(close(j.v, g(1.3)));
        assert!((j.g[2].re - d1).abs() < 1e-7);
        assert!((j.h[2][2].re - d2).abs() < 1e-5);
        assert_eq!(j.deriv([0, 0, 2, 0]), Some(j.h[2][2]));
        assert_eq!(j.deriv([0, 0, 3, 0]), None);
    }

    #[test]
    fn complex_phase() {
        let chi = Jet2::var(0.4, 1);
        let w = (chi * C::new(0.0, 3.0)).exp();
        let e = C::from_polar(1.0, 1.2);
        assert!((w.v - e).norm() < 1e-15);
        assert!((w.g[1] - C::new(0.0, 3.0) * e).norm() < 1e-14);
        assert!((w.h[1][1] + 9.0 * e).norm() < 1e-14);
    }
}
