//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! Endpoint singularities are never left to the subdivision loop: the
//! caller declares a substitution that makes the integrand finite, and the
//! rule only ever samples interior points.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::NumericsError;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Values the rule can accumulate: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn finite(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Change of variables applied before the rule sees the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Substitution {
    #[default]
    None,
    /// `x = a + (b-a)u²`, for `1/√(x-a)` behaviour.
    SqrtLeft,
    /// `x = b - (b-a)u²`, for `1/√(b-x)` behaviour.
    SqrtRight,
    /// `x = a + (b-a)sin²u`, for `1/√((x-a)(b-x))` behaviour.
    SinSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub substitution: Substitution,
    /// Equal panels the interval is cut into before adapting. Needed when
    /// the integrand has features narrower than the first rule can see.
    pub initial_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
            substitution: Substitution::None,
            initial_panels: 1,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self, NumericsError> {
        if !(abs_tol > 0.0 && rel_tol > 0.0) {
            return Err(NumericsError::InvalidConfig(format!(
                "tolerances must be positive (abs {abs_tol}, rel {rel_tol})"
            )));
        }
        Ok(QuadratureConfig { abs_tol, rel_tol, ..Default::default() })
    }

    pub fn with_substitution(mut self, s: Substitution) -> Self {
        self.substitution = s;
        self
    }

    pub fn with_panels(mut self, n: usize) -> Self {
        self.initial_panels = n.max(1);
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<V> {
    pub value: V,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

fn kronrod<V: QuadValue>(f: &impl Fn(f64) -> V, a: f64, b: f64) -> Result<Segment<V>, NumericsError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let sample = |x: f64| {
        let v = f(x);
        if v.finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFinite { x })
        }
    };
    let fc = sample(center)?;
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    let mut abs = fc.magnitude() * WGK[7];
    let mut fv = [(V::zero(), V::zero()); 7];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let (f1, f2) = (sample(center - dx)?, sample(center + dx)?);
        *slot = (f1, f2);
        kron = kron + (f1 + f2) * WGK[j];
        abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut asc = WGK[7] * (fc - mean).magnitude();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((*f1 - mean).magnitude() + (*f2 - mean).magnitude());
    }
    let scale = half.abs();
    let (abs, asc) = (abs * scale, asc * scale);
    let mut err = ((kron - gauss) * half).magnitude();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs);
    }
    Ok(Segment { a, b, value: kron * half, error: err })
}

/// `∫_a^b f(x) dx` with a global error target
/// `max(abs_tol, rel_tol·|value|)`.
pub fn adaptive_integrate<V: QuadValue>(
    f: impl Fn(f64) -> V,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult<V>, NumericsError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::Domain(format!("integration limits [{a}, {b}]")));
    }
    let w = b - a;
    match cfg.substitution {
        Substitution::None => integrate_plain(&f, a, b, cfg),
        Substitution::SqrtLeft => integrate_plain(&|u: f64| f(a + w * u * u) * (2.0 * w * u), 0.0, 1.0, cfg),
        Substitution::SqrtRight => integrate_plain(&|u: f64| f(b - w * u * u) * (2.0 * w * u), 0.0, 1.0, cfg),
        Substitution::SinSquared => integrate_plain(
            &|u: f64| {
                let (s, c) = u.sin_cos();
                f(a + w * s * s) * (2.0 * w * s * c)
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            cfg,
        ),
    }
}

fn integrate_plain<V: QuadValue>(
    f: &impl Fn(f64) -> V,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult<V>, NumericsError> {
    let panels = cfg.initial_panels.max(1);
    let h = (b - a) / panels as f64;
    let mut segs = Vec::with_capacity(panels);
    for i in 0..panels {
        let lo = a + h * i as f64;
        let hi = if i + 1 == panels { b } else { a + h * (i + 1) as f64 };
        segs.push(kronrod(f, lo, hi)?);
    }
    let mut evaluations = 15 * panels;
    loop {
        let value = segs.iter().fold(V::zero(), |s, g| s + g.value);
        let error: f64 = segs.iter().map(|g| g.error).sum();
        let target = cfg.abs_tol.max(cfg.rel_tol * value.magnitude());
        if error <= target {
            return Ok(QuadResult { value, error, evaluations, intervals: segs.len() });
        }
        if segs.len() >= cfg.max_subdivisions.max(panels) {
            return Err(NumericsError::BudgetExhausted {
                value: value.magnitude(),
                error,
                intervals: segs.len(),
            });
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            return Err(NumericsError::BudgetExhausted {
                value: value.magnitude(),
                error,
                intervals: segs.len() + 1,
            });
        }
        segs.push(kronrod(f, s.a, mid)?);
        segs.push(kronrod(f, mid, s.b)?);
        evaluations += 30;
    }
}

/// Nested two-dimensional integral, outer variable first.
pub fn adaptive_integrate_2d<V: QuadValue>(
    f: impl Fn(f64, f64) -> V,
    outer: (f64, f64),
    inner: (f64, f64),
    outer_cfg: &QuadratureConfig,
    inner_cfg: &QuadratureConfig,
) -> Result<QuadResult<V>, NumericsError> {
    let failure = std::cell::RefCell::new(None);
    let res = adaptive_integrate(
        |x| match adaptive_integrate(|y| f(x, y), inner.0, inner.1, inner_cfg) {
            Ok(r) => r.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                V::zero()
            }
        },
        outer.0,
        outer.1,
        outer_cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    res
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sine_over_half_period() {
        let r = adaptive_integrate(f64::sin, 0.0, PI, &QuadratureConfig::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.error < 1e-12);
    }

    #[test]
    fn inverse_square_root_needs_the_substitution() {
        let cfg = QuadratureConfig::default().with_substitution(Substitution::SqrtLeft);
        let r = adaptive_integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let tight = QuadratureConfig::default().with_max_subdivisions(40);
        assert!(matches!(
            adaptive_integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &tight),
            Err(NumericsError::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn arcsine_weight() {
        let cfg = QuadratureConfig::default().with_substitution(Substitution::SinSquared);
        let r = adaptive_integrate(|x: f64| 1.0 / (x * (3.0 - x)).sqrt(), 0.0, 3.0, &cfg).unwrap();
        assert!((r.value - PI).abs() < 1e-12);
        let cfg = QuadratureConfig::default().with_substitution(Substitution::SqrtRight);
        let r = adaptive_integrate(|x: f64| 1.0 / (1.0 - x).sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_samples_are_errors() {
        let r = adaptive_integrate(|x: f64| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &QuadratureConfig::default());
        assert!(matches!(r, Err(NumericsError::NonFinite { .. })));
    }

    #[test]
    fn complex_and_two_dimensional() {
        let cfg = QuadratureConfig::default();
        let r = adaptive_integrate(|x: f64| Complex64::new(0.0, x).exp(), 0.0, PI, &cfg).unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        let r = adaptive_integrate_2d(|x, y| x * y * y, (0.0, 2.0), (0.0, 3.0), &cfg, &cfg).unwrap();
        assert!((r.value - 18.0).abs() < 1e-11);
    }

    #[test]
    fn rejects_nonpositive_tolerances() {
        assert!(QuadratureConfig::new(0.0, 1e-9).is_err());
        assert!(QuadratureConfig::new(1e-9, -1.0).is_err());
    }
}
