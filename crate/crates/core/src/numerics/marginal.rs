use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bessel::bessel_jn;
use super::quadrature::{adaptive_integrate, QuadratureConfig};
use super::NumericsError;
use crate::charts::PhysParams;
use crate::wigner::{norm_constants, EigenLabels};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalPoint {
    pub r: f64,
    pub value: f64,
    pub error: f64,
    /// `2π²MN J_m(p₀r/ħ)²`, present for integer `m`.
    pub closed_form: Option<f64>,
}

pub fn marginal_closed_form(labels: &EigenLabels, params: &PhysParams, r: f64) -> Option<f64> {
    if labels.m.fract() != 0.0 {
        return None;
    }
    let (n, _) = norm_constants(labels, params);
    let j = bessel_jn(labels.m as i32, labels.k0(params) * r);
    Some(2.0 * PI * PI * params.m * n * j * j)
}

/// Position density `P(r) = 4πMN ∫₀^{π/2} cos(2mθ) J₀(2p₀r sinθ/ħ) dθ`
/// on each radius of `r_grid`.
pub fn marginal_p_em(
    labels: &EigenLabels,
    params: &PhysParams,
    r_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<MarginalPoint>, NumericsError> {
    if let Some(r) = r_grid.iter().find(|r| !(**r >= 0.0)) {
        return Err(NumericsError::Domain(format!("radius {r}")));
    }
    let (n, _) = norm_constants(labels, params);
    let pre = 4.0 * PI * params.m * n;
    let k0 = labels.k0(params);
    r_grid
        .par_iter()
        .map(|&r| {
            let x = 2.0 * k0 * r;
            let res = adaptive_integrate(|t: f64| (2.0 * labels.m * t).cos() * bessel_jn(0, x * t.sin()), 0.0, FRAC_PI_2, cfg)?;
            Ok(MarginalPoint {
                r,
                value: pre * res.value,
                error: pre * res.error,
                closed_form: marginal_closed_form(labels, params, r),
            })
        })
        .collect()
}

/// Analytic value of `∫cos(ax - b) e^{itx} e^{-εx²} dx`.
pub fn mollified_fourier_cos_reference(a: f64, b: f64, t: f64, eps: f64) -> Result<Complex64, NumericsError> {
    if !(eps > 0.0) {
        return Err(NumericsError::Domain(format!("mollifier width {eps}")));
    }
    let g = |s: f64| (-(s * s) / (4.0 * eps)).exp();
    let v = Complex64::from_polar(g(t + a), -b) + Complex64::from_polar(g(t - a), b);
    Ok(v * (0.5 * (PI / eps).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierSample {
    pub numeric: Complex64,
    pub analytic: Complex64,
    pub error: f64,
}

/// The same integral by quadrature over `|x| ≤ √(40/ε)`, where the
/// Gaussian weight has dropped below `e^{-40}`.
pub fn mollified_fourier_cos(a: f64, b: f64, t: f64, eps: f64) -> Result<FourierSample, NumericsError> {
    let analytic = mollified_fourier_cos_reference(a, b, t, eps)?;
    let x_max = (40.0 / eps).sqrt();
    let cycles = x_max * (a.abs() + t.abs() + 1.0) / PI;
    let scale = (PI / eps).sqrt();
    let cfg = QuadratureConfig { abs_tol: 1e-12 * scale, rel_tol: 1e-12, ..Default::default() }
        .with_panels(cycles.ceil() as usize)
        .with_max_subdivisions(20 * cycles.ceil() as usize + 2000);
    let res = adaptive_integrate(
        |x: f64| Complex64::from_polar((a * x - b).cos() * (-eps * x * x).exp(), t * x),
        -x_max,
        x_max,
        &cfg,
    )?;
    Ok(FourierSample { numeric: res.value, analytic, error: res.error })
}

/// Local maxima of `|∫cos(ax - b)e^{itx}e^{-εx²}dx|` over `t_grid`, by
/// quadrature at every grid point. Maxima below `1e-6` of the largest value
/// are quadrature noise on the flat tails and are dropped.
pub fn smeared_peaks(a: f64, b: f64, eps: f64, t_grid: &[f64]) -> Result<Vec<f64>, NumericsError> {
    let vals: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| mollified_fourier_cos(a, b, t, eps).map(|s| s.numeric.norm()))
        .collect::<Result<_, _>>()?;
    let floor = 1e-6 * vals.iter().cloned().fold(0.0, f64::max);
    Ok((1..vals.len().saturating_sub(1))
        .filter(|&i| vals[i] > floor && vals[i] > vals[i - 1] && vals[i] >= vals[i + 1])
        .map(|i| t_grid[i])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_value() {
        let p = PhysParams::natural();
        let l = EigenLabels::new(1.0, 0.0).unwrap();
        let pts = marginal_p_em(&l, &p, &[0.0], &QuadratureConfig::default()).unwrap();
        let want = 1.0 / (2.0 * PI);
        assert!((pts[0].value - want).abs() < 1e-14);
        assert!((pts[0].closed_form.unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn analytic_fourier_examples() {
        let v = mollified_fourier_cos_reference(1.0, 0.0, 1.0, 0.1).unwrap();
        let want = 0.5 * (10.0 * PI).sqrt() * ((-10.0f64).exp() + 1.0);
        assert!((v - Complex64::new(want, 0.0)).norm() < 1e-14);
        let v = mollified_fourier_cos_reference(0.0, 0.7, 0.0, 0.3).unwrap();
        assert!((v.re - 0.7f64.cos() * (PI / 0.3).sqrt()).abs() < 1e-14);
        assert!(mollified_fourier_cos_reference(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn numeric_fourier_matches() {
        let s = mollified_fourier_cos(1.3, 0.4, 0.9, 0.05).unwrap();
        assert!((s.numeric - s.analytic).norm() <= 1e-8 * s.analytic.norm());
    }
}
