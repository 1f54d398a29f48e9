//! Closed-form Wigner eigenfunctions of the free particle in the plane.
//!
//! Energy–angular-momentum states live naturally in the `(T, chi, H, L)`
//! chart, where they depend on `H` and `L` only (up to the `chi` phase of the
//! cross functions). Everything here is evaluated in units where the caller's
//! `PhysParams` fix `M` and `ħ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charts::{ActionAnglePoint, ChartError, PhysParams, PolarPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WignerError {
    #[error("energy must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("H must be positive, got {0}")]
    NonPositiveH(f64),
    #[error("momentum magnitude must be positive, got {0}")]
    NonPositiveMomentum(f64),
    #[error("index {0} is not an integer")]
    NonInteger(f64),
    #[error("momentum eigenstate at rest has no direction")]
    Degenerate,
    #[error("mollifier width must be positive, got {0}")]
    InvalidWidth(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid touches the singular locus H = E at H = {0}")]
    SingularGrid(f64),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

/// A value, or the tagged divergence at the boundary `H = E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sample<T> {
    Value(T),
    Singular,
}

impl<T: Copy> Sample<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Sample::Value(v) => Some(*v),
            Sample::Singular => None,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, Sample::Singular)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenLabels {
    pub e: f64,
    pub m: f64,
    pub mprime: f64,
    pub alpha: f64,
    pub d_offset: f64,
}

/// Reasons a labelled function is evaluable but not a physical eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelFlags {
    pub non_integer: bool,
    pub offset_not_eigen: bool,
}

impl LabelFlags {
    pub fn physical(&self) -> bool {
        !self.non_integer && !self.offset_not_eigen
    }
}

fn is_integer(v: f64) -> bool {
    v.is_finite() && v.fract() == 0.0
}

impl EigenLabels {
    /// Diagonal labels `m = m'`, zero phase, zero offset.
    pub fn new(e: f64, m: f64) -> Result<Self, WignerError> {
        Self::cross(e, m, m, 0.0)
    }

    pub fn cross(e: f64, m: f64, mprime: f64, alpha: f64) -> Result<Self, WignerError> {
        if !(e > 0.0) || !e.is_finite() {
            return Err(WignerError::NonPositiveEnergy(e));
        }
        Ok(EigenLabels { e, m, mprime, alpha, d_offset: 0.0 })
    }

    pub fn with_offset(mut self, d: f64) -> Self {
        self.d_offset = d;
        self
    }

    pub fn is_integer(&self) -> bool {
        is_integer(self.m) && is_integer(self.mprime)
    }

    pub fn flags(&self) -> LabelFlags {
        let k = self.d_offset / PI;
        LabelFlags {
            non_integer: !self.is_integer(),
            offset_not_eigen: (k - k.round()).abs() > 1e-12,
        }
    }

    pub fn p0(&self, params: &PhysParams) -> f64 {
        (2.0 * params.m * self.e).sqrt()
    }

    pub fn k0(&self, params: &PhysParams) -> f64 {
        self.p0(params) / params.hbar
    }
}

/// `(N_Em, N_Emm')` with `N_Em = 1/(4π³Mħ²)` and the cross constant
/// carrying the phase `exp(i(m - m')α)`.
pub fn norm_constants(labels: &EigenLabels, params: &PhysParams) -> (f64, Complex64) {
    let n = 1.0 / (4.0 * PI.powi(3) * params.m * params.hbar * params.hbar);
    let phase = Complex64::from_polar(1.0, (labels.m - labels.mprime) * labels.alpha);
    (n, phase * n)
}

/// The `L`-oscillation frequency `(2/ħ)√((E-H)/H)` and the angle
/// `arccos√(H/E)`, for `0 < H < E`.
fn phase_parts(e: f64, h: f64, hbar: f64) -> (f64, f64) {
    let freq = 2.0 / hbar * ((e - h) / h).sqrt();
    let theta = (h / e).sqrt().min(1.0).acos();
    (freq, theta)
}

/// Heaviside-gated radial factor `Y(E-H)/√(H(E-H)) cos(aL - μθ + D)`.
fn radial(e: f64, mu: f64, d: f64, h: f64, l: f64, hbar: f64) -> Result<Sample<f64>, WignerError> {
    if !(h > 0.0) {
        return Err(WignerError::NonPositiveH(h));
    }
    if h > e {
        return Ok(Sample::Value(0.0));
    }
    if h == e {
        return Ok(Sample::Singular);
    }
    let (freq, theta) = phase_parts(e, h, hbar);
    Ok(Sample::Value((freq * l - mu * theta + d).cos() / (h * (e - h)).sqrt()))
}

/// `W_Em(T, chi, H, L)`. Only `labels.m` and the offset enter.
pub fn eval_w_em(labels: &EigenLabels, pt: &ActionAnglePoint, params: &PhysParams) -> Result<Sample<f64>, WignerError> {
    let (n, _) = norm_constants(labels, params);
    let r = radial(labels.e, 2.0 * labels.m, labels.d_offset, pt.h, pt.l, params.hbar)?;
    Ok(match r {
        Sample::Value(v) => Sample::Value(n * v),
        Sample::Singular => Sample::Singular,
    })
}

/// `W_Em` in position-polar and momentum-polar coordinates `(r, φ, p, χ)`.
pub fn eval_w_em_polar(labels: &EigenLabels, pt: &PolarPoint, params: &PhysParams) -> Result<Sample<f64>, WignerError> {
    if !(pt.p > 0.0) {
        return Err(WignerError::NonPositiveMomentum(pt.p));
    }
    let p0 = labels.p0(params);
    if pt.p > p0 {
        return Ok(Sample::Value(0.0));
    }
    if pt.p == p0 {
        return Ok(Sample::Singular);
    }
    let (n, _) = norm_constants(labels, params);
    let q = ((p0 - pt.p) * (p0 + pt.p)).sqrt();
    let arg = 2.0 * pt.r * q / params.hbar * (pt.chi - pt.phi).sin() - 2.0 * labels.m * (pt.p / p0).min(1.0).acos()
        + labels.d_offset;
    Ok(Sample::Value(2.0 * params.m * n / (pt.p * q) * arg.cos()))
}

/// Cross-Wigner function `W_Emm'`.
pub fn eval_w_emmp(labels: &EigenLabels, pt: &ActionAnglePoint, params: &PhysParams) -> Result<Sample<Complex64>, WignerError> {
    let (_, n) = norm_constants(labels, params);
    let r = radial(labels.e, labels.m + labels.mprime, labels.d_offset, pt.h, pt.l, params.hbar)?;
    Ok(match r {
        Sample::Value(v) => {
            let phase = Complex64::from_polar(1.0, (labels.m - labels.mprime) * pt.chi);
            Sample::Value(n * phase * v)
        }
        Sample::Singular => Sample::Singular,
    })
}

/// The coefficient functions of the cross-Wigner function in
/// `B₁ cos(aL) + B₂ sin(aL)`, for `0 < H < E`.
pub fn cross_components(labels: &EigenLabels, h: f64, chi: f64, params: &PhysParams) -> Result<(Complex64, Complex64), WignerError> {
    if !(h > 0.0 && h < labels.e) {
        return Err(WignerError::NonPositiveH(h));
    }
    let (_, n) = norm_constants(labels, params);
    let (_, theta) = phase_parts(labels.e, h, params.hbar);
    let pre = n * Complex64::from_polar(1.0, (labels.m - labels.mprime) * chi) / (h * (labels.e - h)).sqrt();
    let beta = (labels.m + labels.mprime) * theta - labels.d_offset;
    Ok((pre * beta.cos(), pre * beta.sin()))
}

/// Solution of the energy equation above the energy shell,
/// `A₁ exp(2L/ħ √((H-E)/H)) + A₂ exp(-2L/ħ √((H-E)/H))`.
pub fn above_shell_solution(e: f64, a1: f64, a2: f64, h: f64, l: f64, params: &PhysParams) -> Result<f64, WignerError> {
    if !(h > e) {
        return Err(WignerError::InvalidGrid(format!("H = {h} is not above the shell E = {e}")));
    }
    let k = 2.0 / params.hbar * ((h - e) / h).sqrt();
    Ok(a1 * (k * l).exp() + a2 * (-k * l).exp())
}

/// Eigenstate of the Cartesian momentum, seen in the `(T, chi, H, L)` chart
/// as `N δ(H - Ẽ) δ(chi - χ̃₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumEigenDescriptor {
    pub px0: f64,
    pub py0: f64,
    pub e_tilde: f64,
    /// `None` for the state at rest.
    pub chi0: Option<f64>,
    pub n: f64,
    pub epsilon: f64,
    pub params: PhysParams,
}

pub const DEFAULT_MOLLIFIER_WIDTH: f64 = 1e-2;

pub fn momentum_eigenstate(px0: f64, py0: f64, params: &PhysParams) -> MomentumEigenDescriptor {
    let degenerate = px0 == 0.0 && py0 == 0.0;
    let two_pi_hbar = 2.0 * PI * params.hbar;
    MomentumEigenDescriptor {
        px0,
        py0,
        e_tilde: (px0 * px0 + py0 * py0) / (2.0 * params.m),
        chi0: (!degenerate).then(|| crate::charts::normalize_angle(py0.atan2(px0))),
        n: 1.0 / (two_pi_hbar * two_pi_hbar * params.m),
        epsilon: DEFAULT_MOLLIFIER_WIDTH,
        params: *params,
    }
}

/// Normalized Gaussian of width `eps`, the stand-in for `δ(x)`.
pub fn gaussian_delta(x: f64, eps: f64) -> f64 {
    (-0.5 * (x / eps).powi(2)).exp() / ((2.0 * PI).sqrt() * eps)
}

/// Signed distance between two angles, in `(-π, π]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

impl MomentumEigenDescriptor {
    pub fn with_epsilon(mut self, eps: f64) -> Result<Self, WignerError> {
        if !(eps > 0.0) {
            return Err(WignerError::InvalidWidth(eps));
        }
        self.epsilon = eps;
        Ok(self)
    }

    pub fn is_degenerate(&self) -> bool {
        self.chi0.is_none()
    }

    pub fn direction(&self) -> Result<f64, WignerError> {
        self.chi0.ok_or(WignerError::Degenerate)
    }

    /// Both deltas replaced by Gaussians of width `epsilon`.
    pub fn eval_mollified(&self, pt: &ActionAnglePoint) -> Result<f64, WignerError> {
        let chi0 = self.direction()?;
        Ok(self.n * gaussian_delta(pt.h - self.e_tilde, self.epsilon) * gaussian_delta(angle_difference(pt.chi, chi0), self.epsilon))
    }
}

/// `C = (1/2π) exp(i(m̃' - m̃)(α + χ̃₀))`.
pub fn expansion_coefficients(mt: f64, mtp: f64, chi0: f64, alpha: f64) -> Result<Complex64, WignerError> {
    for v in [mt, mtp] {
        if !is_integer(v) {
            return Err(WignerError::NonInteger(v));
        }
    }
    Ok(Complex64::from_polar(1.0 / (2.0 * PI), (mtp - mt) * (alpha + chi0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WignerKind {
    EnergyAngular(EigenLabels),
    CartesianMomentum { px0: f64, py0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerSpec {
    pub kind: WignerKind,
    pub params: PhysParams,
}

impl WignerSpec {
    pub fn new(kind: WignerKind, params: PhysParams) -> Result<Self, WignerError> {
        match kind {
            WignerKind::EnergyAngular(l) if !(l.e > 0.0) => Err(WignerError::NonPositiveEnergy(l.e)),
            WignerKind::CartesianMomentum { px0, py0 } if !(px0.is_finite() && py0.is_finite()) => {
                Err(WignerError::InvalidGrid("momentum components must be finite".into()))
            }
            _ => Ok(WignerSpec { kind, params }),
        }
    }
}

/// Rectangular `(H, L)` grid at fixed `T` and `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub h_range: (f64, f64),
    pub l_range: (f64, f64),
    pub n_h: usize,
    pub n_l: usize,
    pub t: f64,
    pub chi: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl GridSpec {
    fn validate(&self, e: f64) -> Result<(), WignerError> {
        let (h0, h1) = self.h_range;
        let (l0, l1) = self.l_range;
        if self.n_h == 0 || self.n_l == 0 {
            return Err(WignerError::InvalidGrid("point counts must be positive".into()));
        }
        if !(h0 <= h1 && l0 <= l1) || ![h0, h1, l0, l1].iter().all(|v| v.is_finite()) {
            return Err(WignerError::InvalidGrid(format!("ranges H {:?}, L {:?}", self.h_range, self.l_range)));
        }
        if !(h0 > 0.0) {
            return Err(WignerError::NonPositiveH(h0));
        }
        if let Some(h) = self.h_values().into_iter().find(|h| *h == e) {
            return Err(WignerError::SingularGrid(h));
        }
        Ok(())
    }

    pub fn h_values(&self) -> Vec<f64> {
        linspace(self.h_range.0, self.h_range.1, self.n_h)
    }

    pub fn l_values(&self) -> Vec<f64> {
        linspace(self.l_range.0, self.l_range.1, self.n_l)
    }
}

/// One evaluated grid point: chart coordinates and the complex value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub coords: [f64; 4],
    pub value: Complex64,
}

/// Cross-Wigner values on the grid, H-major then L. Rows come back in the
/// same order however the work is split.
pub fn action_angle_grid(labels: &EigenLabels, params: &PhysParams, grid: &GridSpec) -> Result<Vec<GridRow>, WignerError> {
    grid.validate(labels.e)?;
    let hs = grid.h_values();
    let ls = grid.l_values();
    let points: Vec<[f64; 4]> = hs
        .iter()
        .flat_map(|&h| ls.iter().map(move |&l| [grid.t, grid.chi, h, l]))
        .collect();
    points
        .par_iter()
        .map(|c| {
            let pt = ActionAnglePoint::from_array(*c);
            match eval_w_emmp(labels, &pt, params)? {
                Sample::Value(v) => Ok(GridRow { coords: *c, value: v }),
                Sample::Singular => Err(WignerError::SingularGrid(c[2])),
            }
        })
        .collect()
}

/// Polar grid over `(r, p)` at fixed `φ` and `chi`, r-major then p.
pub fn polar_grid(
    labels: &EigenLabels,
    params: &PhysParams,
    r_range: (f64, f64),
    p_range: (f64, f64),
    n_r: usize,
    n_p: usize,
    phi: f64,
    chi: f64,
) -> Result<Vec<GridRow>, WignerError> {
    if n_r == 0 || n_p == 0 || !(r_range.0 <= r_range.1 && p_range.0 <= p_range.1) {
        return Err(WignerError::InvalidGrid("polar ranges".into()));
    }
    if !(p_range.0 > 0.0) {
        return Err(WignerError::NonPositiveMomentum(p_range.0));
    }
    let points: Vec<[f64; 4]> = linspace(r_range.0, r_range.1, n_r)
        .into_iter()
        .flat_map(|r| linspace(p_range.0, p_range.1, n_p).into_iter().map(move |p| [r, phi, p, chi]))
        .collect();
    points
        .par_iter()
        .map(|c| {
            let pt = PolarPoint { r: c[0], phi: c[1], p: c[2], chi: c[3] };
            match eval_w_em_polar(labels, &pt, params)? {
                Sample::Value(v) => Ok(GridRow { coords: *c, value: Complex64::new(v, 0.0) }),
                Sample::Singular => Err(WignerError::SingularGrid(c[2])),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural() -> PhysParams {
        PhysParams::natural()
    }

    #[test]
    fn normalization_constant() {
        let l = EigenLabels::new(1.0, 0.0).unwrap();
        let (n, c) = norm_constants(&l, &natural());
        assert_eq!(n, 1.0 / (4.0 * PI.powi(3)));
        assert!((n - 8.0633e-3).abs() < 1e-6);
        assert_eq!(c, Complex64::new(n, 0.0));
    }

    #[test]
    fn closed_form_values() {
        let p = natural();
        let (n, _) = norm_constants(&EigenLabels::new(1.0, 0.0).unwrap(), &p);
        let w = eval_w_em(&EigenLabels::new(1.0, 0.0).unwrap(), &ActionAnglePoint::new(0.0, 0.0, 0.5, 0.0), &p).unwrap();
        assert!((w.value().unwrap() - 1.0 / (2.0 * PI.powi(3))).abs() < 1e-16);

        let w = eval_w_em(&EigenLabels::new(1.0, 1.0).unwrap(), &ActionAnglePoint::new(0.0, 0.0, 0.25, 1.0), &p).unwrap();
        let want = 4.0 * n / 3f64.sqrt() * (2.0 * 3f64.sqrt() - 2.0 * PI / 3.0).cos();
        assert!((w.value().unwrap() - want).abs() < 1e-15);
        assert!(((2.0 * 3f64.sqrt() - 2.0 * PI / 3.0).cos() - 0.199737).abs() < 1e-6);

        let w = eval_w_em(&EigenLabels::new(1.0, 3.0).unwrap(), &ActionAnglePoint::new(0.0, 0.0, 1.5, 4.0), &p).unwrap();
        assert_eq!(w, Sample::Value(0.0));
        let w = eval_w_em(&EigenLabels::new(1.0, 3.0).unwrap(), &ActionAnglePoint::new(0.0, 0.0, 1.0, 4.0), &p).unwrap();
        assert!(w.is_singular());
        assert!(eval_w_em(&EigenLabels::new(1.0, 3.0).unwrap(), &ActionAnglePoint::new(0.0, 0.0, 0.0, 4.0), &p).is_err());
    }

    #[test]
    fn cross_value_by_substitution() {
        let p = natural();
        let l = EigenLabels::cross(1.0, 1.0, 0.0, 0.3).unwrap();
        let (_, n) = norm_constants(&l, &p);
        let w = eval_w_emmp(&l, &ActionAnglePoint::new(0.0, PI / 3.0, 0.25, 1.0), &p).unwrap().value().unwrap();
        let want = Complex64::from_polar(1.0, PI / 3.0) * n / (3.0f64 / 16.0).sqrt() * (2.0 * 3f64.sqrt() - PI / 3.0).cos();
        assert!((w - want).norm() < 1e-15);
    }

    #[test]
    fn flags_and_coefficients() {
        let l = EigenLabels::new(1.0, 0.5).unwrap();
        assert!(l.flags().non_integer);
        let l = EigenLabels::new(1.0, 2.0).unwrap().with_offset(PI);
        assert!(l.flags().physical());
        let l = EigenLabels::new(1.0, 2.0).unwrap().with_offset(1.0);
        assert!(l.flags().offset_not_eigen);
        assert!(expansion_coefficients(0.5, 1.0, 0.0, 0.0).is_err());
        let c = expansion_coefficients(3.0, 3.0, 0.4, 1.1).unwrap();
        assert!((c - Complex64::new(1.0 / (2.0 * PI), 0.0)).norm() < 1e-17);
    }

    #[test]
    fn momentum_descriptor() {
        let d = momentum_eigenstate(0.0, 2.0, &natural());
        assert_eq!(d.e_tilde, 2.0);
        assert!((d.chi0.unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(d.n, 1.0 / (4.0 * PI * PI));
        let rest = momentum_eigenstate(0.0, 0.0, &natural());
        assert!(rest.is_degenerate());
        assert!(matches!(rest.eval_mollified(&ActionAnglePoint::new(0.0, 0.0, 1.0, 0.0)), Err(WignerError::Degenerate)));
        assert!(d.with_epsilon(0.0).is_err());
    }

    #[test]
    fn grid_order_and_errors() {
        let l = EigenLabels::new(1.0, 0.0).unwrap();
        let g = GridSpec { h_range: (0.1, 0.9), l_range: (-1.0, 1.0), n_h: 3, n_l: 2, t: 0.0, chi: 0.0 };
        let rows = action_angle_grid(&l, &natural(), &g).unwrap();
        let hl: Vec<(f64, f64)> = rows.iter().map(|r| (r.coords[2], r.coords[3])).collect();
        assert_eq!(hl[0], (0.1, -1.0));
        assert_eq!(hl[1], (0.1, 1.0));
        assert_eq!(hl[2].1, -1.0);
        let bad = GridSpec { h_range: (0.5, 1.0), ..g };
        assert!(matches!(action_angle_grid(&l, &natural(), &bad), Err(WignerError::SingularGrid(_))));
        let bad = GridSpec { h_range: (0.0, 0.5), ..g };
        assert!(action_angle_grid(&l, &natural(), &bad).is_err());
    }
}
