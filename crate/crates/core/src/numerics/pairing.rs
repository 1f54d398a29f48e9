//! Weak pairing `⟨F, φ⟩ = ∫dχ dH dL φ F` of distribution-valued families
//! with factorized test functions.
//!
//! Every family here is a cosine or a plane wave in `L`, so the `L`
//! integral against the Gaussian factor of `φ` is done in closed form;
//! `χ` and `H` are left to adaptive quadrature.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrature::{adaptive_integrate, QuadratureConfig, Substitution};
use super::NumericsError;
use crate::wigner::{angle_difference, gaussian_delta, norm_constants, EigenLabels, MomentumEigenDescriptor, WignerKind, WignerSpec};

/// `φ(χ, H, L) = (Σ c_n e^{inχ}) · exp(-(H-H₀)²/2w²) · exp(-L²/2σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub harmonics: Vec<(i32, Complex64)>,
    pub h_center: f64,
    pub h_width: f64,
    pub sigma_l: f64,
}

impl Default for TestFunction {
    fn default() -> Self {
        TestFunction {
            harmonics: vec![
                (0, Complex64::new(1.0, 0.0)),
                (1, Complex64::new(0.3, 0.2)),
                (-1, Complex64::new(0.3, -0.2)),
                (2, Complex64::new(0.1, 0.0)),
            ],
            h_center: 0.8,
            h_width: 0.3,
            sigma_l: 1.0,
        }
    }
}

impl TestFunction {
    pub fn new(harmonics: Vec<(i32, Complex64)>, h_center: f64, h_width: f64, sigma_l: f64) -> Result<Self, NumericsError> {
        if !(h_width > 0.0 && sigma_l > 0.0) {
            return Err(NumericsError::InvalidConfig(format!("widths must be positive (H {h_width}, L {sigma_l})")));
        }
        Ok(TestFunction { harmonics, h_center, h_width, sigma_l })
    }

    /// `χ`-independent variant with the same `H` and `L` factors.
    pub fn radial_only(&self) -> Self {
        TestFunction { harmonics: vec![(0, Complex64::new(1.0, 0.0))], ..self.clone() }
    }

    pub fn periodic(&self, chi: f64) -> Complex64 {
        self.harmonics.iter().map(|(n, c)| c * Complex64::from_polar(1.0, *n as f64 * chi)).sum()
    }

    pub fn radial(&self, h: f64) -> f64 {
        (-0.5 * ((h - self.h_center) / self.h_width).powi(2)).exp()
    }

    pub fn l_factor(&self, l: f64) -> f64 {
        (-0.5 * (l / self.sigma_l).powi(2)).exp()
    }

    pub fn eval(&self, chi: f64, h: f64, l: f64) -> Complex64 {
        self.periodic(chi) * self.radial(h) * self.l_factor(l)
    }

    /// `∫cos(aL - β) e^{-L²/2σ²} dL = √(2π)σ e^{-a²σ²/2} cos β`.
    pub fn l_cosine(&self, a: f64, beta: f64) -> f64 {
        (2.0 * PI).sqrt() * self.sigma_l * (-0.5 * (a * self.sigma_l).powi(2)).exp() * beta.cos()
    }

    /// `∫e^{-iaL} e^{-L²/2σ²} dL`.
    pub fn l_plane_wave(&self, a: f64) -> f64 {
        (2.0 * PI).sqrt() * self.sigma_l * (-0.5 * (a * self.sigma_l).powi(2)).exp()
    }

    /// `∫₀^{2π} e^{iνχ} (Σ c_n e^{inχ}) dχ` by quadrature.
    pub fn chi_moment(&self, nu: f64, cfg: &QuadratureConfig) -> Result<Complex64, NumericsError> {
        let panels = (nu.abs() as usize + self.max_harmonic() + 1).max(1);
        Ok(adaptive_integrate(|c: f64| self.periodic(c) * Complex64::from_polar(1.0, nu * c), 0.0, 2.0 * PI, &cfg.with_panels(panels))?.value)
    }

    fn max_harmonic(&self) -> usize {
        self.harmonics.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0)
    }
}

/// What gets paired with a test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// A closed-form state: cross-Wigner functions, or the exact
    /// delta-supported momentum eigenstate.
    Spec(WignerSpec),
    /// Momentum eigenstate with both deltas smeared to width `epsilon`.
    Mollified(MomentumEigenDescriptor),
    /// `W_Emm' ⋆ W_p` on the shell `E = Ẽ`, with the energy delta stripped.
    MomentumProduct { labels: EigenLabels, state: MomentumEigenDescriptor },
}

pub fn weak_pairing(family: &Family, phi: &TestFunction, cfg: &QuadratureConfig) -> Result<Complex64, NumericsError> {
    match family {
        Family::Spec(spec) => match spec.kind {
            WignerKind::EnergyAngular(labels) => pair_cross(&labels, spec, phi, cfg),
            WignerKind::CartesianMomentum { px0, py0 } => {
                let d = crate::wigner::momentum_eigenstate(px0, py0, &spec.params);
                let chi0 = d.direction()?;
                Ok(d.n * phi.periodic(chi0) * phi.radial(d.e_tilde) * phi.l_plane_wave(0.0))
            }
        },
        Family::Mollified(d) => pair_mollified(d, phi, cfg),
        Family::MomentumProduct { labels, state } => pair_product(labels, state, phi, cfg),
    }
}

/// `N e^{i(m-m')χ} Y(E-H)/√(H(E-H)) cos(aL - (m+m')θ + D)`. The
/// `H = E sin²u` substitution turns `dH/√(H(E-H))` into `2du`.
fn pair_cross(labels: &EigenLabels, spec: &WignerSpec, phi: &TestFunction, cfg: &QuadratureConfig) -> Result<Complex64, NumericsError> {
    let params = spec.params;
    let (_, n) = norm_constants(labels, &params);
    let e = labels.e;
    let mu = labels.m + labels.mprime;
    let chi = phi.chi_moment(labels.m - labels.mprime, cfg)?;
    let radial = adaptive_integrate(
        |h: f64| {
            let a = 2.0 / params.hbar * ((e - h) / h).sqrt();
            let theta = (h / e).sqrt().min(1.0).acos();
            let gauss = phi.l_cosine(a, mu * theta - labels.d_offset);
            if gauss == 0.0 {
                0.0
            } else {
                phi.radial(h) * gauss / (h * (e - h)).sqrt()
            }
        },
        0.0,
        e,
        &cfg.with_substitution(Substitution::SinSquared).with_panels(4),
    )?;
    Ok(n * chi * radial.value)
}

fn pair_mollified(d: &MomentumEigenDescriptor, phi: &TestFunction, cfg: &QuadratureConfig) -> Result<Complex64, NumericsError> {
    let chi0 = d.direction()?;
    let eps = d.epsilon;
    let panels = (2.0 * PI / eps).ceil() as usize;
    let chi = adaptive_integrate(
        |c: f64| phi.periodic(c) * gaussian_delta(angle_difference(c, chi0), eps),
        chi0 - PI,
        chi0 + PI,
        &cfg.with_panels(panels),
    )?;
    let lo = (d.e_tilde - 12.0 * eps).max(0.0);
    let h = adaptive_integrate(
        |h: f64| phi.radial(h) * gaussian_delta(h - d.e_tilde, eps),
        lo,
        d.e_tilde + 12.0 * eps,
        &cfg.with_panels(8),
    )?;
    Ok(d.n * chi.value * h.value * phi.l_plane_wave(0.0))
}

/// With `ψ = χ - χ̃₀`, `δ(E - H/cos²ψ) = cos²ψ δ(H - E cos²ψ)` fixes `H` and
/// cancels the `1/cos²ψ`; the `L` integral of `exp(-2iL tanψ/ħ)` is a
/// Gaussian in `tanψ`.
fn pair_product(labels: &EigenLabels, state: &MomentumEigenDescriptor, phi: &TestFunction, cfg: &QuadratureConfig) -> Result<Complex64, NumericsError> {
    let chi0 = state.direction()?;
    let hbar = state.params.hbar;
    let (_, n) = norm_constants(labels, &state.params);
    let e = labels.e;
    let m = labels.m;
    let shift = Complex64::from_polar(1.0, -(labels.m + labels.mprime) * chi0);
    let res = adaptive_integrate(
        |psi: f64| {
            let c = psi.cos();
            let chi = chi0 + psi;
            let w = phi.l_plane_wave(2.0 * psi.tan() / hbar);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            phi.periodic(chi) * Complex64::from_polar(phi.radial(e * c * c) * w, 2.0 * m * chi)
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        &cfg.with_panels(8),
    )?;
    Ok(n * state.n * shift * res.value)
}
