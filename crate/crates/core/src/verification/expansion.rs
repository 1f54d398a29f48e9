//! Plane waves against energy–angular-momentum states: the Jacobi–Anger
//! oracle, the weak-form reconstruction of the momentum eigenstate, the
//! position marginals, and the growth of the above-shell solutions.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::jet2::Jet2;
use super::residuals::derived_operators;
use super::{VerificationError, VerificationReport};
use crate::charts::{Chart, PhysParams};
use crate::numerics::{bessel_jn, marginal_p_em, weak_pairing, Family, QuadratureConfig, TestFunction};
use crate::wigner::{
    above_shell_solution, expansion_coefficients, momentum_eigenstate, norm_constants, EigenLabels, WignerKind, WignerSpec,
};

type C = Complex64;

/// `Σ_{|m| ≤ M} i^m J_m(z) e^{imφ}`.
pub fn jacobi_anger_partial_sum(z: f64, phi: f64, m_max: u32) -> C {
    let m_max = m_max as i32;
    (-m_max..=m_max)
        .map(|m| C::i().powi(m) * bessel_jn(m, z) * C::from_polar(1.0, m as f64 * phi))
        .sum()
}

/// Sup over `z ∈ [0, z_max]` and a full `φ` grid of the distance between
/// the truncated expansion and `e^{iz cos φ}`, with a record of how the
/// error at `z_max` falls off with the truncation.
pub fn jacobi_anger_residual(z_max: f64, m_max: u32) -> VerificationReport {
    let (nz, nphi) = (201, 72);
    let zs: Vec<f64> = (0..nz).map(|i| z_max * i as f64 / (nz - 1) as f64).collect();
    let worst = zs
        .par_iter()
        .map(|&z| {
            (0..nphi)
                .map(|j| {
                    let phi = 2.0 * PI * j as f64 / nphi as f64;
                    (jacobi_anger_partial_sum(z, phi, m_max) - C::from_polar(1.0, z * phi.cos())).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let tail: Vec<(u32, f64)> = (0..=m_max)
        .step_by(4)
        .map(|m| {
            let e = (0..nphi)
                .map(|j| {
                    let phi = 2.0 * PI * j as f64 / nphi as f64;
                    (jacobi_anger_partial_sum(z_max, phi, m) - C::from_polar(1.0, z_max * phi.cos())).norm()
                })
                .fold(0.0, f64::max);
            (m, e)
        })
        .collect();
    VerificationReport::new(
        "jacobi_anger",
        worst,
        1e-10,
        json!({ "z_max": z_max, "M": m_max, "z_points": nz, "phi_points": nphi, "error_vs_M_at_z_max": tail }),
    )
}

/// Inputs of the weak-form reconstruction of a momentum eigenstate from
/// the cross-Wigner family.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionInput {
    pub e_tilde: f64,
    pub chi0: f64,
    pub alpha: f64,
    /// Truncations `M` to scan; the last one is the one held to tolerance.
    pub truncations: Vec<u32>,
    pub phi: TestFunction,
    pub params: PhysParams,
    /// `(m, m')` of the cross function multiplied onto the momentum state.
    pub product: (f64, f64),
}

impl Default for ReconstructionInput {
    fn default() -> Self {
        ReconstructionInput {
            e_tilde: 1.0,
            chi0: 0.7,
            alpha: -PI / 2.0,
            truncations: vec![8, 16, 32, 40],
            phi: TestFunction::default(),
            params: PhysParams::natural(),
            product: (1.0, 0.0),
        }
    }
}

fn pair_cross(e: f64, m: f64, mp: f64, alpha: f64, params: &PhysParams, phi: &TestFunction, cfg: &QuadratureConfig) -> Result<C, VerificationError> {
    let spec = WignerSpec::new(WignerKind::EnergyAngular(EigenLabels::cross(e, m, mp, alpha)?), *params)?;
    Ok(weak_pairing(&Family::Spec(spec), phi, cfg)?)
}

/// `N N_p Y(cos ψ)/cos²ψ e^{2imχ} e^{-i(m+m')χ̃₀} e^{-2iL tanψ/ħ}` with
/// `ψ = χ - χ̃₀`: the product of a cross function with a momentum
/// eigenstate, with its two energy deltas removed.
fn product_jet(labels: &EigenLabels, chi0: f64, params: &PhysParams, coords: [f64; 4]) -> Jet2 {
    let (_, n) = norm_constants(labels, params);
    let np = momentum_eigenstate(1.0, 0.0, params).n;
    let [_, chi, _, l] = Jet2::coords(coords);
    let psi = chi + (-chi0);
    let (c, s) = (psi.cos(), psi.sin());
    let tan = s / c;
    let phase = (chi * C::new(0.0, 2.0 * labels.m) + (l * tan) * C::new(0.0, -2.0 / params.hbar)).exp();
    phase / (c * c) * (n * np * C::from_polar(1.0, -(labels.m + labels.mprime) * chi0))
}

/// On the support `H = Ẽ cos²ψ`, left star multiplication by `H` must
/// return `Ẽ` times the product; residual normalized by the sum of term
/// magnitudes.
fn product_eigen_residual(labels: &EigenLabels, chi0: f64, params: &PhysParams) -> Result<f64, VerificationError> {
    let ops = derived_operators()?;
    let chart = Chart::action_angle();
    let e = labels.e;
    let mut worst = 0.0f64;
    for i in 0..41 {
        let psi = -1.4 + 2.8 * i as f64 / 40.0;
        for j in 0..21 {
            let l = -5.0 + 0.5 * j as f64;
            let x = [0.3, chi0 + psi, e * psi.cos().powi(2), l];
            let f = product_jet(labels, chi0, params, x);
            let pt = chart.ring_point(x, params);
            let mut value = -e * f.v;
            let mut scale = (e * f.v).norm();
            for (alpha, s) in ops.left_h.terms() {
                let t = s.eval(&pt, params.hbar) * f.deriv(*alpha).ok_or(VerificationError::JetOrder)?;
                value += t;
                scale += t.norm();
            }
            worst = worst.max(value.norm() / scale);
        }
    }
    Ok(worst)
}

/// Three-way weak-form comparison for the expansion of a momentum
/// eigenstate over the cross functions at the same energy:
/// (a) the momentum state paired directly; (b) the truncated double sum of
/// expansion coefficients times paired cross functions; (c) the closed form
/// of a cross function times the momentum state, against the same product
/// expanded term by term (`Q`). Also checks the `α = -π/2` phase pattern
/// and the eigenvalue equation of the closed-form product.
pub fn reconstruction_check(input: &ReconstructionInput) -> Result<VerificationReport, VerificationError> {
    let ReconstructionInput { e_tilde, chi0, alpha, ref truncations, ref phi, params, product } = *input;
    let m_top = *truncations.iter().max().ok_or_else(|| VerificationError::InvalidLabels("no truncation given".into()))? as i32;
    let cfg = QuadratureConfig::default();
    let p = (2.0 * params.m * e_tilde).sqrt();
    let state = momentum_eigenstate(p * chi0.cos(), p * chi0.sin(), &params);
    let spec = WignerSpec::new(WignerKind::CartesianMomentum { px0: state.px0, py0: state.py0 }, params)?;
    let a = weak_pairing(&Family::Spec(spec), phi, &cfg)?;
    if !(a.norm() > 0.0) {
        return Err(VerificationError::NonConvergent("test function does not see the momentum state".into()));
    }

    let pairs: Vec<(i32, i32)> = (-m_top..=m_top).flat_map(|i| (-m_top..=m_top).map(move |j| (i, j))).collect();
    let paired: HashMap<(i32, i32), C> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let w = pair_cross(e_tilde, i as f64, j as f64, alpha, &params, phi, &cfg)?;
            Ok(((i, j), w * expansion_coefficients(i as f64, j as f64, chi0, alpha)?))
        })
        .collect::<Result<_, VerificationError>>()?;
    let mut b_rows = Vec::new();
    for &mm in truncations {
        let mm = mm as i32;
        let b: C = pairs.iter().filter(|(i, j)| i.abs() <= mm && j.abs() <= mm).map(|k| paired[k]).sum();
        b_rows.push((mm, b, (b - a).norm() / a.norm()));
    }
    let b_err = b_rows.last().map(|r| r.2).unwrap_or(f64::NAN);
    let non_monotone = b_rows.windows(2).filter(|w| !(w[1].2 < w[0].2)).count();

    let (m, mp) = product;
    let labels = EigenLabels::cross(e_tilde, m, mp, alpha)?;
    let c = weak_pairing(&Family::MomentumProduct { labels, state }, phi, &cfg)?;
    let q_terms: Vec<(i32, C)> = (-m_top..=m_top)
        .into_par_iter()
        .map(|j| {
            let w = pair_cross(e_tilde, m, j as f64, alpha, &params, phi, &cfg)?;
            Ok((j, state.n * expansion_coefficients(mp, j as f64, chi0, alpha)? * w))
        })
        .collect::<Result<_, VerificationError>>()?;
    let mut c_rows = Vec::new();
    for &mm in truncations {
        let q: C = q_terms.iter().filter(|(j, _)| j.abs() <= mm as i32).map(|t| t.1).sum();
        c_rows.push((mm as i32, q, (c - q).norm() / c.norm()));
    }
    let c_err = c_rows.last().map(|r| r.2).unwrap_or(f64::NAN);

    let plane = |k: i32| C::i().powi(k) * C::from_polar(1.0 / (2.0 * PI).sqrt(), -(k as f64) * chi0);
    let mut phase_err = 0.0f64;
    for i in -m_top..=m_top {
        for j in -m_top..=m_top {
            let got = expansion_coefficients(i as f64, j as f64, chi0, -PI / 2.0)?;
            phase_err = phase_err.max((got - plane(i) * plane(j).conj()).norm());
        }
    }
    let residual = product_eigen_residual(&labels, chi0, &params)?;

    let summary = |rows: &[(i32, C, f64)]| -> Vec<serde_json::Value> {
        rows.iter().map(|(mm, v, e)| json!({ "M": mm, "re": v.re, "im": v.im, "relative_error": e })).collect()
    };
    let base = json!({ "E": e_tilde, "chi0": chi0, "alpha": alpha, "test_function": phi });
    Ok(VerificationReport::combine(
        "reconstruction",
        vec![
            VerificationReport::new(
                "truncated double sum vs momentum state",
                b_err,
                1e-4,
                json!({ "setup": base, "a": [a.re, a.im], "scan": summary(&b_rows) }),
            ),
            VerificationReport::new("monotone convergence in M", non_monotone as f64, 0.0, json!({ "M": truncations })),
            VerificationReport::new(
                "closed-form product vs expanded product",
                c_err,
                1e-4,
                json!({ "m": m, "m'": mp, "c": [c.re, c.im], "scan": summary(&c_rows) }),
            ),
            VerificationReport::new("plane-wave phase pattern at alpha = -pi/2", phase_err, 1e-14, json!({ "M": m_top })),
            VerificationReport::new(
                "closed-form product under H star",
                residual,
                1e-8,
                json!({ "normalization": "sum of term magnitudes", "support": "H = E cos^2(chi - chi0)" }),
            ),
        ],
    ))
}

/// Position marginals: integer `m` must match `2π²MN J_m(k₀r)²` and stay
/// nonnegative; non-integer `m` must go negative somewhere on the scan.
pub fn marginal_check(integer_ms: &[f64], fractional_ms: &[f64]) -> Result<VerificationReport, VerificationError> {
    let params = PhysParams::natural();
    let (points, kr_max) = (2001, 20.0);
    let cfg = QuadratureConfig::default();
    let mut parts = Vec::new();
    for &m in integer_ms.iter().chain(fractional_ms) {
        let labels = EigenLabels::new(1.0, m)?;
        let k0 = labels.k0(&params);
        let rs: Vec<f64> = (0..points).map(|i| kr_max / k0 * i as f64 / (points - 1) as f64).collect();
        let scan = marginal_p_em(&labels, &params, &rs, &cfg)?;
        let scale = 2.0 * PI * PI * params.m * norm_constants(&labels, &params).0;
        let min = scan.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
        let setup = json!({ "m": m, "points": points, "k0_r_max": kr_max });
        if labels.is_integer() {
            let rel = scan
                .iter()
                .filter_map(|p| p.closed_form.map(|c| (p.value - c).abs() / c.abs().max(1e-6 * scale)))
                .fold(0.0, f64::max);
            parts.push(VerificationReport::new(format!("closed form m={m}"), rel, 1e-8, setup.clone()));
            parts.push(VerificationReport::new(
                format!("nonnegative m={m}"),
                (-min).max(0.0),
                1e-12,
                json!({ "m": m, "min": min }),
            ));
        } else {
            parts.push(VerificationReport::new(
                format!("negative somewhere m={m}"),
                if min < 0.0 { 0.0 } else { 1.0 },
                0.0,
                json!({ "m": m, "min": min, "min_over_scale": min / scale }),
            ));
        }
    }
    Ok(VerificationReport::combine("marginal", parts))
}

/// Above the shell the energy equation is solved by
/// `A₁e^{κL} + A₂e^{-κL}`, `κ = (2/ħ)√((H-E)/H)`. Along a geometric `L`
/// sequence in each direction where a coefficient is nonzero the solution
/// must grow strictly, at exactly the exponential rate; the zero profile
/// stays zero; `L → -L` swaps the coefficients.
pub fn blowup_probe(e: f64, m: f64) -> VerificationReport {
    let params = PhysParams::natural();
    let hbar = params.hbar;
    let mut rate_err = 0.0f64;
    let mut violations = 0usize;
    let profiles = [(1.0, 0.0), (0.0, 1.0), (0.3, 2.0), (-1.5, 0.7)];
    for h in [2.0 * e, 1.2 * e, 5.0 * e] {
        let kappa = 2.0 / hbar * ((h - e) / h).sqrt();
        for (a1, a2) in profiles {
            for dir in [1.0, -1.0] {
                let growing = if dir > 0.0 { a1 } else { a2 };
                if growing == 0.0 {
                    continue;
                }
                let ls: Vec<f64> = (0..8).map(|j| dir * hbar * 2f64.powi(j)).collect();
                let vals: Vec<f64> = ls.iter().map(|&l| above_shell_solution(e, a1, a2, h, l, &params).map(f64::abs).unwrap_or(f64::NAN)).collect();
                violations += vals.windows(2).filter(|w| !(w[1] > w[0])).count();
                if a1 == 0.0 || a2 == 0.0 {
                    for (w, l) in vals.windows(2).zip(ls.windows(2)) {
                        let want = (kappa * (l[1] - l[0]).abs()).exp();
                        rate_err = rate_err.max((w[1] / w[0] - want).abs() / want);
                    }
                }
            }
            for l in [-3.0, -0.5, 0.4, 2.0] {
                let x = above_shell_solution(e, a1, a2, h, l, &params).unwrap_or(f64::NAN);
                let y = above_shell_solution(e, a2, a1, h, -l, &params).unwrap_or(f64::NAN);
                if !((x - y).abs() <= 1e-14 * x.abs().max(1.0)) {
                    violations += 1;
                }
            }
        }
        if [-3.0, 0.0, 4.0].iter().any(|&l| above_shell_solution(e, 0.0, 0.0, h, l, &params) != Ok(0.0)) {
            violations += 1;
        }
    }
    VerificationReport::combine(
        "blowup_probe",
        vec![
            VerificationReport::new("strict growth and symmetry", violations as f64, 0.0, json!({ "E": e, "m": m, "profiles": profiles })),
            VerificationReport::new("exponential rate", rate_err, 1e-12, json!({ "L": "hbar * 2^j, j = 0..7" })),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_anger_examples() {
        let s = jacobi_anger_partial_sum(2.0, PI / 3.0, 25);
        assert!((s - C::new(1f64.cos(), 1f64.sin())).norm() < 1e-12);
        assert!((s.re - 0.540302).abs() < 1e-6 && (s.im - 0.841471).abs() < 1e-6);
        assert_eq!(jacobi_anger_partial_sum(0.0, 1.3, 10), C::new(1.0, 0.0));
    }

    #[test]
    fn above_shell_growth_example() {
        let p = PhysParams::natural();
        let v: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|&l| above_shell_solution(1.0, 1.0, 0.0, 2.0, l, &p).unwrap()).collect();
        for (w, dl) in v.windows(2).zip([1.0, 2.0, 4.0]) {
            assert!(w[1] > w[0]);
            let want = (2.0 * dl * 0.5f64.sqrt()).exp();
            assert!((w[1] / w[0] - want).abs() < 1e-12 * want);
        }
        assert!(blowup_probe(1.0, 0.0).passed());
    }
}
