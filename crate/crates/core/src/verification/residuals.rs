use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::jet2::Jet2;
use super::{VerificationError, VerificationReport};
use crate::charts::{Chart, ChartKind, PhysParams};
use crate::formal_weyl::{star_left_operator, star_right_operator, DifferentialOperator, TruncationConfig, WeylError};
use crate::symbolic::{parse_observable, rat, CRat, NVARS};
use crate::wigner::{cross_components, norm_constants, EigenLabels};

type C = Complex64;

/// Left and right star multiplication by `H` and `L` in the action-angle
/// chart.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    pub left_h: DifferentialOperator,
    pub left_l: DifferentialOperator,
    pub right_h: DifferentialOperator,
    pub right_l: DifferentialOperator,
}

/// Derived once per process from the Fedosov construction at the default
/// truncation (through ħ³).
pub fn derived_operators() -> Result<&'static OperatorSet, WeylError> {
    static CELL: OnceLock<Result<OperatorSet, WeylError>> = OnceLock::new();
    CELL.get_or_init(|| {
        let chart = Chart::action_angle();
        let t = TruncationConfig::default();
        let h = parse_observable("H")?;
        let l = parse_observable("L")?;
        Ok(OperatorSet {
            left_h: star_left_operator(&h, &chart, t)?,
            left_l: star_left_operator(&l, &chart, t)?,
            right_h: star_right_operator(&h, &chart, t)?,
            right_l: star_right_operator(&l, &chart, t)?,
        })
    })
    .as_ref()
    .map_err(Clone::clone)
}

fn real(s: &str) -> CRat {
    CRat::real(parse_observable(s).and_then(|e| e.to_ratfun()).expect("literal coefficient"))
}

/// The energy and angular-momentum eigen-operators as they are usually
/// quoted for this chart, transcribed term by term. The mixed `∂T∂χ`
/// coefficient is carried over as quoted (`-1/(16H)`); the Fedosov
/// derivation and an independent Cartesian Moyal computation both give
/// `-1/(8H)`.
pub fn reference_operators() -> OperatorSet {
    let build = |terms: &[([u8; 4], u32, CRat)]| {
        let mut op = DifferentialOperator::new(ChartKind::ActionAngle);
        for (a, k, c) in terms {
            op.add_term(*a, *k, c.clone());
        }
        op
    };
    let minus_half_i = CRat::i().scale(&rat(-1, 2));
    let left_h = build(&[
        ([0, 0, 0, 0], 0, real("H")),
        ([1, 0, 0, 0], 1, minus_half_i.clone()),
        ([0, 0, 0, 2], 2, real("-H/4")),
        ([2, 0, 0, 0], 2, real("-1/(16*H)")),
    ]);
    let left_l = build(&[
        ([0, 0, 0, 0], 0, real("L")),
        ([0, 1, 0, 0], 1, minus_half_i),
        ([0, 0, 0, 1], 2, real("-1/2")),
        ([0, 0, 0, 2], 2, real("-L/4")),
        ([0, 0, 1, 1], 2, real("-H/2")),
        ([1, 1, 0, 0], 2, real("-1/(16*H)")),
        ([2, 0, 0, 0], 2, real("L/(16*H^2)")),
    ]);
    OperatorSet { right_h: left_h.conj(), right_l: left_l.conj(), left_h, left_l }
}

fn derivative_name(alpha: &[u8; 4]) -> String {
    let names = ["T", "chi", "H", "L"];
    let parts: Vec<String> = (0..4)
        .filter(|&i| alpha[i] > 0)
        .map(|i| if alpha[i] == 1 { format!("d{}", names[i]) } else { format!("d{}^{}", names[i], alpha[i]) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Coefficient-by-coefficient differences `(∂^α, ħ^k, derived, reference)`.
fn mismatches(derived: &DifferentialOperator, reference: &DifferentialOperator) -> Vec<String> {
    let keys: BTreeSet<([u8; 4], u32)> = derived
        .terms()
        .chain(reference.terms())
        .flat_map(|(a, s)| s.terms().map(move |(k, _)| (*a, *k)))
        .collect();
    keys.into_iter()
        .filter_map(|(a, k)| {
            let (d, r) = (derived.coefficient(a).coeff(k), reference.coefficient(a).coeff(k));
            (d != r).then(|| format!("{} hbar^{}: derived {} vs reference {}", derivative_name(&a), k, d, r))
        })
        .collect()
}

/// Derived operators against the quoted ones: every coefficient exactly,
/// the first-order parts reduced to `-(i/2)∂T` and `-(i/2)∂χ`, and no ħ³
/// part.
pub fn operator_comparison() -> Result<VerificationReport, VerificationError> {
    let d = derived_operators()?;
    let r = reference_operators();
    let mut parts = Vec::new();
    for (name, got, want) in [("left_H", &d.left_h, &r.left_h), ("left_L", &d.left_l, &r.left_l)] {
        let diff = mismatches(got, want);
        parts.push(VerificationReport::new(
            format!("coefficients {name}"),
            diff.len() as f64,
            0.0,
            json!({ "mismatches": diff, "derived": got.to_string() }),
        ));
    }
    let first = |op: &DifferentialOperator, dir: usize| {
        let mut want = DifferentialOperator::new(ChartKind::ActionAngle);
        let mut alpha = [0u8; 4];
        alpha[dir] = 1;
        want.add_term(alpha, 1, CRat::i().scale(&rat(-1, 2)));
        mismatches(&op.hbar_part(1), &want)
    };
    let first_diff: Vec<String> = first(&d.left_h, 0).into_iter().chain(first(&d.left_l, 1)).collect();
    parts.push(VerificationReport::new(
        "first order parts",
        first_diff.len() as f64,
        0.0,
        json!({ "mismatches": first_diff }),
    ));
    let third = [&d.left_h, &d.left_l, &d.right_h, &d.right_l].iter().filter(|op| !op.hbar_part(3).is_zero()).count();
    parts.push(VerificationReport::new("hbar^3 parts vanish", third as f64, 0.0, json!({ "truncation": 3 })));
    let conj_ok = d.right_h == d.left_h.conj() && d.right_l == d.left_l.conj();
    parts.push(VerificationReport::new(
        "right operators are conjugates",
        if conj_ok { 0.0 } else { 1.0 },
        0.0,
        json!({}),
    ));
    Ok(VerificationReport::combine("operator_derivation", parts))
}

/// `W_Em` (`cross = false`) or `W_Emm'` as a second-order jet at
/// `(T, χ, H, L)`, for `0 < H < E`.
pub fn w_jet(labels: &EigenLabels, params: &PhysParams, coords: [f64; 4], cross: bool) -> Result<Jet2, VerificationError> {
    let e = labels.e;
    if !(coords[2] > 0.0 && coords[2] < e) {
        return Err(VerificationError::SingularGrid(format!("H = {} outside (0, {e})", coords[2])));
    }
    let (n, nc) = norm_constants(labels, params);
    let (nu, mu, norm) = if cross {
        (labels.m - labels.mprime, labels.m + labels.mprime, nc)
    } else {
        (0.0, 2.0 * labels.m, C::new(n, 0.0))
    };
    let [_, chi, h, l] = Jet2::coords(coords);
    let phase = (chi * C::new(0.0, nu)).exp();
    let root = (h * (e - h)).sqrt();
    let freq = ((e - h) / h).sqrt() * (2.0 / params.hbar);
    let theta = (h * (1.0 / e)).sqrt().acos();
    let arg = freq * l - theta * mu + labels.d_offset;
    Ok(phase * arg.cos() / root * norm)
}

/// `(Σ c_α ∂^α W, Σ |c_α ∂^α W|)` at one point.
fn apply(op: &DifferentialOperator, point: &[f64; NVARS], hbar: f64, w: &Jet2) -> Result<(C, f64), VerificationError> {
    let mut value = C::new(0.0, 0.0);
    let mut scale = 0.0;
    for (alpha, s) in op.terms() {
        let t = s.eval(point, hbar) * w.deriv(*alpha).ok_or(VerificationError::JetOrder)?;
        value += t;
        scale += t.norm();
    }
    Ok((value, scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualSystem {
    /// The two `H, L`-only equations, hand-coded.
    Reduced,
    /// Left star multiplication by `H` and `L` on `W_Em`, derived operators.
    Full,
    /// Left `H`, left and right `L`, and the Moyal bracket with `H`, on
    /// `W_Emm'`.
    Cross,
}

impl ResidualSystem {
    pub fn name(self) -> &'static str {
        match self {
            ResidualSystem::Reduced => "pde_reduced",
            ResidualSystem::Full => "pde_full",
            ResidualSystem::Cross => "pde_cross",
        }
    }

    fn equations(self) -> &'static [&'static str] {
        match self {
            ResidualSystem::Reduced => &["energy", "angular momentum"],
            ResidualSystem::Full => &["H star W = E W", "L star W = m hbar W"],
            ResidualSystem::Cross => &["H star W = E W", "L star W = m hbar W", "W star L = m' hbar W", "Moyal bracket with H"],
        }
    }
}

/// Interior grid in `(H, L)`, replicated over a few `χ` and `T` values.
/// `H` stays a fraction `h_margin · E` away from both `0` and `E`; `L`
/// spans `±l_extent · ħ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualGrid {
    pub h_margin: f64,
    pub l_extent: f64,
    pub n_h: usize,
    pub n_l: usize,
    pub chis: Vec<f64>,
    pub ts: Vec<f64>,
}

impl Default for ResidualGrid {
    fn default() -> Self {
        ResidualGrid { h_margin: 0.05, l_extent: 10.0, n_h: 40, n_l: 41, chis: vec![0.3, 2.1, 4.4], ts: vec![0.0, 1.7] }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

impl ResidualGrid {
    fn validate(&self) -> Result<(), VerificationError> {
        if !(self.h_margin > 0.0 && self.h_margin < 0.5) {
            return Err(VerificationError::SingularGrid(format!("H margin {} must lie in (0, 1/2)", self.h_margin)));
        }
        if self.n_h == 0 || self.n_l == 0 || self.chis.is_empty() || self.ts.is_empty() || !(self.l_extent >= 0.0) {
            return Err(VerificationError::SingularGrid("empty grid".into()));
        }
        Ok(())
    }

    fn points(&self, e: f64, hbar: f64) -> Vec<[f64; 4]> {
        let hs = linspace(self.h_margin * e, (1.0 - self.h_margin) * e, self.n_h);
        let ls = linspace(-self.l_extent * hbar, self.l_extent * hbar, self.n_l);
        let mut out = Vec::with_capacity(hs.len() * ls.len() * self.chis.len() * self.ts.len());
        for &t in &self.ts {
            for &chi in &self.chis {
                for &h in &hs {
                    for &l in &ls {
                        out.push([t, chi, h, l]);
                    }
                }
            }
        }
        out
    }
}

fn reduced_residuals(labels: &EigenLabels, params: &PhysParams, x: [f64; 4], w: &Jet2) -> Vec<(C, f64)> {
    let hb = params.hbar;
    let (h, l) = (x[2], x[3]);
    let terms1 = [h * w.v, -hb * hb / 4.0 * h * w.h[3][3], -labels.e * w.v];
    let terms2 = [
        l * w.v,
        -hb * hb / 2.0 * w.g[3],
        -hb * hb / 2.0 * h * w.h[2][3],
        -hb * hb / 4.0 * l * w.h[3][3],
        -labels.m * hb * w.v,
    ];
    [&terms1[..], &terms2[..]]
        .iter()
        .map(|ts| (ts.iter().sum(), ts.iter().map(|t| t.norm()).sum()))
        .collect()
}

/// Star-eigenvalue residuals of the closed-form eigenfunctions on an
/// interior grid. Each equation's residual is divided by the sum of the
/// magnitudes of its terms at that point (eigenvalue term included), so
/// the measure stays meaningful on the nodal lines of `W`; the report
/// carries the maximum over points and equations.
pub fn pde_residuals(
    labels: &EigenLabels,
    params: &PhysParams,
    system: ResidualSystem,
    grid: &ResidualGrid,
) -> Result<VerificationReport, VerificationError> {
    grid.validate()?;
    let ops = match system {
        ResidualSystem::Reduced => None,
        _ => Some(derived_operators()?),
    };
    let chart = Chart::action_angle();
    let hb = params.hbar;
    let cross = system == ResidualSystem::Cross;
    let per_point = grid
        .points(labels.e, hb)
        .par_iter()
        .map(|&x| -> Result<Vec<f64>, VerificationError> {
            let w = w_jet(labels, params, x, cross)?;
            let eig = |lambda: f64, r: (C, f64)| (r.0 - lambda * w.v, r.1 + (lambda * w.v).norm());
            let rows: Vec<(C, f64)> = match (system, ops) {
                (ResidualSystem::Reduced, _) => reduced_residuals(labels, params, x, &w),
                (_, Some(ops)) => {
                    let pt = chart.ring_point(x, params);
                    let lh = apply(&ops.left_h, &pt, hb, &w)?;
                    let ll = apply(&ops.left_l, &pt, hb, &w)?;
                    let mut rows = vec![eig(labels.e, lh), eig(labels.m * hb, ll)];
                    if cross {
                        let rl = apply(&ops.right_l, &pt, hb, &w)?;
                        let rh = apply(&ops.right_h, &pt, hb, &w)?;
                        rows.push(eig(labels.mprime * hb, rl));
                        rows.push((lh.0 - rh.0, lh.1 + rh.1));
                    }
                    rows
                }
                _ => unreachable!("operators are loaded for every derived system"),
            };
            Ok(rows.iter().map(|(r, s)| if *s == 0.0 { 0.0 } else { r.norm() / s }).collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n_eq = system.equations().len();
    let per_eq: Vec<f64> = (0..n_eq).map(|k| per_point.iter().map(|v| v[k]).fold(0.0, f64::max)).collect();
    let max = per_eq.iter().cloned().fold(0.0, f64::max);
    let id = format!(
        "{} E={} m={} m'={} alpha={} D={}",
        system.name(),
        labels.e,
        labels.m,
        if cross { labels.mprime } else { labels.m },
        labels.alpha,
        labels.d_offset
    );
    Ok(VerificationReport::new(
        id,
        max,
        1e-10,
        json!({
            "labels": labels,
            "hbar": hb,
            "mass": params.m,
            "grid": grid,
            "points": per_point.len(),
            "normalization": "sum of term magnitudes",
            "equations": system.equations(),
            "max_per_equation": per_eq,
        }),
    ))
}

/// The coupled first-order system for `B₁, B₂` in
/// `W_Emm' = B₁ cos(aL) + B₂ sin(aL)`, with `B₁ = W|_{L=0}` and
/// `B₂ = ∂_L W|_{L=0} / a` taken from the closed form by differentiation.
/// The extracted pair is also compared with the direct component formula.
pub fn ode_residuals_b1b2(
    labels: &EigenLabels,
    h_grid: &[f64],
    chi: f64,
    params: &PhysParams,
) -> Result<VerificationReport, VerificationError> {
    let e = labels.e;
    if let Some(h) = h_grid.iter().find(|&&h| !(h > 0.0 && h < e)) {
        return Err(VerificationError::SingularGrid(format!("H = {h} outside (0, {e})")));
    }
    let (dm, sm) = (labels.m - labels.mprime, labels.m + labels.mprime);
    let i = C::i();
    let rows = h_grid
        .par_iter()
        .map(|&h| -> Result<[f64; 5], VerificationError> {
            let w = w_jet(labels, params, [0.0, chi, h, 0.0], true)?;
            let hj = Jet2::var(h, 2);
            let a = ((e - hj) / hj).sqrt() * (2.0 / params.hbar);
            let (av, ad) = (a.v.re, a.g[2].re);
            let (b1, b1_chi, b1_h) = (w.v, w.g[1], w.g[2]);
            let b2 = w.g[3] / av;
            let b2_chi = w.h[1][3] / av;
            let b2_h = w.h[2][3] / av - w.g[3] * ad / (av * av);
            let root = ((e - h) * h).sqrt();
            let eqs: [Vec<C>; 4] = [
                vec![dm * b1, i * b1_chi],
                vec![dm * b2, i * b2_chi],
                vec![root * sm * b1, (e - 2.0 * h) * b2, 2.0 * (e - h) * h * b2_h],
                vec![-root * sm * b2, (e - 2.0 * h) * b1, 2.0 * (e - h) * h * b1_h],
            ];
            let mut out = [0.0; 5];
            for (k, ts) in eqs.iter().enumerate() {
                let s: f64 = ts.iter().map(|t| t.norm()).sum();
                out[k] = if s == 0.0 { 0.0 } else { ts.iter().sum::<C>().norm() / s };
            }
            let (c1, c2) = cross_components(labels, h, chi, params)?;
            out[4] = ((b1 - c1).norm() + (b2 - c2).norm()) / (c1.norm() + c2.norm());
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let per_eq: Vec<f64> = (0..5).map(|k| rows.iter().map(|r| r[k]).fold(0.0, f64::max)).collect();
    let max = per_eq.iter().cloned().fold(0.0, f64::max);
    Ok(VerificationReport::new(
        format!("ode_b1b2 E={} m={} m'={} chi={}", e, labels.m, labels.mprime, chi),
        max,
        1e-9,
        json!({
            "labels": labels,
            "chi": chi,
            "points": h_grid.len(),
            "h_range": [h_grid.iter().cloned().fold(f64::INFINITY, f64::min), h_grid.iter().cloned().fold(0.0, f64::max)],
            "normalization": "sum of term magnitudes",
            "equations": ["chi dependence of B1", "chi dependence of B2", "H equation for B2", "H equation for B1", "extraction vs components"],
            "max_per_equation": per_eq,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::ActionAnglePoint;
    use crate::wigner::{eval_w_em, eval_w_emmp};

    #[test]
    fn jet_value_matches_the_evaluators() {
        let p = PhysParams::new(1.4, 0.6).unwrap();
        let l = EigenLabels::cross(1.3, 2.0, -1.0, 0.7).unwrap().with_offset(0.2);
        for x in [[0.0, 0.3, 0.2, -1.0], [1.0, 5.0, 1.2, 3.0]] {
            let pt = ActionAnglePoint::from_array(x);
            let w = w_jet(&l, &p, x, true).unwrap();
            assert!((w.v - eval_w_emmp(&l, &pt, &p).unwrap().value().unwrap()).norm() < 1e-14);
            let w = w_jet(&l, &p, x, false).unwrap();
            assert!((w.v.re - eval_w_em(&l, &pt, &p).unwrap().value().unwrap()).abs() < 1e-14);
        }
        assert!(w_jet(&l, &p, [0.0, 0.0, 1.3, 0.0], true).is_err());
    }

    #[test]
    fn grid_margin_is_enforced() {
        let g = ResidualGrid { h_margin: 0.0, ..Default::default() };
        let l = EigenLabels::new(1.0, 0.0).unwrap();
        assert!(matches!(
            pde_residuals(&l, &PhysParams::natural(), ResidualSystem::Reduced, &g),
            Err(VerificationError::SingularGrid(_))
        ));
    }

    #[test]
    fn reference_differs_from_derivation_only_in_the_mixed_term() {
        let d = derived_operators().unwrap();
        let r = reference_operators();
        assert!(mismatches(&d.left_h, &r.left_h).is_empty());
        let diff = mismatches(&d.left_l, &r.left_l);
        assert_eq!(diff.len(), 1, "{diff:?}");
        assert!(diff[0].starts_with("dT*dchi hbar^2"));
    }
}
