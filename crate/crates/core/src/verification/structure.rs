//! Structural checks: the transported connection, the flat-chart Fedosov
//! product, chart integrity and the symmetries of the cross-Wigner family.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::jet2::Jet2;
use super::{VerificationError, VerificationReport};
use crate::charts::{
    chart_jacobian_det, from_action_angle, polar_from_cartesian, poisson_bracket, to_action_angle, ActionAnglePoint,
    CartesianPoint, Chart, ConnectionTable, PhysParams,
};
use crate::formal_weyl::{star_product, TruncationConfig};
use crate::moyal::moyal_differential;
use crate::symbolic::{parse_observable, rat, CRat, Monomial, Poly, RatFun, Var};
use crate::wigner::{eval_w_em, eval_w_emmp, norm_constants, EigenLabels, Sample};

/// The five nonzero connection coefficients of the time-of-arrival chart
/// as printed, with zero-based indices in the order `(T, χ, H, L)`.
pub fn printed_connection() -> ConnectionTable {
    let h = RatFun::var(Var::H);
    let l = RatFun::var(Var::L);
    let inv_h = h.recip().expect("H is a nonzero symbol");
    let mut t = ConnectionTable::zero();
    t.set(0, 1, 1, h.scale(&rat(-2, 1)));
    t.set(0, 2, 2, inv_h.scale(&rat(-1, 2)));
    t.set(1, 1, 1, l.scale(&rat(-2, 1)));
    t.set(1, 2, 2, l.mul(&inv_h).mul(&inv_h).scale(&rat(1, 2)));
    t.set(1, 2, 3, inv_h.scale(&rat(-1, 2)));
    t
}

/// `γ̃_ijk = ω_rd ∂_i Q^r ∂_j ∂_k Q^d` from second-order jets of the
/// numeric inverse map, independent of the symbolic transport.
pub fn connection_by_jets(q: [f64; 4], params: &PhysParams) -> [[[f64; 4]; 4]; 4] {
    let [t, chi, h, l] = Jet2::coords(q);
    let rho = (h * (2.0 * params.m)).sqrt();
    let (c, s) = (chi.cos(), chi.sin());
    let two_ht = h * t * 2.0;
    let cart = [(two_ht * c + l * s) / rho, (two_ht * s - l * c) / rho, rho * c, rho * s];
    let omega = Chart::cartesian().omega();
    let mut out = [[[0.0; 4]; 4]; 4];
    for (i, plane) in out.iter_mut().enumerate() {
        for (j, row) in plane.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                for r in 0..4 {
                    for d in 0..4 {
                        if omega[r][d] != 0 {
                            *v += omega[r][d] as f64 * (cart[r].g[i] * cart[d].h[j][k]).re;
                        }
                    }
                }
            }
        }
    }
    out
}

fn random_action_angle(rng: &mut ChaCha8Rng) -> ActionAnglePoint {
    ActionAnglePoint::new(rng.gen_range(-4.0..4.0), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.05..5.0), rng.gen_range(-6.0..6.0))
}

fn random_cartesian(rng: &mut ChaCha8Rng) -> CartesianPoint {
    loop {
        let p = CartesianPoint::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if p.px.hypot(p.py) > 0.1 {
            return p;
        }
    }
}

/// Symbolic transport against the printed table, entry by entry, then
/// both against jets of the inverse map at random points.
pub fn connection_transport(seed: u64, points: usize) -> Result<VerificationReport, VerificationError> {
    let chart = Chart::action_angle();
    let derived = chart.connection();
    let printed = printed_connection();
    let mut mismatched = Vec::new();
    for i in 0..4 {
        for j in i..4 {
            for k in j..4 {
                if derived.get(i, j, k) != printed.get(i, j, k) {
                    mismatched.push([i + 1, j + 1, k + 1]);
                }
            }
        }
    }
    let exact = VerificationReport::new(
        "exact entries",
        mismatched.len() as f64,
        0.0,
        json!({ "nonzero": derived.nonzero().count(), "mismatched": mismatched }),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = PhysParams::new(1.3, 1.0).expect("valid");
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let q = random_action_angle(&mut rng).to_array();
        let ring = chart.ring_point(q, &params);
        let jets = connection_by_jets(q, &params);
        for (i, plane) in jets.iter().enumerate() {
            for (j, row) in plane.iter().enumerate() {
                for (k, &v) in row.iter().enumerate() {
                    let want = printed.get(i, j, k).eval(&ring);
                    worst = worst.max((v - want).abs() / want.abs().max(1.0));
                }
            }
        }
    }
    let numeric = VerificationReport::new(
        "numeric spot checks",
        worst,
        1e-12,
        json!({ "points": points, "seed": seed, "normalization": "max(1, |entry|)" }),
    );
    Ok(VerificationReport::combine("connection_transport", vec![exact, numeric]))
}

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> Poly {
    let vars = [Var::X, Var::Y, Var::Px, Var::Py];
    let mut p = Poly::zero();
    for _ in 0..rng.gen_range(1..5) {
        let mut m = Monomial::one();
        for _ in 0..rng.gen_range(0..=max_deg) {
            m = m.mul(&Monomial::var(vars[rng.gen_range(0..4)]));
        }
        p = p.add(&Poly::term(rat(rng.gen_range(-5..6), rng.gen_range(1..4)), m));
    }
    p
}

/// The Fedosov product in the flat chart against the Moyal series on
/// random polynomial pairs, compared exactly through `ħ^order`.
pub fn fedosov_moyal(seed: u64, pairs: usize, max_deg: usize, order: u32) -> Result<VerificationReport, VerificationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = Chart::cartesian();
    let trunc = TruncationConfig::new(2 * max_deg as u32, order)?;
    let polys: Vec<(Poly, Poly)> = (0..pairs).map(|_| (random_poly(&mut rng, max_deg), random_poly(&mut rng, max_deg))).collect();
    let mut mismatches = 0usize;
    for (f, g) in &polys {
        let (fr, gr) = (RatFun::from_poly(f.clone()), RatFun::from_poly(g.clone()));
        let fe = parse_observable(&fr.to_string()).map_err(|e| VerificationError::InvalidLabels(e.to_string()))?;
        let ge = parse_observable(&gr.to_string()).map_err(|e| VerificationError::InvalidLabels(e.to_string()))?;
        let fedosov = star_product(&fe, &ge, &chart, trunc)?;
        if fedosov != moyal_differential(&CRat::real(fr), &CRat::real(gr), order) {
            mismatches += 1;
        }
    }
    Ok(VerificationReport::new(
        "fedosov_moyal",
        mismatches as f64,
        0.0,
        json!({ "pairs": pairs, "max_degree": max_deg, "hbar_order": order, "seed": seed }),
    ))
}

fn symbolic_determinant(m: &[[RatFun; 4]; 4]) -> RatFun {
    // Laplace expansion along the first row, recursively.
    fn det(rows: &[Vec<RatFun>]) -> RatFun {
        if rows.len() == 1 {
            return rows[0][0].clone();
        }
        let mut acc = RatFun::zero();
        for (c, head) in rows[0].iter().enumerate() {
            if head.is_zero() {
                continue;
            }
            let minor: Vec<Vec<RatFun>> = rows[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
                .collect();
            let term = head.mul(&det(&minor));
            acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }
    let rows: Vec<Vec<RatFun>> = m.iter().map(|r| r.to_vec()).collect();
    det(&rows)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Unimodularity, canonical brackets, round trips and rest-point
/// rejection of the time-of-arrival chart.
pub fn chart_integrity(seed: u64, points: usize) -> Result<VerificationReport, VerificationError> {
    let chart = Chart::action_angle();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = PhysParams::new(1.3, 1.0).expect("valid");
    let wrap = |e: crate::charts::ChartError| VerificationError::InvalidLabels(e.to_string());

    let det = symbolic_determinant(&chart.forward_gradients());
    let mut det_err: f64 = if det.is_one() { 0.0 } else { f64::INFINITY };
    for _ in 0..points {
        let pt = random_cartesian(&mut rng);
        det_err = det_err.max((chart_jacobian_det(&chart, &pt, &params).map_err(wrap)? - 1.0).abs());
    }
    let det_part = VerificationReport::new(
        "Jacobian determinant",
        det_err,
        1e-12,
        json!({ "symbolic": det.to_string(), "points": points }),
    );

    let names = ["T", "chi", "H", "L"];
    let exprs: Vec<_> = names.iter().map(|n| parse_observable(n).expect("coordinate name")).collect();
    let expected = |i: usize, j: usize| match (i, j) {
        (0, 2) | (1, 3) => 1.0,
        (2, 0) | (3, 1) => -1.0,
        _ => 0.0,
    };
    let mut bracket_err: f64 = 0.0;
    for _ in 0..points {
        let aa = random_action_angle(&mut rng).to_array();
        let cart = random_cartesian(&mut rng).to_array();
        for i in 0..4 {
            for j in 0..4 {
                let a = poisson_bracket(&exprs[i], &exprs[j], aa, &chart, &params).map_err(wrap)?;
                let b = poisson_bracket(&exprs[i], &exprs[j], cart, &Chart::cartesian(), &params).map_err(wrap)?;
                bracket_err = bracket_err.max((a - expected(i, j)).abs()).max((b - expected(i, j)).abs());
            }
        }
    }
    let brackets = VerificationReport::new("canonical brackets", bracket_err, 1e-12, json!({ "points": points }));

    let mut trip_err: f64 = 0.0;
    for _ in 0..points {
        let q = random_action_angle(&mut rng);
        let back = to_action_angle(&from_action_angle(&q, &params).map_err(wrap)?, &params).map_err(wrap)?;
        let dchi = (back.chi - q.chi + PI).rem_euclid(2.0 * PI) - PI;
        trip_err = trip_err.max(rel(back.t, q.t)).max(dchi.abs()).max(rel(back.h, q.h)).max(rel(back.l, q.l));
        let c = random_cartesian(&mut rng);
        let back = from_action_angle(&to_action_angle(&c, &params).map_err(wrap)?, &params).map_err(wrap)?;
        for (a, b) in back.to_array().iter().zip(c.to_array()) {
            trip_err = trip_err.max(rel(*a, b));
        }
    }
    let trips = VerificationReport::new(
        "round trips",
        trip_err,
        1e-12,
        json!({ "points": points, "normalization": "max(1, |coordinate|)" }),
    );

    let at_rest = [CartesianPoint::new(0.0, 0.0, 0.0, 0.0), CartesianPoint::new(1.5, -2.0, 0.0, 0.0)];
    let accepted = at_rest
        .iter()
        .filter(|p| to_action_angle(p, &params).is_ok() || polar_from_cartesian(p).is_ok())
        .count()
        + usize::from(from_action_angle(&ActionAnglePoint::new(0.0, 0.0, 0.0, 1.0), &params).is_ok());
    let rest = VerificationReport::new("rest points rejected", accepted as f64, 0.0, json!({ "cases": at_rest.len() + 1 }));

    Ok(VerificationReport::combine("chart_integrity", vec![det_part, brackets, trips, rest]))
}

/// `conj(W_Emm') = W_Em'm`, the diagonal reducing to `W_Em`, and the
/// normalization constants.
pub fn hermiticity(seed: u64, points: usize) -> Result<VerificationReport, VerificationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = PhysParams::natural();
    let value = |s: Sample<Complex64>| s.value().unwrap_or(Complex64::new(f64::NAN, 0.0));
    let mut herm: f64 = 0.0;
    for _ in 0..points {
        let e = rng.gen_range(0.5..2.0);
        let (m, mp) = (rng.gen_range(-5..=5) as f64, rng.gen_range(-5..=5) as f64);
        let alpha = rng.gen_range(-PI..PI);
        let a = EigenLabels::cross(e, m, mp, alpha)?;
        let b = EigenLabels::cross(e, mp, m, alpha)?;
        let pt = ActionAnglePoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.01..1.5 * e), rng.gen_range(-8.0..8.0));
        let x = value(eval_w_emmp(&a, &pt, &p)?);
        let y = value(eval_w_emmp(&b, &pt, &p)?);
        herm = herm.max((x.conj() - y).norm() / x.norm().max(1.0));
    }
    let herm_part = VerificationReport::new("conjugate symmetry", herm, 1e-14, json!({ "points": points, "seed": seed }));

    let mut mismatched = 0usize;
    for _ in 0..points / 5 {
        let m = rng.gen_range(-5..=5) as f64;
        let diag = EigenLabels::cross(1.0, m, m, rng.gen_range(-PI..PI))?;
        let pt = ActionAnglePoint::new(0.3, rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.01..1.5), rng.gen_range(-8.0..8.0));
        let w = eval_w_emmp(&diag, &pt, &p)?;
        let plain = eval_w_em(&diag, &pt, &p)?;
        let same = match (w, plain) {
            (Sample::Value(c), Sample::Value(r)) => c.im == 0.0 && c.re == r,
            (Sample::Singular, Sample::Singular) => true,
            _ => false,
        };
        mismatched += usize::from(!same);
    }
    let reduction = VerificationReport::new("diagonal reduces exactly", mismatched as f64, 0.0, json!({ "points": points / 5 }));

    let mut norm_err: f64 = 0.0;
    for (mass, hbar) in [(1.0, 1.0), (2.0, 0.5), (0.3, 1.7)] {
        let params = PhysParams::new(mass, hbar).map_err(|e| VerificationError::InvalidLabels(e.to_string()))?;
        for (m, mp, alpha) in [(2.0, -1.0, 0.4), (0.0, 3.0, -1.1), (1.5, 0.25, 2.0)] {
            let (n, nc) = norm_constants(&EigenLabels::cross(1.0, m, mp, alpha)?, &params);
            let want = 1.0 / (4.0 * PI.powi(3) * mass * hbar * hbar);
            let phase = Complex64::from_polar(1.0, (m - mp) * alpha);
            norm_err = norm_err.max((n - want).abs() / want).max((nc / n - phase).norm()).max((nc.norm() - n).abs() / n);
        }
    }
    let norms = VerificationReport::new("normalization constants", norm_err, 1e-15, json!({ "normalization": "relative" }));
    Ok(VerificationReport::combine("hermiticity", vec![herm_part, reduction, norms]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_table_values() {
        let t = printed_connection();
        let mut p = [0.0; crate::symbolic::NVARS];
        p[Var::H.index()] = 2.0;
        p[Var::L.index()] = 5.0;
        let got: Vec<f64> = t.nonzero().map(|(_, v)| v.eval(&p)).collect();
        assert_eq!(got, vec![-4.0, -0.25, -10.0, 0.625, -0.25]);
    }

    #[test]
    fn jets_see_a_flat_cartesian_connection_as_zero_outside_the_table() {
        let params = PhysParams::natural();
        let g = connection_by_jets([0.4, 1.1, 2.0, 5.0], &params);
        assert!((g[0][1][1] + 4.0).abs() < 1e-12);
        assert!((g[3][2][1] + 0.25).abs() < 1e-12);
        assert!(g[3][3][3].abs() < 1e-12 && g[0][0][0].abs() < 1e-12);
    }

    #[test]
    fn determinant_of_the_forward_gradients_is_one() {
        assert!(symbolic_determinant(&Chart::action_angle().forward_gradients()).is_one());
    }
}
