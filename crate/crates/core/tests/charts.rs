use std::f64::consts::PI;

use fedosov_core::charts::*;
use fedosov_core::symbolic::{parse_observable, RatFun, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cartesian(rng: &mut ChaCha8Rng) -> CartesianPoint {
    loop {
        let p = CartesianPoint::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        );
        if p.px.hypot(p.py) > 0.1 {
            return p;
        }
    }
}

fn random_action_angle(rng: &mut ChaCha8Rng) -> ActionAnglePoint {
    ActionAnglePoint::new(
        rng.gen_range(-4.0..4.0),
        rng.gen_range(0.0..2.0 * PI),
        rng.gen_range(0.05..5.0),
        rng.gen_range(-6.0..6.0),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn round_trips_both_ways() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let params = PhysParams::new(rng.gen_range(0.3..3.0), 1.0).unwrap();
        let q = random_action_angle(&mut rng);
        let back = to_action_angle(&from_action_angle(&q, &params).unwrap(), &params).unwrap();
        let dchi = (back.chi - q.chi + PI).rem_euclid(2.0 * PI) - PI;
        assert!(rel(back.t, q.t) <= 1e-12, "{:?} {:?}", q, back);
        assert!(dchi.abs() <= 1e-12);
        assert!(rel(back.h, q.h) <= 1e-12 && rel(back.l, q.l) <= 1e-12);

        let c = random_cartesian(&mut rng);
        let back = from_action_angle(&to_action_angle(&c, &params).unwrap(), &params).unwrap();
        for (a, b) in back.to_array().iter().zip(c.to_array()) {
            assert!(rel(*a, b) <= 1e-12);
        }
    }
}

#[test]
fn jacobian_is_unimodular_and_matches_finite_differences() {
    let chart = Chart::action_angle();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let params = PhysParams::new(rng.gen_range(0.5..2.0), 1.0).unwrap();
        let pt = random_cartesian(&mut rng);
        let det = chart_jacobian_det(&chart, &pt, &params).unwrap();
        assert!((det - 1.0).abs() <= 1e-12, "det {}", det);
        let exact = exact_jacobian(&chart, &pt, &params).unwrap();
        let fd = fd_jacobian(&chart, &pt, &params, 1e-5).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((exact[a][b] - fd[a][b]).abs() <= 1e-6 * (1.0 + exact[a][b].abs()));
            }
        }
    }
}

#[test]
fn canonical_brackets_in_both_charts() {
    let names = ["T", "chi", "H", "L"];
    let exprs: Vec<_> = names.iter().map(|n| parse_observable(n).unwrap()).collect();
    let expected = |i: usize, j: usize| -> f64 {
        match (i, j) {
            (0, 2) | (1, 3) => 1.0,
            (2, 0) | (3, 1) => -1.0,
            _ => 0.0,
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let params = PhysParams::new(1.3, 1.0).unwrap();
    for _ in 0..100 {
        let aa = random_action_angle(&mut rng);
        let cart = random_cartesian(&mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let v1 = poisson_bracket(&exprs[i], &exprs[j], aa.to_array(), &Chart::action_angle(), &params).unwrap();
                let v2 = poisson_bracket(&exprs[i], &exprs[j], cart.to_array(), &Chart::cartesian(), &params).unwrap();
                assert!((v1 - expected(i, j)).abs() <= 1e-12);
                assert!((v2 - expected(i, j)).abs() <= 1e-12, "{} {} {}", names[i], names[j], v2);
            }
        }
    }
}

#[test]
fn cartesian_brackets_through_the_action_angle_chart() {
    let x = parse_observable("x").unwrap();
    let px = parse_observable("px").unwrap();
    let y = parse_observable("y").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let params = PhysParams::natural();
    for _ in 0..50 {
        let aa = random_action_angle(&mut rng).to_array();
        let v = poisson_bracket(&x, &px, aa, &Chart::action_angle(), &params).unwrap();
        assert!((v - 1.0).abs() <= 1e-10);
        let v = poisson_bracket(&y, &px, aa, &Chart::action_angle(), &params).unwrap();
        assert!(v.abs() <= 1e-10);
    }
}

#[test]
fn connection_is_totally_symmetric_and_preserves_omega() {
    let chart = Chart::action_angle();
    let table = chart.connection();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(table.get(i, j, k), table.get(k, i, j));
                assert_eq!(table.get(i, j, k), table.get(j, i, k));
            }
        }
    }
    for _ in 0..50 {
        let q = random_action_angle(&mut rng).to_array();
        assert!(omega_parallel_defect(&chart, q, &PhysParams::natural()) <= 1e-10);
    }
}

/// Christoffel symbols of the flat Cartesian connection seen from the new
/// chart, `Γ^a_bc = (∂Q̃^a/∂Q^r) ∂²Q^r/∂Q̃^b∂Q̃^c`, by finite differences of
/// the numeric inverse map.
#[test]
fn mixed_symbols_match_finite_differences_of_the_inverse_map() {
    let chart = Chart::action_angle();
    let params = PhysParams::new(1.4, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let inv = |q: [f64; 4]| from_action_angle(&ActionAnglePoint::from_array(q), &params).unwrap().to_array();
    for _ in 0..20 {
        let q = random_action_angle(&mut rng).to_array();
        let h = 1e-4;
        let cart = CartesianPoint::from_array(inv(q));
        let fwd = exact_jacobian(&chart, &cart, &params).unwrap();
        let p = chart.ring_point(q, &params);
        for b in 0..4 {
            for c in 0..4 {
                let shifted = |db: f64, dc: f64| {
                    let mut z = q;
                    z[b] += db;
                    z[c] += dc;
                    inv(z)
                };
                let (pp, pm, mp, mm) = (shifted(h, h), shifted(h, -h), shifted(-h, h), shifted(-h, -h));
                let d2: Vec<f64> = (0..4).map(|r| (pp[r] - pm[r] - mp[r] + mm[r]) / (4.0 * h * h)).collect();
                for a in 0..4 {
                    let fd: f64 = (0..4).map(|r| fwd[a][r] * d2[r]).sum();
                    let exact = chart.christoffel(a, b, c).eval(&p);
                    assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "{} {} {}: {} vs {}", a, b, c, fd, exact);
                }
            }
        }
    }
}

#[test]
fn table_values_at_a_sample_point() {
    let table = Chart::action_angle().connection().clone();
    let mut p = [0.0; fedosov_core::symbolic::NVARS];
    p[Var::H.index()] = 2.0;
    p[Var::L.index()] = 5.0;
    p[Var::M.index()] = 1.0;
    let got: Vec<f64> = [[0, 1, 1], [0, 2, 2], [1, 1, 1], [1, 2, 2], [1, 2, 3]]
        .iter()
        .map(|t| table.get(t[0], t[1], t[2]).eval(&p))
        .collect();
    assert_eq!(got, vec![-4.0, -0.25, -10.0, 0.625, -0.25]);
    assert_eq!(table.nonzero().count(), 5);
    assert!(table.nonzero().all(|(_, v)| !v.contains_var(Var::M)));
    assert_eq!(table.get(3, 3, 3), RatFun::zero());
}
