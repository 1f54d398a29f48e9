use std::f64::consts::PI;

use fedosov_core::charts::{polar_from_cartesian, to_action_angle, ActionAnglePoint, CartesianPoint, PhysParams, PolarPoint};
use fedosov_core::numerics::{adaptive_integrate_2d, QuadratureConfig};
use fedosov_core::wigner::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_aa(rng: &mut ChaCha8Rng, e: f64) -> ActionAnglePoint {
    ActionAnglePoint::new(
        rng.gen_range(-3.0..3.0),
        rng.gen_range(0.0..2.0 * PI),
        rng.gen_range(0.01..1.5 * e),
        rng.gen_range(-8.0..8.0),
    )
}

#[test]
fn polar_form_agrees_through_the_charts() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let p = PhysParams::new(1.3, 0.7).unwrap();
    let labels = EigenLabels::new(1.2, 1.5).unwrap();
    let p0 = labels.p0(&p);
    let mut checked = 0;
    while checked < 1000 {
        let pt = CartesianPoint::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(-1.2 * p0..1.2 * p0), rng.gen_range(-1.2 * p0..1.2 * p0));
        let (Ok(aa), Ok(pol)) = (to_action_angle(&pt, &p), polar_from_cartesian(&pt)) else {
            continue;
        };
        let a = eval_w_em(&labels, &aa, &p).unwrap().value().unwrap();
        let b = eval_w_em_polar(&labels, &pol, &p).unwrap().value().unwrap();
        let scale = 2.0 * p.m * norm_constants(&labels, &p).0 / (pol.p * (p0 * p0 - pol.p * pol.p).abs().sqrt());
        assert!((a - b).abs() <= 1e-12 * scale, "{pt:?}: {a} vs {b}");
        checked += 1;
    }
}

#[test]
fn polar_form_edge_cases() {
    let p = PhysParams::natural();
    let labels = EigenLabels::new(1.0, 0.0).unwrap();
    let p0 = labels.p0(&p);
    let n = norm_constants(&labels, &p).0;
    let above = PolarPoint { r: 1.0, phi: 0.2, p: 1.1 * p0, chi: 0.4 };
    assert_eq!(eval_w_em_polar(&labels, &above, &p).unwrap(), Sample::Value(0.0));
    for (phi, chi) in [(0.0, 0.0), (1.0, 2.0), (3.0, 0.5)] {
        let pt = PolarPoint { r: 0.0, phi, p: 0.6, chi };
        let want = 2.0 * n / (0.6 * (p0 * p0 - 0.36).sqrt());
        assert!((eval_w_em_polar(&labels, &pt, &p).unwrap().value().unwrap() - want).abs() < 1e-15);
    }
    assert!(eval_w_em_polar(&labels, &PolarPoint { r: 0.0, phi: 0.0, p: 0.0, chi: 0.0 }, &p).is_err());
}

#[test]
fn hermiticity_and_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let p = PhysParams::natural();
    for _ in 0..1000 {
        let e = rng.gen_range(0.5..2.0);
        let (m, mp) = (rng.gen_range(-5..=5) as f64, rng.gen_range(-5..=5) as f64);
        let alpha = rng.gen_range(-PI..PI);
        let a = EigenLabels::cross(e, m, mp, alpha).unwrap();
        let b = EigenLabels::cross(e, mp, m, alpha).unwrap();
        let pt = random_aa(&mut rng, e);
        let x = eval_w_emmp(&a, &pt, &p).unwrap().value().unwrap();
        let y = eval_w_emmp(&b, &pt, &p).unwrap().value().unwrap();
        assert!((x.conj() - y).norm() <= 1e-14 * x.norm().max(1.0));
        assert_eq!(norm_constants(&b, &p).1.conj(), norm_constants(&a, &p).1);
    }
    let diag = EigenLabels::cross(1.0, 2.0, 2.0, 0.9).unwrap();
    for _ in 0..200 {
        let pt = random_aa(&mut rng, 1.0);
        let w = eval_w_emmp(&diag, &pt, &p).unwrap().value().unwrap();
        assert_eq!(w.im, 0.0);
        assert_eq!(Sample::Value(w.re), eval_w_em(&diag, &pt, &p).unwrap());
    }
}

#[test]
fn norm_constant_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let p = PhysParams::new(2.0, 0.3).unwrap();
    for _ in 0..100 {
        let (m, mp, alpha) = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(-PI..PI));
        let l = EigenLabels::cross(1.0, m, mp, alpha).unwrap();
        let (n, c) = norm_constants(&l, &p);
        assert!((n * 4.0 * PI.powi(3) * 2.0 * 0.09 - 1.0).abs() < 1e-15);
        assert!((c.norm() - n).abs() < 1e-16);
        assert!((c - Complex64::from_polar(n, (m - mp) * alpha)).norm() < 1e-16);
    }
}

#[test]
fn families_ignore_t_and_w_em_ignores_chi() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let p = PhysParams::natural();
    let labels = EigenLabels::cross(1.0, 3.0, 1.0, 0.2).unwrap();
    for _ in 0..100 {
        let pt = random_aa(&mut rng, 1.0);
        let moved_t = ActionAnglePoint { t: pt.t + 1.7, ..pt };
        let moved_chi = ActionAnglePoint { chi: pt.chi + 0.9, ..pt };
        assert_eq!(eval_w_emmp(&labels, &pt, &p).unwrap(), eval_w_emmp(&labels, &moved_t, &p).unwrap());
        assert_eq!(eval_w_em(&labels, &pt, &p).unwrap(), eval_w_em(&labels, &moved_chi, &p).unwrap());
    }
}

#[test]
fn grows_without_bound_towards_the_shell() {
    let p = PhysParams::natural();
    for m in [0.0, 1.0, 5.0] {
        let labels = EigenLabels::new(1.0, m).unwrap();
        let mut prev = 0.0;
        for k in 2..40 {
            let h = 1.0 - 0.5f64.powi(k);
            let w = eval_w_em(&labels, &ActionAnglePoint::new(0.0, 0.0, h, 0.5), &p).unwrap().value().unwrap();
            if k > 8 {
                assert!(w > prev, "m {m} k {k}: {w} <= {prev}");
            }
            prev = w;
        }
        assert!(prev / norm_constants(&labels, &p).0 > 1e5);
    }
}

#[test]
fn mollified_state_integrates_to_its_normalization() {
    let p = PhysParams::natural();
    let d = momentum_eigenstate(0.6, -0.8, &p);
    let chi0 = d.chi0.unwrap();
    for eps in [1e-1, 3e-2, 1e-2] {
        let s = d.with_epsilon(eps).unwrap();
        let cfg = QuadratureConfig::new(1e-13, 1e-12).unwrap().with_panels(16);
        let total = adaptive_integrate_2d(
            |chi, h| s.eval_mollified(&ActionAnglePoint::new(0.0, chi, h, 0.0)).unwrap(),
            (chi0 - PI, chi0 + PI),
            (s.e_tilde - 12.0 * eps, s.e_tilde + 12.0 * eps),
            &cfg.with_panels((2.0 * PI / eps) as usize),
            &cfg,
        )
        .unwrap()
        .value;
        assert!((total - d.n).abs() <= 1e-10 * d.n, "eps {eps}: {total} vs {}", d.n);
    }
}

#[test]
fn expansion_coefficients_follow_the_plane_wave_phases() {
    let chi0 = 0.7;
    let alpha = -PI / 2.0;
    let a = |m: i32| Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), -(m as f64) * chi0) * Complex64::i().powi(m);
    for mt in -6..=6 {
        for mtp in -6..=6 {
            let c = expansion_coefficients(mt as f64, mtp as f64, chi0, alpha).unwrap();
            assert!((c.norm() - 1.0 / (2.0 * PI)).abs() < 1e-16);
            assert!((c - a(mt) * a(mtp).conj()).norm() < 1e-15, "{mt} {mtp}");
        }
    }
    let c = expansion_coefficients(1.0, 0.0, chi0, 0.0).unwrap();
    assert!((c - a(1) * a(0).conj()).norm() > 1e-3);
}

#[test]
fn wigner_spec_validation() {
    let p = PhysParams::natural();
    let bad = EigenLabels { e: -1.0, m: 0.0, mprime: 0.0, alpha: 0.0, d_offset: 0.0 };
    assert!(WignerSpec::new(WignerKind::EnergyAngular(bad), p).is_err());
    assert!(EigenLabels::new(0.0, 1.0).is_err());
    assert!(WignerSpec::new(WignerKind::CartesianMomentum { px0: -3.0, py0: 0.0 }, p).is_ok());
}

#[test]
fn polar_grid_rows() {
    let p = PhysParams::natural();
    let labels = EigenLabels::new(1.0, 0.0).unwrap();
    let rows = polar_grid(&labels, &p, (0.0, 2.0), (0.2, 1.0), 3, 4, 0.0, 0.3).unwrap();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[1].coords, [0.0, 0.0, 0.2 + 0.8 / 3.0, 0.3]);
    assert!(rows.iter().all(|r| r.value.im == 0.0));
    assert!(polar_grid(&labels, &p, (0.0, 2.0), (0.0, 1.0), 3, 4, 0.0, 0.3).is_err());
}
