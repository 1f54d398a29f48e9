use fedosov_core::charts::Chart;
use fedosov_core::formal_weyl::{star_product, TruncationConfig};
use fedosov_core::moyal::*;
use fedosov_core::symbolic::{parse_observable, rat, CRat, Expr, HbarSeries, Monomial, Poly, RatFun, Var};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(s: &str) -> CRat {
    CRat::real(parse_observable(s).unwrap().to_ratfun().unwrap())
}

fn random_poly(rng: &mut ChaCha8Rng, vars: &[Var], max_deg: usize) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..rng.gen_range(1..5) {
        let mut m = Monomial::one();
        for _ in 0..rng.gen_range(0..=max_deg) {
            m = m.mul(&Monomial::var(vars[rng.gen_range(0..vars.len())]));
        }
        p = p.add(&Poly::term(rat(rng.gen_range(-5..6), rng.gen_range(1..4)), m));
    }
    p
}

fn random_complex(rng: &mut ChaCha8Rng, max_deg: usize) -> CRat {
    let vars = [Var::X, Var::Y, Var::Px, Var::Py];
    CRat::new(
        RatFun::from_poly(random_poly(rng, &vars, max_deg)),
        RatFun::from_poly(random_poly(rng, &vars, max_deg)),
    )
}

#[test]
fn commuting_pairs_and_brackets() {
    let h = c("(px^2 + py^2)/(2*M)");
    let l = c("x*py - y*px");
    assert!(moyal_bracket(&h, &l, DEFAULT_ORDER).unwrap().is_zero());
    let b = moyal_bracket(&c("px"), &l, DEFAULT_ORDER).unwrap();
    assert_eq!(b, HbarSeries::constant(c("-py")));
    let b = moyal_bracket(&c("x^2"), &c("px^2"), DEFAULT_ORDER).unwrap();
    assert_eq!(b, HbarSeries::constant(c("4*x*px")));
    let aa = [Var::T, Var::Chi, Var::H, Var::L];
    let b = canonical_bracket(aa, &c("T"), &c("H"), 1).unwrap();
    assert_eq!(b, HbarSeries::constant(CRat::one()));
}

/// For quadratic observables the Moyal bracket is the Poisson bracket.
#[test]
fn quadratic_brackets_are_poisson() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let vars = [Var::X, Var::Y, Var::Px, Var::Py];
    for _ in 0..100 {
        let f = RatFun::from_poly(random_poly(&mut rng, &vars, 2));
        let g = RatFun::from_poly(random_poly(&mut rng, &vars, 2));
        let mut poisson = RatFun::zero();
        for j in 0..2 {
            poisson = poisson
                .add(&f.derivative(vars[j]).mul(&g.derivative(vars[j + 2])))
                .sub(&f.derivative(vars[j + 2]).mul(&g.derivative(vars[j])));
        }
        let b = moyal_bracket(&CRat::real(f), &CRat::real(g), DEFAULT_ORDER).unwrap();
        assert_eq!(b, HbarSeries::constant(CRat::real(poisson)));
    }
}

#[test]
fn associativity_and_hermitian_transpose() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..30 {
        let f = random_complex(&mut rng, 3);
        let g = random_complex(&mut rng, 3);
        let h = random_complex(&mut rng, 2);
        let order = 12;
        let left = series_star(&moyal_differential(&f, &g, order), &h, order);
        let right = star_series(&f, &moyal_differential(&g, &h, order), order);
        assert_eq!(left, right);

        let lhs = moyal_differential(&f, &g, order).conj();
        let rhs = moyal_differential(&g.conj(), &f.conj(), order);
        assert_eq!(lhs, rhs);
    }
}

/// `(Σ ħ^a A_a) ⋆ g` with the ħ-orders added up.
fn series_star(f: &HbarSeries, g: &CRat, order: u32) -> HbarSeries {
    let mut out = HbarSeries::zero();
    for (a, fa) in f.terms() {
        for (b, v) in moyal_differential(fa, g, order).terms() {
            out.add_term(a + b, v.clone());
        }
    }
    out
}

fn star_series(f: &CRat, g: &HbarSeries, order: u32) -> HbarSeries {
    let mut out = HbarSeries::zero();
    for (b, gb) in g.terms() {
        for (a, v) in moyal_differential(f, gb, order).terms() {
            out.add_term(a + b, v.clone());
        }
    }
    out
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1e-300)
}

#[test]
fn gaussian_composition_rule() {
    let hbar = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for (a, b) in [(1, 1), (1, 3), (2, 5)] {
        // exp(−a|v|²/ħ) ⋆ exp(−b|v|²/ħ) per conjugate pair.
        let f = GaussianPolynomial::isotropic(CRat::one(), rat(2 * a, 1)).unwrap();
        let g = GaussianPolynomial::isotropic(CRat::one(), rat(2 * b, 1)).unwrap();
        let (a, b) = (a as f64, b as f64);
        let s = (a + b) / (1.0 + a * b);
        for _ in 0..10 {
            let pt: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.7..0.7));
            let r2: f64 = pt.iter().map(|v| v * v).sum();
            let want = Complex64::new((1.0 / (1.0 + a * b)).powi(2) * (-s * r2 / hbar).exp(), 0.0);
            let got = moyal_integral_gaussian(&f, &g, pt, hbar).unwrap();
            assert!(close(got, want, 1e-12), "{} vs {}", got, want);
        }
    }
}

#[test]
fn gaussian_times_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let one = GaussianPolynomial::polynomial(CRat::one()).unwrap();
    for _ in 0..20 {
        let f = GaussianPolynomial::isotropic(random_complex(&mut rng, 2), rat(rng.gen_range(1..4), 2)).unwrap();
        let pt: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let got = moyal_integral_gaussian(&f, &one, pt, 1.0).unwrap();
        assert!(close(got, f.eval(pt), 1e-12), "{} vs {}", got, f.eval(pt));
        let got = moyal_integral_gaussian(&one, &f, pt, 1.0).unwrap();
        assert!(close(got, f.eval(pt), 1e-12));
    }
}

#[test]
fn integral_and_series_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for _ in 0..50 {
        let hbar = rng.gen_range(0.3..1.5);
        let f = random_complex(&mut rng, 4);
        let g = GaussianPolynomial::isotropic(random_complex(&mut rng, 2), rat(rng.gen_range(1..5), 4)).unwrap();
        let pt: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let series = moyal_differential_gaussian(&f, &g, pt, hbar, 8);
        let integral = moyal_integral_gaussian(&GaussianPolynomial::polynomial(f).unwrap(), &g, pt, hbar).unwrap();
        assert!(close(integral, series, 1e-10), "{} vs {}", integral, series);
    }
}

#[test]
fn divergent_forms_are_rejected() {
    let neg = GaussianPolynomial::isotropic(CRat::one(), rat(-1, 1));
    assert!(matches!(neg, Err(MoyalError::NonConvergent)));
}

fn expr_of(c: &CRat) -> Expr {
    parse_observable(&c.re.to_string()).unwrap()
}

/// The flat-chart Fedosov product reproduces the series term by term.
#[test]
fn flat_chart_fedosov_product_is_moyal() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let chart = Chart::cartesian();
    let trunc = TruncationConfig::new(8, 4).unwrap();
    let vars = [Var::X, Var::Y, Var::Px, Var::Py];
    for _ in 0..20 {
        let f = CRat::real(RatFun::from_poly(random_poly(&mut rng, &vars, 4)));
        let g = CRat::real(RatFun::from_poly(random_poly(&mut rng, &vars, 4)));
        let fedosov = star_product(&expr_of(&f), &expr_of(&g), &chart, trunc).unwrap();
        assert_eq!(fedosov, moyal_differential(&f, &g, 4));
    }
}
