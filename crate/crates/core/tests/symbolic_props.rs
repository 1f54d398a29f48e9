use fedosov_core::symbolic::{gcd, parse_observable, rat, Expr, Ident, Monomial, Poly, RatFun, Var};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const RING_VARS: [Var; 3] = [Var::H, Var::L, Var::M];

fn poly_strategy() -> impl Strategy<Value = Poly> {
    prop::collection::vec((-4i64..=4, 0u16..3, 0u16..3, 0u16..2), 1..4).prop_map(|terms| {
        terms.into_iter().fold(Poly::zero(), |acc, (c, a, b, d)| {
            let mut m = Monomial::one();
            m.0[Var::H.index()] = a;
            m.0[Var::L.index()] = b;
            m.0[Var::M.index()] = d;
            acc.add(&Poly::term(rat(c, 1), m))
        })
    })
}

fn ratfun_strategy() -> impl Strategy<Value = RatFun> {
    (poly_strategy(), poly_strategy()).prop_map(|(n, d)| {
        if d.is_zero() {
            RatFun::from_poly(n)
        } else {
            RatFun::new(n, d).unwrap()
        }
    })
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..20).prop_map(Expr::int),
        (1i64..100).prop_map(|n| Expr::Num(BigRational::new(BigInt::from(n), BigInt::from(4)))),
        prop::sample::select(Ident::ALL.to_vec()).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner, -3i32..4).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn addition_is_associative(a in ratfun_strategy(), b in ratfun_strategy(), c in ratfun_strategy()) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    #[test]
    fn multiplication_distributes(a in ratfun_strategy(), b in ratfun_strategy(), c in ratfun_strategy()) {
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn derivative_is_linear_and_leibniz(a in ratfun_strategy(), b in ratfun_strategy(), k in -5i64..5) {
        for v in RING_VARS {
            let lin = a.scale(&rat(k, 1)).add(&b).derivative(v);
            prop_assert_eq!(lin, a.derivative(v).scale(&rat(k, 1)).add(&b.derivative(v)));
            let prod = a.mul(&b).derivative(v);
            prop_assert_eq!(prod, a.derivative(v).mul(&b).add(&a.mul(&b.derivative(v))));
        }
    }

    #[test]
    fn gcd_contains_planted_factor(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
        prop_assume!(!c.is_zero() && !(a.is_zero() && b.is_zero()));
        let g = gcd(&a.mul(&c), &b.mul(&c));
        prop_assert!(g.exact_div(&c).is_some());
        prop_assert!(a.mul(&c).exact_div(&g).is_some());
        prop_assert!(b.mul(&c).exact_div(&g).is_some());
    }

    #[test]
    fn division_inverts_multiplication(a in ratfun_strategy(), b in ratfun_strategy()) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!(a.mul(&b).div(&b).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_then_parse_is_identity(e in expr_strategy()) {
        let text = e.to_string();
        let back = parse_observable(&text).unwrap();
        prop_assert_eq!(back, e, "text was {}", text);
    }
}
