//! Property tests for differentiation, printing and equivalence.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{equiv, parse, Expr, SampleDomain, Var};

/// Source text of random expressions that are finite on the default
/// sample domain (`q, r ≥ 1/2`).
pub(crate) fn arb_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("p".to_string()),
        Just("q".to_string()),
        Just("r".to_string()),
        Just("s".to_string()),
        (-3i64..=3).prop_map(|k| format!("({k})")),
        Just("q^(1/2)".to_string()),
        Just("r^(-2/3)".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            inner.prop_map(|a| format!("({a})/q")),
        ]
    })
}

pub(crate) fn arb_expr() -> impl Strategy<Value = Expr> {
    arb_source().prop_map(|s| parse(&s).expect("generated source parses"))
}

fn same(a: &Expr, b: &Expr) -> bool {
    equiv(a, b, &SampleDomain::default(), 20, 1e-9, 11).unwrap().passed
}

fn arb_var() -> impl Strategy<Value = Var> {
    prop::sample::select(Var::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diff_is_linear(a in arb_expr(), b in arb_expr(), c1 in -3i64..=3, c2 in -3i64..=3, v in arb_var()) {
        let lhs = (Expr::integer(c1) * &a + Expr::integer(c2) * &b).diff(v);
        let rhs = Expr::integer(c1) * a.diff(v) + Expr::integer(c2) * b.diff(v);
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn product_rule(a in arb_expr(), b in arb_expr(), v in arb_var()) {
        let lhs = (&a * &b).diff(v);
        let rhs = a.diff(v) * &b + &a * b.diff(v);
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn diff_matches_central_differences(a in arb_expr(), v in arb_var(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = SampleDomain::default().sample(&mut rng);
        let h = 1e-5;
        let x = pt.get(v).unwrap();
        let fp = a.eval(&pt.with(v, x + h)).unwrap();
        let fm = a.eval(&pt.with(v, x - h)).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        let d = a.diff(v).eval(&pt).unwrap();
        let scale = 1.0 + fp.abs().max(fm.abs()) + d.abs();
        prop_assert!((fd - d).abs() <= 1e-5 * scale, "fd {} vs {}", fd, d);
    }

    #[test]
    fn print_parse_round_trip(a in arb_expr()) {
        let printed = a.to_string();
        let back = parse(&printed).unwrap();
        prop_assert!(same(&a, &back), "{}", printed);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn simplification_preserves_value(a in arb_expr()) {
        prop_assert!(same(&a, &a.simplified()));
    }

    #[test]
    fn equiv_is_reflexive_and_symmetric(a in arb_expr(), b in arb_expr()) {
        let d = SampleDomain::default();
        let aa = equiv(&a, &a, &d, 10, 1e-9, 3).unwrap();
        prop_assert!(aa.passed);
        prop_assert_eq!(aa.max_residual, 0.0);
        let ab = equiv(&a, &b, &d, 10, 1e-9, 3).unwrap();
        let ba = equiv(&b, &a, &d, 10, 1e-9, 3).unwrap();
        prop_assert_eq!(ab.max_residual, ba.max_residual);
        prop_assert_eq!(ab.passed, ba.passed);
    }
}
