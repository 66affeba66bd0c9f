use proptest::prelude::*;

use veq_core::coef::{check_zero_free, int, poly_mul};
use veq_core::dsl::{self, Problem};
use veq_core::ir::{tree_to_word, word_to_tree};
use veq_core::quad::{self, Assignment, Oracle};
use veq_core::random::{analytic_palette, polynomial_palette, Gen};
use veq_core::shuffle::shuffle;
use veq_core::{linearize, to_operated, CoefFn, EvalEnv, Interval, Op, OperatedExpr, TensorExpr, VolterraOpSpec};

const HEADER: &str = "
interval (0, 2)
op P { a = 0, k = exp(-x), h = exp(t) }
op Q { a = 0, k = 1 + x }
unknowns y, z
";

fn problem() -> Problem {
    dsl::parse(HEADER).unwrap()
}

fn analytic_gen(seed: u64) -> Gen {
    let p = problem();
    let mut g = Gen::new(seed, p.ops.clone(), &["y", "z"], analytic_palette());
    g.check_brackets = true;
    g.max_monomials = 12;
    g
}

fn polynomial_gen(seed: u64) -> Gen {
    let ops = vec![
        Op::new(VolterraOpSpec::new("A", int(1), CoefFn::X, CoefFn::one())),
        Op::new(VolterraOpSpec::new("B", int(1), CoefFn::X.powi(2), CoefFn::one())),
    ];
    Gen::new(seed, ops, &["y", "z"], polynomial_palette())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn text_rendering_parses_back(seed in any::<u64>()) {
        let p = problem();
        let e = analytic_gen(seed).operated(2, 2);
        let text = dsl::render_expr(&e);
        let back = p.parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{err} in {text}")))?;
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn tensor_text_parses_back(seed in any::<u64>()) {
        let p = problem();
        let t = analytic_gen(seed).tensor(3, 2);
        let text = dsl::render_tensor(&t);
        let back = p.parse_expr(&text).unwrap();
        prop_assert_eq!(back, to_operated(&t, false).unwrap(), "{}", text);
    }

    #[test]
    fn json_roundtrip(seed in any::<u64>()) {
        let mut g = analytic_gen(seed);
        let e = g.operated(2, 2);
        prop_assert_eq!(dsl::expr_from_json(&dsl::expr_to_json(&e)).unwrap(), e);
        let t = g.tensor(3, 3);
        prop_assert_eq!(dsl::tensor_from_json(&dsl::tensor_to_json(&t)).unwrap(), t);
    }

    #[test]
    fn words_and_trees_are_isomorphic(seed in any::<u64>()) {
        let mut g = analytic_gen(seed);
        let e = g.operated(3, 2);
        let t = word_to_tree(&e);
        prop_assert_eq!(tree_to_word(&t), e.clone());
        let f = g.operated(2, 2);
        prop_assert_eq!(word_to_tree(&e.mul(&f)), t.graft(&word_to_tree(&f)));
    }

    #[test]
    fn shuffle_is_a_commutative_monoid(seed in any::<u64>()) {
        let mut g = polynomial_gen(seed);
        let (u, v, w) = (g.tensor(2, 2), g.tensor(2, 2), g.tensor(2, 1));
        prop_assert_eq!(shuffle(&u, &v), shuffle(&v, &u));
        prop_assert_eq!(shuffle(&shuffle(&u, &v), &w), shuffle(&u, &shuffle(&v, &w)));
        prop_assert_eq!(shuffle(&TensorExpr::one(), &u), u);
    }

    #[test]
    fn poly_mul_is_commutative_and_associative(seed in any::<u64>()) {
        let mut g = polynomial_gen(seed);
        let (p, q, r) = (g.poly(3, false), g.poly(3, false), g.poly(2, false));
        prop_assert_eq!(poly_mul(&p, &q), poly_mul(&q, &p));
        prop_assert_eq!(poly_mul(&poly_mul(&p, &q), &r), poly_mul(&p, &poly_mul(&q, &r)));
    }

    #[test]
    fn linearization_is_normal_and_stable(seed in any::<u64>()) {
        let mut g = polynomial_gen(seed);
        g.max_monomials = 8;
        let e = g.operated(2, 2);
        let t = linearize(&e, 8).unwrap();
        prop_assert!(t.is_normal());
        let again = linearize(&to_operated(&t, false).unwrap(), 8).unwrap();
        prop_assert_eq!(again, t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linearization_preserves_values(seed in any::<u64>()) {
        let p = problem();
        let mut g = analytic_gen(seed);
        g.max_monomials = 6;
        let e = g.operated(2, 2);
        let t = linearize(&e, 8).unwrap();
        let pool = quad::test_pool();
        let sigma = Assignment::from([
            ("y".into(), pool[(seed % 7) as usize % pool.len()].clone()),
            ("z".into(), pool[(seed % 5) as usize % pool.len()].clone()),
        ]);
        let r = quad::check_identity(&e, &t, &[sigma], &[0.4, 1.3], 1e-7, &p.env(0), Oracle::Grid);
        prop_assert!(r.pass, "{} fails: {:e}", dsl::render_expr(&e), r.max_rel);
    }
}

#[test]
fn bracket_products_of_coefficients_close_up() {
    // P(1)·P(1) for P = ∫₀ˣ: x² both ways, and 2∫₀ˣ t dt
    let p = dsl::parse("interval (0, 1)\nop P { a = 0 }").unwrap();
    let lhs = p.parse_expr("P(1) * P(1)").unwrap();
    let rhs = p.parse_expr("2 * P(P(1))").unwrap();
    assert_eq!(lhs, rhs);
    assert_eq!(lhs, OperatedExpr::coef(CoefFn::X.powi(2)));
}

#[test]
fn zero_free_certification() {
    let env = EvalEnv::default();
    let pos = Interval::open(0.0, 2.0);
    assert!(check_zero_free(&CoefFn::X, &pos, &env).is_ok());
    assert!(check_zero_free(&CoefFn::X, &Interval::open(-1.0, 1.0), &env).is_err());
    assert!(check_zero_free(&CoefFn::exp(CoefFn::X.neg()), &Interval::open(-5.0, 5.0), &env).is_ok());
    assert!(check_zero_free(&CoefFn::sin(CoefFn::X), &Interval::open(0.5, 4.0), &env).is_err());
}
