use proptest::prelude::*;

use omega2tl::gen::{random_model, rng, ModelShape};
use omega2tl::solver::{sat, SatResult, SolverBounds};
use omega2tl::{
    closure, desugar, holds, holds_oracle, parse, Formula, PeriodicModel, Step, TimeInstant,
};

fn leaf() -> impl Strategy<Value = Formula> {
    prop_oneof![
        6 => (0u32..3).prop_map(Formula::var),
        1 => Just(Formula::True),
        1 => Just(Formula::False),
    ]
}

/// Formulas over `p0..p2` using every connective. With `iterated`, `[a]^n`
/// nodes are included too; those print as nested steps and so only survive a
/// round trip up to desugaring.
fn formula(depth: u32, iterated: bool) -> impl Strategy<Value = Formula> {
    leaf().prop_recursive(depth, 24, 2, move |inner| {
        let unary = prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next1),
            inner.clone().prop_map(Formula::next_w),
            inner.clone().prop_map(Formula::local_eventually),
            inner.clone().prop_map(Formula::local_always),
            inner.clone().prop_map(Formula::eventually),
            inner.clone().prop_map(Formula::always),
        ];
        let iter = (any::<bool>(), 0u32..3, inner.clone()).prop_map(move |(one, n, f)| {
            if iterated {
                Formula::iter_next(if one { Step::One } else { Step::Omega }, n, f)
            } else {
                f
            }
        });
        let binary = (0..6u8, inner.clone(), inner).prop_map(|(op, a, b)| match op {
            0 => Formula::and(a, b),
            1 => Formula::or(a, b),
            2 => Formula::implies(a, b),
            3 => Formula::iff(a, b),
            4 => Formula::local_until(a, b),
            _ => Formula::until(a, b),
        });
        prop_oneof![3 => unary, 1 => iter, 3 => binary]
    })
}

/// Core formulas only, small enough to keep the checker fast.
fn core_formula() -> impl Strategy<Value = Formula> {
    formula(4, true).prop_map(|f| desugar(&f))
}

fn model() -> impl Strategy<Value = PeriodicModel> {
    any::<u64>().prop_map(|seed| random_model(&mut rng(seed), &ModelShape::default()))
}

fn instant() -> impl Strategy<Value = TimeInstant> {
    (0u64..=10, 0u64..=10).prop_map(|(i, j)| TimeInstant::new(i, j))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_then_parse_is_identity(f in formula(5, false)) {
        prop_assert_eq!(parse(&f.render()).unwrap(), f);
    }

    #[test]
    fn render_then_parse_preserves_meaning(f in formula(5, true)) {
        prop_assert_eq!(desugar(&parse(&f.render()).unwrap()), desugar(&f));
    }

    #[test]
    fn desugaring_is_core_and_idempotent(f in formula(5, true)) {
        let once = desugar(&f);
        prop_assert!(once.is_core());
        prop_assert_eq!(desugar(&once), once.clone());
        // `true` with no variables around expands over p0
        let mut vars = f.vars();
        if vars.is_empty() {
            vars.insert(omega2tl::VarId(0));
        }
        prop_assert!(once.vars().is_subset(&vars));
    }

    #[test]
    fn closure_is_bounded_by_length(f in core_formula()) {
        let c = closure(&f);
        prop_assert!(c.len() <= f.length());
        // children precede parents
        for i in 0..c.len() {
            for k in c.child_positions(i) {
                prop_assert!(k < i);
            }
        }
    }

    #[test]
    fn checker_agrees_with_oracle(m in model(), f in core_formula(), t in instant()) {
        prop_assert_eq!(holds(&m, t, &f), holds_oracle(&m, t, &f));
    }

    #[test]
    fn loop_rows_repeat(m in model(), f in core_formula(), t in instant()) {
        prop_assume!(t.row >= m.row_prefix.len() as u64);
        let shifted = TimeInstant::new(t.row + m.row_loop.len() as u64, t.col);
        prop_assert_eq!(holds(&m, t, &f), holds(&m, shifted, &f));
    }

    #[test]
    fn next_operators_interact_as_axioms_say(
        m in model(), a in core_formula(), b in core_formula(), t in instant(),
    ) {
        let h = |f: Formula| holds(&m, t, &f);
        // [1][w]a <-> [w]a
        prop_assert_eq!(h(Formula::next1(Formula::next_w(a.clone()))), h(Formula::next_w(a.clone())));
        for step in [Step::One, Step::Omega] {
            let n = |f: Formula| Formula::next(step, f);
            prop_assert_eq!(h(Formula::not(n(a.clone()))), h(n(Formula::not(a.clone()))));
            prop_assert_eq!(
                h(n(Formula::and(a.clone(), b.clone()))),
                h(Formula::and(n(a.clone()), n(b.clone())))
            );
        }
    }

    #[test]
    fn untils_are_implied_as_axioms_say(
        m in model(), a in core_formula(), b in core_formula(), t in instant(),
    ) {
        let h = |f: &Formula| holds(&m, t, f);
        let local = Formula::local_until(a.clone(), b.clone());
        let global = Formula::until(a.clone(), b.clone());
        prop_assert!(!h(&b) || h(&local));
        prop_assert!(!h(&local) || h(&global));
        let stay = Formula::and(a.clone(), Formula::not(b.clone()));
        for n in 0..=3u32 {
            let premise = Formula::conjunction(
                (0..=n)
                    .map(|k| Formula::iter_next(Step::One, k, stay.clone()))
                    .chain([Formula::iter_next(Step::One, n + 1, b.clone())]),
            )
            .unwrap();
            prop_assert!(!h(&premise) || h(&local));
            let premise = Formula::conjunction(
                (0..=n)
                    .map(|k| Formula::iter_next(Step::Omega, k, Formula::local_always(stay.clone())))
                    .chain([Formula::iter_next(Step::Omega, n + 1, local.clone())]),
            )
            .unwrap();
            prop_assert!(!h(&premise) || h(&global));
        }
    }

    #[test]
    fn local_until_unrolls(m in model(), a in core_formula(), b in core_formula(), t in instant()) {
        let local = Formula::local_until(a.clone(), b.clone());
        let unrolled = holds(&m, t, &b) || (holds(&m, t, &a) && holds(&m, t.next_col(), &local));
        prop_assert_eq!(holds(&m, t, &local), unrolled);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witnesses_satisfy_their_formula(f in formula(3, true)) {
        if let SatResult::Sat { witness, .. } = sat(&f, &SolverBounds::default()).unwrap() {
            prop_assert!(holds(&witness, TimeInstant::ORIGIN, &f));
            prop_assert!(holds_oracle(&witness, TimeInstant::ORIGIN, &f));
            let reloaded = PeriodicModel::from_json(&witness.to_json()).unwrap();
            prop_assert_eq!(reloaded, witness);
        }
    }

    #[test]
    fn larger_bounds_keep_satisfiable_answers(f in formula(3, true), p in 1usize..3, l in 1usize..3) {
        let small = SolverBounds::uniform(p, l);
        if sat(&f, &small).unwrap().is_sat() {
            prop_assert!(sat(&f, &SolverBounds::uniform(p + 1, l + 1)).unwrap().is_sat());
            prop_assert!(sat(&f, &SolverBounds::default()).unwrap().is_sat());
        }
    }

    #[test]
    fn models_make_their_formulas_satisfiable(m in model(), f in core_formula()) {
        prop_assume!(holds(&m, TimeInstant::ORIGIN, &f));
        prop_assert!(!matches!(sat(&f, &SolverBounds::default()).unwrap(), SatResult::Unsat));
    }
}
