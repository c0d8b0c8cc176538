mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use teamcheck::eval::{flat_fastpath, team_eval_with, EvalError, EvalOptions};
use teamcheck::syntax::expand_vector_quantifiers;
use teamcheck::{DependencyRegistry, Formula, Model, Team};

fn eval(m: &Model, x: &Team, phi: &Formula, opts: EvalOptions) -> Result<bool, EvalError> {
    team_eval_with(m, &DependencyRegistry::new(), x, phi, opts)
}

/// Evaluates with the literal rules; skips cases whose search is too large.
fn reference(m: &Model, x: &Team, phi: &Formula) -> Result<bool, TestCaseError> {
    let opts = EvalOptions { max_search: 16, ..EvalOptions::reference() };
    match eval(m, x, phi, opts) {
        Ok(v) => Ok(v),
        Err(EvalError::SearchTooLarge { .. }) => Err(TestCaseError::reject("search too large for the literal rules")),
        Err(e) => Err(TestCaseError::fail(e.to_string())),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 400, max_global_rejects: 4000, ..ProptestConfig::default() })]

    #[test]
    fn strategies_agree_with_the_literal_rules(phi in common::full(3), m in common::model2(), x in common::team2(3)) {
        let want = reference(&m, &x, &phi)?;
        prop_assert_eq!(eval(&m, &x, &phi, EvalOptions::default()).unwrap(), want, "{}", phi);
        prop_assert_eq!(eval(&m, &x, &phi, EvalOptions::without_flatness()).unwrap(), want, "{}", phi);
    }

    #[test]
    fn memo_does_not_change_results(phi in common::full(4), m in common::model2(), x in common::team2(4)) {
        let with = eval(&m, &x, &phi, EvalOptions::default());
        let without = eval(&m, &x, &phi, EvalOptions { memo: false, ..EvalOptions::default() });
        prop_assert_eq!(with, without);
    }

    #[test]
    fn satisfaction_is_local(phi in common::full(4), m in common::model2(), x in common::team2(4)) {
        let free: BTreeSet<_> = phi.free_variables();
        let restricted = x.restrict(&free);
        prop_assert_eq!(eval(&m, &x, &phi, EvalOptions::default()), eval(&m, &restricted, &phi, EvalOptions::default()));
    }

    #[test]
    fn first_order_formulas_are_flat_and_downward_closed(phi in common::first_order(4), m in common::model2(), x in common::team2(4)) {
        let whole = eval(&m, &x, &phi, EvalOptions::without_flatness()).unwrap();
        prop_assert_eq!(whole, flat_fastpath(&m, &x, &phi).unwrap());
        if whole {
            for mask in 0..1u64 << x.len() {
                prop_assert!(eval(&m, &x.subteam(mask), &phi, EvalOptions::without_flatness()).unwrap());
            }
        }
    }

    #[test]
    fn vector_quantifiers_expand(phi in common::full(3), m in common::model2(), x in common::team2(4)) {
        let expanded = expand_vector_quantifiers(&phi);
        prop_assert_eq!(eval(&m, &x, &phi, EvalOptions::default()), eval(&m, &x, &expanded, EvalOptions::default()));
    }
}
