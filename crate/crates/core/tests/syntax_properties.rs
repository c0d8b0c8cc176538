mod common;

use proptest::prelude::*;
use teamcheck::syntax::{dual_negate, expand_vector_quantifiers, parse_formula};
use teamcheck::DependencyRegistry;

proptest! {
    #[test]
    fn printing_then_parsing_is_identity(phi in common::full(4)) {
        let text = phi.to_string();
        let back = parse_formula(&text, &DependencyRegistry::new()).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, phi);
    }

    #[test]
    fn first_order_round_trip(phi in common::first_order(4)) {
        let text = phi.to_string();
        prop_assert_eq!(parse_formula(&text, &DependencyRegistry::new()).unwrap(), phi);
    }

    #[test]
    fn dual_negation_is_an_involution(phi in common::first_order(4)) {
        prop_assert_eq!(dual_negate(&dual_negate(&phi).unwrap()).unwrap(), phi);
    }

    #[test]
    fn dual_negation_keeps_free_variables(phi in common::first_order(4)) {
        prop_assert_eq!(dual_negate(&phi).unwrap().free_variables(), phi.free_variables());
    }

    #[test]
    fn expansion_leaves_only_single_binders(phi in common::full(4)) {
        let expanded = expand_vector_quantifiers(&phi);
        prop_assert_eq!(expanded.free_variables(), phi.free_variables());
        prop_assert!(!expanded.any_node(&mut |n| matches!(n, teamcheck::Formula::Exists(vs, _) | teamcheck::Formula::Forall(vs, _) if vs.len() != 1)));
    }
}
