use proptest::prelude::*;
use teamcheck::dependency::{maximal_relations, RelationSpace};
use teamcheck::model::Element;
use teamcheck::oracle::{enumerate_teams, find_bijection, fix_identity, identity_type, stair_search};
use teamcheck::syntax::vars;
use teamcheck::{parse_formula, Dependency, DependencyRegistry, Formula};

/// An isomorphism-closed unary dependency on a 3-element domain, given by
/// which cardinalities 0..=3 are members.
fn by_cardinality(members: [bool; 4]) -> Dependency {
    let entries: Vec<_> = (0..4usize)
        .filter(|&k| members[k])
        .map(|k| (3, teamcheck::Relation::from_tuples(1, (0..k as Element).map(|e| vec![e]))))
        .collect();
    Dependency::table("card", 1, &entries).unwrap()
}

/// Longest alternating chain starting at a member, counted in non-members.
fn brute_depth(space: &RelationSpace, member: &[bool], from: u32, want_member: bool) -> Option<usize> {
    if member[from as usize] != want_member {
        return None;
    }
    let mut best = 0;
    for next in 0..space.relation_count() as u32 {
        if next != from && next & from == from {
            if let Some(d) = brute_depth(space, member, next, !want_member) {
                best = best.max(d + usize::from(want_member));
            }
        }
    }
    Some(best)
}

fn thetas() -> Vec<Formula> {
    let registry = DependencyRegistry::new();
    ["x1 = y1 \\/ x1 = y2", "x1 != y1 /\\ (x2 = y2 \\/ x1 = x2)", "exists u (u != y1 /\\ u != x1)", "x1 = y2"]
        .iter()
        .map(|t| parse_formula(t, &registry).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn stair_depth_is_longest_chain(members in prop::array::uniform4(any::<bool>())) {
        let d = by_cardinality(members);
        let domain: Vec<Element> = (0..3).collect();
        let space = RelationSpace::new(&domain, 1, 16).unwrap();
        let member = space.membership(&d).unwrap();
        let expected = (0..space.relation_count() as u32).filter_map(|m| brute_depth(&space, &member, m, true)).max();
        let chain = stair_search(&d, &domain, None, 16).unwrap();
        match expected {
            None => prop_assert!(chain.relations.is_empty()),
            Some(depth) => {
                prop_assert_eq!(chain.depth(), depth);
                prop_assert!(chain.verify(&d).unwrap());
            }
        }
    }

    #[test]
    fn maximal_members_match_brute_force(members in prop::array::uniform4(any::<bool>())) {
        let d = by_cardinality(members);
        let domain: Vec<Element> = (0..3).collect();
        let space = RelationSpace::new(&domain, 1, 16).unwrap();
        let member = space.membership(&d).unwrap();
        let n = space.relation_count() as u32;
        let mut expected: Vec<_> = (0..n)
            .filter(|&m| member[m as usize] && !(0..n).any(|s| s != m && s & m == m && member[s as usize]))
            .map(|m| space.relation(m))
            .collect();
        let mut found = maximal_relations(&d, &domain, 16).unwrap();
        expected.sort();
        found.sort();
        prop_assert_eq!(found, expected);
    }

    #[test]
    fn bijections_exist_exactly_between_equal_identity_types(
        which in 0usize..4,
        a in prop::collection::vec(0..4 as Element, 2),
        b in prop::collection::vec(0..4 as Element, 2),
    ) {
        let (xs, ys) = (vars(&["x1", "x2"]), vars(&["y1", "y2"]));
        let theta = fix_identity(&thetas()[which], &ys, &a);
        let h = find_bijection(&theta, &xs, &ys, 4, &a, &b).unwrap();
        prop_assert_eq!(h.is_some(), identity_type(&a) == identity_type(&b));
    }

    #[test]
    fn team_enumeration_is_the_powerset(n in 2usize..4, k in 1usize..3) {
        let domain: Vec<Element> = (0..n as Element).collect();
        let names = ["u", "v"];
        let teams: Vec<_> = enumerate_teams(&domain, &vars(&names[..k]), None).unwrap().collect();
        prop_assert_eq!(teams.len(), 1 << n.pow(k as u32));
        prop_assert!(teams[0].is_empty());
        let distinct: std::collections::BTreeSet<_> = teams.iter().map(|t| t.rows().to_vec()).collect();
        prop_assert_eq!(distinct.len(), teams.len());
    }
}
