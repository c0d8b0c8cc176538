#![allow(dead_code)]

use proptest::prelude::*;
use teamcheck::model::all_tuples;
use teamcheck::syntax::{vars, Atom, DepAtom, Term};
use teamcheck::{Element, Formula, Model, Relation, Team, Var};

const NAMES: [&str; 3] = ["x", "y", "z"];

fn var() -> impl Strategy<Value = Var> {
    prop::sample::select(&NAMES[..]).prop_map(Var::new)
}

fn first_order_leaf() -> impl Strategy<Value = Formula> {
    prop_oneof![
        (var(), var()).prop_map(|(a, b)| Formula::eq_vars(&a, &b)),
        (var(), var()).prop_map(|(a, b)| Formula::neq_vars(&a, &b)),
        (var(), any::<bool>()).prop_map(|(a, pos)| Formula::lit(pos, Atom::Rel { name: "P".into(), args: vec![Term::Var(a)] })),
        (var(), var()).prop_map(|(a, b)| Formula::rel("R", &[a.name(), b.name()])),
        Just(Formula::top()),
        Just(Formula::bot()),
    ]
}

fn dependency_leaf() -> impl Strategy<Value = Formula> {
    prop_oneof![
        (var(), var()).prop_map(|(a, b)| Formula::dep(DepAtom::new("dep", vec![1, 1], vec![a, b]))),
        var().prop_map(|a| Formula::dep(DepAtom::simple("const", vec![a]))),
        var().prop_map(|a| Formula::dep(DepAtom::simple("all", vec![a]))),
        var().prop_map(|a| Formula::dep(DepAtom::simple("nonconst", vec![a]))),
        (var(), var()).prop_map(|(a, b)| Formula::dep(DepAtom::new("inc", vec![1, 1], vec![a, b]))),
        (var(), var()).prop_map(|(a, b)| Formula::dep(DepAtom::new("exc", vec![1, 1], vec![a, b]).complement())),
    ]
}

fn binders() -> impl Strategy<Value = Vec<Var>> {
    prop::sample::subsequence(&NAMES[..], 1..=2).prop_map(|v| vars(&v))
}

/// First-order formulas over `P/1` and `R/2`.
pub fn first_order(depth: u32) -> impl Strategy<Value = Formula> {
    first_order_leaf().prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (binders(), inner.clone()).prop_map(|(v, a)| Formula::exists(v, a)),
            (binders(), inner).prop_map(|(v, a)| Formula::forall(v, a)),
        ]
    })
}

/// Formulas using every connective and some dependency atoms.
pub fn full(depth: u32) -> impl Strategy<Value = Formula> {
    prop_oneof![3 => first_order_leaf(), 2 => dependency_leaf()].prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::global_or(a, b)),
            inner.clone().prop_map(Formula::diamond),
            inner.clone().prop_map(Formula::tilde),
            (var(), inner.clone()).prop_map(|(v, a)| Formula::exists(vec![v], a)),
            (var(), inner).prop_map(|(v, a)| Formula::forall(vec![v], a)),
        ]
    })
}

/// A model of size 2 with `P` and `R` chosen by bitmasks.
pub fn model2() -> impl Strategy<Value = Model> {
    (0u32..4, 0u32..16).prop_map(|(p, r)| {
        let domain = [0, 1];
        let pick = |arity: usize, mask: u32| Relation::from_tuples(arity, all_tuples(&domain, arity).enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, t)| t));
        Model::new(2).unwrap().with_relation("P", pick(1, p)).unwrap().with_relation("R", pick(2, r)).unwrap()
    })
}

/// A team over `x, y, z` on a 2-element domain with at most `max` rows.
pub fn team2(max: usize) -> impl Strategy<Value = Team> {
    prop::collection::btree_set(prop::collection::vec(0 as Element..2, 3), 0..=max).prop_map(|rows| Team::new(vars(&NAMES), rows.into_iter().collect()).unwrap())
}
