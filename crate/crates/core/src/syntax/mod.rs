//! Formula syntax for first-order logic with team semantics.
//!
//! Formulas are kept in negation normal form: negation only lives on
//! [`Literal`]s as a polarity flag. Dependency atoms, global disjunction,
//! the possibility operator and contradictory negation are ordinary AST
//! nodes next to the first-order connectives.

mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use parse::{parse_formula, parse_formula_with, ParseError, ParseOptions};

/// A variable name. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Var {
        Var(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

/// Builds a variable tuple from names.
pub fn vars<S: AsRef<str>>(names: &[S]) -> Vec<Var> {
    names.iter().map(Var::new).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    /// A constant symbol interpreted by the model.
    Const(String),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

/// The atomic part of a first-order literal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// `R(t1, ..., tk)`
    Rel { name: String, args: Vec<Term> },
    /// `t1 = t2`
    Eq(Term, Term),
    /// The always-true atom; its negative literal is `bot`.
    Top,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn top() -> Literal {
        Literal { positive: true, atom: Atom::Top }
    }

    pub fn bot() -> Literal {
        Literal { positive: false, atom: Atom::Top }
    }

    pub fn negated(&self) -> Literal {
        Literal { positive: !self.positive, atom: self.atom.clone() }
    }
}

/// Application of a (generalized) dependency to a tuple of variables.
///
/// `split` records how the argument tuple is grouped for the builtin
/// families (`=(x,y;z)` has split `[2, 1]`); atoms written `atom NAME(..)`
/// carry a single group.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DepAtom {
    pub name: String,
    pub split: Vec<usize>,
    pub args: Vec<Var>,
    /// Set for the complement dependency, written `!D(..)`.
    pub complemented: bool,
    /// Unary predicate the atom is relativized to, written `D(..)@P`.
    pub relativized: Option<String>,
}

impl DepAtom {
    pub fn new(name: &str, split: Vec<usize>, args: Vec<Var>) -> DepAtom {
        DepAtom { name: name.to_string(), split, args, complemented: false, relativized: None }
    }

    /// An atom over a single argument group.
    pub fn simple(name: &str, args: Vec<Var>) -> DepAtom {
        let k = args.len();
        DepAtom::new(name, vec![k], args)
    }

    pub fn complement(mut self) -> DepAtom {
        self.complemented = !self.complemented;
        self
    }

    pub fn relativize(mut self, predicate: &str) -> DepAtom {
        self.relativized = Some(predicate.to_string());
        self
    }

    /// The argument tuple cut into its groups.
    pub fn groups(&self) -> Vec<&[Var]> {
        let mut out = Vec::with_capacity(self.split.len());
        let mut start = 0;
        for &len in &self.split {
            out.push(&self.args[start..start + len]);
            start += len;
        }
        out
    }
}

/// Formulas in negation normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Lit(Literal),
    Dep(DepAtom),
    And(Box<Formula>, Box<Formula>),
    /// Tensor (split) disjunction `\/`.
    TensorOr(Box<Formula>, Box<Formula>),
    /// Global disjunction `lor`.
    GlobalOr(Box<Formula>, Box<Formula>),
    /// Possibility operator `dia`.
    Diamond(Box<Formula>),
    /// Contradictory negation `~`.
    ContraNeg(Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("dual negation is only defined for first-order formulas, found {0}")]
    NotFirstOrder(String),
    #[error("contradictory negation applied to a non-atomic formula: {0}")]
    TildeOverCompound(String),
    #[error("relation {name} used with arities {first} and {second}")]
    ArityClash { name: String, first: usize, second: usize },
    #[error("quantifier binds {0} twice")]
    RepeatedBinder(Var),
}

impl Formula {
    pub fn lit(positive: bool, atom: Atom) -> Formula {
        Formula::Lit(Literal { positive, atom })
    }

    pub fn top() -> Formula {
        Formula::Lit(Literal::top())
    }

    pub fn bot() -> Formula {
        Formula::Lit(Literal::bot())
    }

    pub fn rel(name: &str, args: &[&str]) -> Formula {
        Formula::lit(true, Atom::Rel { name: name.into(), args: args.iter().map(|a| Term::var(a)).collect() })
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::lit(true, Atom::Eq(a, b))
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::lit(false, Atom::Eq(a, b))
    }

    pub fn eq_vars(a: &Var, b: &Var) -> Formula {
        Formula::eq(Term::Var(a.clone()), Term::Var(b.clone()))
    }

    pub fn neq_vars(a: &Var, b: &Var) -> Formula {
        Formula::neq(Term::Var(a.clone()), Term::Var(b.clone()))
    }

    pub fn dep(atom: DepAtom) -> Formula {
        Formula::Dep(atom)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::TensorOr(Box::new(a), Box::new(b))
    }

    pub fn global_or(a: Formula, b: Formula) -> Formula {
        Formula::GlobalOr(Box::new(a), Box::new(b))
    }

    pub fn diamond(a: Formula) -> Formula {
        Formula::Diamond(Box::new(a))
    }

    pub fn tilde(a: Formula) -> Formula {
        Formula::ContraNeg(Box::new(a))
    }

    pub fn exists(vs: Vec<Var>, body: Formula) -> Formula {
        Formula::Exists(vs, Box::new(body))
    }

    pub fn forall(vs: Vec<Var>, body: Formula) -> Formula {
        Formula::Forall(vs, Box::new(body))
    }

    /// Left-nested conjunction; `None` for an empty list.
    pub fn conjunction(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::and)
    }

    /// Left-nested tensor disjunction; `None` for an empty list.
    pub fn disjunction(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::or)
    }

    /// Left-nested global disjunction; `None` for an empty list.
    pub fn global_disjunction(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::global_or)
    }

    /// `x1 = y1 /\ ... /\ xk = yk`, or `top` for empty tuples.
    pub fn tuple_eq(xs: &[Var], ys: &[Var]) -> Formula {
        assert_eq!(xs.len(), ys.len(), "tuple equality needs equal lengths");
        Formula::conjunction(xs.iter().zip(ys).map(|(x, y)| Formula::eq_vars(x, y))).unwrap_or_else(Formula::top)
    }

    /// Whether the formula is built from literals, `/\`, `\/`, and quantifiers only.
    pub fn is_first_order(&self) -> bool {
        match self {
            Formula::Lit(_) => true,
            Formula::And(a, b) | Formula::TensorOr(a, b) => a.is_first_order() && b.is_first_order(),
            Formula::Exists(_, b) | Formula::Forall(_, b) => b.is_first_order(),
            _ => false,
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    pub fn contains_dependency(&self) -> bool {
        self.any_node(&mut |f| matches!(f, Formula::Dep(_)))
    }

    /// True when some node satisfies `pred`.
    pub fn any_node(&self, pred: &mut impl FnMut(&Formula) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Formula::Lit(_) | Formula::Dep(_) => false,
            Formula::And(a, b) | Formula::TensorOr(a, b) | Formula::GlobalOr(a, b) => a.any_node(pred) || b.any_node(pred),
            Formula::Diamond(a) | Formula::ContraNeg(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => a.any_node(pred),
        }
    }

    /// Free variables; dependency arguments count as free occurrences.
    pub fn free_variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut note = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::Lit(l) => match &l.atom {
                Atom::Rel { args, .. } => args.iter().filter_map(Term::as_var).for_each(|v| note(v, bound)),
                Atom::Eq(a, b) => [a, b].into_iter().filter_map(Term::as_var).for_each(|v| note(v, bound)),
                Atom::Top => {}
            },
            Formula::Dep(d) => d.args.iter().for_each(|v| note(v, bound)),
            Formula::And(a, b) | Formula::TensorOr(a, b) | Formula::GlobalOr(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Diamond(a) | Formula::ContraNeg(a) => a.collect_free(bound, out),
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                let depth = bound.len();
                bound.extend(vs.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(depth);
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Lit(l) => match &l.atom {
                Atom::Rel { args, .. } => out.extend(args.iter().filter_map(Term::as_var).cloned()),
                Atom::Eq(a, b) => out.extend([a, b].into_iter().filter_map(Term::as_var).cloned()),
                Atom::Top => {}
            },
            Formula::Dep(d) => out.extend(d.args.iter().cloned()),
            Formula::Exists(vs, _) | Formula::Forall(vs, _) => out.extend(vs.iter().cloned()),
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Lit(_) | Formula::Dep(_) => {}
            Formula::And(a, b) | Formula::TensorOr(a, b) | Formula::GlobalOr(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Diamond(a) | Formula::ContraNeg(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => a.visit(f),
        }
    }

    /// Relation symbols with arities, constant symbols, and relativization predicates.
    pub fn signature(&self) -> Result<Signature, SyntaxError> {
        let mut sig = Signature::default();
        let mut err = None;
        self.visit(&mut |f| {
            let mut terms: Vec<&Term> = Vec::new();
            match f {
                Formula::Lit(l) => match &l.atom {
                    Atom::Rel { name, args } => {
                        if let Err(e) = sig.add_relation(name, args.len()) {
                            err.get_or_insert(e);
                        }
                        terms.extend(args);
                    }
                    Atom::Eq(a, b) => terms.extend([a, b]),
                    Atom::Top => {}
                },
                Formula::Dep(d) => {
                    if let Some(p) = &d.relativized {
                        if let Err(e) = sig.add_relation(p, 1) {
                            err.get_or_insert(e);
                        }
                        sig.predicates.insert(p.clone());
                    }
                }
                _ => {}
            }
            for t in terms {
                if let Term::Const(c) = t {
                    sig.constants.insert(c.clone());
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(sig),
        }
    }

    /// Checks that every `~` sits directly on a literal or dependency atom.
    pub fn validate_tilde0(&self) -> Result<(), SyntaxError> {
        let mut bad = None;
        self.visit(&mut |f| {
            if let Formula::ContraNeg(inner) = f {
                if !matches!(**inner, Formula::Lit(_) | Formula::Dep(_)) && bad.is_none() {
                    bad = Some(f.to_string());
                }
            }
        });
        match bad {
            Some(s) => Err(SyntaxError::TildeOverCompound(s)),
            None => Ok(()),
        }
    }

    /// Rejects quantifier tuples that repeat a variable.
    pub fn validate_binders(&self) -> Result<(), SyntaxError> {
        let mut bad = None;
        self.visit(&mut |f| {
            if let Formula::Exists(vs, _) | Formula::Forall(vs, _) = f {
                let mut seen = BTreeSet::new();
                for v in vs {
                    if !seen.insert(v) && bad.is_none() {
                        bad = Some(v.clone());
                    }
                }
            }
        });
        match bad {
            Some(v) => Err(SyntaxError::RepeatedBinder(v)),
            None => Ok(()),
        }
    }

    /// Bottom-up rewrite: `f` sees every node after its children were rewritten.
    pub fn map_bottom_up(self, f: &mut impl FnMut(Formula) -> Formula) -> Formula {
        let rebuilt = match self {
            Formula::And(a, b) => Formula::and(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::TensorOr(a, b) => Formula::or(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::GlobalOr(a, b) => Formula::global_or(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Diamond(a) => Formula::diamond(a.map_bottom_up(f)),
            Formula::ContraNeg(a) => Formula::tilde(a.map_bottom_up(f)),
            Formula::Exists(vs, a) => Formula::exists(vs, a.map_bottom_up(f)),
            Formula::Forall(vs, a) => Formula::forall(vs, a.map_bottom_up(f)),
            leaf => leaf,
        };
        f(rebuilt)
    }

    /// Capture-avoiding substitution of variables by variables.
    ///
    /// Bound variables that would capture a substituted name are renamed
    /// using `fresh`.
    pub fn substitute(&self, map: &BTreeMap<Var, Var>, fresh: &mut FreshNames) -> Formula {
        let term = |t: &Term, map: &BTreeMap<Var, Var>| match t {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            c => c.clone(),
        };
        match self {
            Formula::Lit(l) => {
                let atom = match &l.atom {
                    Atom::Rel { name, args } => Atom::Rel { name: name.clone(), args: args.iter().map(|t| term(t, map)).collect() },
                    Atom::Eq(a, b) => Atom::Eq(term(a, map), term(b, map)),
                    Atom::Top => Atom::Top,
                };
                Formula::Lit(Literal { positive: l.positive, atom })
            }
            Formula::Dep(d) => {
                let mut d = d.clone();
                d.args = d.args.iter().map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone())).collect();
                Formula::Dep(d)
            }
            Formula::And(a, b) => Formula::and(a.substitute(map, fresh), b.substitute(map, fresh)),
            Formula::TensorOr(a, b) => Formula::or(a.substitute(map, fresh), b.substitute(map, fresh)),
            Formula::GlobalOr(a, b) => Formula::global_or(a.substitute(map, fresh), b.substitute(map, fresh)),
            Formula::Diamond(a) => Formula::diamond(a.substitute(map, fresh)),
            Formula::ContraNeg(a) => Formula::tilde(a.substitute(map, fresh)),
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                let mut inner: BTreeMap<Var, Var> = map.iter().filter(|(k, _)| !vs.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
                let body_free = body.free_variables();
                let targets: BTreeSet<&Var> = inner.iter().filter(|(k, _)| body_free.contains(*k)).map(|(_, v)| v).collect();
                let mut new_vs = Vec::with_capacity(vs.len());
                let mut renames = Vec::new();
                for v in vs {
                    if targets.contains(v) {
                        let nv = fresh.next_var();
                        renames.push((v.clone(), nv.clone()));
                        new_vs.push(nv);
                    } else {
                        new_vs.push(v.clone());
                    }
                }
                for (old, new) in renames {
                    inner.insert(old, new);
                }
                let body = body.substitute(&inner, fresh);
                match self {
                    Formula::Exists(..) => Formula::exists(new_vs, body),
                    _ => Formula::forall(new_vs, body),
                }
            }
        }
    }
}

/// Relation symbols with arities and constant symbols of a formula.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub relations: BTreeMap<String, usize>,
    pub constants: BTreeSet<String>,
    /// Unary predicates used to relativize dependency atoms.
    pub predicates: BTreeSet<String>,
}

impl Signature {
    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<(), SyntaxError> {
        match self.relations.get(name) {
            Some(&a) if a != arity => Err(SyntaxError::ArityClash { name: name.into(), first: a, second: arity }),
            _ => {
                self.relations.insert(name.into(), arity);
                Ok(())
            }
        }
    }

    pub fn merge(&mut self, other: &Signature) -> Result<(), SyntaxError> {
        for (name, &arity) in &other.relations {
            self.add_relation(name, arity)?;
        }
        self.constants.extend(other.constants.iter().cloned());
        self.predicates.extend(other.predicates.iter().cloned());
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty() && self.constants.is_empty()
    }
}

/// Deterministic supply of fresh variable names `prefix0, prefix1, ...`
/// that skips every name registered as used.
#[derive(Clone, Debug)]
pub struct FreshNames {
    prefix: String,
    counter: usize,
    used: BTreeSet<String>,
}

impl FreshNames {
    pub fn new(prefix: &str) -> FreshNames {
        FreshNames { prefix: prefix.to_string(), counter: 0, used: BTreeSet::new() }
    }

    /// A supply that avoids every variable of `phi`.
    pub fn avoiding(prefix: &str, phi: &Formula) -> FreshNames {
        let mut fresh = FreshNames::new(prefix);
        fresh.reserve_formula(phi);
        fresh
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    pub fn reserve_formula(&mut self, phi: &Formula) {
        for v in phi.all_variables() {
            self.reserve(v.name());
        }
        if let Ok(sig) = phi.signature() {
            for c in sig.constants {
                self.reserve(&c);
            }
        }
    }

    pub fn next_var(&mut self) -> Var {
        loop {
            let name = format!("{}{}", self.prefix, self.counter);
            self.counter += 1;
            if self.used.insert(name.clone()) {
                return Var::new(name);
            }
        }
    }

    pub fn next_tuple(&mut self, len: usize) -> Vec<Var> {
        (0..len).map(|_| self.next_var()).collect()
    }
}

/// The negation normal form of the classical negation of `phi`.
///
/// Only defined on first-order formulas.
pub fn dual_negate(phi: &Formula) -> Result<Formula, SyntaxError> {
    Ok(match phi {
        Formula::Lit(l) => Formula::Lit(l.negated()),
        Formula::And(a, b) => Formula::or(dual_negate(a)?, dual_negate(b)?),
        Formula::TensorOr(a, b) => Formula::and(dual_negate(a)?, dual_negate(b)?),
        Formula::Exists(vs, body) => Formula::forall(vs.clone(), dual_negate(body)?),
        Formula::Forall(vs, body) => Formula::exists(vs.clone(), dual_negate(body)?),
        other => return Err(SyntaxError::NotFirstOrder(other.to_string())),
    })
}

/// Replaces every tuple quantifier by nested single-variable quantifiers.
pub fn expand_vector_quantifiers(phi: &Formula) -> Formula {
    phi.clone().map_bottom_up(&mut |f| match f {
        Formula::Exists(vs, body) if vs.len() > 1 => {
            vs.into_iter().rev().fold(*body, |acc, v| Formula::exists(vec![v], acc))
        }
        Formula::Forall(vs, body) if vs.len() > 1 => {
            vs.into_iter().rev().fold(*body, |acc, v| Formula::forall(vec![v], acc))
        }
        other => other,
    })
}

/// Free variables of `phi`; see [`Formula::free_variables`].
pub fn free_variables(phi: &Formula) -> BTreeSet<Var> {
    phi.free_variables()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str, v: &str) -> Formula {
        Formula::rel(name, &[v])
    }

    #[test]
    fn dual_negation_of_literal_flips_polarity() {
        let lit = Formula::eq(Term::var("x"), Term::var("y"));
        assert_eq!(dual_negate(&lit).unwrap(), Formula::neq(Term::var("x"), Term::var("y")));
    }

    #[test]
    fn dual_negation_applies_de_morgan() {
        let phi = Formula::exists(vars(&["x"]), Formula::and(p("P", "x"), p("Q", "x")));
        let neg = |f: Formula| dual_negate(&f).unwrap();
        let expected = Formula::forall(vars(&["x"]), Formula::or(neg(p("P", "x")), neg(p("Q", "x"))));
        assert_eq!(dual_negate(&phi).unwrap(), expected);
    }

    #[test]
    fn dual_negation_rejects_team_connectives() {
        let atom = Formula::dep(DepAtom::simple("const", vars(&["x"])));
        assert!(dual_negate(&atom).is_err());
        assert!(dual_negate(&Formula::global_or(Formula::top(), Formula::bot())).is_err());
        assert!(dual_negate(&Formula::diamond(Formula::top())).is_err());
        assert!(dual_negate(&Formula::tilde(Formula::top())).is_err());
    }

    #[test]
    fn vector_quantifiers_expand_in_order() {
        let body = Formula::eq(Term::var("x"), Term::var("y"));
        let phi = Formula::exists(vars(&["x", "y"]), body.clone());
        let expected = Formula::exists(vars(&["x"]), Formula::exists(vars(&["y"]), body.clone()));
        assert_eq!(expand_vector_quantifiers(&phi), expected);

        let single = Formula::forall(vars(&["x"]), body.clone());
        assert_eq!(expand_vector_quantifiers(&single), single);
    }

    #[test]
    fn free_variables_examples() {
        let dep = Formula::dep(DepAtom::new("dep", vec![1, 1], vars(&["x", "y"])));
        assert_eq!(free_variables(&dep), vars(&["x", "y"]).into_iter().collect());
        let ex = Formula::exists(vars(&["y"]), Formula::eq(Term::var("x"), Term::var("y")));
        assert_eq!(free_variables(&ex), vars(&["x"]).into_iter().collect());
        assert!(free_variables(&Formula::top()).is_empty());
    }

    #[test]
    fn tilde0_validation() {
        let ok = Formula::tilde(Formula::dep(DepAtom::simple("const", vars(&["x"]))));
        assert!(ok.validate_tilde0().is_ok());
        let bad = Formula::tilde(Formula::or(p("P", "x"), p("Q", "x")));
        assert!(matches!(bad.validate_tilde0(), Err(SyntaxError::TildeOverCompound(_))));
    }

    #[test]
    fn substitution_avoids_capture() {
        // exists y (x = y) with x := y must rename the binder
        let phi = Formula::exists(vars(&["y"]), Formula::eq(Term::var("x"), Term::var("y")));
        let map = BTreeMap::from([(Var::new("x"), Var::new("y"))]);
        let mut fresh = FreshNames::avoiding("r", &phi);
        let out = phi.substitute(&map, &mut fresh);
        assert_eq!(out, Formula::exists(vars(&["r0"]), Formula::eq(Term::var("y"), Term::var("r0"))));
    }

    #[test]
    fn signature_detects_arity_clash() {
        let phi = Formula::and(Formula::rel("R", &["x"]), Formula::rel("R", &["x", "y"]));
        assert!(matches!(phi.signature(), Err(SyntaxError::ArityClash { .. })));
    }

    #[test]
    fn fresh_names_skip_reserved() {
        let phi = Formula::eq(Term::var("w0"), Term::var("w2"));
        let mut fresh = FreshNames::avoiding("w", &phi);
        assert_eq!(fresh.next_tuple(3), vars(&["w1", "w3", "w4"]));
    }
}
