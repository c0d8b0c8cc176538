//! Generalized dependencies: isomorphism-closed classes of (domain, relation)
//! pairs with a decidable membership test.
//!
//! Builtin families are instantiated from the argument split of an atom
//! (`=(x,y;z)` is the dependence dependency with a 2+1 split). User
//! dependencies are first-order sentences over a relation symbol, finite
//! tables closed under isomorphism, or native predicates. The algebra
//! (complement, downward closure, θ-restriction) builds derived
//! dependencies on top of any of these.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use itertools::Itertools;
use thiserror::Error;

use crate::model::{all_tuples, tarski_eval, tarski_truth, Assignment, Element, Model, ModelError, PureDomain, RelStructure, Relation};
use crate::syntax::{parse_formula, DepAtom, Formula, ParseError, Var};

/// Default bound on `|M|^k` for searches over all k-ary relations.
pub const DEFAULT_RELATION_CAP: usize = 16;

/// Largest tuple count a [`RelationSpace`] may ever hold.
const HARD_RELATION_CAP: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DependencyError {
    #[error("unknown dependency `{0}`")]
    Unknown(String),
    #[error("dependency `{name}` has arity {expected}, applied to {found} arguments")]
    Arity { name: String, expected: usize, found: usize },
    #[error("dependency `{name}`: {reason}")]
    Split { name: String, reason: String },
    #[error("dependency `{0}` is already defined")]
    Duplicate(String),
    #[error("relativization predicate `{0}` is not a unary relation of the model")]
    MissingPredicate(String),
    #[error("relativization predicate `{name}` has {size} element(s); dependencies are only defined on domains with at least two")]
    SmallPredicate { name: String, size: usize },
    #[error("restriction formula must be relation-free, found {0}")]
    RelationInTheta(String),
    #[error("definition of `{name}`: {reason}")]
    Definition { name: String, reason: String },
    #[error("{0} tuples exceed the relation enumeration cap of {1}")]
    TooManyTuples(usize, usize),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Closure facts known to hold for a dependency; `false` means "not known".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClosureHints {
    pub downward: bool,
    pub upward: bool,
}

impl ClosureHints {
    fn swap(self) -> ClosureHints {
        ClosureHints { downward: self.upward, upward: self.downward }
    }
}

pub type NativeTest = Arc<dyn Fn(&[Element], &Relation) -> bool + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Dep { left: usize },
    Ind { x: usize, y: usize },
    Inc { width: usize },
    Exc { width: usize },
    Const,
    All,
    NonConst,
    EvenCard,
    /// Truth of a sentence over the empty signature.
    Zeroary(Formula),
    /// Truth of a sentence whose only relation symbol is `symbol`.
    Sentence { symbol: String, sentence: Formula },
    /// Canonical forms of the listed relations, per domain size.
    Table(BTreeMap<usize, BTreeSet<Vec<Vec<Element>>>>),
    Native(NativeTest),
    Complement(Arc<Dependency>),
    DownClosure { inner: Arc<Dependency>, cache: MembershipCache },
    Restrict { inner: Arc<Dependency>, theta: Formula, xs: Vec<Var>, ys: Vec<Var> },
}

/// Membership tables of a down-closure, keyed by domain.
type MembershipCache = Arc<Mutex<HashMap<Vec<Element>, Arc<Vec<bool>>>>>;

/// A k-ary generalized dependency.
#[derive(Clone)]
pub struct Dependency {
    name: String,
    arity: usize,
    kind: Kind,
    hints: ClosureHints,
}

impl fmt::Debug for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dependency({}/{})", self.name, self.arity)
    }
}

const DC: ClosureHints = ClosureHints { downward: true, upward: false };
const UC: ClosureHints = ClosureHints { downward: false, upward: true };
const NONE: ClosureHints = ClosureHints { downward: false, upward: false };

impl Dependency {
    fn builtin(name: &str, arity: usize, kind: Kind, hints: ClosureHints) -> Dependency {
        Dependency { name: name.to_string(), arity, kind, hints }
    }

    /// `=(x̄;ȳ)` with `|x̄| = left`, `|ȳ| = right`.
    pub fn dep(left: usize, right: usize) -> Dependency {
        Dependency::builtin("dep", left + right, Kind::Dep { left }, DC)
    }

    /// `x̄ ⊥_ȳ z̄`, columns ordered x̄, ȳ, z̄.
    pub fn ind(x: usize, y: usize, z: usize) -> Dependency {
        Dependency::builtin("ind", x + y + z, Kind::Ind { x, y }, NONE)
    }

    /// `x̄ ⊆ ȳ` over two tuples of length `width`.
    pub fn inc(width: usize) -> Dependency {
        Dependency::builtin("inc", 2 * width, Kind::Inc { width }, NONE)
    }

    /// `x̄ | ȳ` over two tuples of length `width`.
    pub fn exc(width: usize) -> Dependency {
        Dependency::builtin("exc", 2 * width, Kind::Exc { width }, DC)
    }

    pub fn constancy(arity: usize) -> Dependency {
        Dependency::builtin("const", arity, Kind::Const, DC)
    }

    pub fn all(arity: usize) -> Dependency {
        Dependency::builtin("all", arity, Kind::All, UC)
    }

    /// At least two distinct tuples.
    pub fn nonconst(arity: usize) -> Dependency {
        Dependency::builtin("nonconst", arity, Kind::NonConst, UC)
    }

    /// An even number of tuples.
    pub fn evencard(arity: usize) -> Dependency {
        Dependency::builtin("evencard", arity, Kind::EvenCard, NONE)
    }

    /// The 0-ary dependency `[ψ]` true on the domains satisfying `psi`.
    pub fn zeroary(name: &str, psi: Formula) -> Result<Dependency, DependencyError> {
        let def_err = |reason: String| DependencyError::Definition { name: name.into(), reason };
        check_sentence(&psi, None).map_err(def_err)?;
        Ok(Dependency { name: name.into(), arity: 0, kind: Kind::Zeroary(psi), hints: ClosureHints { downward: true, upward: true } })
    }

    /// A k-ary dependency defined by a first-order sentence over `R`.
    pub fn first_order(name: &str, arity: usize, sentence: Formula) -> Result<Dependency, DependencyError> {
        Dependency::sentence_over(name, arity, "R", sentence)
    }

    /// A unary dependency defined by a first-order sentence over `P`.
    pub fn unary(name: &str, sentence: Formula) -> Result<Dependency, DependencyError> {
        Dependency::sentence_over(name, 1, "P", sentence)
    }

    fn sentence_over(name: &str, arity: usize, symbol: &str, sentence: Formula) -> Result<Dependency, DependencyError> {
        check_sentence(&sentence, Some((symbol, arity))).map_err(|reason| DependencyError::Definition { name: name.into(), reason })?;
        Ok(Dependency { name: name.into(), arity, kind: Kind::Sentence { symbol: symbol.into(), sentence }, hints: NONE })
    }

    /// The isomorphism closure of the listed `(domain size, relation)` pairs,
    /// with relations over `0..size`.
    pub fn table(name: &str, arity: usize, entries: &[(usize, Relation)]) -> Result<Dependency, DependencyError> {
        let mut by_size: BTreeMap<usize, BTreeSet<Vec<Vec<Element>>>> = BTreeMap::new();
        for (size, rel) in entries {
            if rel.arity() != arity {
                return Err(DependencyError::Arity { name: name.into(), expected: arity, found: rel.arity() });
            }
            let domain: Vec<Element> = (0..*size as Element).collect();
            if !rel.within(&domain) {
                return Err(DependencyError::Definition { name: name.into(), reason: format!("relation {rel} is not over a domain of size {size}") });
            }
            by_size.entry(*size).or_default().insert(canonical_form(*size, rel));
        }
        Ok(Dependency { name: name.into(), arity, kind: Kind::Table(by_size), hints: NONE })
    }

    /// A dependency with a programmatic membership test. The test must be
    /// invariant under renaming of domain elements.
    pub fn native(name: &str, arity: usize, test: NativeTest) -> Dependency {
        Dependency { name: name.into(), arity, kind: Kind::Native(test), hints: NONE }
    }

    /// Declares closure facts; only use when they are known to hold.
    pub fn with_hints(mut self, hints: ClosureHints) -> Dependency {
        self.hints = hints;
        self
    }

    pub fn named(mut self, name: &str) -> Dependency {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The sentence a 0-ary or sentence-defined dependency was built from.
    pub fn defining_sentence(&self) -> Option<&Formula> {
        match &self.kind {
            Kind::Zeroary(psi) | Kind::Sentence { sentence: psi, .. } => Some(psi),
            _ => None,
        }
    }

    pub fn hints(&self) -> ClosureHints {
        self.hints
    }

    /// Whether `(domain, rel)` belongs to the dependency.
    ///
    /// Relations with tuples outside `domain` are not pairs of a structure;
    /// builtins are evaluated on them literally by their defining condition
    /// (so `all` rejects them), every other kind rejects them.
    pub fn contains(&self, domain: &[Element], rel: &Relation) -> Result<bool, DependencyError> {
        if rel.arity() != self.arity {
            return Err(DependencyError::Arity { name: self.name.clone(), expected: self.arity, found: rel.arity() });
        }
        Ok(match &self.kind {
            Kind::Dep { left } => {
                let mut seen: HashMap<&[Element], &[Element]> = HashMap::new();
                rel.iter().all(|t| {
                    let (a, b) = t.split_at(*left);
                    *seen.entry(a).or_insert(b) == b
                })
            }
            Kind::Ind { x, y } => {
                let (x, y) = (*x, *y);
                rel.iter().all(|s| {
                    rel.iter().filter(|t| t[x..x + y] == s[x..x + y]).all(|t| {
                        let mut joined = s[..x + y].to_vec();
                        joined.extend_from_slice(&t[x + y..]);
                        rel.contains(&joined)
                    })
                })
            }
            Kind::Inc { width } => {
                let right: BTreeSet<&[Element]> = rel.iter().map(|t| &t[*width..]).collect();
                rel.iter().all(|t| right.contains(&t[..*width]))
            }
            Kind::Exc { width } => {
                let right: BTreeSet<&[Element]> = rel.iter().map(|t| &t[*width..]).collect();
                rel.iter().all(|t| !right.contains(&t[..*width]))
            }
            Kind::Const => rel.len() <= 1,
            Kind::All => rel.within(domain) && rel.len() == domain.len().pow(self.arity as u32),
            Kind::NonConst => rel.len() >= 2,
            Kind::EvenCard => rel.len().is_multiple_of(2),
            Kind::Zeroary(psi) => tarski_truth(&PureDomain(domain), psi)?,
            Kind::Sentence { symbol, sentence } => {
                rel.within(domain) && tarski_truth(&RelStructure { domain, name: symbol, relation: rel }, sentence)?
            }
            Kind::Table(by_size) => match by_size.get(&domain.len()) {
                Some(forms) if rel.within(domain) => {
                    let mut sorted = domain.to_vec();
                    sorted.sort_unstable();
                    let index = |e: Element| sorted.binary_search(&e).unwrap() as Element;
                    forms.contains(&canonical_form(domain.len(), &rel.map(index)))
                }
                _ => false,
            },
            Kind::Native(test) => test(domain, rel),
            Kind::Complement(inner) => !inner.contains(domain, rel)?,
            Kind::DownClosure { inner, cache } => {
                if !rel.within(domain) {
                    return Ok(false);
                }
                let mut key = domain.to_vec();
                key.sort_unstable();
                let space = RelationSpace::new(&key, self.arity, HARD_RELATION_CAP)?;
                let cached = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key).cloned();
                let table = match cached {
                    Some(t) => t,
                    None => {
                        let t = Arc::new(space.any_superset(&space.membership(inner)?));
                        cache.lock().unwrap_or_else(|e| e.into_inner()).insert(key, t.clone());
                        t
                    }
                };
                table[space.mask(rel).expect("relation lies within the domain") as usize]
            }
            Kind::Restrict { inner, theta, xs, ys } => inner.contains(domain, rel)? && theta_bound_holds(domain, rel, theta, xs, ys)?,
        })
    }

    /// Membership of `(P^M, rel)` for the relativized atom `D^(P)`.
    pub fn contains_relativized(&self, model: &Model, predicate: &str, rel: &Relation) -> Result<bool, DependencyError> {
        let domain = relativized_domain(model, predicate)?;
        self.contains(&domain, rel)
    }
}

/// `P^M` for relativization, rejecting predicates with fewer than two elements.
pub fn relativized_domain(model: &Model, predicate: &str) -> Result<Vec<Element>, DependencyError> {
    let domain = model.predicate_extension(predicate).map_err(|_| DependencyError::MissingPredicate(predicate.into()))?;
    if domain.len() < 2 {
        return Err(DependencyError::SmallPredicate { name: predicate.into(), size: domain.len() });
    }
    Ok(domain)
}

/// Checks that `phi` is a first-order sentence whose only relation symbol is
/// the given one (or none at all).
fn check_sentence(phi: &Formula, symbol: Option<(&str, usize)>) -> Result<(), String> {
    if !phi.is_first_order() {
        return Err(format!("`{phi}` is not first-order"));
    }
    if let Some(v) = phi.free_variables().into_iter().next() {
        return Err(format!("`{phi}` has free variable {v}"));
    }
    let sig = phi.signature().map_err(|e| e.to_string())?;
    if let Some(c) = sig.constants.iter().next() {
        return Err(format!("constant symbol `{c}` is not allowed"));
    }
    for (name, &arity) in &sig.relations {
        match symbol {
            Some((s, k)) if s == name && k == arity => {}
            Some((s, k)) if s == name => return Err(format!("`{s}` used with arity {arity}, expected {k}")),
            _ => return Err(format!("unexpected relation symbol `{name}`")),
        }
    }
    Ok(())
}

/// `∃ā ∀m̄ ∈ R: θ(m̄, ā)`.
fn theta_bound_holds(domain: &[Element], rel: &Relation, theta: &Formula, xs: &[Var], ys: &[Var]) -> Result<bool, DependencyError> {
    let structure = PureDomain(domain);
    for a in all_tuples(domain, ys.len()) {
        let mut s: Assignment = ys.iter().cloned().zip(a).collect();
        let mut ok = true;
        for t in rel {
            s.extend(xs.iter().cloned().zip(t.iter().copied()));
            if !tarski_eval(&structure, &s, theta)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The lexicographically least image of `rel` under permutations of `0..size`.
fn canonical_form(size: usize, rel: &Relation) -> Vec<Vec<Element>> {
    let mut best: Option<Vec<Vec<Element>>> = None;
    for perm in (0..size as Element).permutations(size) {
        let mut image: Vec<Vec<Element>> = rel.iter().map(|t| t.iter().map(|&e| perm[e as usize]).collect()).collect();
        image.sort_unstable();
        if best.as_ref().is_none_or(|b| image < *b) {
            best = Some(image);
        }
    }
    best.unwrap_or_default()
}

/// `¬̃D`: the pointwise complement.
pub fn complement(d: &Arc<Dependency>) -> Dependency {
    let name = match d.name.strip_prefix("not_") {
        Some(base) => base.to_string(),
        None => format!("not_{}", d.name),
    };
    Dependency { name, arity: d.arity, kind: Kind::Complement(d.clone()), hints: d.hints.swap() }
}

/// `D↓`: `(M, R)` belongs iff some `R' ⊇ R` over `M` belongs to `D`.
pub fn downward_closure(d: &Arc<Dependency>) -> Dependency {
    Dependency {
        name: format!("{}_down", d.name),
        arity: d.arity,
        kind: Kind::DownClosure { inner: d.clone(), cache: Arc::default() },
        hints: DC,
    }
}

/// `D_θ`: `D` intersected with `∃ā ∀m̄ ∈ R θ(m̄, ā)`, where `θ(x̄, ȳ)` is
/// relation-free and `|x̄|` is the arity of `D`.
pub fn restrict_theta(d: &Arc<Dependency>, theta: Formula, xs: Vec<Var>, ys: Vec<Var>) -> Result<Dependency, DependencyError> {
    if xs.len() != d.arity {
        return Err(DependencyError::Arity { name: d.name.clone(), expected: d.arity, found: xs.len() });
    }
    if !theta.is_first_order() {
        return Err(DependencyError::Definition { name: d.name.clone(), reason: format!("`{theta}` is not first-order") });
    }
    let sig = theta.signature().map_err(|e| DependencyError::Definition { name: d.name.clone(), reason: e.to_string() })?;
    if !sig.relations.is_empty() || !sig.constants.is_empty() {
        return Err(DependencyError::RelationInTheta(theta.to_string()));
    }
    let allowed: BTreeSet<&Var> = xs.iter().chain(&ys).collect();
    if let Some(v) = theta.free_variables().iter().find(|v| !allowed.contains(v)) {
        return Err(DependencyError::Definition { name: d.name.clone(), reason: format!("free variable {v} is neither a column nor a parameter") });
    }
    let hints = ClosureHints { downward: d.hints.downward, upward: false };
    Ok(Dependency { name: format!("{}_theta", d.name), arity: d.arity, kind: Kind::Restrict { inner: d.clone(), theta, xs, ys }, hints })
}

/// All k-ary relations over a domain, indexed by bitmasks over the
/// lexicographically ordered tuples.
#[derive(Clone, Debug)]
pub struct RelationSpace {
    domain: Vec<Element>,
    arity: usize,
    tuples: Vec<Vec<Element>>,
}

impl RelationSpace {
    pub fn new(domain: &[Element], arity: usize, cap: usize) -> Result<RelationSpace, DependencyError> {
        let mut domain = domain.to_vec();
        domain.sort_unstable();
        domain.dedup();
        let count = domain.len().checked_pow(arity as u32).unwrap_or(usize::MAX);
        let cap = cap.min(HARD_RELATION_CAP);
        if count > cap {
            return Err(DependencyError::TooManyTuples(count, cap));
        }
        let tuples = all_tuples(&domain, arity).collect();
        Ok(RelationSpace { domain, arity, tuples })
    }

    pub fn domain(&self) -> &[Element] {
        &self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of tuples; relations are the subsets of these.
    pub fn tuple_count(&self) -> usize {
        self.tuples.len()
    }

    pub fn relation_count(&self) -> usize {
        1 << self.tuples.len()
    }

    pub fn full_mask(&self) -> u32 {
        ((1u64 << self.tuples.len()) - 1) as u32
    }

    pub fn relation(&self, mask: u32) -> Relation {
        Relation::from_tuples(self.arity, self.tuples.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, t)| t.clone()))
    }

    /// The mask of `rel`, or `None` when it leaves the domain.
    pub fn mask(&self, rel: &Relation) -> Option<u32> {
        let n = self.domain.len();
        let mut mask = 0u32;
        for t in rel {
            let mut index = 0;
            for e in t {
                index = index * n + self.domain.binary_search(e).ok()?;
            }
            mask |= 1 << index;
        }
        Some(mask)
    }

    /// Membership of every relation, indexed by mask.
    pub fn membership(&self, d: &Dependency) -> Result<Vec<bool>, DependencyError> {
        (0..self.relation_count() as u32).map(|m| d.contains(&self.domain, &self.relation(m))).collect()
    }

    /// `out[S]` holds iff `table[T]` for some `T ⊇ S`.
    pub fn any_superset(&self, table: &[bool]) -> Vec<bool> {
        let mut out = table.to_vec();
        for s in (0..out.len()).rev() {
            if !out[s] {
                out[s] = (0..self.tuples.len()).any(|b| s >> b & 1 == 0 && out[s | 1 << b]);
            }
        }
        out
    }
}

/// `D_max` on `domain`: members with no strictly larger member.
pub fn maximal_relations(d: &Dependency, domain: &[Element], cap: usize) -> Result<Vec<Relation>, DependencyError> {
    let space = RelationSpace::new(domain, d.arity, cap)?;
    let table = space.membership(d)?;
    let above = space.any_superset(&table);
    let n = space.tuple_count();
    Ok((0..space.relation_count())
        .filter(|&s| table[s] && (0..n).all(|b| s >> b & 1 == 1 || !above[s | 1 << b]))
        .map(|s| space.relation(s as u32))
        .collect())
}

/// Outcome of one bounded closure-property check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyCheck {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl PropertyCheck {
    fn pass() -> PropertyCheck {
        PropertyCheck { holds: true, witness: None }
    }

    fn fail(w: Witness) -> PropertyCheck {
        PropertyCheck { holds: false, witness: Some(w) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `smaller ⊆ larger` on a domain of the given size with differing membership.
    Inclusion { size: usize, smaller: Relation, larger: Relation, smaller_member: bool, larger_member: bool },
    /// `(M, ∅)` is not a member.
    EmptyTeam { size: usize },
    /// Membership of `relation` changes between `0..small` and `0..large`.
    Domain { small: usize, large: usize, relation: Relation, in_small: bool, in_large: bool },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let member = |b: &bool| if *b { "member" } else { "non-member" };
        match self {
            Witness::Inclusion { size, smaller, larger, smaller_member, larger_member } => write!(
                f,
                "|M|={size}: {smaller} {} subset of {larger} {}",
                member(smaller_member),
                member(larger_member)
            ),
            Witness::EmptyTeam { size } => write!(f, "|M|={size}: empty relation is a non-member"),
            Witness::Domain { small, large, relation, in_small, in_large } => write!(
                f,
                "{relation} is a {} at |M|={small} and a {} at |M|={large}",
                member(in_small),
                member(in_large)
            ),
        }
    }
}

/// Bounded closure-property classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub bound: usize,
    pub downward_closed: PropertyCheck,
    pub upward_closed: PropertyCheck,
    pub empty_team: PropertyCheck,
    pub domain_independent: PropertyCheck,
}

impl Classification {
    pub fn lines(&self) -> Vec<String> {
        let line = |label: &str, p: &PropertyCheck| match &p.witness {
            None => format!("{label}: {}", if p.holds { "yes" } else { "no" }),
            Some(w) => format!("{label}: no ({w})"),
        };
        vec![
            line("downwards-closed", &self.downward_closed),
            line("upwards-closed", &self.upward_closed),
            line("empty-team-property", &self.empty_team),
            line("domain-independent", &self.domain_independent),
        ]
    }
}

/// Checks the closure properties exhaustively over domains `0..m` for
/// `2 <= m <= bound`.
///
/// Downward and upward closure are checked one tuple at a time, which is
/// equivalent on a fixed domain. Domain independence is checked in both
/// directions: membership of `(M, R)` and `(M', R)` must agree whenever
/// `R ⊆ M'^k` and `M' ⊆ M` (prefix subdomains suffice up to isomorphism).
pub fn classify(d: &Dependency, bound: usize, cap: usize) -> Result<Classification, DependencyError> {
    let bound = bound.max(2);
    let mut down = PropertyCheck::pass();
    let mut up = PropertyCheck::pass();
    let mut empty = PropertyCheck::pass();
    let mut indep = PropertyCheck::pass();
    let mut tables: Vec<(RelationSpace, Vec<bool>)> = Vec::new();
    for size in 2..=bound {
        let domain: Vec<Element> = (0..size as Element).collect();
        let space = RelationSpace::new(&domain, d.arity, cap)?;
        let table = space.membership(d)?;
        for s in 0..space.relation_count() {
            for b in 0..space.tuple_count() {
                if s >> b & 1 == 1 {
                    continue;
                }
                let t = s | 1 << b;
                let (small, large) = (table[s], table[t]);
                let witness = || Witness::Inclusion {
                    size,
                    smaller: space.relation(s as u32),
                    larger: space.relation(t as u32),
                    smaller_member: small,
                    larger_member: large,
                };
                if large && !small && down.holds {
                    down = PropertyCheck::fail(witness());
                }
                if small && !large && up.holds {
                    up = PropertyCheck::fail(witness());
                }
            }
        }
        if !table[0] && empty.holds {
            empty = PropertyCheck::fail(Witness::EmptyTeam { size });
        }
        for (sub, sub_table) in &tables {
            if !indep.holds {
                break;
            }
            for m in 0..sub.relation_count() as u32 {
                let rel = sub.relation(m);
                let big = table[space.mask(&rel).expect("subdomain relation") as usize];
                if big != sub_table[m as usize] {
                    indep = PropertyCheck::fail(Witness::Domain {
                        small: sub.domain().len(),
                        large: size,
                        relation: rel,
                        in_small: sub_table[m as usize],
                        in_large: big,
                    });
                    break;
                }
            }
        }
        tables.push((space, table));
    }
    Ok(Classification { bound, downward_closed: down, upward_closed: up, empty_team: empty, domain_independent: indep })
}

/// Named dependencies plus the builtin families.
#[derive(Clone, Debug, Default)]
pub struct DependencyRegistry {
    user: BTreeMap<String, Arc<Dependency>>,
}

/// Builtin family names; `dep` is written `=(..)` in formulas.
pub const BUILTIN_FAMILIES: &[&str] = &["dep", "ind", "inc", "exc", "const", "all", "nonconst", "evencard"];

impl DependencyRegistry {
    pub fn new() -> DependencyRegistry {
        DependencyRegistry::default()
    }

    pub fn register(&mut self, d: Dependency) -> Result<Arc<Dependency>, DependencyError> {
        if BUILTIN_FAMILIES.contains(&d.name.as_str()) || self.user.contains_key(&d.name) {
            return Err(DependencyError::Duplicate(d.name.clone()));
        }
        if !is_identifier(&d.name) {
            return Err(DependencyError::Definition { name: d.name.clone(), reason: "names must be identifiers".into() });
        }
        let d = Arc::new(d);
        self.user.insert(d.name.clone(), d.clone());
        Ok(d)
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Dependency>> {
        self.user.get(name)
    }

    pub fn user_dependencies(&self) -> impl Iterator<Item = &Arc<Dependency>> {
        self.user.values()
    }

    /// `prefix0, prefix1, ...`: the first name not yet taken.
    pub fn fresh_name(&self, prefix: &str) -> String {
        (0..).map(|i| format!("{prefix}{i}")).find(|n| !self.user.contains_key(n) && !BUILTIN_FAMILIES.contains(&n.as_str())).unwrap()
    }

    /// The dependency an atom with this name and argument split denotes.
    pub fn resolve(&self, name: &str, split: &[usize]) -> Result<Arc<Dependency>, DependencyError> {
        let groups = |n: usize| -> Result<(), DependencyError> {
            if split.len() == n {
                Ok(())
            } else {
                Err(DependencyError::Split { name: name.into(), reason: format!("expected {n} argument group(s), found {}", split.len()) })
            }
        };
        let same_width = || -> Result<usize, DependencyError> {
            groups(2)?;
            if split[0] != split[1] {
                return Err(DependencyError::Split { name: name.into(), reason: "both argument tuples must have the same length".into() });
            }
            Ok(split[0])
        };
        let total: usize = split.iter().sum();
        let d = match name {
            "dep" => {
                groups(2)?;
                Dependency::dep(split[0], split[1])
            }
            "ind" => {
                groups(3)?;
                Dependency::ind(split[0], split[1], split[2])
            }
            "inc" => Dependency::inc(same_width()?),
            "exc" => Dependency::exc(same_width()?),
            "const" | "all" | "nonconst" | "evencard" => {
                groups(1)?;
                match name {
                    "const" => Dependency::constancy(total),
                    "all" => Dependency::all(total),
                    "nonconst" => Dependency::nonconst(total),
                    _ => Dependency::evencard(total),
                }
            }
            _ => {
                let d = self.user.get(name).ok_or_else(|| DependencyError::Unknown(name.into()))?;
                if d.arity != total {
                    return Err(DependencyError::Arity { name: name.into(), expected: d.arity, found: total });
                }
                return Ok(d.clone());
            }
        };
        Ok(Arc::new(d))
    }

    pub fn resolve_atom(&self, atom: &DepAtom) -> Result<Arc<Dependency>, DependencyError> {
        self.resolve(&atom.name, &atom.split)
    }

    /// Parser hook: checks that an atom names a known dependency with the right arity.
    pub(crate) fn check_atom(&self, atom: &DepAtom) -> Result<(), String> {
        self.resolve_atom(atom).map(|_| ()).map_err(|e| e.to_string())
    }

    /// Parses `spec` strings such as `const`, `dep:1,1` or `myname`: a
    /// dependency name plus, for builtin families, the argument split.
    pub fn resolve_spec(&self, spec: &str) -> Result<Arc<Dependency>, DependencyError> {
        let (name, split) = match spec.split_once(':') {
            Some((n, s)) => {
                let split = s
                    .split(',')
                    .map(|p| p.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| DependencyError::Split { name: n.into(), reason: format!("bad split `{s}`") })?;
                (n.trim(), split)
            }
            None => match self.user.get(spec.trim()) {
                Some(d) => return Ok(d.clone()),
                None => (spec.trim(), vec![1]),
            },
        };
        self.resolve(name, &split)
    }

    /// Loads definitions, one per line:
    ///
    /// ```text
    /// dependency NAME arity K := <first-order sentence over R>
    /// dependency NAME arity K table(domain-size S): R1; R2; ...
    /// ```
    ///
    /// Table relations list tuples of element numbers below `S`, e.g.
    /// `(0,1) (1,0)`, or `empty`. Repeated table lines for one name add
    /// entries (typically for other domain sizes).
    pub fn load_definitions(&mut self, text: &str) -> Result<Vec<String>, DependencyError> {
        let mut sentences: Vec<(String, usize, Formula)> = Vec::new();
        let mut tables: BTreeMap<String, (usize, Vec<(usize, Relation)>)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| DependencyError::Syntax { line, message };
            let rest = content.strip_prefix("dependency").ok_or_else(|| err("expected `dependency`".into()))?;
            let mut words = rest.split_whitespace();
            let name = words.next().ok_or_else(|| err("missing dependency name".into()))?.to_string();
            if words.next() != Some("arity") {
                return Err(err("expected `arity K` after the name".into()));
            }
            let arity: usize = words.next().and_then(|a| a.parse().ok()).ok_or_else(|| err("bad arity".into()))?;
            let body_start = content.find(" arity ").unwrap() + " arity ".len();
            let body = content[body_start..].trim_start();
            let body = body[body.find(|c: char| !c.is_ascii_digit()).unwrap_or(body.len())..].trim();
            if let Some(sentence) = body.strip_prefix(":=") {
                let phi = parse_formula(sentence.trim(), self).map_err(|e| err(e.to_string()))?;
                sentences.push((name, arity, phi));
            } else if let Some(table) = body.strip_prefix("table") {
                let table = table.trim_start();
                let inner = table.strip_prefix('(').ok_or_else(|| err("expected `table(domain-size S):`".into()))?;
                let (size_spec, listing) = inner.split_once(')').ok_or_else(|| err("unclosed `table(`".into()))?;
                let size: usize = size_spec
                    .trim()
                    .strip_prefix("domain-size")
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| err("expected `domain-size S`".into()))?;
                let listing = listing.trim().strip_prefix(':').ok_or_else(|| err("expected `:` after the table header".into()))?;
                let entry = tables.entry(name.clone()).or_insert((arity, Vec::new()));
                if entry.0 != arity {
                    return Err(err(format!("`{name}` redeclared with arity {arity}")));
                }
                for item in listing.split(';') {
                    let item = item.trim();
                    if item.is_empty() {
                        continue;
                    }
                    entry.1.push((size, parse_numeric_relation(item, arity).map_err(err)?));
                }
            } else {
                return Err(err("expected `:=` or `table(...)`".into()));
            }
        }
        let mut names = Vec::new();
        for (name, arity, phi) in sentences {
            names.push(name.clone());
            self.register(Dependency::first_order(&name, arity, phi)?)?;
        }
        for (name, (arity, entries)) in tables {
            names.push(name.clone());
            self.register(Dependency::table(&name, arity, &entries)?)?;
        }
        Ok(names)
    }
}

fn parse_numeric_relation(text: &str, arity: usize) -> Result<Relation, String> {
    let mut rel = Relation::empty(arity);
    if text == "empty" {
        return Ok(rel);
    }
    let mut rest = text;
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').ok_or_else(|| format!("expected `(` in `{text}`"))?;
        let (inner, tail) = open.split_once(')').ok_or_else(|| format!("unclosed tuple in `{text}`"))?;
        let tuple: Vec<Element> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|e| e.trim().parse::<Element>().map_err(|_| format!("bad element `{}`", e.trim()))).collect::<Result<_, _>>()?
        };
        if tuple.len() != arity {
            return Err(format!("tuple of length {} in a table of arity {arity}", tuple.len()));
        }
        rel.insert(tuple);
        rest = tail.trim_start();
    }
    Ok(rel)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_') && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(arity: usize, tuples: &[&[Element]]) -> Relation {
        Relation::from_tuples(arity, tuples.iter().map(|t| t.to_vec()))
    }

    fn sentence(text: &str) -> Formula {
        parse_formula(text, &DependencyRegistry::new()).unwrap()
    }

    fn every_relation(domain: &[Element], arity: usize) -> Vec<Relation> {
        let space = RelationSpace::new(domain, arity, 16).unwrap();
        (0..space.relation_count() as u32).map(|m| space.relation(m)).collect()
    }

    #[test]
    fn builtin_examples() {
        let d2 = [0, 1];
        let c = Dependency::constancy(1);
        assert!(c.contains(&d2, &rel(1, &[&[0]])).unwrap());
        assert!(!c.contains(&d2, &rel(1, &[&[0], &[1]])).unwrap());
        let inc = Dependency::inc(1);
        assert!(inc.contains(&d2, &rel(2, &[&[0, 1], &[1, 0]])).unwrap());
        let all = Dependency::all(1);
        assert!(!all.contains(&d2, &rel(1, &[&[0]])).unwrap());
        assert!(all.contains(&d2, &rel(1, &[&[0], &[1]])).unwrap());
        assert!(matches!(all.contains(&d2, &rel(2, &[])), Err(DependencyError::Arity { .. })));
    }

    /// Builtins agree with their defining first-order sentences.
    #[test]
    fn builtins_match_defining_sentences() {
        let cases = [
            (Dependency::dep(1, 1), "forall x y y2 . !R(x,y) \\/ !R(x,y2) \\/ y = y2"),
            (
                Dependency::ind(1, 1, 1),
                "forall x y z x2 z2 . !R(x,y,z) \\/ !R(x2,y,z2) \\/ R(x,y,z2)",
            ),
            (Dependency::inc(1), "forall x y . !R(x,y) \\/ exists x2 y2 . R(x2,y2) /\\ y2 = x"),
            (Dependency::exc(1), "forall x y x2 y2 . !R(x,y) \\/ !R(x2,y2) \\/ x != y2"),
            (Dependency::dep(0, 1), "forall y y2 . !R(y) \\/ !R(y2) \\/ y = y2"),
        ];
        for (builtin, def) in cases {
            let fo = Dependency::first_order("def", builtin.arity(), sentence(def)).unwrap();
            for size in 2..=3 {
                let domain: Vec<Element> = (0..size).collect();
                if size.pow(builtin.arity() as u32) > 9 {
                    continue;
                }
                for r in every_relation(&domain, builtin.arity()) {
                    assert_eq!(builtin.contains(&domain, &r).unwrap(), fo.contains(&domain, &r).unwrap(), "{} on {r}", builtin.name());
                }
            }
        }
    }

    #[test]
    fn ind_three_columns_exhaustive_small() {
        // Three binary columns over a 2-element domain: 2^8 relations.
        let d = Dependency::ind(1, 1, 1);
        let fo = Dependency::first_order("def", 3, sentence("forall x y z x2 z2 . !R(x,y,z) \\/ !R(x2,y,z2) \\/ R(x,y,z2)")).unwrap();
        for r in every_relation(&[0, 1], 3) {
            assert_eq!(d.contains(&[0, 1], &r).unwrap(), fo.contains(&[0, 1], &r).unwrap());
        }
    }

    #[test]
    fn isomorphism_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut reg = DependencyRegistry::new();
        let exactly_one = reg
            .register(Dependency::table("one", 1, &[(3, rel(1, &[&[2]])), (2, rel(1, &[&[0]]))]).unwrap())
            .unwrap();
        let deps: Vec<Arc<Dependency>> = vec![
            Arc::new(Dependency::dep(1, 1)),
            Arc::new(Dependency::ind(1, 0, 1)),
            Arc::new(Dependency::inc(1)),
            Arc::new(Dependency::exc(1)),
            Arc::new(Dependency::constancy(2)),
            Arc::new(Dependency::all(2)),
            Arc::new(Dependency::nonconst(1)),
            Arc::new(Dependency::evencard(1)),
            exactly_one.clone(),
            Arc::new(complement(&exactly_one)),
            Arc::new(downward_closure(&Arc::new(Dependency::nonconst(1)))),
        ];
        let domain = [0, 1, 2];
        for d in &deps {
            for r in every_relation(&domain, d.arity()) {
                for _ in 0..3 {
                    let mut perm = domain.to_vec();
                    perm.shuffle(&mut rng);
                    let image = r.map(|e| perm[e as usize]);
                    assert_eq!(d.contains(&domain, &r).unwrap(), d.contains(&domain, &image).unwrap(), "{d:?} on {r}");
                }
            }
        }
    }

    #[test]
    fn complement_examples() {
        let c = Arc::new(Dependency::constancy(1));
        let nc = complement(&c);
        assert!(nc.contains(&[0, 1], &rel(1, &[&[0], &[1]])).unwrap());
        let na = complement(&Arc::new(Dependency::all(1)));
        assert!(na.contains(&[0, 1], &rel(1, &[])).unwrap());
        let back = complement(&Arc::new(nc));
        for size in 2..=3 {
            let domain: Vec<Element> = (0..size).collect();
            for r in every_relation(&domain, 1) {
                assert_eq!(back.contains(&domain, &r).unwrap(), c.contains(&domain, &r).unwrap());
            }
        }
    }

    #[test]
    fn downward_closure_examples() {
        let all_down = downward_closure(&Arc::new(Dependency::all(1)));
        let const_down = downward_closure(&Arc::new(Dependency::constancy(1)));
        let nonconst_down = downward_closure(&Arc::new(Dependency::nonconst(1)));
        let c = Dependency::constancy(1);
        for size in 2..=3 {
            let domain: Vec<Element> = (0..size).collect();
            for r in every_relation(&domain, 1) {
                assert!(all_down.contains(&domain, &r).unwrap());
                assert!(nonconst_down.contains(&domain, &r).unwrap());
                assert_eq!(const_down.contains(&domain, &r).unwrap(), c.contains(&domain, &r).unwrap());
            }
        }
    }

    #[test]
    fn relativization_examples() {
        let mut m = Model::new(3).unwrap();
        m.set_relation("P", rel(1, &[&[0], &[1]])).unwrap();
        m.set_relation("S", rel(1, &[&[0]])).unwrap();
        let all = Dependency::all(1);
        assert!(all.contains_relativized(&m, "P", &rel(1, &[&[0], &[1]])).unwrap());
        assert!(!all.contains_relativized(&m, "P", &rel(1, &[&[0], &[2]])).unwrap());
        assert!(!all.contains_relativized(&m, "P", &rel(1, &[&[0], &[1], &[2]])).unwrap());
        let c = Dependency::constancy(1);
        assert!(c.contains_relativized(&m, "P", &rel(1, &[&[1]])).unwrap());
        assert!(matches!(c.contains_relativized(&m, "Q", &rel(1, &[])), Err(DependencyError::MissingPredicate(_))));
        assert!(matches!(c.contains_relativized(&m, "S", &rel(1, &[])), Err(DependencyError::SmallPredicate { .. })));
    }

    #[test]
    fn restriction_examples() {
        let trivial = Arc::new(Dependency::native("any", 1, Arc::new(|_, _| true)));
        let xs = crate::syntax::vars(&["x"]);
        let ys = crate::syntax::vars(&["y"]);
        let singleton = restrict_theta(&trivial, sentence("x = y"), xs.clone(), ys.clone()).unwrap();
        let top = restrict_theta(&trivial, Formula::top(), xs.clone(), ys.clone()).unwrap();
        let bot = restrict_theta(&trivial, Formula::bot(), xs.clone(), ys.clone()).unwrap();
        for size in 2..=3 {
            let domain: Vec<Element> = (0..size).collect();
            for r in every_relation(&domain, 1) {
                assert_eq!(singleton.contains(&domain, &r).unwrap(), r.len() <= 1);
                assert!(top.contains(&domain, &r).unwrap());
                assert_eq!(bot.contains(&domain, &r).unwrap(), r.is_empty());
            }
        }
        let bad = restrict_theta(&trivial, sentence("Q(x)"), xs, ys);
        assert!(matches!(bad, Err(DependencyError::RelationInTheta(_))));
    }

    #[test]
    fn maximal_relation_examples() {
        let c = Dependency::constancy(1);
        let got = maximal_relations(&c, &[0, 1], 16).unwrap();
        assert_eq!(got, vec![rel(1, &[&[0]]), rel(1, &[&[1]])]);
        let a = maximal_relations(&Dependency::all(1), &[0, 1, 2], 16).unwrap();
        assert_eq!(a, vec![rel(1, &[&[0], &[1], &[2]])]);
        assert!(maximal_relations(&Dependency::all(2), &[0, 1, 2, 3, 4], 16).is_err());
    }

    #[test]
    fn classification_examples() {
        let c = classify(&Dependency::constancy(1), 3, 16).unwrap();
        assert!(c.downward_closed.holds && !c.upward_closed.holds && c.empty_team.holds && c.domain_independent.holds);
        let a = classify(&Dependency::all(1), 3, 16).unwrap();
        assert!(a.upward_closed.holds && !a.domain_independent.holds);
        assert!(matches!(a.domain_independent.witness, Some(Witness::Domain { small: 2, large: 3, .. })));
        let n = classify(&Dependency::nonconst(1), 3, 16).unwrap();
        assert!(n.upward_closed.holds && !n.empty_team.holds);
    }

    #[test]
    fn definition_file() {
        let mut reg = DependencyRegistry::new();
        let text = "# two kinds\n\
                    dependency single arity 1 := exists x . R(x) /\\ forall y . !R(y) \\/ x = y\n\
                    dependency pairs arity 1 table(domain-size 2): (0) (1)\n\
                    dependency pairs arity 1 table(domain-size 3): (0) (1); empty\n";
        let names = reg.load_definitions(text).unwrap();
        assert_eq!(names, vec!["single".to_string(), "pairs".to_string()]);
        let single = reg.get("single").unwrap();
        assert!(single.contains(&[0, 1, 2], &rel(1, &[&[2]])).unwrap());
        assert!(!single.contains(&[0, 1, 2], &rel(1, &[])).unwrap());
        let pairs = reg.get("pairs").unwrap();
        assert!(pairs.contains(&[0, 1, 2], &rel(1, &[&[1], &[2]])).unwrap());
        assert!(pairs.contains(&[0, 1, 2], &rel(1, &[])).unwrap());
        assert!(!pairs.contains(&[0, 1], &rel(1, &[])).unwrap());
        assert!(!pairs.contains(&[0, 1, 2, 3], &rel(1, &[&[0], &[1]])).unwrap());
        assert!(reg.load_definitions("dependency bad arity 1 := R(x)").is_err());
    }

    #[test]
    fn registry_resolution() {
        let reg = DependencyRegistry::new();
        assert_eq!(reg.resolve("dep", &[2, 1]).unwrap().arity(), 3);
        assert!(reg.resolve("inc", &[1, 2]).is_err());
        assert!(reg.resolve("nope", &[1]).is_err());
        assert_eq!(reg.resolve_spec("dep:1,1").unwrap().arity(), 2);
        assert_eq!(reg.resolve_spec("const").unwrap().arity(), 1);
    }
}
