//! Finite models, teams, and the team operations behind the semantic rules.
//!
//! Elements are small integers; a [`Model`] keeps display names for them.
//! Teams store their variable domain sorted and their rows sorted and
//! deduplicated, so equal teams are equal values and hash alike.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::syntax::{Atom, Formula, Term, Var};

pub type Element = u32;

/// A variable assignment.
pub type Assignment = BTreeMap<Var, Element>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("a model needs at least two elements, got {0}")]
    DomainTooSmall(usize),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element {0} is outside the domain")]
    ElementOutOfRange(Element),
    #[error("unknown variable `{0}`")]
    UnknownVariable(Var),
    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),
    #[error("unknown constant symbol `{0}`")]
    UnknownConstant(String),
    #[error("{what}: expected arity {expected}, found {found}")]
    Arity { what: String, expected: usize, found: usize },
    #[error("duplicate definition of `{0}`")]
    Duplicate(String),
    #[error("Tarskian evaluation needs a first-order formula, found {0}")]
    NotFirstOrder(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// A set of equal-length element tuples.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    arity: usize,
    tuples: BTreeSet<Vec<Element>>,
}

impl Relation {
    pub fn empty(arity: usize) -> Relation {
        Relation { arity, tuples: BTreeSet::new() }
    }

    /// Panics if a tuple has the wrong length.
    pub fn from_tuples<I, T>(arity: usize, tuples: I) -> Relation
    where
        I: IntoIterator<Item = T>,
        T: Into<Vec<Element>>,
    {
        let mut r = Relation::empty(arity);
        for t in tuples {
            r.insert(t.into());
        }
        r
    }

    /// The full relation `domain^arity`.
    pub fn full(domain: &[Element], arity: usize) -> Relation {
        Relation { arity, tuples: all_tuples(domain, arity).collect() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[Element]) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn insert(&mut self, tuple: Vec<Element>) -> bool {
        assert_eq!(tuple.len(), self.arity, "tuple length does not match relation arity");
        self.tuples.insert(tuple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<Element>> + '_ {
        self.tuples.iter()
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.tuples.is_subset(&other.tuples)
    }

    /// Whether every tuple only uses elements of `domain`.
    pub fn within(&self, domain: &[Element]) -> bool {
        self.tuples.iter().all(|t| t.iter().all(|e| domain.contains(e)))
    }

    /// Elements occurring in some tuple.
    pub fn active_domain(&self) -> BTreeSet<Element> {
        self.tuples.iter().flatten().copied().collect()
    }

    /// The relation restricted to the columns in `columns`, in that order.
    pub fn project(&self, columns: &[usize]) -> Relation {
        Relation { arity: columns.len(), tuples: self.tuples.iter().map(|t| columns.iter().map(|&c| t[c]).collect()).collect() }
    }

    /// Image under an element map.
    pub fn map(&self, f: impl Fn(Element) -> Element) -> Relation {
        Relation { arity: self.arity, tuples: self.tuples.iter().map(|t| t.iter().map(|&e| f(e)).collect()).collect() }
    }
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            let parts: Vec<String> = t.iter().map(|e| e.to_string()).collect();
            write!(f, "({})", parts.join(","))?;
        }
        f.write_str("}")
    }
}

impl<'a> IntoIterator for &'a Relation {
    type Item = &'a Vec<Element>;
    type IntoIter = std::collections::btree_set::Iter<'a, Vec<Element>>;

    fn into_iter(self) -> Self::IntoIter {
        self.tuples.iter()
    }
}

/// All `arity`-tuples over `domain` in lexicographic order.
pub fn all_tuples(domain: &[Element], arity: usize) -> impl Iterator<Item = Vec<Element>> + '_ {
    let n = domain.len();
    let total = if arity == 0 { 1 } else if n == 0 { 0 } else { n.pow(arity as u32) };
    (0..total).map(move |mut code| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = domain[code % n];
            code /= n;
        }
        t
    })
}

/// Read access shared by models and the auxiliary structures used for
/// dependency membership (a domain plus the single relation `R`).
pub trait Structure {
    fn domain(&self) -> &[Element];
    fn relation(&self, name: &str) -> Option<&Relation>;
    fn constant(&self, name: &str) -> Option<Element>;
}

/// A finite first-order structure with at least two elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    names: Vec<String>,
    elements: Vec<Element>,
    relations: BTreeMap<String, Relation>,
    constants: BTreeMap<String, Element>,
}

impl Model {
    /// A model over `0, ..., size-1` with an empty signature.
    pub fn new(size: usize) -> Result<Model, ModelError> {
        Model::with_names((0..size).map(|i| i.to_string()).collect())
    }

    pub fn with_names(names: Vec<String>) -> Result<Model, ModelError> {
        if names.len() < 2 {
            return Err(ModelError::DomainTooSmall(names.len()));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            let dup = names.iter().find(|n| names.iter().filter(|m| m == n).count() > 1).unwrap();
            return Err(ModelError::Duplicate(dup.clone()));
        }
        let elements = (0..names.len() as Element).collect();
        Ok(Model { names, elements, relations: BTreeMap::new(), constants: BTreeMap::new() })
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn element_name(&self, e: Element) -> &str {
        &self.names[e as usize]
    }

    pub fn element(&self, name: &str) -> Result<Element, ModelError> {
        self.names.iter().position(|n| n == name).map(|i| i as Element).ok_or_else(|| ModelError::UnknownElement(name.into()))
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }

    pub fn constants(&self) -> &BTreeMap<String, Element> {
        &self.constants
    }

    pub fn set_relation(&mut self, name: &str, rel: Relation) -> Result<(), ModelError> {
        if let Some(e) = rel.iter().flatten().find(|&&e| e as usize >= self.size()) {
            return Err(ModelError::ElementOutOfRange(*e));
        }
        self.relations.insert(name.to_string(), rel);
        Ok(())
    }

    pub fn with_relation(mut self, name: &str, rel: Relation) -> Result<Model, ModelError> {
        self.set_relation(name, rel)?;
        Ok(self)
    }

    pub fn set_constant(&mut self, name: &str, e: Element) -> Result<(), ModelError> {
        if e as usize >= self.size() {
            return Err(ModelError::ElementOutOfRange(e));
        }
        self.constants.insert(name.to_string(), e);
        Ok(())
    }

    /// The extension of a unary predicate as a sorted element list.
    pub fn predicate_extension(&self, name: &str) -> Result<Vec<Element>, ModelError> {
        let rel = self.relations.get(name).ok_or_else(|| ModelError::UnknownRelation(name.into()))?;
        if rel.arity() != 1 {
            return Err(ModelError::Arity { what: format!("predicate {name}"), expected: 1, found: rel.arity() });
        }
        Ok(rel.iter().map(|t| t[0]).collect())
    }

    /// Serializes in the text format read by [`parse_model`].
    pub fn to_text(&self) -> String {
        let mut out = format!("domain: {}\n", self.names.join(" "));
        for (name, rel) in &self.relations {
            let _ = write!(out, "relation {name}/{}:", rel.arity());
            for t in rel {
                let _ = write!(out, " {}", self.tuple_text(t));
            }
            out.push('\n');
        }
        for (name, &e) in &self.constants {
            let _ = writeln!(out, "constant {name} = {}", self.element_name(e));
        }
        out
    }

    pub fn tuple_text(&self, t: &[Element]) -> String {
        let parts: Vec<&str> = t.iter().map(|&e| self.element_name(e)).collect();
        format!("({})", parts.join(","))
    }
}

impl Structure for Model {
    fn domain(&self) -> &[Element] {
        &self.elements
    }

    fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    fn constant(&self, name: &str) -> Option<Element> {
        self.constants.get(name).copied()
    }
}

/// A domain together with a single named relation (`R` unless stated).
#[derive(Clone, Copy, Debug)]
pub struct RelStructure<'a> {
    pub domain: &'a [Element],
    pub name: &'a str,
    pub relation: &'a Relation,
}

impl<'a> RelStructure<'a> {
    pub fn new(domain: &'a [Element], relation: &'a Relation) -> RelStructure<'a> {
        RelStructure { domain, name: "R", relation }
    }
}

impl Structure for RelStructure<'_> {
    fn domain(&self) -> &[Element] {
        self.domain
    }

    fn relation(&self, name: &str) -> Option<&Relation> {
        (name == self.name).then_some(self.relation)
    }

    fn constant(&self, _: &str) -> Option<Element> {
        None
    }
}

/// A bare domain over the empty signature.
#[derive(Clone, Copy, Debug)]
pub struct PureDomain<'a>(pub &'a [Element]);

impl Structure for PureDomain<'_> {
    fn domain(&self) -> &[Element] {
        self.0
    }

    fn relation(&self, _: &str) -> Option<&Relation> {
        None
    }

    fn constant(&self, _: &str) -> Option<Element> {
        None
    }
}

/// A set of assignments over a common variable domain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Team {
    vars: Vec<Var>,
    rows: Vec<Vec<Element>>,
}

impl Team {
    /// Builds a team; columns are reordered so variables are sorted.
    pub fn new(vars: Vec<Var>, rows: Vec<Vec<Element>>) -> Result<Team, ModelError> {
        let mut order: Vec<usize> = (0..vars.len()).collect();
        order.sort_by(|&a, &b| vars[a].cmp(&vars[b]));
        for w in order.windows(2) {
            if vars[w[0]] == vars[w[1]] {
                return Err(ModelError::Duplicate(vars[w[0]].to_string()));
            }
        }
        let mut out_rows = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != vars.len() {
                return Err(ModelError::Arity { what: "team row".into(), expected: vars.len(), found: row.len() });
            }
            out_rows.push(order.iter().map(|&i| row[i]).collect());
        }
        let vars = order.iter().map(|&i| vars[i].clone()).collect();
        Ok(Team::from_sorted(vars, out_rows))
    }

    /// `vars` must already be sorted and distinct.
    pub(crate) fn from_sorted(vars: Vec<Var>, mut rows: Vec<Vec<Element>>) -> Team {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]));
        rows.sort_unstable();
        rows.dedup();
        Team { vars, rows }
    }

    /// The team `{∅}` containing only the empty assignment.
    pub fn unit() -> Team {
        Team { vars: Vec::new(), rows: vec![Vec::new()] }
    }

    /// The empty team over `vars`.
    pub fn empty(mut vars: Vec<Var>) -> Team {
        vars.sort();
        vars.dedup();
        Team { vars, rows: Vec::new() }
    }

    pub fn from_assignments(vars: Vec<Var>, assignments: &[Assignment]) -> Result<Team, ModelError> {
        let mut rows = Vec::with_capacity(assignments.len());
        for s in assignments {
            let row = vars.iter().map(|v| s.get(v).copied().ok_or_else(|| ModelError::UnknownVariable(v.clone()))).collect::<Result<_, _>>()?;
            rows.push(row);
        }
        Team::new(vars, rows)
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn rows(&self) -> &[Vec<Element>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, v: &Var) -> Option<usize> {
        self.vars.binary_search(v).ok()
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.rows.iter().map(|row| self.vars.iter().cloned().zip(row.iter().copied()).collect())
    }

    /// `X(v̄)`: the relation of value tuples of `vs`.
    pub fn project(&self, vs: &[Var]) -> Result<Relation, ModelError> {
        let cols = self.columns(vs)?;
        Ok(Relation { arity: vs.len(), tuples: self.rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect() })
    }

    fn columns(&self, vs: &[Var]) -> Result<Vec<usize>, ModelError> {
        vs.iter().map(|v| self.column(v).ok_or_else(|| ModelError::UnknownVariable(v.clone()))).collect()
    }

    /// The team with its variable domain cut down to `keep` (which must be a subset).
    pub fn restrict(&self, keep: &BTreeSet<Var>) -> Team {
        let cols: Vec<usize> = (0..self.vars.len()).filter(|&i| keep.contains(&self.vars[i])).collect();
        if cols.len() == self.vars.len() {
            return self.clone();
        }
        let vars = cols.iter().map(|&i| self.vars[i].clone()).collect();
        let rows = self.rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
        Team::from_sorted(vars, rows)
    }

    /// The team without the variables in `drop`.
    pub fn forget(&self, drop: &[Var]) -> Team {
        let keep = self.vars.iter().filter(|v| !drop.contains(v)).cloned().collect();
        self.restrict(&keep)
    }

    /// The subteam made of the rows selected by `pick`.
    pub fn filter(&self, mut pick: impl FnMut(usize, &[Element]) -> bool) -> Team {
        let rows = self.rows.iter().enumerate().filter(|(i, r)| pick(*i, r)).map(|(_, r)| r.clone()).collect();
        Team { vars: self.vars.clone(), rows }
    }

    /// The subteam with rows given by the set bits of `mask` (row `i` is bit `i`).
    pub fn subteam(&self, mask: u64) -> Team {
        self.filter(|i, _| mask >> i & 1 == 1)
    }

    pub fn is_subteam_of(&self, other: &Team) -> bool {
        self.vars == other.vars && self.rows.iter().all(|r| other.rows.binary_search(r).is_ok())
    }

    /// Variable domain after writing `vs`: the old variables plus `vs`, sorted.
    fn extended_vars(&self, vs: &[Var]) -> (Vec<Var>, Vec<usize>) {
        let mut vars = self.vars.clone();
        for v in vs {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        vars.sort();
        let slots = vs.iter().map(|v| vars.binary_search(v).unwrap()).collect();
        (vars, slots)
    }

    /// Re-lays a row of `self` out over the variable domain `vars`.
    fn widen(&self, row: &[Element], vars: &[Var]) -> Vec<Element> {
        let mut out = vec![0; vars.len()];
        let mut j = 0;
        for (i, v) in vars.iter().enumerate() {
            if j < self.vars.len() && self.vars[j] == *v {
                out[i] = row[j];
                j += 1;
            }
        }
        out
    }

    /// `X[M^k/v̄] = {s[m̄/v̄] : s ∈ X, m̄ ∈ M^k}`.
    pub fn duplicate(&self, domain: &[Element], vs: &[Var]) -> Team {
        let (vars, slots) = self.extended_vars(vs);
        let mut rows = Vec::with_capacity(self.rows.len() * domain.len().pow(vs.len() as u32));
        for row in &self.rows {
            let base = self.widen(row, &vars);
            for t in all_tuples(domain, vs.len()) {
                let mut r = base.clone();
                for (&slot, &e) in slots.iter().zip(&t) {
                    r[slot] = e;
                }
                rows.push(r);
            }
        }
        Team::from_sorted(vars, rows)
    }

    /// `X[m̄/v̄] = {s[m̄/v̄] : s ∈ X}`.
    pub fn fix_tuple(&self, values: &[Element], vs: &[Var]) -> Result<Team, ModelError> {
        if values.len() != vs.len() {
            return Err(ModelError::Arity { what: "fixed tuple".into(), expected: vs.len(), found: values.len() });
        }
        let (vars, slots) = self.extended_vars(vs);
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut r = self.widen(row, &vars);
                for (&slot, &e) in slots.iter().zip(values) {
                    r[slot] = e;
                }
                r
            })
            .collect();
        Ok(Team::from_sorted(vars, rows))
    }

    /// Every team `X[H/v]` for `H: X → P(M) \ {∅}`, each produced once.
    ///
    /// Uses the lax reformulation: the subteams of `X[M/v]` whose
    /// restriction to the other variables is exactly that of `X`.
    pub fn supplement_subteams<'a>(&self, domain: &'a [Element], v: &Var) -> SupplementIter<'a> {
        let base = self.forget(std::slice::from_ref(v));
        let (vars, slots) = base.extended_vars(std::slice::from_ref(v));
        let widened = base.rows.iter().map(|r| base.widen(r, &vars)).collect();
        let mut choice = vec![1u64; base.len()];
        let done = domain.len() >= 64;
        if base.is_empty() {
            choice.clear();
        }
        SupplementIter { domain, vars, slot: slots[0], rows: widened, choice, done }
    }

    /// Serializes as `team x y: (a,b) ...` using the model's element names.
    pub fn to_text(&self, model: &Model) -> String {
        let mut out = String::from("team");
        for v in &self.vars {
            let _ = write!(out, " {v}");
        }
        out.push(':');
        for r in &self.rows {
            let _ = write!(out, " {}", model.tuple_text(r));
        }
        out
    }
}

/// Iterator behind [`Team::supplement_subteams`]: an odometer over a
/// nonempty value set (bitmask over the domain) per row.
pub struct SupplementIter<'a> {
    domain: &'a [Element],
    vars: Vec<Var>,
    slot: usize,
    rows: Vec<Vec<Element>>,
    choice: Vec<u64>,
    done: bool,
}

impl Iterator for SupplementIter<'_> {
    type Item = Team;

    fn next(&mut self) -> Option<Team> {
        if self.done {
            return None;
        }
        let mut out = Vec::new();
        for (row, &mask) in self.rows.iter().zip(&self.choice) {
            for (i, &e) in self.domain.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    let mut r = row.clone();
                    r[self.slot] = e;
                    out.push(r);
                }
            }
        }
        let full = (1u64 << self.domain.len()) - 1;
        self.done = true;
        for c in self.choice.iter_mut() {
            if *c < full {
                *c += 1;
                self.done = false;
                break;
            }
            *c = 1;
        }
        Some(Team::from_sorted(self.vars.clone(), out))
    }
}

/// Classical satisfaction of a first-order formula.
pub fn tarski_eval<S: Structure + ?Sized>(m: &S, s: &Assignment, phi: &Formula) -> Result<bool, ModelError> {
    let mut env: Vec<(Var, Element)> = s.iter().map(|(v, &e)| (v.clone(), e)).collect();
    tarski(m, &mut env, phi)
}

fn term_value<S: Structure + ?Sized>(m: &S, env: &[(Var, Element)], t: &Term) -> Result<Element, ModelError> {
    match t {
        Term::Var(v) => env.iter().rev().find(|(w, _)| w == v).map(|(_, e)| *e).ok_or_else(|| ModelError::UnknownVariable(v.clone())),
        Term::Const(c) => m.constant(c).ok_or_else(|| ModelError::UnknownConstant(c.clone())),
    }
}

fn tarski<S: Structure + ?Sized>(m: &S, env: &mut Vec<(Var, Element)>, phi: &Formula) -> Result<bool, ModelError> {
    Ok(match phi {
        Formula::Lit(l) => {
            let holds = match &l.atom {
                Atom::Top => true,
                Atom::Eq(a, b) => term_value(m, env, a)? == term_value(m, env, b)?,
                Atom::Rel { name, args } => {
                    let rel = m.relation(name).ok_or_else(|| ModelError::UnknownRelation(name.clone()))?;
                    if rel.arity() != args.len() {
                        return Err(ModelError::Arity { what: format!("relation {name}"), expected: rel.arity(), found: args.len() });
                    }
                    let tuple = args.iter().map(|t| term_value(m, env, t)).collect::<Result<Vec<_>, _>>()?;
                    rel.contains(&tuple)
                }
            };
            holds == l.positive
        }
        Formula::And(a, b) => tarski(m, env, a)? && tarski(m, env, b)?,
        Formula::TensorOr(a, b) => tarski(m, env, a)? || tarski(m, env, b)?,
        Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
            let exists = matches!(phi, Formula::Exists(..));
            let depth = env.len();
            let domain: Vec<Element> = m.domain().to_vec();
            let mut result = !exists;
            for t in all_tuples(&domain, vs.len()) {
                env.truncate(depth);
                env.extend(vs.iter().cloned().zip(t));
                if tarski(m, env, body)? == exists {
                    result = exists;
                    break;
                }
            }
            env.truncate(depth);
            result
        }
        other => return Err(ModelError::NotFirstOrder(other.to_string())),
    })
}

/// Truth of a first-order sentence.
pub fn tarski_truth<S: Structure + ?Sized>(m: &S, phi: &Formula) -> Result<bool, ModelError> {
    tarski_eval(m, &Assignment::new(), phi)
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Splits `(a,b) (c,d)` into tuples of names; `()` is the empty tuple.
fn parse_tuples(text: &str, line: usize) -> Result<Vec<Vec<String>>, ModelError> {
    let err = |message: &str| ModelError::Syntax { line, message: message.into() };
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        if !rest.starts_with('(') {
            return Err(err("expected `(` to open a tuple"));
        }
        let close = rest.find(')').ok_or_else(|| err("unclosed tuple"))?;
        let inner = rest[1..close].trim();
        let items = if inner.is_empty() { Vec::new() } else { inner.split(',').map(|s| s.trim().to_string()).collect() };
        if items.iter().any(String::is_empty) {
            return Err(err("empty tuple component"));
        }
        out.push(items);
        rest = rest[close + 1..].trim_start();
    }
    Ok(out)
}

/// Reads the model text format:
///
/// ```text
/// domain: a b c
/// relation R/2: (a,b) (b,c)
/// predicate P: a b
/// constant c0 = a
/// ```
///
/// `#` starts a comment. The `domain` line must come first. `team` lines
/// are skipped, so a counterexample file serves as both model and team.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let mut model: Option<Model> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        let err = |message: String| ModelError::Syntax { line, message };
        let (head, body) = content.split_once(':').map_or((content, None), |(h, b)| (h.trim(), Some(b.trim())));
        let mut words = head.split_whitespace();
        let keyword = words.next().unwrap_or("");
        if keyword == "team" {
            continue;
        }
        if keyword == "constant" {
            let (name, value) = content["constant".len()..].split_once('=').ok_or_else(|| err("expected `constant NAME = ELEMENT`".into()))?;
            let m = model.as_mut().ok_or_else(|| err("`domain:` must come first".into()))?;
            let name = name.trim();
            if m.constants.contains_key(name) {
                return Err(ModelError::Duplicate(name.into()));
            }
            let e = m.element(value.trim())?;
            m.set_constant(name, e)?;
            continue;
        }
        let body = body.ok_or_else(|| err(format!("expected `:` after `{head}`")))?;
        match keyword {
            "domain" => {
                if model.is_some() {
                    return Err(err("domain declared twice".into()));
                }
                model = Some(Model::with_names(body.split_whitespace().map(String::from).collect())?);
            }
            "relation" | "predicate" => {
                let m = model.as_mut().ok_or_else(|| err("`domain:` must come first".into()))?;
                let spec = words.next().ok_or_else(|| err(format!("missing {keyword} name")))?;
                let (name, arity) = if keyword == "relation" {
                    let (n, a) = spec.split_once('/').ok_or_else(|| err("expected `relation NAME/ARITY:`".into()))?;
                    (n, a.parse::<usize>().map_err(|_| err(format!("bad arity `{a}`")))?)
                } else {
                    (spec, 1)
                };
                if m.relations.contains_key(name) {
                    return Err(ModelError::Duplicate(name.into()));
                }
                let tuples = if keyword == "relation" {
                    parse_tuples(body, line)?
                } else {
                    body.split_whitespace().map(|e| vec![e.to_string()]).collect()
                };
                let mut rel = Relation::empty(arity);
                for t in tuples {
                    if t.len() != arity {
                        return Err(ModelError::Arity { what: format!("tuple of {name}"), expected: arity, found: t.len() });
                    }
                    rel.insert(t.iter().map(|e| m.element(e)).collect::<Result<_, _>>()?);
                }
                m.set_relation(name, rel)?;
            }
            other => return Err(err(format!("unknown declaration `{other}`"))),
        }
    }
    model.ok_or(ModelError::Syntax { line: 0, message: "missing `domain:` line".into() })
}

/// Reads a team line `team x y: (a,b) (b,c)`; `team: ()` is the unit team.
/// Other lines (model declarations) are skipped.
pub fn parse_team(text: &str, model: &Model) -> Result<Team, ModelError> {
    let mut found = None;
    for (idx, raw) in text.lines().enumerate() {
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        let line = idx + 1;
        let err = |message: &str| ModelError::Syntax { line, message: message.into() };
        let (head, body) = content.split_once(':').map_or((content, None), |(h, b)| (h, Some(b)));
        if !head.starts_with("team") {
            // model declarations may share the file
            continue;
        }
        let body = body.ok_or_else(|| err("expected `team VARS: TUPLES`"))?;
        if found.is_some() {
            return Err(err("only one team per input"));
        }
        let mut words = head.split_whitespace();
        if words.next() != Some("team") {
            return Err(err("expected `team`"));
        }
        let vars: Vec<Var> = words.map(Var::new).collect();
        let mut rows = Vec::new();
        for t in parse_tuples(body, line)? {
            if t.len() != vars.len() {
                return Err(ModelError::Arity { what: "team row".into(), expected: vars.len(), found: t.len() });
            }
            rows.push(t.iter().map(|e| model.element(e)).collect::<Result<_, _>>()?);
        }
        found = Some(Team::new(vars, rows)?);
    }
    found.ok_or(ModelError::Syntax { line: 0, message: "missing `team` line".into() })
}
