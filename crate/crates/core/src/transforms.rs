//! Source-to-source constructions: `~` elimination on literals, pulling
//! `lor` to the top, constancy elimination, the defining formulas for
//! downward closures and relativized totality, and the normal form for
//! relation classes definable by equality-only bounds together with its
//! two team-formula translations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::dependency::{Dependency, DependencyError, DependencyRegistry};
use crate::model::{all_tuples, tarski_eval, tarski_truth, Assignment, Element, ModelError, PureDomain, Relation, Structure};
use crate::syntax::{dual_negate, parse_formula, Atom, DepAtom, Formula, FreshNames, ParseError, SyntaxError, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("`~` applied to a non-atomic formula: {0}")]
    TildeOverCompound(String),
    #[error("`lor` occurs under `~` in {0}")]
    GlobalOrUnderTilde(String),
    #[error("sentence expected, but {0} is free")]
    NotASentence(Var),
    #[error("constancy elimination does not handle {0}")]
    UnsupportedConstancy(String),
    #[error("{what} must be first-order over the empty signature: {formula}")]
    NotEqualityOnly { what: String, formula: String },
    #[error("{what} has free variable {var} outside its declared tuples")]
    StrayVariable { what: String, var: Var },
    #[error("relation has arity {found}, normal form has arity {expected}")]
    Arity { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Dependency(#[from] DependencyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The rewriting steps a transform performed, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: &'static str,
    pub before: Formula,
    pub after: Formula,
}

impl RewriteTrace {
    fn push(&mut self, rule: &'static str, before: Formula, after: Formula) {
        self.steps.push(RewriteStep { rule, before, after });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for RewriteTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{}: {}  ==>  {}", s.rule, s.before, s.after)?;
        }
        Ok(())
    }
}

/// Rewrites `~α` into `dia ¬α` for literals and `~D(x̄)` into the
/// complemented atom `!D(x̄)`. The result contains no `~`.
pub fn eliminate_tilde_on_literals(phi: &Formula) -> Result<Formula, TransformError> {
    eliminate_tilde_traced(phi).map(|(f, _)| f)
}

pub fn eliminate_tilde_traced(phi: &Formula) -> Result<(Formula, RewriteTrace), TransformError> {
    let mut trace = RewriteTrace::default();
    let out = tilde_rec(phi, &mut trace)?;
    Ok((out, trace))
}

fn tilde_rec(phi: &Formula, trace: &mut RewriteTrace) -> Result<Formula, TransformError> {
    Ok(match phi {
        Formula::ContraNeg(inner) => {
            let out = match inner.as_ref() {
                Formula::Lit(l) => Formula::diamond(Formula::Lit(l.negated())),
                Formula::Dep(d) => Formula::Dep(d.clone().complement()),
                other => return Err(TransformError::TildeOverCompound(other.to_string())),
            };
            trace.push(if matches!(**inner, Formula::Lit(_)) { "tilde-literal" } else { "tilde-atom" }, phi.clone(), out.clone());
            out
        }
        Formula::Lit(_) | Formula::Dep(_) => phi.clone(),
        Formula::And(a, b) => Formula::and(tilde_rec(a, trace)?, tilde_rec(b, trace)?),
        Formula::TensorOr(a, b) => Formula::or(tilde_rec(a, trace)?, tilde_rec(b, trace)?),
        Formula::GlobalOr(a, b) => Formula::global_or(tilde_rec(a, trace)?, tilde_rec(b, trace)?),
        Formula::Diamond(a) => Formula::diamond(tilde_rec(a, trace)?),
        Formula::Exists(vs, a) => Formula::exists(vs.clone(), tilde_rec(a, trace)?),
        Formula::Forall(vs, a) => Formula::forall(vs.clone(), tilde_rec(a, trace)?),
    })
}

/// Distributes every connective over `lor`, returning the `lor`-free
/// disjuncts whose global disjunction is equivalent to `phi`.
pub fn pull_out_global_or(phi: &Formula) -> Result<Vec<Formula>, TransformError> {
    fn product(a: Vec<Formula>, b: Vec<Formula>, join: fn(Formula, Formula) -> Formula) -> Vec<Formula> {
        a.iter().flat_map(|x| b.iter().map(move |y| join(x.clone(), y.clone()))).collect()
    }
    Ok(match phi {
        Formula::Lit(_) | Formula::Dep(_) => vec![phi.clone()],
        Formula::ContraNeg(a) => {
            if a.any_node(&mut |n| matches!(n, Formula::GlobalOr(..))) {
                return Err(TransformError::GlobalOrUnderTilde(phi.to_string()));
            }
            vec![phi.clone()]
        }
        Formula::GlobalOr(a, b) => {
            let mut out = pull_out_global_or(a)?;
            out.extend(pull_out_global_or(b)?);
            out
        }
        Formula::And(a, b) => product(pull_out_global_or(a)?, pull_out_global_or(b)?, Formula::and),
        Formula::TensorOr(a, b) => product(pull_out_global_or(a)?, pull_out_global_or(b)?, Formula::or),
        Formula::Diamond(a) => pull_out_global_or(a)?.into_iter().map(Formula::diamond).collect(),
        Formula::Exists(vs, a) => pull_out_global_or(a)?.into_iter().map(|f| Formula::exists(vs.clone(), f)).collect(),
        Formula::Forall(vs, a) => pull_out_global_or(a)?.into_iter().map(|f| Formula::forall(vs.clone(), f)).collect(),
    })
}

/// A sentence with its constancy atoms replaced by equalities against
/// fresh constants, one tuple of constants per occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstElimination {
    /// The rewritten sentence, mentioning the constants.
    pub body: Formula,
    pub constants: Vec<String>,
    /// `exists w̄ . body[w̄/constants]`.
    pub closed: Formula,
    pub trace: RewriteTrace,
}

/// Replaces each `const(v̄)` by `v̄ = d̄` for fresh constants `d̄`. Constancy
/// atoms that are complemented, relativized or under `~` are rejected.
///
/// The original sentence is true in a model iff the body is true for some
/// interpretation of the constants (see [`ConstElimination::truth`]). The
/// existential closure is equivalent as well whenever the rewritten body is
/// downward closed; lax `exists` may otherwise choose several values.
pub fn eliminate_constancy(phi: &Formula) -> Result<ConstElimination, TransformError> {
    if let Some(v) = phi.free_variables().into_iter().next() {
        return Err(TransformError::NotASentence(v));
    }
    // under `~` the atom sits in a negative context, where a fixed constant
    // is not equivalent
    let is_const = |n: &Formula| matches!(n, Formula::Dep(d) if d.name == "const");
    let mut negated = None;
    phi.any_node(&mut |n| match n {
        Formula::ContraNeg(a) if a.any_node(&mut |m| is_const(m)) => {
            negated = Some(n.to_string());
            true
        }
        _ => false,
    });
    if let Some(f) = negated {
        return Err(TransformError::UnsupportedConstancy(f));
    }
    let mut names = FreshNames::avoiding("d", phi);
    let mut constants = Vec::new();
    let mut trace = RewriteTrace::default();
    let mut failure = None;
    let body = phi.clone().map_bottom_up(&mut |f| match &f {
        Formula::Dep(d) if d.name == "const" => {
            if d.complemented || d.relativized.is_some() {
                failure.get_or_insert_with(|| TransformError::UnsupportedConstancy(f.to_string()));
                return f;
            }
            let eqs = d.args.iter().map(|v| {
                let c = names.next_var().name().to_string();
                constants.push(c.clone());
                Formula::eq(Term::Var(v.clone()), Term::Const(c))
            });
            let out = Formula::conjunction(eqs).unwrap_or_else(Formula::top);
            trace.push("const-to-equality", f.clone(), out.clone());
            out
        }
        _ => f,
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let mut vars = FreshNames::avoiding("w", phi);
    let ws = vars.next_tuple(constants.len());
    let by_const: BTreeMap<&str, &Var> = constants.iter().map(String::as_str).zip(ws.iter()).collect();
    let opened = body.clone().map_bottom_up(&mut |f| match f {
        Formula::Lit(mut l) => {
            let swap = |t: &mut Term| {
                if let Term::Const(c) = t {
                    if let Some(w) = by_const.get(c.as_str()) {
                        *t = Term::Var((*w).clone());
                    }
                }
            };
            match &mut l.atom {
                Atom::Eq(a, b) => {
                    swap(a);
                    swap(b);
                }
                Atom::Rel { args, .. } => args.iter_mut().for_each(swap),
                Atom::Top => {}
            }
            Formula::Lit(l)
        }
        other => other,
    });
    let closed = if ws.is_empty() { opened } else { Formula::exists(ws, opened) };
    trace.push("close-constants", body.clone(), closed.clone());
    Ok(ConstElimination { body, constants, closed, trace })
}

impl ConstElimination {
    /// Truth of the original sentence: some interpretation of the fresh
    /// constants makes the body true.
    pub fn truth(&self, model: &crate::model::Model, registry: &DependencyRegistry) -> Result<bool, crate::eval::EvalError> {
        for values in all_tuples(model.domain(), self.constants.len()) {
            let mut m = model.clone();
            for (c, &e) in self.constants.iter().zip(&values) {
                m.set_constant(c, e)?;
            }
            if crate::eval::sentence_truth(&m, registry, &self.body)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// The defining formula for the downward closure of a dependency, split
/// into the guarded team formula `bot lor χ(x̄)` and the side sentence
/// `exists w̄ D(w̄)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChiForm {
    pub guarded: Formula,
    pub chi: Formula,
    pub side: Formula,
}

/// `χ(x̄) = forall p q exists w̄ ((p != q \/ x̄ = w̄) /\ D(w̄))`.
///
/// On nonempty teams `χ` holds iff some D-member contains `X(x̄)`. The
/// `bot lor` guard makes the empty team satisfy the formula, which is
/// correct whenever `D` has a member on the domain; `side` expresses that
/// for nonempty members.
pub fn chi_downclosure(atom: &DepAtom, xs: &[Var]) -> Result<ChiForm, TransformError> {
    if atom.args.len() != xs.len() {
        return Err(TransformError::Invalid(format!("atom {atom} has {} arguments, expected {}", atom.args.len(), xs.len())));
    }
    let mut fresh = FreshNames::new("w");
    for v in xs {
        fresh.reserve(v.name());
    }
    let ws = fresh.next_tuple(xs.len());
    let (p, q) = (fresh.next_var(), fresh.next_var());
    let mut d = atom.clone();
    d.args = ws.clone();
    let split = Formula::or(Formula::neq_vars(&p, &q), Formula::tuple_eq(xs, &ws));
    let chi = Formula::forall(vec![p, q], Formula::exists(ws.clone(), Formula::and(split, Formula::Dep(d.clone()))));
    let guarded = Formula::global_or(Formula::bot(), chi.clone());
    let side = Formula::exists(ws, Formula::Dep(d));
    Ok(ChiForm { guarded, chi, side })
}

/// `(P x1 /\ ... /\ P xk) /\ exists v̄ ((!P v1 \/ ... \/ !P vk \/ v̄ = x̄) /\ all(v̄))`,
/// equivalent to `all(x̄)@P`.
pub fn relativize_all_formula(xs: &[Var], predicate: &str) -> Result<Formula, TransformError> {
    if xs.is_empty() {
        return Err(TransformError::Invalid("relativized totality needs at least one variable".into()));
    }
    let mut fresh = FreshNames::new("v");
    for v in xs {
        fresh.reserve(v.name());
    }
    let vs = fresh.next_tuple(xs.len());
    let pred = |v: &Var, positive: bool| Formula::lit(positive, Atom::Rel { name: predicate.into(), args: vec![Term::Var(v.clone())] });
    let inside = Formula::conjunction(xs.iter().map(|x| pred(x, true))).unwrap();
    let outside = Formula::disjunction(vs.iter().map(|v| pred(v, false))).unwrap();
    let body = Formula::and(Formula::or(outside, Formula::tuple_eq(&vs, xs)), Formula::Dep(DepAtom::simple("all", vs.clone())));
    Ok(Formula::and(inside, Formula::exists(vs, body)))
}

/// A bound `∃ȳ ∀x̄ (R x̄ → θ(x̄, ȳ))` (or its negation for ξ), with the
/// witnesses `ȳ` listed explicitly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub witnesses: Vec<Var>,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    /// Sentence about the domain alone.
    pub psi: Formula,
    pub thetas: Vec<Bound>,
    pub xis: Vec<Bound>,
}

/// A class of k-ary relations given as a disjunction of blocks; each block
/// holds of `R` when `psi` is true, every θ-bound `∃ȳ∀x̄(Rx̄ → θ)` holds and
/// every ξ-bound `∃z̄∀x̄(Rx̄ → ξ)` fails. All component formulas use
/// equality only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub vars: Vec<Var>,
    pub blocks: Vec<Block>,
}

fn equality_only(what: &str, phi: &Formula) -> Result<(), TransformError> {
    let bad = || TransformError::NotEqualityOnly { what: what.into(), formula: phi.to_string() };
    if !phi.is_first_order() {
        return Err(bad());
    }
    let sig = phi.signature()?;
    if !sig.is_empty() {
        return Err(bad());
    }
    Ok(())
}

impl NormalForm {
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Checks the shape invariants.
    pub fn validate(&self) -> Result<(), TransformError> {
        let distinct: BTreeSet<&Var> = self.vars.iter().collect();
        if distinct.len() != self.vars.len() {
            return Err(TransformError::Invalid("normal form variables must be distinct".into()));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            equality_only(&format!("psi of block {k}"), &b.psi)?;
            if let Some(v) = b.psi.free_variables().into_iter().next() {
                return Err(TransformError::StrayVariable { what: format!("psi of block {k}"), var: v });
            }
            for (kind, bounds) in [("theta", &b.thetas), ("xi", &b.xis)] {
                for (i, bound) in bounds.iter().enumerate() {
                    let what = format!("{kind} {i} of block {k}");
                    equality_only(&what, &bound.formula)?;
                    if let Some(w) = bound.witnesses.iter().find(|w| self.vars.contains(w)) {
                        return Err(TransformError::Invalid(format!("{what}: witness {w} clashes with a relation variable")));
                    }
                    for v in bound.formula.free_variables() {
                        if !self.vars.contains(&v) && !bound.witnesses.contains(&v) {
                            return Err(TransformError::StrayVariable { what, var: v });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds a bound whose witnesses are the free variables of `phi`
    /// outside the relation variables.
    pub fn bound(&self, phi: Formula) -> Bound {
        let witnesses = phi.free_variables().into_iter().filter(|v| !self.vars.contains(v)).collect();
        Bound { witnesses, formula: phi }
    }

    /// Reads the text format:
    ///
    /// ```text
    /// nf arity 1 vars x
    /// block: psi = top; theta = x = y
    /// block: psi = exists a b (a != b); xi = x != z
    /// ```
    ///
    /// `vars` defaults to `x1 .. xK`. Witness tuples are the free variables
    /// of each component outside `vars`. A block may continue on following
    /// lines; items are separated by `;` or line breaks.
    pub fn parse(text: &str) -> Result<NormalForm, TransformError> {
        let registry = DependencyRegistry::new();
        let mut header: Option<(usize, Vec<Var>)> = None;
        let mut blocks: Vec<Vec<(usize, String)>> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let fail = |message: String| TransformError::Format { line: line_no, message };
            if header.is_none() {
                let words: Vec<&str> = line.split_whitespace().collect();
                if words.len() < 3 || words[0] != "nf" || words[1] != "arity" {
                    return Err(fail("expected `nf arity K [vars x1 .. xK]`".into()));
                }
                let k: usize = words[2].parse().map_err(|_| fail(format!("bad arity `{}`", words[2])))?;
                let vars = match words.get(3) {
                    None => (1..=k).map(|i| Var::new(format!("x{i}"))).collect(),
                    Some(&"vars") => words[4..].iter().map(Var::new).collect::<Vec<_>>(),
                    Some(w) => return Err(fail(format!("unexpected `{w}`"))),
                };
                if vars.len() != k {
                    return Err(fail(format!("arity {k} but {} variables", vars.len())));
                }
                header = Some((k, vars));
                continue;
            }
            let rest = match line.strip_prefix("block:") {
                Some(rest) => {
                    blocks.push(Vec::new());
                    rest
                }
                None if blocks.is_empty() => return Err(fail("expected `block:`".into())),
                None => line,
            };
            let items = blocks.last_mut().unwrap();
            items.extend(rest.split(';').map(str::trim).filter(|s| !s.is_empty()).map(|s| (line_no, s.to_string())));
        }
        let (_, vars) = header.ok_or_else(|| TransformError::Format { line: 1, message: "missing `nf arity` header".into() })?;
        let mut nf = NormalForm { vars, blocks: Vec::new() };
        for items in blocks {
            let mut psi = None;
            let (mut thetas, mut xis) = (Vec::new(), Vec::new());
            for (line, item) in items {
                let fail = |message: String| TransformError::Format { line, message };
                let (key, body) = item.split_once('=').ok_or_else(|| fail(format!("expected `key = formula`, found `{item}`")))?;
                let phi = parse_formula(body.trim(), &registry).map_err(|e: ParseError| fail(e.to_string()))?;
                match key.trim() {
                    "psi" if psi.is_none() => psi = Some(phi),
                    "psi" => return Err(fail("block has two psi entries".into())),
                    "theta" => thetas.push(nf.bound(phi)),
                    "xi" => xis.push(nf.bound(phi)),
                    other => return Err(fail(format!("unknown key `{other}`"))),
                }
            }
            nf.blocks.push(Block { psi: psi.unwrap_or_else(Formula::top), thetas, xis });
        }
        nf.validate()?;
        Ok(nf)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("nf arity {} vars", self.arity());
        for v in &self.vars {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
        for b in &self.blocks {
            let mut items = vec![format!("psi = {}", b.psi)];
            items.extend(b.thetas.iter().map(|t| format!("theta = {}", t.formula)));
            items.extend(b.xis.iter().map(|t| format!("xi = {}", t.formula)));
            out.push_str(&format!("block: {}\n", items.join("; ")));
        }
        out
    }
}

/// `∃ȳ ∀x̄ (R x̄ → φ)` over a pure domain.
fn bound_holds(domain: &[Element], vars: &[Var], rel: &Relation, bound: &Bound) -> Result<bool, TransformError> {
    let m = PureDomain(domain);
    for ys in all_tuples(domain, bound.witnesses.len()) {
        let mut s: Assignment = bound.witnesses.iter().cloned().zip(ys).collect();
        let mut all = true;
        for t in rel {
            s.extend(vars.iter().cloned().zip(t.iter().copied()));
            if !tarski_eval(&m, &s, &bound.formula)? {
                all = false;
                break;
            }
        }
        if all {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether `R` belongs to the class described by `nf` on `domain`.
pub fn nf_eval(domain: &[Element], rel: &Relation, nf: &NormalForm) -> Result<bool, TransformError> {
    if rel.arity() != nf.arity() {
        return Err(TransformError::Arity { expected: nf.arity(), found: rel.arity() });
    }
    for b in &nf.blocks {
        if !tarski_truth(&PureDomain(domain), &b.psi)? {
            continue;
        }
        let mut ok = true;
        for t in &b.thetas {
            if !bound_holds(domain, &nf.vars, rel, t)? {
                ok = false;
                break;
            }
        }
        if ok {
            for x in &b.xis {
                if bound_holds(domain, &nf.vars, rel, x)? {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The normal form as a dependency, usable as an atom.
pub fn nf_dependency(name: &str, nf: &NormalForm) -> Dependency {
    let arity = nf.arity();
    let nf = nf.clone();
    let test = move |domain: &[Element], rel: &Relation| nf_eval(domain, rel, &nf).unwrap_or(false);
    Dependency::native(name, arity, std::sync::Arc::new(test))
}

/// Renames a bound's relation variables to `target` and its witnesses to
/// fresh names, returning the witnesses and the formula.
fn rename_bound(nf: &NormalForm, bound: &Bound, target: &[Var], fresh: &mut FreshNames) -> (Vec<Var>, Formula) {
    let ws = fresh.next_tuple(bound.witnesses.len());
    let mut map: BTreeMap<Var, Var> = nf.vars.iter().cloned().zip(target.iter().cloned()).collect();
    map.extend(bound.witnesses.iter().cloned().zip(ws.iter().cloned()));
    (ws, bound.formula.substitute(&map, fresh))
}

fn zeroary_atom(registry: &mut DependencyRegistry, prefix: &str, psi: Formula, cache: &mut BTreeMap<Formula, String>) -> Result<Formula, TransformError> {
    let name = match cache.get(&psi) {
        Some(n) => n.clone(),
        None => {
            let n = registry.fresh_name(prefix);
            registry.register(Dependency::zeroary(&n, psi.clone())?)?;
            cache.insert(psi, n.clone());
            n
        }
    };
    Ok(Formula::Dep(DepAtom::simple(&name, Vec::new())))
}

fn translation_names(nf: &NormalForm, target: &[Var]) -> Result<FreshNames, TransformError> {
    if target.len() != nf.arity() {
        return Err(TransformError::Arity { expected: nf.arity(), found: target.len() });
    }
    nf.validate()?;
    let mut fresh = FreshNames::new("u");
    for v in target.iter().chain(&nf.vars) {
        fresh.reserve(v.name());
    }
    for b in &nf.blocks {
        for bound in b.thetas.iter().chain(&b.xis) {
            fresh.reserve_formula(&bound.formula);
        }
    }
    Ok(fresh)
}

/// `exists ȳ (Q(ȳ) /\ φ)`; an empty `ȳ` leaves `φ` alone.
fn quantified(atom: &str, ws: Vec<Var>, phi: Formula) -> Formula {
    if ws.is_empty() {
        return phi;
    }
    Formula::exists(ws.clone(), Formula::and(Formula::Dep(DepAtom::simple(atom, ws)), phi))
}

/// `top \/ exists ȳ (all(ȳ) /\ φ)`: some row satisfies `φ` for every
/// witness choice. An empty `ȳ` gets one dummy witness so that `all`
/// still demands a nonempty part.
fn covering(ws: Vec<Var>, phi: Formula, fresh: &mut FreshNames) -> Formula {
    let ws = if ws.is_empty() { vec![fresh.next_var()] } else { ws };
    Formula::or(Formula::top(), Formula::exists(ws.clone(), Formula::and(Formula::Dep(DepAtom::simple("all", ws)), phi)))
}

/// The team formula over `target` equivalent to the normal form:
/// `lor_k ([ψ_k] /\ ⋀_i exists ȳ(const(ȳ) /\ θ_i) /\ ⋀_j (top \/ exists z̄(all(z̄) /\ ¬ξ_j)))`.
///
/// Domain sentences become zeroary dependencies registered in `registry`.
pub fn nf_to_team_formula(nf: &NormalForm, target: &[Var], registry: &mut DependencyRegistry) -> Result<Formula, TransformError> {
    let mut fresh = translation_names(nf, target)?;
    let mut cache = BTreeMap::new();
    let mut blocks = Vec::new();
    for b in &nf.blocks {
        let mut parts = vec![zeroary_atom(registry, "psi", b.psi.clone(), &mut cache)?];
        for t in &b.thetas {
            let (ws, theta) = rename_bound(nf, t, target, &mut fresh);
            parts.push(quantified("const", ws, theta));
        }
        for x in &b.xis {
            let (ws, xi) = rename_bound(nf, x, target, &mut fresh);
            parts.push(covering(ws, dual_negate(&xi)?, &mut fresh));
        }
        blocks.push(Formula::conjunction(parts).unwrap());
    }
    match Formula::global_disjunction(blocks) {
        Some(f) => Ok(f),
        // `bot` holds on the empty team; the zeroary false atom holds nowhere
        None => zeroary_atom(registry, "never", Formula::bot(), &mut cache),
    }
}

/// The team formula equivalent to the complement of the normal form:
/// `⋀_k ([¬ψ_k] lor lor_i (top \/ exists ȳ(all(ȳ) /\ ¬θ_i)) lor lor_j exists z̄(const(z̄) /\ ξ_j))`.
pub fn nf_to_team_formula_complement(nf: &NormalForm, target: &[Var], registry: &mut DependencyRegistry) -> Result<Formula, TransformError> {
    let mut fresh = translation_names(nf, target)?;
    let mut cache = BTreeMap::new();
    let mut blocks = Vec::new();
    for b in &nf.blocks {
        let mut parts = vec![zeroary_atom(registry, "npsi", dual_negate(&b.psi)?, &mut cache)?];
        for t in &b.thetas {
            let (ws, theta) = rename_bound(nf, t, target, &mut fresh);
            parts.push(covering(ws, dual_negate(&theta)?, &mut fresh));
        }
        for x in &b.xis {
            let (ws, xi) = rename_bound(nf, x, target, &mut fresh);
            parts.push(quantified("const", ws, xi));
        }
        blocks.push(Formula::global_disjunction(parts).unwrap());
    }
    Ok(Formula::conjunction(blocks).unwrap_or_else(Formula::top))
}
