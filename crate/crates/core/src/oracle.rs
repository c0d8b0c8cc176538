//! Exhaustive checking at small sizes: team and model enumeration,
//! equivalence with counterexamples, flatness audits, identity types and
//! bijection transport, and the search for alternating inclusion chains.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::dependency::{Dependency, DependencyError, DependencyRegistry, RelationSpace};
use crate::eval::{flat_fastpath, EvalError, EvalOptions, Evaluator};
use crate::model::{all_tuples, tarski_eval, Assignment, Element, Model, ModelError, PureDomain, Relation, Structure, Team};
use crate::syntax::{Formula, Signature, SyntaxError, Var};
use crate::transforms::TransformError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what}: {size} exceeds the limit of {limit}")]
    Cap { what: &'static str, size: usize, limit: usize },
    #[error("variable {0} is free but not enumerated")]
    MissingVariable(Var),
    #[error("flatness audit needs a first-order formula")]
    NotFirstOrder,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Dependency(#[from] DependencyError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Largest number of assignments whose subsets we enumerate.
pub const MAX_ASSIGNMENTS: usize = 20;

/// Every team over `vars` with at most `max_size` assignments, in order of
/// the bitmask over lexicographically ordered assignments (so `∅` first).
pub fn enumerate_teams(domain: &[Element], vars: &[Var], max_size: Option<usize>) -> Result<impl Iterator<Item = Team>, OracleError> {
    let mut vars = vars.to_vec();
    vars.sort();
    vars.dedup();
    let rows: Vec<Vec<Element>> = all_tuples(domain, vars.len()).collect();
    if rows.len() > MAX_ASSIGNMENTS {
        return Err(OracleError::Cap { what: "assignments to enumerate teams over", size: rows.len(), limit: MAX_ASSIGNMENTS });
    }
    let max = max_size.unwrap_or(usize::MAX);
    Ok((0..1u64 << rows.len()).filter(move |m| m.count_ones() as usize <= max).map(move |mask| {
        let picked = rows.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r.clone()).collect();
        Team::from_sorted(vars.clone(), picked)
    }))
}

/// Every model of the given size interpreting `sig`. Unary predicates used
/// for relativization range over extensions with at least two elements.
pub fn enumerate_models(sig: &Signature, size: usize, max_arity: usize, max_models: usize) -> Result<Vec<Model>, OracleError> {
    let base = Model::new(size)?;
    let domain = base.domain().to_vec();
    let mut choices: Vec<(String, Vec<Relation>)> = Vec::new();
    let mut total: usize = 1;
    for (name, &arity) in &sig.relations {
        if arity > max_arity {
            return Err(OracleError::Cap { what: "relation arity for model enumeration", size: arity, limit: max_arity });
        }
        let space = RelationSpace::new(&domain, arity, MAX_ASSIGNMENTS)?;
        let small_ok = !sig.predicates.contains(name);
        let rels: Vec<Relation> = (0..space.relation_count() as u32).map(|m| space.relation(m)).filter(|r| small_ok || r.len() >= 2).collect();
        total = total.saturating_mul(rels.len());
        choices.push((name.clone(), rels));
    }
    for p in &sig.predicates {
        if !sig.relations.contains_key(p) {
            let rels: Vec<Relation> = (0..1u32 << size).map(|m| Relation::from_tuples(1, domain.iter().filter(|&&e| m >> e & 1 == 1).map(|&e| vec![e]))).filter(|r| r.len() >= 2).collect();
            total = total.saturating_mul(rels.len());
            choices.push((p.clone(), rels));
        }
    }
    let consts: Vec<&String> = sig.constants.iter().collect();
    total = total.saturating_mul(size.saturating_pow(consts.len() as u32));
    if total > max_models {
        return Err(OracleError::Cap { what: "models to enumerate", size: total, limit: max_models });
    }
    let mut out = Vec::with_capacity(total);
    let mut index = vec![0usize; choices.len()];
    loop {
        let mut m = base.clone();
        for ((name, rels), &i) in choices.iter().zip(&index) {
            m.set_relation(name, rels[i].clone())?;
        }
        for values in all_tuples(&domain, consts.len()) {
            let mut mc = m.clone();
            for (c, e) in consts.iter().zip(values) {
                mc.set_constant(c, e)?;
            }
            out.push(mc);
        }
        let mut j = 0;
        loop {
            if j == index.len() {
                return Ok(out);
            }
            index[j] += 1;
            if index[j] < choices[j].1.len() {
                break;
            }
            index[j] = 0;
            j += 1;
        }
    }
}

/// A model and team on which two formulas (or a formula and its pointwise
/// reading) disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub model: Model,
    pub team: Team,
    pub left: bool,
    pub right: bool,
}

impl Counterexample {
    /// Model and team in the text formats, followed by both values.
    pub fn to_text(&self) -> String {
        format!("{}{}\n# left: {}, right: {}\n", self.model.to_text(), self.team.to_text(&self.model), self.left, self.right)
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Debug)]
pub struct EquivConfig {
    pub sizes: Vec<usize>,
    /// Team variables; defaults to the free variables of both formulas.
    pub vars: Option<Vec<Var>>,
    pub max_team: Option<usize>,
    pub max_arity: usize,
    pub max_models: usize,
    pub eval: EvalOptions,
}

impl Default for EquivConfig {
    fn default() -> EquivConfig {
        EquivConfig { sizes: vec![2, 3], vars: None, max_team: None, max_arity: 2, max_models: 1 << 16, eval: EvalOptions::default() }
    }
}

impl EquivConfig {
    pub fn sizes(sizes: &[usize]) -> EquivConfig {
        EquivConfig { sizes: sizes.to_vec(), ..EquivConfig::default() }
    }
}

fn team_vars(phis: &[&Formula], config: &EquivConfig) -> Result<Vec<Var>, OracleError> {
    let free: Vec<Var> = phis.iter().flat_map(|p| p.free_variables()).collect();
    match &config.vars {
        Some(vs) => {
            if let Some(v) = free.iter().find(|v| !vs.contains(v)) {
                return Err(OracleError::MissingVariable(v.clone()));
            }
            Ok(vs.clone())
        }
        None => Ok(free),
    }
}

/// Compares `phi` and `psi` on every model (of each size, over their joint
/// signature) and every team; returns the first disagreement.
pub fn formulas_equivalent(phi: &Formula, psi: &Formula, registry: &DependencyRegistry, config: &EquivConfig) -> Result<Option<Counterexample>, OracleError> {
    let vars = team_vars(&[phi, psi], config)?;
    let mut sig = phi.signature()?;
    sig.merge(&psi.signature()?)?;
    for &size in &config.sizes {
        for model in enumerate_models(&sig, size, config.max_arity, config.max_models)? {
            let mut left = Evaluator::new(&model, registry, phi, config.eval.clone())?;
            let mut right = Evaluator::new(&model, registry, psi, config.eval.clone())?;
            for team in enumerate_teams(model.domain(), &vars, config.max_team)? {
                let (l, r) = (left.eval(&team)?, right.eval(&team)?);
                if l != r {
                    return Ok(Some(Counterexample { model: model.clone(), team, left: l, right: r }));
                }
            }
        }
    }
    Ok(None)
}

/// Checks a team-level property `check(model, team) -> (left, right)` on
/// every model and team, returning the first disagreement.
pub fn find_disagreement(
    sig: &Signature,
    vars: &[Var],
    config: &EquivConfig,
    mut check: impl FnMut(&Model, &Team) -> Result<(bool, bool), OracleError>,
) -> Result<Option<Counterexample>, OracleError> {
    for &size in &config.sizes {
        for model in enumerate_models(sig, size, config.max_arity, config.max_models)? {
            for team in enumerate_teams(model.domain(), vars, config.max_team)? {
                let (l, r) = check(&model, &team)?;
                if l != r {
                    return Ok(Some(Counterexample { model, team, left: l, right: r }));
                }
            }
        }
    }
    Ok(None)
}

/// Compares team evaluation (without the pointwise shortcut, so the team
/// rules are exercised) with pointwise classical evaluation. `left` of a
/// counterexample is the team value.
pub fn flatness_audit(phi: &Formula, registry: &DependencyRegistry, config: &EquivConfig) -> Result<Option<Counterexample>, OracleError> {
    if !phi.is_first_order() {
        return Err(OracleError::NotFirstOrder);
    }
    let vars = team_vars(&[phi], config)?;
    let sig = phi.signature()?;
    let opts = EvalOptions { use_flatness: false, ..config.eval.clone() };
    for &size in &config.sizes {
        for model in enumerate_models(&sig, size, config.max_arity, config.max_models)? {
            let mut ev = Evaluator::new(&model, registry, phi, opts.clone())?;
            for team in enumerate_teams(model.domain(), &vars, config.max_team)? {
                let (l, r) = (ev.eval(&team)?, flat_fastpath(&model, &team, phi)?);
                if l != r {
                    return Ok(Some(Counterexample { model: model.clone(), team, left: l, right: r }));
                }
            }
        }
    }
    Ok(None)
}

/// The equality pattern of a tuple: `out[i][j]` iff `t[i] = t[j]`.
pub fn identity_type(t: &[Element]) -> Vec<Vec<bool>> {
    t.iter().map(|a| t.iter().map(|b| a == b).collect()).collect()
}

/// Domain sizes up to which [`fixes_identity_type`] searches:
/// `2·|ȳ| + |x̄|`, enough for every equality pattern among the variables
/// to appear with room for a fresh element.
pub fn identity_check_bound(xs: &[Var], ys: &[Var]) -> usize {
    (2 * ys.len() + xs.len()).max(2)
}

/// Whether `theta(x̄, ȳ)` forces, for every pair `y_i, y_j`, either
/// equality or inequality. `theta` must use equality only. Decided by
/// searching all valuations on domains up to `bound` elements.
pub fn fixes_identity_type(theta: &Formula, xs: &[Var], ys: &[Var], bound: usize) -> Result<bool, OracleError> {
    let n = ys.len();
    // seen[i][j]: (some model with y_i = y_j, some model with y_i != y_j)
    let mut seen = vec![vec![(false, false); n]; n];
    let vars: Vec<Var> = xs.iter().chain(ys).cloned().collect();
    for size in 1..=bound {
        let domain: Vec<Element> = (0..size as Element).collect();
        let m = PureDomain(&domain);
        for values in all_tuples(&domain, vars.len()) {
            let s: Assignment = vars.iter().cloned().zip(values.iter().copied()).collect();
            if !tarski_eval(&m, &s, theta)? {
                continue;
            }
            let y = &values[xs.len()..];
            for i in 0..n {
                for j in 0..n {
                    if y[i] == y[j] {
                        seen[i][j].0 = true;
                    } else {
                        seen[i][j].1 = true;
                    }
                }
            }
        }
    }
    Ok(seen.iter().flatten().all(|&(eq, ne)| !(eq && ne)))
}

/// `⋀_{a_i=a_j} y_i = y_j /\ ⋀_{a_i≠a_j} y_i != y_j /\ θ`.
pub fn fix_identity(theta: &Formula, ys: &[Var], a: &[Element]) -> Formula {
    let mut parts = Vec::new();
    for i in 0..ys.len() {
        for j in i + 1..ys.len() {
            parts.push(if a[i] == a[j] { Formula::eq_vars(&ys[i], &ys[j]) } else { Formula::neq_vars(&ys[i], &ys[j]) });
        }
    }
    parts.push(theta.clone());
    Formula::conjunction(parts).unwrap()
}

/// `{m̄ : θ(m̄, ā)}` over a pure domain.
pub fn defined_relation(theta: &Formula, xs: &[Var], ys: &[Var], domain: &[Element], a: &[Element]) -> Result<Relation, OracleError> {
    let m = PureDomain(domain);
    let mut rel = Relation::empty(xs.len());
    let mut s: Assignment = ys.iter().cloned().zip(a.iter().copied()).collect();
    for t in all_tuples(domain, xs.len()) {
        s.extend(xs.iter().cloned().zip(t.iter().copied()));
        if tarski_eval(&m, &s, theta)? {
            rel.insert(t);
        }
    }
    Ok(rel)
}

/// A permutation of `0..n`, as the list of images.
pub type Bijection = Vec<Element>;

pub fn transport_relation(h: &[Element], rel: &Relation) -> Relation {
    rel.map(|e| h[e as usize])
}

/// A bijection mapping `ā` to `b̄` (and the rest of the domain in order),
/// checked to carry `{m̄ : θ(m̄,ā)}` onto `{m̄ : θ(m̄,b̄)}`. `None` when the
/// parameter tuples have different identity types.
pub fn find_bijection(theta: &Formula, xs: &[Var], ys: &[Var], domain_size: usize, a: &[Element], b: &[Element]) -> Result<Option<Bijection>, OracleError> {
    if identity_type(a) != identity_type(b) {
        return Ok(None);
    }
    let mut h: BTreeMap<Element, Element> = a.iter().copied().zip(b.iter().copied()).collect();
    let rest_a = (0..domain_size as Element).filter(|e| !a.contains(e));
    let rest_b: Vec<Element> = (0..domain_size as Element).filter(|e| !b.contains(e)).collect();
    h.extend(rest_a.zip(rest_b));
    let h: Bijection = h.into_values().collect();
    let domain: Vec<Element> = (0..domain_size as Element).collect();
    let r = defined_relation(theta, xs, ys, &domain, a)?;
    let s = defined_relation(theta, xs, ys, &domain, b)?;
    Ok((transport_relation(&h, &r) == s).then_some(h))
}

/// An alternating chain `P0 ⊊ Q0 ⊊ P1 ⊊ Q1 ...` with every `P_i` in the
/// dependency and every `Q_i` outside it. The depth is the number of `Q`s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StairChain {
    pub domain: Vec<Element>,
    pub relations: Vec<Relation>,
}

impl StairChain {
    pub fn depth(&self) -> usize {
        self.relations.len() / 2
    }

    /// Re-checks membership alternation and strict inclusions.
    pub fn verify(&self, d: &Dependency) -> Result<bool, OracleError> {
        for (i, r) in self.relations.iter().enumerate() {
            if d.contains(&self.domain, r)? != (i % 2 == 0) {
                return Ok(false);
            }
        }
        Ok(self.relations.windows(2).all(|w| w[0].is_subset(&w[1]) && w[0] != w[1]))
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("depth: {}", self.depth())];
        for (i, r) in self.relations.iter().enumerate() {
            let tag = if i % 2 == 0 { "P" } else { "Q" };
            out.push(format!("{tag}{}: {r}", i / 2));
        }
        out
    }
}

/// The longest alternating chain on `domain`, truncated to `max_depth`.
///
/// Depth growing with the domain size is evidence for the forbidden
/// infinite configuration, not a decision procedure.
pub fn stair_search(d: &Dependency, domain: &[Element], max_depth: Option<usize>, cap: usize) -> Result<StairChain, OracleError> {
    let space = RelationSpace::new(domain, d.arity(), cap)?;
    let member = space.membership(d)?;
    let n = space.tuple_count();
    let count = space.relation_count();
    const NONE: usize = usize::MAX;
    // from[m]: number of Qs in the longest chain starting at m; next[m]: its successor
    let mut from = vec![0usize; count];
    let mut next = vec![NONE; count];
    // best (from, mask) over non-strict supersets that are members / non-members
    let mut best_in = vec![(0usize, NONE); count];
    let mut best_out = vec![(0usize, NONE); count];
    let better = |a: (usize, usize), b: (usize, usize)| if b.1 != NONE && (a.1 == NONE || b.0 > a.0) { b } else { a };
    for m in (0..count).rev() {
        let (mut strict_in, mut strict_out) = ((0, NONE), (0, NONE));
        for b in (0..n).filter(|b| m >> b & 1 == 0) {
            strict_in = better(strict_in, best_in[m | 1 << b]);
            strict_out = better(strict_out, best_out[m | 1 << b]);
        }
        if member[m] {
            if strict_out.1 != NONE {
                (from[m], next[m]) = strict_out;
            }
            best_in[m] = better((from[m], m), strict_in);
            best_out[m] = strict_out;
        } else {
            from[m] = 1;
            if strict_in.1 != NONE {
                from[m] += strict_in.0;
                next[m] = strict_in.1;
            }
            best_out[m] = better((from[m], m), strict_out);
            best_in[m] = strict_in;
        }
    }
    let start = (0..count).filter(|&m| member[m]).max_by_key(|&m| (from[m], std::cmp::Reverse(m)));
    let mut relations = Vec::new();
    let mut cur = start.unwrap_or(NONE);
    let limit = max_depth.map(|d| 2 * d + 1).unwrap_or(usize::MAX);
    while cur != NONE && relations.len() < limit {
        relations.push(space.relation(cur as u32));
        cur = next[cur];
    }
    Ok(StairChain { domain: space.domain().to_vec(), relations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependency::DEFAULT_RELATION_CAP;
    use crate::syntax::{parse_formula, vars};

    fn f(text: &str) -> Formula {
        parse_formula(text, &DependencyRegistry::new()).unwrap()
    }

    #[test]
    fn team_counts() {
        assert_eq!(enumerate_teams(&[0, 1], &vars(&["x"]), None).unwrap().count(), 4);
        assert_eq!(enumerate_teams(&[0, 1], &vars(&["x"]), Some(1)).unwrap().count(), 3);
        assert_eq!(enumerate_teams(&[0, 1], &vars(&["x", "y"]), None).unwrap().count(), 16);
        assert!(enumerate_teams(&[0, 1, 2], &vars(&["x", "y", "z"]), None).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let reg = DependencyRegistry::new();
        let cfg = EquivConfig::sizes(&[2, 3]);
        let c = f("const(x)");
        assert_eq!(formulas_equivalent(&c, &c, &reg, &cfg).unwrap(), None);
        assert_eq!(formulas_equivalent(&c, &f("exists y (const(y) /\\ x = y)"), &reg, &cfg).unwrap(), None);
        let cex = formulas_equivalent(&c, &f("all(x)"), &reg, &cfg).unwrap().unwrap();
        assert_eq!(cex.model.size(), 2);
        assert!(cex.left && !cex.right);
        // the empty team comes first; the singleton team also separates them
        let single = Team::new(vars(&["x"]), vec![vec![0]]).unwrap();
        let m = Model::new(2).unwrap();
        assert!(crate::eval::team_eval(&m, &reg, &single, &c).unwrap());
        assert!(!crate::eval::team_eval(&m, &reg, &single, &f("all(x)")).unwrap());
    }

    #[test]
    fn flatness_examples() {
        let reg = DependencyRegistry::new();
        let cfg = EquivConfig::sizes(&[2, 3]);
        assert_eq!(flatness_audit(&f("exists y (x != y)"), &reg, &cfg).unwrap(), None);
        assert_eq!(flatness_audit(&f("R(x,y)"), &reg, &cfg).unwrap(), None);
        assert!(flatness_audit(&f("const(x)"), &reg, &cfg).is_err());
    }

    #[test]
    fn identity_types() {
        let (xs, ys) = (vars(&["x"]), vars(&["y1", "y2"]));
        let bound = identity_check_bound(&xs, &ys);
        assert!(fixes_identity_type(&f("y1 = y2 /\\ x = y1"), &xs, &ys, bound).unwrap());
        assert!(!fixes_identity_type(&f("x = y1"), &xs, &ys, bound).unwrap());
        assert_eq!(fix_identity(&f("x = y1"), &ys, &[0, 0]), f("y1 = y2 /\\ x = y1"));
    }

    #[test]
    fn bijections() {
        let (xs, ys) = (vars(&["x"]), vars(&["y"]));
        let theta = f("x = y");
        let h = find_bijection(&theta, &xs, &ys, 2, &[0], &[1]).unwrap().unwrap();
        assert_eq!(h, vec![1, 0]);
        assert_eq!(transport_relation(&h, &Relation::from_tuples(1, [vec![0]])), Relation::from_tuples(1, [vec![1]]));
        assert_eq!(find_bijection(&theta, &xs, &ys, 3, &[2], &[2]).unwrap(), Some(vec![0, 1, 2]));
        let ys2 = vars(&["y1", "y2"]);
        assert_eq!(find_bijection(&f("x = y1"), &xs, &ys2, 2, &[0, 0], &[0, 1]).unwrap(), None);
    }

    #[test]
    fn stairs() {
        let c = Dependency::constancy(1);
        let chain = stair_search(&c, &[0, 1], None, DEFAULT_RELATION_CAP).unwrap();
        assert_eq!(chain.depth(), 1);
        assert!(chain.verify(&c).unwrap());
        let even = Dependency::evencard(1);
        for n in [2usize, 4, 6] {
            let domain: Vec<Element> = (0..n as Element).collect();
            let chain = stair_search(&even, &domain, None, DEFAULT_RELATION_CAP).unwrap();
            assert_eq!(chain.depth(), n / 2);
            assert!(chain.verify(&even).unwrap());
        }
        let all = Dependency::all(1);
        assert_eq!(stair_search(&all, &[0, 1, 2], None, DEFAULT_RELATION_CAP).unwrap().depth(), 0);
        let limited = stair_search(&even, &[0, 1, 2, 3, 4, 5], Some(1), DEFAULT_RELATION_CAP).unwrap();
        assert_eq!(limited.depth(), 1);
    }
}
