//! Lax team semantics over finite models.
//!
//! A formula is compiled once per model into an arena of nodes. Each node
//! records its free variables and syntactic closure facts:
//!
//! * `flat`: first-order, so satisfaction is pointwise;
//! * `dc`: downward closed (literals, downward closed atoms, ...);
//! * `uc`: upward closed (`top`, upward closed atoms, `dia`, ...).
//!
//! Teams handed to a node are always restricted to the node's free
//! variables, which keeps memo keys small and collapses duplicate rows.
//! The search strategies for `\/`, `exists` and `dia` exploit the closure
//! facts; [`EvalOptions::reference`] switches them all off and applies the
//! rules literally.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::dependency::{relativized_domain, Dependency, DependencyError, DependencyRegistry};
use crate::model::{all_tuples, tarski_eval, Element, Model, ModelError, Relation, Structure, Team};
use crate::syntax::{Atom, DepAtom, Formula, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("evaluation budget of {0} steps exhausted")]
    Budget(u64),
    #[error("free variable {0} is not in the team's domain")]
    FreeVariable(Var),
    #[error("sentence expected, but {0} is free")]
    NotASentence(Var),
    #[error("{what} over {size} candidates exceeds the search limit of {limit}")]
    SearchTooLarge { what: &'static str, size: usize, limit: usize },
    #[error("model has {size} elements, more than the limit of {limit}")]
    DomainTooLarge { size: usize, limit: usize },
    #[error("team has {size} assignments, more than the limit of {limit}")]
    TeamTooLarge { size: usize, limit: usize },
    #[error("flat evaluation needs a first-order formula")]
    NotFirstOrder,
    #[error(transparent)]
    Dependency(#[from] DependencyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Deliberately wrong rules, used to check that the test oracles notice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// `\/` only accepts splits into two disjoint nonempty parts.
    DisjointSplit,
    /// `exists` only tries constant choice functions.
    ConstantChoice,
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Cache results per (subformula, team).
    pub memo: bool,
    /// Evaluate first-order subformulas pointwise.
    pub use_flatness: bool,
    /// Apply every rule literally: no closure-based shortcuts, no memo.
    pub reference: bool,
    pub mutation: Option<Mutation>,
    /// Maximum number of evaluation steps per call.
    pub budget: Option<u64>,
    /// Largest team accepted at the top level.
    pub max_team: usize,
    pub max_domain: usize,
    /// Largest exponent for exhaustive subset or labeling searches.
    pub max_search: usize,
}

impl Default for EvalOptions {
    fn default() -> EvalOptions {
        EvalOptions {
            memo: true,
            use_flatness: true,
            reference: false,
            mutation: None,
            budget: None,
            max_team: 4096,
            max_domain: 16,
            max_search: 22,
        }
    }
}

impl EvalOptions {
    pub fn reference() -> EvalOptions {
        EvalOptions { memo: false, use_flatness: false, reference: true, ..EvalOptions::default() }
    }

    pub fn without_flatness() -> EvalOptions {
        EvalOptions { use_flatness: false, ..EvalOptions::default() }
    }
}

/// Rows of a team over a fixed variable layout, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Rows {
    width: usize,
    n: usize,
    data: Vec<Element>,
}

impl Rows {
    fn empty(width: usize) -> Rows {
        Rows { width, n: 0, data: Vec::new() }
    }

    fn from_rows(width: usize, mut rows: Vec<Vec<Element>>) -> Rows {
        rows.sort_unstable();
        rows.dedup();
        Rows { width, n: rows.len(), data: rows.concat() }
    }

    fn row(&self, i: usize) -> &[Element] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    fn rows(&self) -> impl Iterator<Item = &[Element]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    fn project(&self, cols: &[usize]) -> Rows {
        if cols.len() == self.width && cols.iter().enumerate().all(|(i, &c)| i == c) {
            return self.clone();
        }
        Rows::from_rows(cols.len(), self.rows().map(|r| cols.iter().map(|&c| r[c]).collect()).collect())
    }

    fn select(&self, mask: u64) -> Rows {
        let mut data = Vec::new();
        let mut n = 0;
        for i in 0..self.n {
            if mask >> i & 1 == 1 {
                data.extend_from_slice(self.row(i));
                n += 1;
            }
        }
        Rows { width: self.width, n, data }
    }

    fn with_row(&self, row: &[Element]) -> Rows {
        let mut rows: Vec<Vec<Element>> = self.rows().map(<[Element]>::to_vec).collect();
        rows.push(row.to_vec());
        Rows::from_rows(self.width, rows)
    }
}

#[derive(Clone, Copy, Debug)]
enum TermRef {
    Slot(usize),
    Elem(Element),
}

/// A first-order formula compiled against variable slots.
#[derive(Clone, Debug)]
enum Fo {
    Const(bool),
    Eq(bool, TermRef, TermRef),
    Rel(bool, usize, Vec<TermRef>),
    And(Box<Fo>, Box<Fo>),
    Or(Box<Fo>, Box<Fo>),
    Quant { exists: bool, slots: Vec<usize>, body: Box<Fo> },
}

/// A relation as a membership bitmap indexed by mixed-radix tuple codes.
struct RelTable {
    n: usize,
    bits: Vec<bool>,
}

impl RelTable {
    fn new(domain_size: usize, rel: &Relation) -> RelTable {
        let mut bits = vec![false; domain_size.pow(rel.arity() as u32)];
        for t in rel {
            bits[t.iter().fold(0, |acc, &e| acc * domain_size + e as usize)] = true;
        }
        RelTable { n: domain_size, bits }
    }
}

#[derive(Clone, Copy, Debug)]
enum Src {
    Parent(usize),
    Bound(usize),
}

/// Team layout bookkeeping for quantifier nodes: the extended layout is the
/// node's free variables plus the bound ones, sorted.
#[derive(Clone, Debug)]
struct Quant {
    vs: Vec<Var>,
    body: usize,
    ext_src: Vec<Src>,
    /// Columns of the extended layout forming the body's layout.
    body_cols: Vec<usize>,
    /// Top-level conjuncts of the body with their columns in the extended layout.
    conjuncts: Vec<(usize, Vec<usize>)>,
    /// The body has a conjunct `const(w̄)` with every bound variable in `w̄`.
    forces_constant: bool,
}

#[derive(Clone, Debug)]
enum Op {
    Lit,
    Dep { atom: DepAtom, dep: Arc<Dependency>, cols: Vec<usize> },
    And(usize, Vec<usize>, usize, Vec<usize>),
    Or(usize, Vec<usize>, usize, Vec<usize>),
    GlobalOr(usize, Vec<usize>, usize, Vec<usize>),
    Diamond(usize),
    Neg(usize),
    Exists(Quant),
    Forall(Quant),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    free: Vec<Var>,
    /// Pointwise program, present for first-order nodes.
    fo: Option<Fo>,
    flat: bool,
    dc: bool,
    uc: bool,
}

/// A formula compiled for one model; reusable across teams.
pub struct Evaluator<'m> {
    model: &'m Model,
    opts: EvalOptions,
    nodes: Vec<Node>,
    root: usize,
    tables: Vec<RelTable>,
    table_index: HashMap<String, usize>,
    slots: usize,
    memo: HashMap<(usize, Rows), bool>,
    steps: u64,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model, registry: &DependencyRegistry, phi: &Formula, opts: EvalOptions) -> Result<Evaluator<'m>, EvalError> {
        if model.size() > opts.max_domain {
            return Err(EvalError::DomainTooLarge { size: model.size(), limit: opts.max_domain });
        }
        let mut ev = Evaluator {
            model,
            opts,
            nodes: Vec::new(),
            root: 0,
            tables: Vec::new(),
            table_index: HashMap::new(),
            slots: 0,
            memo: HashMap::new(),
            steps: 0,
        };
        ev.root = ev.compile(phi, registry)?;
        Ok(ev)
    }

    /// Free variables of the compiled formula.
    pub fn free_variables(&self) -> &[Var] {
        &self.nodes[self.root].free
    }

    /// Steps used by the last call to [`Evaluator::eval`].
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn clear_memo(&mut self) {
        self.memo.clear();
    }

    /// Whether the model satisfies the formula on `team`.
    pub fn eval(&mut self, team: &Team) -> Result<bool, EvalError> {
        if team.len() > self.opts.max_team {
            return Err(EvalError::TeamTooLarge { size: team.len(), limit: self.opts.max_team });
        }
        let free = self.nodes[self.root].free.clone();
        let cols = free.iter().map(|v| team.column(v).ok_or_else(|| EvalError::FreeVariable(v.clone()))).collect::<Result<Vec<_>, _>>()?;
        let rows = Rows::from_rows(cols.len(), team.rows().iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect());
        self.steps = 0;
        self.sat(self.root, &rows)
    }

    /// Truth at the team containing only the empty assignment.
    pub fn sentence_truth(&mut self) -> Result<bool, EvalError> {
        if let Some(v) = self.nodes[self.root].free.first() {
            return Err(EvalError::NotASentence(v.clone()));
        }
        self.eval(&Team::unit())
    }

    fn compile(&mut self, phi: &Formula, registry: &DependencyRegistry) -> Result<usize, EvalError> {
        let free: Vec<Var> = phi.free_variables().into_iter().collect();
        let first_order = phi.is_first_order();
        let fo = if first_order { Some(self.compile_fo(phi, &free)?) } else { None };
        let cols_of = |child: &Node| -> Vec<usize> { child.free.iter().map(|v| free.binary_search(v).unwrap()).collect() };
        let (op, dc, uc) = match phi {
            Formula::Lit(l) => {
                let top = matches!(l.atom, Atom::Top) && l.positive;
                (Op::Lit, true, top)
            }
            Formula::Dep(atom) => {
                let dep = registry.resolve_atom(atom)?;
                let cols = atom.args.iter().map(|v| free.binary_search(v).unwrap()).collect();
                let hints = if atom.relativized.is_some() && dep.arity() > 0 {
                    Default::default()
                } else if atom.complemented {
                    crate::dependency::ClosureHints { downward: dep.hints().upward, upward: dep.hints().downward }
                } else {
                    dep.hints()
                };
                (Op::Dep { atom: atom.clone(), dep, cols }, hints.downward, hints.upward)
            }
            Formula::And(a, b) | Formula::TensorOr(a, b) | Formula::GlobalOr(a, b) => {
                let ia = self.compile(a, registry)?;
                let ib = self.compile(b, registry)?;
                let (na, nb) = (&self.nodes[ia], &self.nodes[ib]);
                let (ca, cb) = (cols_of(na), cols_of(nb));
                match phi {
                    Formula::And(..) => (Op::And(ia, ca, ib, cb), na.dc && nb.dc, na.uc && nb.uc),
                    // one upward closed side can absorb any extra rows
                    Formula::TensorOr(..) => (Op::Or(ia, ca, ib, cb), na.dc && nb.dc, na.uc || nb.uc),
                    _ => (Op::GlobalOr(ia, ca, ib, cb), na.dc && nb.dc, na.uc && nb.uc),
                }
            }
            Formula::Diamond(a) => {
                let ia = self.compile(a, registry)?;
                (Op::Diamond(ia), false, true)
            }
            Formula::ContraNeg(a) => {
                let ia = self.compile(a, registry)?;
                let n = &self.nodes[ia];
                (Op::Neg(ia), n.uc, n.dc)
            }
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                let ib = self.compile(body, registry)?;
                let mut ext: Vec<Var> = free.iter().cloned().chain(vs.iter().cloned()).collect();
                ext.sort();
                ext.dedup();
                let ext_src = ext
                    .iter()
                    .map(|v| match vs.iter().position(|w| w == v) {
                        Some(j) => Src::Bound(j),
                        None => Src::Parent(free.binary_search(v).unwrap()),
                    })
                    .collect();
                let in_ext = |n: &Node| -> Vec<usize> { n.free.iter().map(|v| ext.binary_search(v).unwrap()).collect() };
                let body_cols = in_ext(&self.nodes[ib]);
                let mut leaves = Vec::new();
                self.conjunct_leaves(ib, &mut leaves);
                let conjuncts = leaves.iter().map(|&i| (i, in_ext(&self.nodes[i]))).collect();
                let forces_constant = leaves.iter().any(|&i| match &self.nodes[i].op {
                    Op::Dep { atom, .. } => {
                        atom.name == "const" && !atom.complemented && atom.relativized.is_none() && vs.iter().all(|v| atom.args.contains(v))
                    }
                    _ => false,
                });
                let q = Quant { vs: vs.clone(), body: ib, ext_src, body_cols, conjuncts, forces_constant };
                let n = &self.nodes[ib];
                let (dc, uc) = (n.dc, n.uc);
                if matches!(phi, Formula::Exists(..)) {
                    (Op::Exists(q), dc, uc)
                } else {
                    (Op::Forall(q), dc, uc)
                }
            }
        };
        self.nodes.push(Node { op, free, fo, flat: first_order, dc: dc || first_order, uc });
        Ok(self.nodes.len() - 1)
    }

    fn conjunct_leaves(&self, i: usize, out: &mut Vec<usize>) {
        match &self.nodes[i].op {
            Op::And(a, _, b, _) => {
                self.conjunct_leaves(*a, out);
                self.conjunct_leaves(*b, out);
            }
            _ => out.push(i),
        }
    }

    fn table(&mut self, name: &str, arity: usize) -> Result<usize, EvalError> {
        if let Some(&i) = self.table_index.get(name) {
            return Ok(i);
        }
        let rel = self.model.relation(name).ok_or_else(|| ModelError::UnknownRelation(name.into()))?;
        if rel.arity() != arity {
            return Err(ModelError::Arity { what: format!("relation {name}"), expected: rel.arity(), found: arity }.into());
        }
        self.tables.push(RelTable::new(self.model.size(), rel));
        self.table_index.insert(name.to_string(), self.tables.len() - 1);
        Ok(self.tables.len() - 1)
    }

    fn compile_fo(&mut self, phi: &Formula, free: &[Var]) -> Result<Fo, EvalError> {
        let mut scope: Vec<(Var, usize)> = free.iter().cloned().zip(0..).collect();
        let fo = self.compile_fo_in(phi, &mut scope)?;
        Ok(fo)
    }

    fn compile_fo_in(&mut self, phi: &Formula, scope: &mut Vec<(Var, usize)>) -> Result<Fo, EvalError> {
        let term = |t: &Term, scope: &Vec<(Var, usize)>| -> Result<TermRef, EvalError> {
            match t {
                Term::Var(v) => scope.iter().rev().find(|(w, _)| w == v).map(|(_, s)| TermRef::Slot(*s)).ok_or_else(|| EvalError::FreeVariable(v.clone())),
                Term::Const(c) => self.model.constant(c).map(TermRef::Elem).ok_or_else(|| ModelError::UnknownConstant(c.clone()).into()),
            }
        };
        Ok(match phi {
            Formula::Lit(l) => match &l.atom {
                Atom::Top => Fo::Const(l.positive),
                Atom::Eq(a, b) => Fo::Eq(l.positive, term(a, scope)?, term(b, scope)?),
                Atom::Rel { name, args } => {
                    let args = args.iter().map(|a| term(a, scope)).collect::<Result<Vec<_>, _>>()?;
                    Fo::Rel(l.positive, self.table(name, args.len())?, args)
                }
            },
            Formula::And(a, b) => Fo::And(Box::new(self.compile_fo_in(a, scope)?), Box::new(self.compile_fo_in(b, scope)?)),
            Formula::TensorOr(a, b) => Fo::Or(Box::new(self.compile_fo_in(a, scope)?), Box::new(self.compile_fo_in(b, scope)?)),
            Formula::Exists(vs, body) | Formula::Forall(vs, body) => {
                let depth = scope.len();
                let base = scope.iter().map(|(_, s)| s + 1).max().unwrap_or(0);
                let slots: Vec<usize> = (base..base + vs.len()).collect();
                scope.extend(vs.iter().cloned().zip(slots.iter().copied()));
                self.slots = self.slots.max(base + vs.len());
                let body = self.compile_fo_in(body, scope)?;
                scope.truncate(depth);
                Fo::Quant { exists: matches!(phi, Formula::Exists(..)), slots, body: Box::new(body) }
            }
            _ => return Err(EvalError::NotFirstOrder),
        })
    }

    fn fo_eval(&self, fo: &Fo, env: &mut [Element]) -> bool {
        match fo {
            Fo::Const(b) => *b,
            Fo::Eq(pos, a, b) => {
                let v = |t: &TermRef, env: &[Element]| match t {
                    TermRef::Slot(s) => env[*s],
                    TermRef::Elem(e) => *e,
                };
                (v(a, env) == v(b, env)) == *pos
            }
            Fo::Rel(pos, table, args) => {
                let t = &self.tables[*table];
                let code = args.iter().fold(0, |acc, a| {
                    acc * t.n
                        + match a {
                            TermRef::Slot(s) => env[*s] as usize,
                            TermRef::Elem(e) => *e as usize,
                        }
                });
                t.bits[code] == *pos
            }
            Fo::And(a, b) => self.fo_eval(a, env) && self.fo_eval(b, env),
            Fo::Or(a, b) => self.fo_eval(a, env) || self.fo_eval(b, env),
            Fo::Quant { exists, slots, body } => {
                let n = self.model.size();
                let k = slots.len();
                let total = n.pow(k as u32);
                for code in 0..total {
                    let mut c = code;
                    for &s in slots.iter().rev() {
                        env[s] = (c % n) as Element;
                        c /= n;
                    }
                    if self.fo_eval(body, env) == *exists {
                        return *exists;
                    }
                }
                !*exists
            }
        }
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        match self.opts.budget {
            Some(b) if self.steps > b => Err(EvalError::Budget(b)),
            _ => Ok(()),
        }
    }

    /// Pointwise truth of a first-order node on one row of its layout.
    fn holds_at(&mut self, node: usize, row: &[Element]) -> Result<bool, EvalError> {
        self.tick()?;
        let fo = self.nodes[node].fo.as_ref().expect("pointwise evaluation of a first-order node");
        let mut env = vec![0; self.slots.max(row.len()) + 1];
        env[..row.len()].copy_from_slice(row);
        Ok(self.fo_eval(fo, &mut env))
    }

    fn pointwise(&mut self, node: usize, x: &Rows) -> Result<bool, EvalError> {
        for i in 0..x.n {
            if !self.holds_at(node, x.row(i))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn fast_flat(&self, node: usize) -> bool {
        self.nodes[node].flat && self.opts.use_flatness && !self.opts.reference
    }

    fn sat(&mut self, node: usize, x: &Rows) -> Result<bool, EvalError> {
        self.tick()?;
        if self.fast_flat(node) {
            return self.pointwise(node, x);
        }
        let memo = self.opts.memo && !self.opts.reference;
        if memo {
            if let Some(&v) = self.memo.get(&(node, x.clone())) {
                return Ok(v);
            }
        }
        let result = self.sat_uncached(node, x)?;
        if memo {
            self.memo.insert((node, x.clone()), result);
        }
        Ok(result)
    }

    fn sat_uncached(&mut self, node: usize, x: &Rows) -> Result<bool, EvalError> {
        let op = self.nodes[node].op.clone();
        match op {
            Op::Lit => self.pointwise(node, x),
            Op::Dep { atom, dep, cols } => {
                let mut rel = Relation::empty(cols.len());
                for r in x.rows() {
                    rel.insert(cols.iter().map(|&c| r[c]).collect());
                }
                let member = match &atom.relativized {
                    Some(p) => dep.contains(&relativized_domain(self.model, p)?, &rel)?,
                    None => dep.contains(self.model.domain(), &rel)?,
                };
                Ok(member != atom.complemented)
            }
            Op::And(a, ca, b, cb) => Ok(self.sat(a, &x.project(&ca))? && self.sat(b, &x.project(&cb))?),
            Op::GlobalOr(a, ca, b, cb) => Ok(self.sat(a, &x.project(&ca))? || self.sat(b, &x.project(&cb))?),
            Op::Neg(a) => Ok(!self.sat(a, x)?),
            Op::Diamond(a) => self.diamond(a, x),
            Op::Or(a, ca, b, cb) => self.tensor_or(a, &ca, b, &cb, x),
            Op::Forall(q) => {
                let dup = self.extend_all(&q, x);
                self.sat(q.body, &dup.project(&q.body_cols))
            }
            Op::Exists(q) => self.exists(&q, x),
        }
    }

    fn check_search(&self, what: &'static str, size: usize) -> Result<(), EvalError> {
        if size > self.opts.max_search {
            return Err(EvalError::SearchTooLarge { what, size, limit: self.opts.max_search });
        }
        Ok(())
    }

    /// Some nonempty subteam satisfies `a`.
    fn diamond(&mut self, a: usize, x: &Rows) -> Result<bool, EvalError> {
        if x.n == 0 {
            return Ok(false);
        }
        let child = &self.nodes[a];
        if !self.opts.reference {
            if child.dc {
                for i in 0..x.n {
                    if self.sat(a, &x.select(1 << i))? {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
            if child.uc {
                return self.sat(a, x);
            }
        }
        self.check_search("dia subteams", x.n)?;
        for mask in 1..(1u64 << x.n) {
            if self.sat(a, &x.select(mask))? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Some `Y ⊆ X` satisfies `a`.
    fn some_subteam(&mut self, a: usize, ca: &[usize], x: &Rows) -> Result<bool, EvalError> {
        let child = &self.nodes[a];
        if child.flat && self.opts.use_flatness {
            return Ok(true);
        }
        if child.dc {
            return self.sat(a, &Rows::empty(ca.len()));
        }
        if child.uc {
            return self.sat(a, &x.project(ca));
        }
        self.check_search("subteams", x.n)?;
        for mask in 0..(1u64 << x.n) {
            if self.sat(a, &x.select(mask).project(ca))? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `X = Y ∪ Z` with `Y ⊨ a` and `Z ⊨ b`.
    fn tensor_or(&mut self, a: usize, ca: &[usize], b: usize, cb: &[usize], x: &Rows) -> Result<bool, EvalError> {
        if self.opts.reference || self.opts.mutation == Some(Mutation::DisjointSplit) {
            return self.or_by_labels(a, ca, b, cb, x);
        }
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        let (fa, fb) = (self.fast_flat(a), self.fast_flat(b));
        let (uca, ucb, dca, dcb) = (na.uc, nb.uc, na.dc, nb.dc);
        if fa || fb {
            let (f, cf, g, cg) = if fa { (a, ca, b, cb) } else { (b, cb, a, ca) };
            // Y may be any set of rows where f holds pointwise.
            let mut good = 0u64;
            let fx = x.project(cf);
            for i in 0..x.n {
                let row = x.row(i).to_vec();
                let frow: Vec<Element> = cf.iter().map(|&c| row[c]).collect();
                debug_assert!(fx.n <= x.n);
                if self.holds_at(f, &frow)? {
                    good |= 1 << i;
                }
            }
            let full = if x.n == 64 { u64::MAX } else { (1u64 << x.n) - 1 };
            let rest = full & !good;
            let gn = &self.nodes[g];
            if gn.dc {
                return self.sat(g, &x.select(rest).project(cg));
            }
            if gn.uc {
                return self.sat(g, &x.project(cg));
            }
            let free_rows: Vec<usize> = (0..x.n).filter(|i| good >> i & 1 == 1).collect();
            self.check_search("tensor disjunction", free_rows.len())?;
            for sub in 0..(1u64 << free_rows.len()) {
                let mut mask = rest;
                for (j, &i) in free_rows.iter().enumerate() {
                    if sub >> j & 1 == 1 {
                        mask |= 1 << i;
                    }
                }
                if self.sat(g, &x.select(mask).project(cg))? {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        if uca {
            return Ok(self.sat(a, &x.project(ca))? && self.some_subteam(b, cb, x)?);
        }
        if ucb {
            return Ok(self.sat(b, &x.project(cb))? && self.some_subteam(a, ca, x)?);
        }
        if dca && dcb {
            return self.or_partition(a, ca, b, cb, x);
        }
        self.or_by_subsets(a, ca, b, cb, x)
    }

    /// Both sides downward closed: search disjoint splits row by row,
    /// pruning as soon as a side fails.
    fn or_partition(&mut self, a: usize, ca: &[usize], b: usize, cb: &[usize], x: &Rows) -> Result<bool, EvalError> {
        for i in 0..x.n {
            let single = x.select(1 << i);
            if !self.sat(a, &single.project(ca))? && !self.sat(b, &single.project(cb))? {
                return Ok(false);
            }
        }
        self.partition_dfs(a, ca, b, cb, x, 0, 0, 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn partition_dfs(&mut self, a: usize, ca: &[usize], b: usize, cb: &[usize], x: &Rows, i: usize, ya: u64, zb: u64) -> Result<bool, EvalError> {
        if i == x.n {
            return Ok(self.sat(a, &x.select(ya).project(ca))? && self.sat(b, &x.select(zb).project(cb))?);
        }
        let bit = 1u64 << i;
        if self.sat(a, &x.select(ya | bit).project(ca))? && self.partition_dfs(a, ca, b, cb, x, i + 1, ya | bit, zb)? {
            return Ok(true);
        }
        if self.sat(b, &x.select(zb | bit).project(cb))? && self.partition_dfs(a, ca, b, cb, x, i + 1, ya, zb | bit)? {
            return Ok(true);
        }
        Ok(false)
    }

    /// General case: tabulate both sides on every subteam, then look for
    /// `Y` with `Y ⊨ a` and some `Z ⊇ X \ Y` with `Z ⊨ b`.
    fn or_by_subsets(&mut self, a: usize, ca: &[usize], b: usize, cb: &[usize], x: &Rows) -> Result<bool, EvalError> {
        self.check_search("tensor disjunction", x.n)?;
        let count = 1usize << x.n;
        let mut right = vec![false; count];
        for (mask, slot) in right.iter_mut().enumerate() {
            *slot = self.sat(b, &x.select(mask as u64).project(cb))?;
        }
        for s in (0..count).rev() {
            if !right[s] {
                right[s] = (0..x.n).any(|i| s >> i & 1 == 0 && right[s | 1 << i]);
            }
        }
        let full = count - 1;
        for y in 0..count {
            if right[full & !y] && self.sat(a, &x.select(y as u64).project(ca))? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The literal rule: label each row left, right or both.
    fn or_by_labels(&mut self, a: usize, ca: &[usize], b: usize, cb: &[usize], x: &Rows) -> Result<bool, EvalError> {
        let disjoint = self.opts.mutation == Some(Mutation::DisjointSplit);
        let labels: u32 = if disjoint { 2 } else { 3 };
        self.check_search("tensor disjunction", x.n * if disjoint { 1 } else { 2 })?;
        let total = (labels as u64).pow(x.n as u32);
        for code in 0..total {
            let (mut y, mut z) = (0u64, 0u64);
            let mut c = code;
            for i in 0..x.n {
                match c % labels as u64 {
                    0 => y |= 1 << i,
                    1 => z |= 1 << i,
                    _ => {
                        y |= 1 << i;
                        z |= 1 << i;
                    }
                }
                c /= labels as u64;
            }
            if disjoint && (y == 0 || z == 0) {
                continue;
            }
            if self.sat(a, &x.select(y).project(ca))? && self.sat(b, &x.select(z).project(cb))? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn ext_row(q: &Quant, parent: &[Element], values: &[Element]) -> Vec<Element> {
        q.ext_src
            .iter()
            .map(|s| match *s {
                Src::Parent(j) => parent[j],
                Src::Bound(j) => values[j],
            })
            .collect()
    }

    /// `X[M^k/v̄]` in the extended layout.
    fn extend_all(&self, q: &Quant, x: &Rows) -> Rows {
        let domain = self.model.domain();
        let tuples: Vec<Vec<Element>> = all_tuples(domain, q.vs.len()).collect();
        let mut rows = Vec::with_capacity(x.n * tuples.len());
        for p in x.rows() {
            for t in &tuples {
                rows.push(Self::ext_row(q, p, t));
            }
        }
        Rows::from_rows(q.ext_src.len(), rows)
    }

    fn extend_const(&self, q: &Quant, x: &Rows, values: &[Element]) -> Rows {
        Rows::from_rows(q.ext_src.len(), x.rows().map(|p| Self::ext_row(q, p, values)).collect())
    }

    fn exists(&mut self, q: &Quant, x: &Rows) -> Result<bool, EvalError> {
        let domain: Vec<Element> = self.model.domain().to_vec();
        let k = q.vs.len();
        let constant_only = self.opts.mutation == Some(Mutation::ConstantChoice);
        if constant_only || (q.forces_constant && !self.opts.reference) {
            // A constant tuple is the only possible choice when the body
            // forces the bound variables to be constant.
            for t in all_tuples(&domain, k) {
                let y = self.extend_const(q, x, &t);
                if self.sat(q.body, &y.project(&q.body_cols))? {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        if self.opts.reference {
            return self.exists_by_supplements(q, x);
        }
        let body = &self.nodes[q.body];
        if body.uc {
            let y = self.extend_all(q, x);
            return self.sat(q.body, &y.project(&q.body_cols));
        }
        if let Some(result) = self.exists_by_relations(q, x)? {
            return Ok(result);
        }
        if self.nodes[q.body].dc {
            return self.exists_by_functions(q, x);
        }
        self.exists_by_supplements(q, x)
    }

    /// Body = first-order conjuncts ∧ conjuncts mentioning only bound
    /// variables. The latter only see the set `R` of chosen tuples, and the
    /// former only restrict which tuples each row may take, so it suffices
    /// to range over `R ⊆ T` (the tuples some row may take) such that every
    /// row can take some tuple of `R`.
    fn exists_by_relations(&mut self, q: &Quant, x: &Rows) -> Result<Option<bool>, EvalError> {
        if !self.opts.use_flatness {
            return Ok(None);
        }
        let mut flat = Vec::new();
        let mut local = Vec::new();
        let bound: BTreeSet<&Var> = q.vs.iter().collect();
        for (i, cols) in &q.conjuncts {
            let n = &self.nodes[*i];
            if n.flat {
                flat.push((*i, cols.clone()));
            } else if n.free.iter().all(|v| bound.contains(v)) {
                local.push((*i, cols.clone()));
            } else {
                return Ok(None);
            }
        }
        let domain: Vec<Element> = self.model.domain().to_vec();
        let tuples: Vec<Vec<Element>> = all_tuples(&domain, q.vs.len()).collect();
        // options[r] = bitmask over `tuples` allowed for row r
        let mut options = Vec::with_capacity(x.n);
        let mut reachable = 0u64;
        if tuples.len() > 63 {
            return Ok(None);
        }
        for p in x.rows() {
            let mut mask = 0u64;
            for (ti, t) in tuples.iter().enumerate() {
                let ext = Self::ext_row(q, p, t);
                let mut ok = true;
                for (f, cols) in &flat {
                    let row: Vec<Element> = cols.iter().map(|&c| ext[c]).collect();
                    if !self.holds_at(*f, &row)? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    mask |= 1 << ti;
                }
            }
            if mask == 0 {
                return Ok(Some(false));
            }
            reachable |= mask;
            options.push(mask);
        }
        if local.is_empty() {
            return Ok(Some(true));
        }
        let local_team = |this: &Self, rel: u64| -> Vec<Rows> {
            let zero = vec![0; x.width];
            let rows: Vec<Vec<Element>> = (0..tuples.len()).filter(|ti| rel >> ti & 1 == 1).map(|ti| Self::ext_row(q, &zero, &tuples[ti])).collect();
            let ext = Rows::from_rows(q.ext_src.len(), rows);
            let _ = this;
            local.iter().map(|(_, cols)| ext.project(cols)).collect()
        };
        if local.iter().all(|(i, _)| self.nodes[*i].uc) {
            let teams = local_team(self, reachable);
            for ((i, _), t) in local.iter().zip(teams) {
                if !self.sat(*i, &t)? {
                    return Ok(Some(false));
                }
            }
            return Ok(Some(true));
        }
        let free_bits: Vec<usize> = (0..tuples.len()).filter(|ti| reachable >> ti & 1 == 1).collect();
        self.check_search("existential choices", free_bits.len())?;
        'outer: for sub in 0..(1u64 << free_bits.len()) {
            let mut rel = 0u64;
            for (j, &ti) in free_bits.iter().enumerate() {
                if sub >> j & 1 == 1 {
                    rel |= 1 << ti;
                }
            }
            if options.iter().any(|&o| o & rel == 0) {
                continue;
            }
            let teams = local_team(self, rel);
            for ((i, _), t) in local.iter().zip(teams) {
                if !self.sat(*i, &t)? {
                    continue 'outer;
                }
            }
            return Ok(Some(true));
        }
        Ok(Some(false))
    }

    /// Downward closed body: one value per row suffices, chosen row by row
    /// with pruning.
    fn exists_by_functions(&mut self, q: &Quant, x: &Rows) -> Result<bool, EvalError> {
        let domain: Vec<Element> = self.model.domain().to_vec();
        let tuples: Vec<Vec<Element>> = all_tuples(&domain, q.vs.len()).collect();
        let mut choices: Vec<Vec<Vec<Element>>> = Vec::with_capacity(x.n);
        for p in x.rows() {
            let mut ok = Vec::new();
            for t in &tuples {
                let ext = Self::ext_row(q, p, t);
                let single = Rows::from_rows(q.ext_src.len(), vec![ext.clone()]);
                if self.sat(q.body, &single.project(&q.body_cols))? {
                    ok.push(ext);
                }
            }
            if ok.is_empty() {
                return Ok(false);
            }
            choices.push(ok);
        }
        let start = Rows::empty(q.ext_src.len());
        self.function_dfs(q, &choices, 0, &start)
    }

    fn function_dfs(&mut self, q: &Quant, choices: &[Vec<Vec<Element>>], i: usize, y: &Rows) -> Result<bool, EvalError> {
        if i == choices.len() {
            return self.sat(q.body, &y.project(&q.body_cols));
        }
        for ext in &choices[i] {
            let next = y.with_row(ext);
            if self.sat(q.body, &next.project(&q.body_cols))? && self.function_dfs(q, choices, i + 1, &next)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The literal rule: every `H: X → P(M^k) \ {∅}`.
    fn exists_by_supplements(&mut self, q: &Quant, x: &Rows) -> Result<bool, EvalError> {
        let domain: Vec<Element> = self.model.domain().to_vec();
        let tuples: Vec<Vec<Element>> = all_tuples(&domain, q.vs.len()).collect();
        let per_row = tuples.len();
        self.check_search("existential choices", x.n * per_row)?;
        let full = (1u64 << per_row) - 1;
        let mut choice = vec![1u64; x.n];
        loop {
            let mut rows = Vec::new();
            for (p, &mask) in x.rows().zip(&choice) {
                for (ti, t) in tuples.iter().enumerate() {
                    if mask >> ti & 1 == 1 {
                        rows.push(Self::ext_row(q, p, t));
                    }
                }
            }
            let y = Rows::from_rows(q.ext_src.len(), rows);
            if self.sat(q.body, &y.project(&q.body_cols))? {
                return Ok(true);
            }
            let mut advanced = false;
            for c in choice.iter_mut() {
                if *c < full {
                    *c += 1;
                    advanced = true;
                    break;
                }
                *c = 1;
            }
            if !advanced {
                return Ok(false);
            }
        }
    }
}

/// `M ⊨_X φ` with default options.
pub fn team_eval(model: &Model, registry: &DependencyRegistry, team: &Team, phi: &Formula) -> Result<bool, EvalError> {
    Evaluator::new(model, registry, phi, EvalOptions::default())?.eval(team)
}

/// `M ⊨_X φ` with explicit options.
pub fn team_eval_with(model: &Model, registry: &DependencyRegistry, team: &Team, phi: &Formula, opts: EvalOptions) -> Result<bool, EvalError> {
    Evaluator::new(model, registry, phi, opts)?.eval(team)
}

/// Truth of a sentence: satisfaction at the team `{∅}`.
pub fn sentence_truth(model: &Model, registry: &DependencyRegistry, phi: &Formula) -> Result<bool, EvalError> {
    Evaluator::new(model, registry, phi, EvalOptions::default())?.sentence_truth()
}

/// Pointwise evaluation of a first-order formula: true iff every
/// assignment of the team satisfies it classically.
pub fn flat_fastpath(model: &Model, team: &Team, phi: &Formula) -> Result<bool, EvalError> {
    if !phi.is_first_order() {
        return Err(EvalError::NotFirstOrder);
    }
    for s in team.assignments() {
        if !tarski_eval(model, &s, phi)? {
            return Ok(false);
        }
    }
    Ok(true)
}
