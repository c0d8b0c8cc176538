//! `teamcheck`: evaluate team-semantics formulas, translate them, and
//! inspect generalized dependencies over the text file formats.
//!
//! Exit codes: 0 for true (or a passing check), 1 for false (or a failed
//! check), 2 for any error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use teamcheck::dependency::{classify, downward_closure, maximal_relations};
use teamcheck::model::{parse_model, parse_team, Element, Structure};
use teamcheck::oracle::{find_disagreement, stair_search};
use teamcheck::syntax::{parse_formula_with, DepAtom, ParseOptions, Signature};
use teamcheck::transforms::{
    chi_downclosure, eliminate_constancy, eliminate_tilde_on_literals, nf_eval, nf_to_team_formula, nf_to_team_formula_complement,
    relativize_all_formula,
};
use teamcheck::{formulas_equivalent, Dependency, DependencyRegistry, EquivConfig, EvalOptions, Evaluator, Formula, NormalForm, Var};

#[derive(Parser, Debug)]
#[command(name = "teamcheck", version, about = "Model checking and translation for logics with generalized dependence atoms")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Output style; `lines` is stable `key: value` output for scripts.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    /// Dependency definitions file (repeatable).
    #[arg(long = "defs", value_name = "FILE", global = true)]
    defs: Vec<PathBuf>,
    /// Largest domain the evaluator accepts.
    #[arg(long, value_name = "N", default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    max_domain: u64,
    /// Largest team the evaluator accepts.
    #[arg(long, value_name = "N", default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    max_team: u64,
    /// Largest number of tuples whose relations are enumerated.
    #[arg(long, value_name = "N", default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    max_tuples: u64,
    /// Evaluation step budget.
    #[arg(long, value_name = "N", env = "TEAMCHECK_BUDGET", value_parser = clap::value_parser!(u64).range(1..), global = true)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Lines,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a formula on a team, or a sentence on a model.
    Eval {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Team file; without it the formula must be a sentence and is
        /// evaluated on the team holding only the empty assignment.
        #[arg(long, value_name = "FILE")]
        team: Option<PathBuf>,
        /// Formula text, or `@FILE`.
        #[arg(long)]
        formula: String,
    },
    /// Rewrite a formula or normal form into an equivalent formula.
    Translate(Translate),
    /// Check closure properties of a dependency on small domains.
    Classify {
        /// Dependency such as `const`, `dep:1,1` or a defined name.
        #[arg(long)]
        dep: String,
        /// Largest domain size checked.
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
    /// List the maximal members of a dependency on a domain.
    Maxrel {
        #[arg(long)]
        dep: String,
        #[command(flatten)]
        domain: DomainArg,
    },
    /// Find the longest alternating member/non-member inclusion chain.
    Stairs {
        #[arg(long)]
        dep: String,
        #[command(flatten)]
        domain: DomainArg,
        /// Stop once this many non-members are on the chain.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Compare two formulas on all small models and teams.
    Equiv {
        #[arg(long = "formula", num_args = 1, required = true, value_name = "FORMULA")]
        formulas: Vec<String>,
        #[command(flatten)]
        bounds: Bounds,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct DomainArg {
    /// Use the domain of this model.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Use the domain {0, ..., N-1}.
    #[arg(long, value_name = "N")]
    size: Option<usize>,
}

#[derive(Args, Debug)]
struct Bounds {
    /// Domain sizes to enumerate.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    sizes: Vec<usize>,
    /// Team variables; defaults to the free variables.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Push `~` onto literals and dependency atoms.
    Tilde0,
    /// Replace constancy atoms by equalities with fresh constants.
    ConstElim,
    /// Define the downward closure of a dependency.
    DownclosureChi,
    /// Express totality relativized to a predicate.
    AllRel,
    /// Turn a normal form into a team formula.
    Nf,
    /// Turn a normal form into a formula for its complement.
    NfComplement,
}

#[derive(Args, Debug)]
struct Translate {
    kind: Kind,
    /// Formula text, or `@FILE`.
    input: Option<String>,
    #[arg(long, conflicts_with = "input")]
    formula: Option<String>,
    /// Normal form file.
    #[arg(long, value_name = "FILE")]
    nf: Option<PathBuf>,
    #[arg(long)]
    dep: Option<String>,
    /// Predicate for relativization.
    #[arg(long, default_value = "P")]
    predicate: String,
    /// Check the result against the input on all small models.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    bounds: Bounds,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn source(text: &str) -> Result<String> {
    match text.strip_prefix('@') {
        Some(path) => read(Path::new(path)),
        None => Ok(text.to_string()),
    }
}

struct Ctx {
    format: Format,
    registry: DependencyRegistry,
    eval: EvalOptions,
    max_tuples: usize,
}

impl Ctx {
    fn new(g: &Global) -> Result<Ctx> {
        let mut registry = DependencyRegistry::new();
        for path in &g.defs {
            registry.load_definitions(&read(path)?).with_context(|| format!("in {}", path.display()))?;
        }
        let eval = EvalOptions { max_domain: g.max_domain as usize, max_team: g.max_team as usize, budget: g.budget, ..EvalOptions::default() };
        Ok(Ctx { format: g.format, registry, eval, max_tuples: g.max_tuples as usize })
    }

    fn parse(&self, text: &str, opts: &ParseOptions) -> Result<Formula> {
        let text = source(text)?;
        parse_formula_with(text.trim(), &self.registry, opts).map_err(|e| anyhow!("formula {e}"))
    }

    fn dependency(&self, spec: &str) -> Result<std::sync::Arc<Dependency>> {
        Ok(self.registry.resolve_spec(spec)?)
    }

    fn config(&self, bounds: &Bounds) -> EquivConfig {
        EquivConfig { vars: bounds.vars.as_ref().map(|vs| vars(vs)), eval: self.eval.clone(), ..EquivConfig::sizes(&bounds.sizes) }
    }

    /// Prints `key: value` in line mode and just the value otherwise.
    fn field(&self, key: &str, value: impl std::fmt::Display) {
        match self.format {
            Format::Lines => println!("{key}: {value}"),
            Format::Human => println!("{value}"),
        }
    }
}

fn vars(names: &[String]) -> Vec<Var> {
    names.iter().map(|n| Var::new(n.trim())).collect()
}

fn domain_of(arg: &DomainArg) -> Result<Vec<Element>> {
    match (&arg.model, arg.size) {
        (Some(path), _) => Ok(parse_model(&read(path)?)?.domain().to_vec()),
        (None, Some(n)) if n > 0 => Ok((0..n as Element).collect()),
        _ => bail!("the domain must be nonempty"),
    }
}

/// A command's verdict: `true` exits 0, `false` exits 1.
type Outcome = Result<bool>;

fn cmd_eval(ctx: &Ctx, model: &Path, team: Option<&Path>, formula: &str) -> Outcome {
    let model = parse_model(&read(model)?).context("model")?;
    let phi = ctx.parse(formula, &ParseOptions::with_constants(model.constants().keys()))?;
    let mut ev = Evaluator::new(&model, &ctx.registry, &phi, ctx.eval.clone())?;
    let (value, size) = match team {
        Some(path) => {
            let team = parse_team(&read(path)?, &model).context("team")?;
            (ev.eval(&team)?, team.len())
        }
        None => {
            if let Some(v) = phi.free_variables().into_iter().next() {
                bail!("variable {v} is free; supply --team");
            }
            (ev.sentence_truth()?, 1)
        }
    };
    ctx.field("result", value);
    if ctx.format == Format::Lines {
        println!("team-size: {size}");
        println!("steps: {}", ev.steps());
    }
    Ok(value)
}

fn report_verify(ctx: &Ctx, sizes: &[usize], found: Option<teamcheck::Counterexample>) -> bool {
    let sizes = sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    match found {
        None => {
            ctx.field("verify", format!("ok (domain sizes {sizes})"));
            true
        }
        Some(cx) => {
            ctx.field("verify", "counterexample");
            print!("{cx}");
            false
        }
    }
}

fn dep_atom(ctx: &Ctx, spec: &str, names: Option<&Vec<String>>) -> Result<(DepAtom, Vec<Var>)> {
    let d = ctx.dependency(spec)?;
    let xs = match names {
        Some(ns) => vars(ns),
        None => (1..=d.arity()).map(|i| Var::new(format!("x{i}"))).collect(),
    };
    if xs.len() != d.arity() {
        bail!("{} takes {} arguments, got {}", d.name(), d.arity(), xs.len());
    }
    let split = match spec.split_once(':') {
        Some((_, s)) => s.split(',').map(|p| p.trim().parse()).collect::<Result<Vec<usize>, _>>()?,
        None => vec![d.arity()],
    };
    let name = spec.split(':').next().unwrap_or(spec).trim();
    Ok((DepAtom::new(name, split, xs.clone()), xs))
}

fn cmd_translate(ctx: &mut Ctx, t: &Translate) -> Outcome {
    let input = || -> Result<&str> { t.input.as_deref().or(t.formula.as_deref()).ok_or_else(|| anyhow!("{:?} needs a formula", t.kind)) };
    let config = ctx.config(&t.bounds);
    match t.kind {
        Kind::Tilde0 => {
            let phi = ctx.parse(input()?, &ParseOptions::tilde0())?;
            let out = eliminate_tilde_on_literals(&phi)?;
            ctx.field("formula", &out);
            if t.verify {
                return Ok(report_verify(ctx, &config.sizes, formulas_equivalent(&phi, &out, &ctx.registry, &config)?));
            }
        }
        Kind::ConstElim => {
            let phi = ctx.parse(input()?, &ParseOptions::default())?;
            let elim = eliminate_constancy(&phi)?;
            ctx.field("formula", &elim.closed);
            if ctx.format == Format::Lines {
                println!("body: {}", elim.body);
                println!("constants: {}", elim.constants.join(" "));
            }
            if t.verify {
                // sentence truth against the constant expansion of the body
                let sig = phi.signature()?;
                let found = find_disagreement(&sig, &[], &config, |model, _| {
                    Ok((teamcheck::sentence_truth(model, &ctx.registry, &phi)?, elim.truth(model, &ctx.registry)?))
                })?;
                return Ok(report_verify(ctx, &config.sizes, found));
            }
        }
        Kind::DownclosureChi => {
            let spec = t.dep.as_deref().ok_or_else(|| anyhow!("downclosure-chi needs --dep"))?;
            let (atom, xs) = dep_atom(ctx, spec, t.bounds.vars.as_ref())?;
            let form = chi_downclosure(&atom, &xs)?;
            ctx.field("formula", &form.guarded);
            if ctx.format == Format::Lines {
                println!("side: {}", form.side);
            } else {
                println!("valid where: {}", form.side);
            }
            if t.verify {
                let d = ctx.registry.resolve_atom(&atom)?;
                let down = downward_closure(&d);
                let reg = &ctx.registry;
                // compared on nonempty teams; the empty team is covered by `side`
                let found = find_disagreement(&Signature::default(), &xs, &config, |model, team| {
                    if team.is_empty() {
                        return Ok((true, true));
                    }
                    let value = Evaluator::new(model, reg, &form.chi, config.eval.clone())?.eval(team)?;
                    Ok((value, down.contains(model.domain(), &team.project(&xs)?)?))
                })?;
                return Ok(report_verify(ctx, &config.sizes, found));
            }
        }
        Kind::AllRel => {
            let names = t.bounds.vars.clone().unwrap_or_else(|| vec!["x".into()]);
            let xs = vars(&names);
            let out = relativize_all_formula(&xs, &t.predicate)?;
            ctx.field("formula", &out);
            if t.verify {
                let mut atom = DepAtom::simple("all", xs.clone());
                atom.relativized = Some(t.predicate.clone());
                return Ok(report_verify(ctx, &config.sizes, formulas_equivalent(&out, &Formula::Dep(atom), &ctx.registry, &config)?));
            }
        }
        Kind::Nf | Kind::NfComplement => {
            let path = t.nf.as_deref().ok_or_else(|| anyhow!("{:?} needs --nf", t.kind))?;
            let nf = NormalForm::parse(&read(path)?)?;
            let target = t.bounds.vars.as_ref().map_or_else(|| nf.vars.clone(), |ns| vars(ns));
            let before: Vec<String> = ctx.registry.user_dependencies().map(|d| d.name().to_string()).collect();
            let complement = t.kind == Kind::NfComplement;
            let out = if complement {
                nf_to_team_formula_complement(&nf, &target, &mut ctx.registry)?
            } else {
                nf_to_team_formula(&nf, &target, &mut ctx.registry)?
            };
            ctx.field("formula", &out);
            // the fresh 0-ary atoms, in the definitions-file format
            for d in ctx.registry.user_dependencies().filter(|d| !before.iter().any(|b| b == d.name())) {
                if let Some(psi) = d.defining_sentence() {
                    println!("dependency {} arity 0 := {psi}", d.name());
                }
            }
            if t.verify {
                let reg = &ctx.registry;
                let found = find_disagreement(&Signature::default(), &target, &config, |model, team| {
                    let value = Evaluator::new(model, reg, &out, config.eval.clone())?.eval(team)?;
                    let rel = team.project(&target)?;
                    let member = nf_eval(model.domain(), &rel, &nf)?;
                    Ok((value, member != complement))
                })?;
                return Ok(report_verify(ctx, &config.sizes, found));
            }
        }
    }
    Ok(true)
}

fn cmd_classify(ctx: &Ctx, spec: &str, bound: usize) -> Outcome {
    let d = ctx.dependency(spec)?;
    let c = classify(&d, bound, ctx.max_tuples)?;
    if ctx.format == Format::Lines {
        println!("dependency: {}", d.name());
        println!("bound: {}", c.bound);
    }
    for line in c.lines() {
        println!("{line}");
    }
    Ok(true)
}

fn cmd_maxrel(ctx: &Ctx, spec: &str, domain: &DomainArg) -> Outcome {
    let d = ctx.dependency(spec)?;
    let domain = domain_of(domain)?;
    let rels = maximal_relations(&d, &domain, ctx.max_tuples)?;
    if ctx.format == Format::Lines {
        println!("count: {}", rels.len());
    } else if rels.is_empty() {
        println!("no members on this domain");
    }
    for r in &rels {
        ctx.field("maximal", r);
    }
    Ok(true)
}

fn cmd_stairs(ctx: &Ctx, spec: &str, domain: &DomainArg, depth: Option<usize>) -> Outcome {
    let d = ctx.dependency(spec)?;
    let domain = domain_of(domain)?;
    let chain = stair_search(&d, &domain, depth, ctx.max_tuples)?;
    if ctx.format == Format::Human {
        println!("# stair depth is a diagnostic indicator, not a decision procedure");
    }
    for line in chain.lines() {
        println!("{line}");
    }
    Ok(true)
}

fn cmd_equiv(ctx: &Ctx, formulas: &[String], bounds: &Bounds) -> Outcome {
    let [a, b] = formulas else { bail!("equiv takes exactly two --formula arguments") };
    let (phi, psi) = (ctx.parse(a, &ParseOptions::default())?, ctx.parse(b, &ParseOptions::default())?);
    let config = ctx.config(bounds);
    match formulas_equivalent(&phi, &psi, &ctx.registry, &config)? {
        None => {
            ctx.field("equivalent", format!("yes (domain sizes {})", bounds.sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(",")));
            Ok(true)
        }
        Some(cx) => {
            ctx.field("equivalent", "no");
            print!("{cx}");
            Ok(false)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let mut ctx = Ctx::new(&cli.global)?;
    match &cli.command {
        Command::Eval { model, team, formula } => cmd_eval(&ctx, model, team.as_deref(), formula),
        Command::Translate(t) => cmd_translate(&mut ctx, t),
        Command::Classify { dep, bound } => cmd_classify(&ctx, dep, *bound),
        Command::Maxrel { dep, domain } => cmd_maxrel(&ctx, dep, domain),
        Command::Stairs { dep, domain, depth } => cmd_stairs(&ctx, dep, domain, *depth),
        Command::Equiv { formulas, bounds } => cmd_equiv(&ctx, formulas, bounds),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
