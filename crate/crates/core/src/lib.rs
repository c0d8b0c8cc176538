//! Finite-model workbench for first-order logic under team semantics with
//! generalized dependency atoms.
//!
//! - [`syntax`]: formulas, parser and printer, syntactic rewrites
//! - [`model`]: finite models, teams, Tarskian evaluation
//! - [`dependency`]: dependencies as values and their algebra
//! - [`eval`]: the lax team-semantics evaluator
//! - [`transforms`]: source-to-source translations
//! - [`oracle`]: exhaustive equivalence checking and search utilities

pub mod dependency;
pub mod eval;
pub mod model;
pub mod oracle;
pub mod syntax;
pub mod transforms;

pub use dependency::{Classification, Dependency, DependencyError, DependencyRegistry};
pub use eval::{sentence_truth, team_eval, EvalError, EvalOptions, Evaluator};
pub use model::{Element, Model, ModelError, Relation, Team};
pub use oracle::{formulas_equivalent, Counterexample, EquivConfig, OracleError, StairChain};
pub use syntax::{parse_formula, Formula, ParseError, Var};
pub use transforms::{NormalForm, TransformError};
