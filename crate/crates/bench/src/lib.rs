//! Workloads shared by the benchmarks.

use teamcheck::model::{all_tuples, Element, Relation, Structure};
use teamcheck::syntax::vars;
use teamcheck::{Model, Team};

/// A model on `n` elements with `R` the successor relation mod `n` and
/// `P` the even elements.
pub fn cycle_model(n: usize) -> Model {
    let domain: Vec<Element> = (0..n as Element).collect();
    let succ = Relation::from_tuples(2, domain.iter().map(|&e| vec![e, (e + 1) % n as Element]));
    let even = Relation::from_tuples(1, domain.iter().filter(|&&e| e % 2 == 0).map(|&e| vec![e]));
    Model::new(n).unwrap().with_relation("R", succ).unwrap().with_relation("P", even).unwrap()
}

/// Every assignment of the named variables into the model, keeping those
/// whose code is divisible by `stride` to thin the team out.
pub fn team(model: &Model, names: &[&str], stride: usize) -> Team {
    let rows = all_tuples(model.domain(), names.len()).enumerate().filter(|(i, _)| i % stride == 0).map(|(_, t)| t).collect();
    Team::new(vars(names), rows).unwrap()
}
