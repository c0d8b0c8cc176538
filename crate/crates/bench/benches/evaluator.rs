use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use teamcheck::dependency::maximal_relations;
use teamcheck::model::Element;
use teamcheck::oracle::stair_search;
use teamcheck::{parse_formula, Dependency, DependencyRegistry, EvalOptions, Evaluator};
use teamcheck_bench::{cycle_model, team};

const FORMULAS: &[(&str, &str)] = &[
    ("first-order", "forall z (R(x,z) \\/ x != y \\/ P(z))"),
    ("dependence-split", "=(x;y) \\/ =(x;y)"),
    ("exists-const", "exists w (const(w) /\\ R(x,w))"),
    ("inclusion", "exists z (inc(x;z) /\\ R(y,z))"),
    ("global-or-dia", "dia P(x) lor =(y;x)"),
];

fn evaluation(c: &mut Criterion) {
    let registry = DependencyRegistry::new();
    let mut group = c.benchmark_group("eval");
    for &(name, text) in FORMULAS {
        let phi = parse_formula(text, &registry).unwrap();
        for n in [3, 4] {
            let model = cycle_model(n);
            let x = team(&model, &["x", "y"], n + 1);
            group.bench_with_input(BenchmarkId::new(name, n), &x, |b, x| {
                b.iter(|| Evaluator::new(&model, &registry, &phi, EvalOptions::default()).unwrap().eval(x).unwrap())
            });
        }
    }
    group.finish();
}

fn relation_spaces(c: &mut Criterion) {
    let mut group = c.benchmark_group("relations");
    for n in [3, 4] {
        let domain: Vec<Element> = (0..n).collect();
        group.bench_with_input(BenchmarkId::new("maximal-dep", n), &domain, |b, d| b.iter(|| maximal_relations(&Dependency::dep(1, 1), d, 16).unwrap()));
    }
    for n in [8, 12] {
        let domain: Vec<Element> = (0..n).collect();
        group.bench_with_input(BenchmarkId::new("stairs-evencard", n), &domain, |b, d| b.iter(|| stair_search(&Dependency::evencard(1), d, None, 16).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, evaluation, relation_spaces);
criterion_main!(benches);
