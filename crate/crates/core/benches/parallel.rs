//! Sequential vs data-parallel execution of the hot kernels.

use std::sync::Arc;

use catql::enrich::{function_from_pairs, parent_schema, transitive_closure_with};
use catql::instance::relationalize_with;
use catql::migrate::pi_with;
use catql::query::{eval_query_with, parse_query};
use catql::{BaseType, Instance, Mapping, RowId, Schema, Strategy, Value};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STRATEGIES: [(&str, Strategy); 2] = [("sequential", Strategy::Sequential), ("parallel", Strategy::Parallel)];

/// A parent forest of `n` rows whose names repeat every `distinct` rows, so
/// relationalize has real merging to do.
fn forest(n: u64, distinct: u64) -> Instance {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    let mut b = Instance::builder(parent_schema());
    for x in 0..n {
        b.add_row("Material", RowId(x)).unwrap();
        let p = if x < distinct { x } else { r.gen_range(0..x) };
        b.set_edge("Material", "parent", RowId(x), RowId(p)).unwrap();
        b.set_attr("Material", "name", RowId(x), Value::Str(format!("n{}", x % distinct))).unwrap();
    }
    b.build().unwrap()
}

fn chain(n: usize) -> Instance {
    let pairs: Vec<(String, String)> =
        (0..n).map(|i| (format!("m{i}"), format!("m{}", i.saturating_sub(1)))).collect();
    function_from_pairs(&pairs).unwrap()
}

/// Two discrete nodes collapsed onto one: pi computes their product.
fn collapse(rows: i64) -> (Mapping, Instance) {
    let s = Arc::new(
        Schema::builder("D")
            .node("a")
            .node("b")
            .attribute("u", "a", BaseType::Integer)
            .attribute("w", "b", BaseType::Integer)
            .build()
            .unwrap(),
    );
    let t = Arc::new(
        Schema::builder("P")
            .node("x")
            .attribute("u", "x", BaseType::Integer)
            .attribute("w", "x", BaseType::Integer)
            .build()
            .unwrap(),
    );
    let f = Mapping::builder("collapse", s.clone(), t)
        .node("a", "x")
        .node("b", "x")
        .attribute_dotted("a", "u", "x.u")
        .unwrap()
        .attribute_dotted("b", "w", "x.w")
        .unwrap()
        .build()
        .unwrap();
    let mut b = Instance::builder(s);
    for k in 0..rows {
        b.add_row("a", RowId(k as u64)).unwrap();
        b.set_attr("a", "u", RowId(k as u64), Value::Int(k)).unwrap();
        b.add_row("b", RowId(k as u64)).unwrap();
        b.set_attr("b", "w", RowId(k as u64), Value::Int(k)).unwrap();
    }
    (f, b.build().unwrap())
}

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("relationalize");
    let i = forest(20_000, 500);
    for (name, s) in STRATEGIES {
        g.bench_with_input(BenchmarkId::new(name, "forest-20k"), &i, |b, i| b.iter(|| relationalize_with(i, s)));
    }
    g.finish();

    let mut g = c.benchmark_group("pi");
    g.sample_size(10);
    let (f, i) = collapse(200);
    for (name, s) in STRATEGIES {
        g.bench_with_input(BenchmarkId::new(name, "product-200x200"), &i, |b, i| {
            b.iter(|| pi_with(&f, i, 64, s).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("query");
    g.sample_size(10);
    let closure = transitive_closure_with(&chain(120), 119, Strategy::Parallel).unwrap();
    let q = parse_query(
        "select a.left.name as x, b.right.name as y from is-a as a, is-a as b where a.right = b.left",
    )
    .unwrap();
    for (name, s) in STRATEGIES {
        g.bench_with_input(BenchmarkId::new(name, "self-join-chain-120"), &closure, |b, i| {
            b.iter(|| eval_query_with(&q, i, s).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("closure");
    g.sample_size(10);
    let parents = chain(200);
    for (name, s) in STRATEGIES {
        g.bench_with_input(BenchmarkId::new(name, "chain-200"), &parents, |b, p| {
            b.iter(|| transitive_closure_with(p, 199, s).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
