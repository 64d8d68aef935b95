use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use sopi_core::{
    build_b_set, distance, greedy_color, mod_mul_add, prefix, DesignParams, DiffSet, FieldParams,
    NodeGraph, PrefixSpec, Sopi, SplitMix64, Strategy,
};

fn bench_mul_add(c: &mut Criterion) {
    let mersenne = FieldParams::mersenne31();
    // 2^31 - 19, the next prime down: exercises the generic modulo path.
    let generic = FieldParams::new(2147483629).unwrap();

    c.bench_function("mod_mul_add mersenne31", |b| {
        b.iter(|| mod_mul_add(black_box(123456789), black_box(987654321), black_box(55555), mersenne))
    });
    c.bench_function("mod_mul_add generic", |b| {
        b.iter(|| mod_mul_add(black_box(123456789), black_box(987654321), black_box(55555), generic))
    });
}

fn bench_prefix(c: &mut Criterion) {
    let params = FieldParams::mersenne31();
    let sopi = Sopi::new(123456, 789012, params).unwrap();
    c.bench_function("prefix 30000 symbols", |b| {
        b.iter(|| prefix(black_box(PrefixSpec::new(sopi, 30000)), params))
    });
}

fn bench_distance(c: &mut Criterion) {
    let params = FieldParams::mersenne31();
    let diff = DiffSet::new(30000).unwrap();
    c.bench_function("distance close pair", |b| {
        b.iter(|| distance(black_box(999), black_box(1000), diff, params))
    });
    c.bench_function("distance unmatched pair", |b| {
        b.iter(|| distance(black_box(48271), black_box(16807), diff, params))
    });
}

fn bench_b_set(c: &mut Criterion) {
    let dp = DesignParams::new(FieldParams::new(10007).unwrap(), 5, 50).unwrap();
    c.bench_function("build_b_set incremental cap=50", |b| {
        b.iter(|| build_b_set(&dp, black_box(50), Strategy::Incremental))
    });
}

fn bench_coloring(c: &mut Criterion) {
    let params = FieldParams::new(10007).unwrap();
    let mut rng = SplitMix64::new(1);
    let graph = NodeGraph::random(200, 0.1, &mut rng);
    let palette: Vec<Sopi> = (0..graph.max_degree() + 1)
        .map(|i| Sopi::new(i as u64, 1 + i as u64, params).unwrap())
        .collect();
    c.bench_function("greedy_color n=200 p=0.1", |b| {
        b.iter(|| greedy_color(black_box(&graph), black_box(&palette)))
    });
}

criterion_group!(
    benches,
    bench_mul_add,
    bench_prefix,
    bench_distance,
    bench_b_set,
    bench_coloring
);
criterion_main!(benches);
