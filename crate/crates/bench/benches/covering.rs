use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hardy_lab::covering::{build_covering, verify_geometry, weights_from_beta, HolderProfile, WeightSpec};
use hardy_lab::decomp::{decompose, CellFunction, TreePartition};
use hardy_lab_bench::demo_covering;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn build(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_covering");
    for depth in [6u32, 10, 16] {
        g.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, &d| {
            b.iter(|| build_covering(&HolderProfile::demo(0.5), black_box(d), 10_000_000).unwrap())
        });
    }
    g.finish();
    let cov = demo_covering(10);
    c.bench_function("verify_geometry/10", |b| b.iter(|| verify_geometry(black_box(&cov))));
}

fn decomposition(c: &mut Criterion) {
    let cov = demo_covering(10);
    let spec = WeightSpec::critical(0.0, 0.5, 2.0);
    let part = TreePartition::from_covering(&cov, spec);
    let pr = weights_from_beta(&cov, spec).unwrap().problem;
    let g = CellFunction::random_mean_zero(&part, &mut ChaCha8Rng::seed_from_u64(5));
    c.bench_function("decompose/10", |b| b.iter(|| decompose(&part, black_box(&g), &pr).unwrap()));
}

criterion_group!(benches, build, decomposition);
criterion_main!(benches);
