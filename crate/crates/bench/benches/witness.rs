use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use prefcomm_bench::{clique_g_fixture, unsat_gadget};
use prefcomm_core::lexpref::{gs_witness, gs_witness_pruned, sa_witness, sa_witness_forced, sa_witness_pruned};
use std::hint::black_box;

fn gs_clique_g(c: &mut Criterion) {
    let mut group = c.benchmark_group("gs_clique_g");
    for n in [10, 14, 18] {
        let (net, s) = clique_g_fixture(n, n / 2, 2, 7);
        group.bench_with_input(BenchmarkId::new("exhaustive", n), &n, |b, _| b.iter(|| gs_witness(black_box(&net), s).unwrap()));
        group.bench_with_input(BenchmarkId::new("pruned", n), &n, |b, _| {
            b.iter(|| gs_witness_pruned(black_box(&net), s, 2).unwrap())
        });
    }
    group.finish();
}

fn sa_clique_g(c: &mut Criterion) {
    let mut group = c.benchmark_group("sa_clique_g");
    for n in [10, 16] {
        let (net, s) = clique_g_fixture(n, 3, 3, 11);
        group.bench_with_input(BenchmarkId::new("exhaustive", n), &n, |b, _| b.iter(|| sa_witness(black_box(&net), s).unwrap()));
        group.bench_with_input(BenchmarkId::new("pruned", n), &n, |b, _| {
            b.iter(|| sa_witness_pruned(black_box(&net), s, 3).unwrap())
        });
    }
    group.finish();
}

fn sa_gadget(c: &mut Criterion) {
    let (net, s) = unsat_gadget(1);
    c.bench_function("sa_unsat_gadget", |b| b.iter(|| sa_witness_forced(black_box(&net), s).unwrap()));
}

criterion_group!(benches, gs_clique_g, sa_clique_g, sa_gadget);
criterion_main!(benches);
