use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use prefcomm_core::aggregation::{aggregate_harmonious, aggregate_weighted, WeightSchema};
use prefcomm_core::generators::random_network;
use prefcomm_core::{enumerate_rule, EnumerateOptions, Rule};
use std::hint::black_box;

fn aggregate(c: &mut Criterion) {
    let mut group = c.benchmark_group("aggregate");
    for n in [8, 32, 64] {
        let net = random_network(n, 3);
        let ballots = net.ballots(net.ground());
        let borda = WeightSchema::borda(n);
        group.bench_with_input(BenchmarkId::new("harmonious", n), &n, |b, _| {
            b.iter(|| aggregate_harmonious(n, black_box(&ballots)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("borda", n), &n, |b, _| {
            b.iter(|| aggregate_weighted(&borda, black_box(&ballots)).unwrap())
        });
    }
    group.finish();
}

fn enumerate(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate");
    group.sample_size(10);
    let net = random_network(12, 5);
    for rule in [Rule::Harmonious, Rule::b3ct(), Rule::Comprehensive] {
        group.bench_function(rule.to_string(), |b| b.iter(|| enumerate_rule(&rule, black_box(&net), EnumerateOptions::default()).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, aggregate, enumerate);
criterion_main!(benches);
