use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dipolenet::activation::{max_active_exact, tblas_activate};
use dipolenet::channel::{realize_channel, tail_probability};
use dipolenet::field::sample_field;
use dipolenet::harness::sweep::run_replication;
use dipolenet::harness::ExperimentConfig;
use dipolenet::NetworkParams;

fn tail(c: &mut Criterion) {
    c.bench_function("tail_probability", |b| {
        b.iter(|| tail_probability(black_box(137.0), black_box(3.0)).unwrap())
    });
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("tblas_replication");
    let cfg = ExperimentConfig::default();
    for n in [100.0, 1_000.0, 10_000.0] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let mut rep = 0;
            b.iter(|| {
                rep += 1;
                run_replication(&cfg, n, rep, false).unwrap()
            })
        });
    }
    group.finish();
}

fn activation(c: &mut Criterion) {
    // small window so the exact solver stays within its cap
    let params = NetworkParams {
        n: 16.0,
        window_area: 1.0,
        ..NetworkParams::default()
    };
    let field = sample_field(&params, 3).unwrap();
    let ch = realize_channel(&field, &params, 3).unwrap();
    c.bench_function("tblas_activate_n16", |b| b.iter(|| tblas_activate(&ch, &params).unwrap()));
    c.bench_function("max_active_exact_n16", |b| b.iter(|| max_active_exact(&ch, &params).unwrap()));
}

criterion_group!(benches, tail, pipeline, activation);
criterion_main!(benches);
