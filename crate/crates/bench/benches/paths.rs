use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use levy_core::catalog::{make_named, make_stable, NamedKind};
use levy_core::mc::{replica_rng, simulate_exit, IncrementSampler, PathConfig};
use std::hint::black_box;

fn increments(c: &mut Criterion) {
    let specs = [
        make_stable(1.0, 3).unwrap(),
        make_named(NamedKind::Relativistic { alpha: 1.0, m: 1.0 }, 3).unwrap(),
        make_named(NamedKind::Truncated { alpha: 1.0 }, 3).unwrap(),
    ];
    let mut g = c.benchmark_group("increment");
    g.throughput(Throughput::Elements(1));
    for spec in &specs {
        let sampler = IncrementSampler::new(spec, 1e-2, 1e-2).unwrap();
        let mut rng = replica_rng(1, 0);
        g.bench_function(BenchmarkId::from_parameter(&spec.name), |b| {
            b.iter(|| black_box(sampler.sample(&mut rng)))
        });
    }
    g.finish();
}

fn exits(c: &mut Criterion) {
    let spec = make_stable(1.0, 3).unwrap();
    let cfg = PathConfig {
        dt: 1e-2,
        n: 1_000,
        seed: 1,
        ..PathConfig::default()
    };
    let mut g = c.benchmark_group("exit");
    g.sample_size(10);
    g.throughput(Throughput::Elements(cfg.n as u64));
    g.bench_function("stable-1/B1", |b| {
        b.iter(|| simulate_exit(&spec, &[0.0; 3], 1.0, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, increments, exits);
criterion_main!(benches);
