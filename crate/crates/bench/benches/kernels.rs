use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use levy_core::catalog::{make_named, make_stable, BernsteinFunction, NamedKind};
use levy_core::exponent::{certificate_for, psi_from_spec};
use levy_core::potential::{ball_potential, green_kernel, subordinator_potential_inverted};
use levy_core::verify::{verify_spec, VerifyOptions};
use std::hint::black_box;

fn kernels(c: &mut Criterion) {
    let stable = make_stable(1.0, 3).unwrap();
    let rel = make_named(NamedKind::Relativistic { alpha: 1.0, m: 1.0 }, 3).unwrap();
    let mut g = c.benchmark_group("green_kernel");
    for (name, spec) in [("stable-1", &stable), ("relativistic-1-1", &rel)] {
        g.bench_with_input(BenchmarkId::from_parameter(name), spec, |b, s| {
            b.iter(|| green_kernel(s, black_box(0.7)).unwrap())
        });
    }
    g.finish();

    let exp = psi_from_spec(&rel).unwrap();
    c.bench_function("ball_potential/relativistic-1-1", |b| {
        b.iter(|| ball_potential(&rel, &exp, black_box(1.3)).unwrap())
    });
    let phi = BernsteinFunction::relativistic(1.0, 1.0).unwrap();
    c.bench_function("subordinator_inversion/relativistic", |b| {
        b.iter(|| subordinator_potential_inverted(black_box(&phi)))
    });
}

fn exponents(c: &mut Criterion) {
    let truncated = make_named(NamedKind::Truncated { alpha: 1.0 }, 3).unwrap();
    let mut g = c.benchmark_group("exponent");
    g.sample_size(10);
    g.bench_function("envelope/truncated-1", |b| {
        b.iter(|| psi_from_spec(black_box(&truncated)).unwrap())
    });
    let exp = psi_from_spec(&truncated).unwrap();
    g.bench_function("wlsc_fit/truncated-1", |b| {
        b.iter(|| certificate_for(&exp, 0.0))
    });
    let stable = make_stable(1.0, 3).unwrap();
    g.bench_function("verify/stable-1", |b| {
        b.iter(|| verify_spec(&stable, &VerifyOptions::default()))
    });
    g.finish();
}

criterion_group!(benches, kernels, exponents);
criterion_main!(benches);
