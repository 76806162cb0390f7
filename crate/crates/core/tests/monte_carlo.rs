//! Path simulation against exact exit, hitting and Green-function laws.
//!
//! Each tolerance is four standard errors plus an allowance for the
//! discrete-time monitoring bias, which is `O(Δt^{1/α})` for exits.

use std::f64::consts::PI;

use levy_core::catalog::make_stable;
use levy_core::mc::{
    estimate_hitting_before_exit, occupation, simulate_exit, ExitBatch, PathConfig, TargetSet,
};
use levy_core::potential::{hunt_green, poisson_kernel, ExteriorRegion, GreenKernel};

fn cauchy_exits(n: usize, seed: u64) -> ExitBatch {
    let spec = make_stable(1.0, 3).unwrap();
    let cfg = PathConfig {
        dt: 1e-3,
        n,
        seed,
        ..PathConfig::default()
    };
    simulate_exit(&spec, &[0.0; 3], 1.0, &cfg).unwrap()
}

#[test]
fn cauchy_exit_time_and_exit_law_from_the_centre() {
    let batch = cauchy_exits(20_000, 31);
    assert_eq!(batch.censored, 0);
    // E τ = Γ(d/2) r^α / (2^α Γ(1 + α/2) Γ((d + α)/2)) = 1/2.
    let (tau, se) = batch.mean_tau();
    assert!((tau - 0.5).abs() < 4.0 * se + 0.01, "E τ = {tau} ± {se}");
    // P(|X_τ| ≥ s) = (2/π) arcsin(r/s) for α = 1 in d = 3.
    for s in [1.5f64, 2.0, 4.0] {
        let (p, se) = batch.proportion(|z| z.iter().map(|v| v * v).sum::<f64>().sqrt() >= s);
        let want = 2.0 / PI * (1.0 / s).asin();
        assert!((p - want).abs() < 4.0 * se + 0.01, "s = {s}: {p} vs {want}");
    }
    assert!(batch.records.iter().all(|e| e.jumped));
    assert!(batch
        .records
        .windows(2)
        .all(|w| w[0].replica < w[1].replica));
}

#[test]
fn brownian_hitting_probability_of_an_inner_ball() {
    // P^x(T_{B_a} < τ_{B_R}) = (1/|x| − 1/R)/(1/a − 1/R) = 1/3 here.
    let bm = make_stable(2.0, 3).unwrap();
    let cfg = PathConfig {
        dt: 1e-4,
        n: 10_000,
        seed: 5,
        ..PathConfig::default()
    };
    let a = TargetSet::ball(vec![0.0; 3], 0.25);
    let p = estimate_hitting_before_exit(&bm, &a, 1.0, 0.5, &[0.5, 0.0, 0.0], &cfg).unwrap();
    assert!((p.p - 1.0 / 3.0).abs() < 4.0 * p.stderr + 0.01, "{p:?}");
}

#[test]
fn hunt_formula_for_brownian_motion() {
    // G_{B_1}(0, y) = (1/|y| − 1)/(4π).
    let bm = make_stable(2.0, 3).unwrap();
    let kernel = GreenKernel::new(&bm).unwrap();
    let cfg = PathConfig {
        dt: 1e-4,
        n: 10_000,
        seed: 9,
        ..PathConfig::default()
    };
    let batch = simulate_exit(&bm, &[0.0; 3], 1.0, &cfg).unwrap();
    for t in [0.25, 0.5] {
        let y = [t, 0.0, 0.0];
        let g = hunt_green(&kernel, 1.0, &[0.0; 3], &y, &batch.records).unwrap();
        let want = (1.0 / t - 1.0) / (4.0 * PI);
        assert!(
            (g.value - want).abs() < 4.0 * g.stderr + 0.02 * want,
            "|y| = {t}: {} vs {want}",
            g.value
        );
        assert!(!g.clamped);
    }
}

#[test]
fn poisson_kernel_from_occupation_matches_the_exit_law() {
    let spec = make_stable(1.0, 3).unwrap();
    let cfg = PathConfig {
        dt: 1e-3,
        n: 4_000,
        seed: 13,
        ..PathConfig::default()
    };
    let occ = occupation(&spec, 1.0, &[0.0; 3], &cfg).unwrap();
    let regions = [
        ExteriorRegion::Shell {
            inner: 2.0,
            outer: f64::INFINITY,
        },
        ExteriorRegion::Shell {
            inner: 1.0,
            outer: f64::INFINITY,
        },
    ];
    let pk = poisson_kernel(&spec, &occ, &regions).unwrap();
    // Jumps out of the ball from the centre land beyond 2 with probability 1/3.
    let c = &pk.cells[0];
    assert!((c.mass - 1.0 / 3.0).abs() < 4.0 * c.stderr + 0.02, "{c:?}");
    // Every exit of a pure-jump process is by a jump.
    let all = &pk.cells[1];
    assert!((all.mass - 1.0).abs() < 4.0 * all.stderr + 0.05, "{all:?}");
}
