//! Invariants checked on random inputs.

use std::sync::OnceLock;

use levy_core::catalog::{catalog, make_stable, BernsteinFunction, ProcessSpec};
use levy_core::experiments::weighted_slope;
use levy_core::exponent::{certificate_for, pruitt_h, psi_from_spec, CharacteristicExponent};
use levy_core::mc::{map_replicas, simulate_exit, stream_key, PathConfig, TargetSet};
use levy_core::potential::{
    ball_potential, kernel_bracket_sbm, stehfest_invert, stehfest_weights, subordinator_potential,
    PotentialBracket, SUB_LOWER, SUB_UPPER,
};
use levy_core::special::log_grid;
use proptest::prelude::*;
use rand::Rng;

fn zoo() -> &'static [(ProcessSpec, CharacteristicExponent)] {
    static ZOO: OnceLock<Vec<(ProcessSpec, CharacteristicExponent)>> = OnceLock::new();
    ZOO.get_or_init(|| {
        catalog(3)
            .unwrap()
            .into_iter()
            .map(|s| {
                let e = psi_from_spec(&s).unwrap();
                (s, e)
            })
            .collect()
    })
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // The envelope is interpolated between grid nodes, so it may dip below ψ0
    // by the interpolation error (under 1%) but never by more.
    #[test]
    fn envelope_dominates_and_stays_within_twelve(i in 0usize..9, r in log_uniform(1e-3, 1e3)) {
        let (_, exp) = &zoo()[i];
        let (p, s) = (exp.psi0(r), exp.psi_star(r));
        prop_assert!(s >= p * (1.0 - 1e-2));
        prop_assert!(s <= 12.0 * p);
    }

    #[test]
    fn envelope_is_monotone_with_quadratic_growth(
        i in 0usize..9,
        r in log_uniform(1e-3, 1e3),
        lambda in log_uniform(1.0, 1e2),
    ) {
        let (_, exp) = &zoo()[i];
        let (a, b) = (exp.psi_star(r), exp.psi_star(lambda * r));
        prop_assert!(b >= a * (1.0 - 1e-9));
        prop_assert!(b <= 2.0 * (1.0 + lambda * lambda) * a);
    }

    #[test]
    fn subordinator_potential_within_bracket(alpha in 0.1f64..2.0, r in log_uniform(1e-4, 1e4)) {
        let phi = BernsteinFunction::stable(alpha).unwrap();
        let u = subordinator_potential(&phi).cdf(r);
        let p = phi.eval(1.0 / r);
        prop_assert!(SUB_LOWER / p <= u && u <= SUB_UPPER / p);
    }

    #[test]
    fn stehfest_inverts_powers(k in 1i32..4, t in log_uniform(1e-2, 1e2)) {
        // ℒ^{-1}[λ^{-k}](t) = t^{k−1}/(k−1)!
        let w = stehfest_weights(12);
        let v = stehfest_invert(|l| l.powi(-k), t, &w);
        let fact: f64 = (1..k).map(f64::from).product();
        let want = t.powi(k - 1) / fact;
        prop_assert!((v / want - 1.0).abs() < 1e-4);
    }

    #[test]
    fn bracket_flag_matches_its_definition(
        lo in 0.0f64..10.0,
        width in -1.0f64..10.0,
        est in -5.0f64..25.0,
    ) {
        let hi = lo + width;
        let b = PotentialBracket::new(1.0, Some(lo), Some(est), hi, "test");
        prop_assert_eq!(b.violated, lo > hi || est < lo || est > hi);
    }

    #[test]
    fn stream_keys_separate_purposes(seed: u64, p in 0u64..1000, q in 0u64..1000) {
        prop_assume!(p != q);
        prop_assert_ne!(stream_key(seed, p), stream_key(seed, q));
    }

    #[test]
    fn ball_target_reach(
        c in prop::collection::vec(-1.0f64..1.0, 3),
        rho in 0.01f64..1.0,
        big in 0.1f64..3.0,
    ) {
        let reach = c.iter().map(|v| v * v).sum::<f64>().sqrt() + rho;
        let a = TargetSet::ball(c.clone(), rho);
        prop_assert_eq!(a.inside_ball(big), reach <= big * (1.0 + 1e-12));
        prop_assert!(a.contains(&c));
    }

    #[test]
    fn weighted_slope_recovers_power_laws(
        s in 0.1f64..2.0,
        c in log_uniform(1e-3, 1e3),
        ses in prop::collection::vec(log_uniform(1e-4, 1e-1), 6),
    ) {
        let pts: Vec<(f64, f64, f64)> = ses
            .iter()
            .enumerate()
            .map(|(k, &se)| {
                let d = 0.5f64.powi(k as i32 + 1);
                (d, c * d.powf(s), se)
            })
            .collect();
        let (slope, _) = weighted_slope(&pts);
        prop_assert!((slope - s).abs() < 1e-9);
    }

    #[test]
    fn log_grid_is_geometric(lo in log_uniform(1e-6, 1.0), ratio in log_uniform(2.0, 1e6), n in 2usize..100) {
        let g = log_grid(lo, lo * ratio, n);
        prop_assert_eq!(g.len(), n);
        prop_assert!((g[0] / lo - 1.0).abs() < 1e-12);
        prop_assert!((g[n - 1] / (lo * ratio) - 1.0).abs() < 1e-12);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fingerprint_survives_a_json_round_trip(alpha in 0.05f64..2.0, d in 1usize..7) {
        let s = make_stable(alpha, d).unwrap();
        let back = ProcessSpec::from_json(&s.canonical_json()).unwrap();
        prop_assert_eq!(back.fingerprint(), s.fingerprint());
        let other = s.with_dimension(d + 1).unwrap();
        prop_assert_ne!(other.fingerprint(), s.fingerprint());
    }
}

#[test]
fn envelope_converges_under_grid_doubling() {
    for (spec, exp) in zoo() {
        let fine = exp.with_envelope_points(4096).unwrap();
        for r in log_grid(1e-3, 1e3, 61) {
            let (a, b) = (exp.psi_star(r), fine.psi_star(r));
            assert!(
                (a / b - 1.0).abs() < 1e-2,
                "{} at r = {r}: {a} vs {b}",
                spec.name
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pruitt_within_envelope_bounds(i in 0usize..9, r in log_uniform(1e-2, 1e2)) {
        let (spec, exp) = &zoo()[i];
        let h = pruitt_h(spec, r).unwrap();
        let ps = exp.psi_star(1.0 / r);
        prop_assert!(0.5 * ps <= h && h <= 8.0 * 7.0 * ps, "h = {h}, ψ* = {ps}");
    }

    #[test]
    fn stable_brackets_hold(alpha in 0.3f64..2.0, x in log_uniform(1e-2, 1e2)) {
        let spec = make_stable(alpha, 3).unwrap();
        let exp = psi_from_spec(&spec).unwrap();
        let cert = certificate_for(&exp, 0.0);
        prop_assert!(cert.verified);
        let k = kernel_bracket_sbm(&spec, &exp, Some(&cert), x).unwrap();
        prop_assert!(!k.violated, "{:?}", k);
        let b = ball_potential(&spec, &exp, x).unwrap();
        prop_assert!(!b.violated, "{:?}", b);
    }

    #[test]
    fn replicas_do_not_depend_on_the_pool(n in 1usize..200, key: u64, threads in 1usize..5) {
        let draw = || map_replicas(n, key, |i, rng| (i, rng.random::<u64>()));
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(draw);
        let pooled = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(draw);
        prop_assert_eq!(&serial, &pooled);
        prop_assert!(serial.iter().enumerate().all(|(i, (j, _))| i == *j));
    }

    #[test]
    fn exits_leave_the_ball(seed: u64, r in 0.2f64..5.0, alpha in 0.5f64..2.0) {
        let spec = make_stable(alpha, 3).unwrap();
        let cfg = PathConfig { dt: 1e-2 * r.powf(alpha), n: 64, seed, ..PathConfig::default() };
        let b = simulate_exit(&spec, &[0.0; 3], r, &cfg).unwrap();
        prop_assert_eq!(b.n(), 64);
        for e in &b.records {
            let norm = e.exit.iter().map(|v| v * v).sum::<f64>().sqrt();
            let pre = e.pre_exit.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(norm >= r && pre < r && e.tau > 0.0);
        }
    }
}
