//! Library values against closed forms derived independently of the code paths.

use std::f64::consts::PI;

use levy_core::catalog::{
    make_named, make_stable, stable_levy_constant, BernsteinFunction, NamedKind,
};
use levy_core::exponent::{certificate_for, pruitt_h, psi_from_spec};
use levy_core::potential::{
    ball_potential, capacity_estimate, green_kernel, kernel_bracket_sbm, laplace_crosscheck,
    riesz_kernel, subordinator_potential, subordinator_potential_inverted,
};
use levy_core::special::{gamma, unit_ball_volume};

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

#[test]
fn stable_exponent_is_a_power() {
    for alpha in [0.5f64, 1.0, 1.5, 2.0] {
        let exp = psi_from_spec(&make_stable(alpha, 3).unwrap()).unwrap();
        for r in [1e-3f64, 0.2, 1.0, 7.0, 1e3] {
            assert!(
                rel(exp.psi0(r), r.powf(alpha)) < 1e-9,
                "α = {alpha}, r = {r}"
            );
            assert!(
                rel(exp.psi_star(r), r.powf(alpha)) < 1e-6,
                "α = {alpha}, r = {r}"
            );
        }
    }
}

#[test]
fn levy_constants_of_cauchy_processes() {
    // ν(x) = 1/(π x²) on the line and 1/(π² |x|⁴) in space.
    assert!(rel(stable_levy_constant(1.0, 1), 1.0 / PI) < 1e-14);
    assert!(rel(stable_levy_constant(1.0, 3), 1.0 / (PI * PI)) < 1e-14);
}

#[test]
fn pruitt_function_of_the_cauchy_process() {
    // h(r) = ∫ min(1, |x|²/r²) |x|^{-4}/π² dx = (4π/π²)(1 + 1)/r.
    let spec = make_stable(1.0, 3).unwrap();
    for r in [0.1, 1.0, 10.0] {
        let want = 8.0 / (PI * r);
        assert!(rel(pruitt_h(&spec, r).unwrap(), want) < 1e-6, "r = {r}");
    }
}

#[test]
fn stable_kernels_match_riesz() {
    // G(x) = Γ((d−α)/2)/(2^α π^{d/2} Γ(α/2)) |x|^{α−d}.
    for alpha in [0.5, 1.0, 1.5] {
        let spec = make_stable(alpha, 3).unwrap();
        for x in [0.05f64, 1.0, 20.0] {
            let c =
                gamma((3.0 - alpha) / 2.0) / (2f64.powf(alpha) * PI.powf(1.5) * gamma(alpha / 2.0));
            let want = c * x.powf(alpha - 3.0);
            assert!(
                rel(green_kernel(&spec, x).unwrap(), want) < 1e-6,
                "α = {alpha}, x = {x}"
            );
            assert!(rel(riesz_kernel(alpha, 3, x), want) < 1e-14);
        }
    }
}

#[test]
fn stable_ball_potential_integrates_the_riesz_kernel() {
    // G(B_r) = ∫_{B_r} c|x|^{α−d} dx = c·4π r^α/α in d = 3.
    for alpha in [1.0, 1.5] {
        let spec = make_stable(alpha, 3).unwrap();
        let exp = psi_from_spec(&spec).unwrap();
        for r in [0.5f64, 2.0] {
            let want = riesz_kernel(alpha, 3, 1.0) * 4.0 * PI * r.powf(alpha) / alpha;
            let b = ball_potential(&spec, &exp, r).unwrap();
            assert!(
                rel(b.estimate.unwrap(), want) < 1e-6,
                "α = {alpha}, r = {r}"
            );
            assert!(!b.violated);
        }
    }
}

#[test]
fn brownian_capacity_estimate_is_eight_thirds_pi_r() {
    // |B_r|/G(B_r) = (4πr³/3)/(r²/2).
    let bm = make_stable(2.0, 3).unwrap();
    let exp = psi_from_spec(&bm).unwrap();
    for r in [0.5, 1.0, 3.0] {
        let c = capacity_estimate(&bm, &exp, r).unwrap();
        assert!(rel(c.estimate.unwrap(), 8.0 * PI * r / 3.0) < 1e-9);
        assert!(c.lower.unwrap() <= c.estimate.unwrap());
    }
}

#[test]
fn relativistic_kernel_in_the_stable_regimes() {
    // φ(λ) = √(λ + 1) − 1 behaves like √λ near 0 in x and like λ/2 far away.
    let spec = make_named(NamedKind::Relativistic { alpha: 1.0, m: 1.0 }, 3).unwrap();
    let near = green_kernel(&spec, 1e-3).unwrap() / riesz_kernel(1.0, 3, 1e-3);
    assert!(rel(near, 1.0) < 2e-2, "near ratio {near}");
    let far = green_kernel(&spec, 50.0).unwrap() / (2.0 / (4.0 * PI * 50.0));
    assert!(rel(far, 1.0) < 2e-2, "far ratio {far}");
}

#[test]
fn relativistic_bracket_contains_the_estimate() {
    let spec = make_named(NamedKind::Relativistic { alpha: 1.0, m: 1.0 }, 3).unwrap();
    let exp = psi_from_spec(&spec).unwrap();
    let cert = certificate_for(&exp, 0.0);
    for x in [0.01, 0.3, 1.0, 30.0] {
        let b = kernel_bracket_sbm(&spec, &exp, Some(&cert), x).unwrap();
        assert!(!b.violated, "x = {x}: {b:?}");
        assert!(b.estimate.unwrap() <= b.upper);
    }
}

#[test]
fn laplace_identity_for_subordinate_processes() {
    // f(u) = G(B_√u) for BM is u/2, so λℒf(λ) = 1/(2λ).
    let bm = make_stable(2.0, 3).unwrap();
    let exp = psi_from_spec(&bm).unwrap();
    for l in [0.1, 1.0, 10.0] {
        let c = laplace_crosscheck(&bm, &exp, l).unwrap();
        assert!(rel(c.transform, 0.5 / l) < 1e-6 && rel(c.radial, 0.5 / l) < 1e-6);
    }
    let rel_spec = make_named(NamedKind::Relativistic { alpha: 1.0, m: 1.0 }, 3).unwrap();
    let exp = psi_from_spec(&rel_spec).unwrap();
    for l in [0.1, 1.0, 10.0] {
        assert!(laplace_crosscheck(&rel_spec, &exp, l).unwrap().rel_diff < 1e-4);
    }
}

#[test]
fn subordinator_potential_closed_forms() {
    // φ(λ) = λ^{a}: U[0, r) = r^a/Γ(1 + a).
    for alpha in [0.5, 1.0, 1.5] {
        let phi = BernsteinFunction::stable(alpha).unwrap();
        let a = alpha / 2.0;
        let closed = subordinator_potential(&phi);
        let inverted = subordinator_potential_inverted(&phi);
        for r in [1e-3f64, 0.5, 4.0, 1e3] {
            let want = r.powf(a) / gamma(1.0 + a);
            assert!(rel(closed.cdf(r), want) < 1e-12);
            assert!(rel(inverted.cdf(r), want) < 1e-3, "α = {alpha}, r = {r}");
        }
    }
}

// Computed through exp(ln Γ), so a few ulps are expected.
#[test]
fn unit_ball_volumes() {
    assert!(rel(unit_ball_volume(1), 2.0) < 1e-13);
    assert!(rel(unit_ball_volume(2), PI) < 1e-13);
    assert!(rel(unit_ball_volume(3), 4.0 * PI / 3.0) < 1e-13);
    assert!(rel(unit_ball_volume(4), PI * PI / 2.0) < 1e-13);
}
