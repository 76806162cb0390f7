//! Analytic inequality suite: every two-sided bound with explicit constants,
//! evaluated on fixed log grids without Monte Carlo.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::ProcessSpec;
use crate::error::{Error, Result};
use crate::exponent::{
    bernstein_envelope, certificate_for, pruitt_h, psi_from_spec, CharacteristicExponent,
    ScalingCertificate,
};
use crate::potential::{
    ball_potential, capacity_estimate, dimension_constants, green_kernel, kernel_bracket,
    kernel_bracket_sbm, laplace_crosscheck, subordinator_potential,
    subordinator_potential_inverted, KernelConstants, PotentialMethod, BALL_UPPER,
};
use crate::special::log_grid;

/// Largest tolerated share of raw inversion values outside the subordinator bracket.
pub const INVERSION_VIOLATION_LIMIT: f64 = 0.05;
/// Relative agreement required of the Laplace cross-check.
pub const LAPLACE_TOLERANCE: f64 = 1e-4;
/// `ψ* ≤ 12 ψ0`.
pub const PSI_STAR_FACTOR: f64 = 12.0;

/// Grids and probe values of the suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Radii for potential-measure, kernel and capacity checks.
    pub potential_grid: Vec<f64>,
    /// Radii for exponent checks.
    pub exponent_grid: Vec<f64>,
    /// Ratios `s` of the envelope scaling sandwich.
    pub scalings: Vec<f64>,
    pub laplace_lambdas: Vec<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            potential_grid: log_grid(1e-2, 1e2, 33),
            exponent_grid: log_grid(1e-3, 1e3, 49),
            scalings: vec![0.125, 0.5, 1.0, 2.0, 8.0],
            laplace_lambdas: vec![0.1, 1.0, 10.0],
        }
    }
}

/// Outcome of one check for one specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub spec: String,
    pub check: String,
    pub points: usize,
    pub violations: usize,
    /// Smallest log-margin `min(ln(v/lower), ln(upper/v))`; negative on violation.
    pub worst_margin: f64,
    /// First offending point, an error message, or a diagnostic.
    pub detail: Option<String>,
    /// Set when a computation failed instead of producing a value.
    pub errored: bool,
    /// Reason the check does not apply to this specification.
    pub skipped: Option<String>,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0 && !self.errored
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckSummary>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckSummary::passed)
    }

    pub fn errored(&self) -> bool {
        self.checks.iter().any(|c| c.errored)
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

struct Tally {
    s: CheckSummary,
}

impl Tally {
    fn new(spec: &ProcessSpec, check: &str) -> Self {
        Self {
            s: CheckSummary {
                spec: spec.name.clone(),
                check: check.into(),
                points: 0,
                violations: 0,
                worst_margin: f64::INFINITY,
                detail: None,
                errored: false,
                skipped: None,
            },
        }
    }

    fn skip(spec: &ProcessSpec, check: &str, why: impl Into<String>) -> CheckSummary {
        let mut t = Self::new(spec, check);
        t.s.skipped = Some(why.into());
        t.s
    }

    /// Records `lower ≤ v ≤ upper` at `at`.
    fn bound(&mut self, at: f64, lower: Option<f64>, v: f64, upper: Option<f64>) {
        self.s.points += 1;
        let lo = lower.map_or(f64::INFINITY, |l| (v / l).ln());
        let hi = upper.map_or(f64::INFINITY, |u| (u / v).ln());
        let margin = if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            lo.min(hi)
        };
        let margin = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        };
        self.s.worst_margin = self.s.worst_margin.min(margin);
        if margin < 0.0 {
            self.s.violations += 1;
            if self.s.detail.is_none() {
                self.s.detail = Some(format!("at {at:e}: {v:e} outside [{lower:?}, {upper:?}]"));
            }
        }
    }

    fn error(&mut self, e: &Error) {
        self.s.errored = true;
        if self.s.detail.is_none() {
            self.s.detail = Some(e.to_string());
        }
    }

    /// Records that the bounds themselves are ordered, `lower ≤ upper`.
    fn ordered(&mut self, at: f64, lower: Option<f64>, upper: f64) {
        match lower {
            Some(l) => self.bound(at, Some(l), (l * upper).sqrt(), Some(upper)),
            None => self.bound(at, None, upper, Some(upper)),
        }
    }

    fn note(&mut self, msg: impl Into<String>) {
        if self.s.detail.is_none() {
            self.s.detail = Some(msg.into());
        }
    }

    fn done(self) -> CheckSummary {
        self.s
    }
}

/// Global certificate when one verifies, otherwise one above `θ = 1`.
pub fn standard_certificate(exp: &CharacteristicExponent) -> ScalingCertificate {
    let global = certificate_for(exp, 0.0);
    if global.verified {
        return global;
    }
    certificate_for(exp, 1.0)
}

fn psi_star_vs_psi(
    spec: &ProcessSpec,
    exp: &CharacteristicExponent,
    o: &VerifyOptions,
) -> CheckSummary {
    let mut t = Tally::new(spec, "psi-star-within-12-psi");
    for &r in &o.exponent_grid {
        match exp.try_psi0(r) {
            Ok(p) => t.bound(r, None, exp.psi_star(r), Some(PSI_STAR_FACTOR * p)),
            Err(e) => t.error(&e),
        }
    }
    t.done()
}

fn envelope_scaling(
    spec: &ProcessSpec,
    exp: &CharacteristicExponent,
    o: &VerifyOptions,
) -> CheckSummary {
    let mut t = Tally::new(spec, "psi-star-scaling");
    for &r in &o.exponent_grid {
        let base = exp.psi_star(r);
        for &s in &o.scalings {
            let lo = 0.5 * s * s / (s * s + 1.0) * base;
            let hi = 2.0 * (1.0 + s * s) * base;
            t.bound(r * s, Some(lo), exp.psi_star(s * r), Some(hi));
        }
    }
    t.done()
}

fn pruitt(spec: &ProcessSpec, exp: &CharacteristicExponent, o: &VerifyOptions) -> CheckSummary {
    let mut t = Tally::new(spec, "pruitt-h-vs-psi-star");
    let k = 8.0 * (1.0 + 2.0 * spec.d() as f64);
    for &r in &o.exponent_grid {
        match pruitt_h(spec, r) {
            Ok(h) => {
                let ps = exp.psi_star(1.0 / r);
                t.bound(r, Some(0.5 * ps), h, Some(k * ps));
            }
            Err(e) => t.error(&e),
        }
    }
    t.done()
}

fn envelope_sandwich(
    spec: &ProcessSpec,
    exp: &CharacteristicExponent,
    o: &VerifyOptions,
) -> CheckSummary {
    let mut t = Tally::new(spec, "bernstein-envelope-sandwich");
    let env = match bernstein_envelope(spec) {
        Ok(e) => e,
        Err(e) => {
            t.error(&e);
            return t.done();
        }
    };
    let k = 8.0 * (1.0 + 2.0 * spec.d() as f64);
    for &r in &o.exponent_grid {
        match env.try_eval(r * r) {
            Ok(f) => t.bound(r, Some(f / k), exp.psi_star(r), Some(4.0 * f)),
            Err(e) => t.error(&e),
        }
    }
    t.done()
}

fn subordinator_checks(spec: &ProcessSpec, o: &VerifyOptions) -> Vec<CheckSummary> {
    let Some(phi) = spec.bernstein() else {
        let why = "not a subordinate Brownian motion";
        return vec![
            Tally::skip(spec, "subordinator-bracket", why),
            Tally::skip(spec, "subordinator-inversion", why),
        ];
    };
    let chosen = subordinator_potential(phi);
    let mut t = Tally::new(spec, "subordinator-bracket");
    let mut prev = 0.0;
    for &r in &o.potential_grid {
        let (lo, hi) = chosen.bracket(r);
        match chosen.estimate(r) {
            Some(u) => {
                t.bound(r, Some(lo), u, Some(hi));
                if u < prev {
                    t.s.violations += 1;
                    t.note(format!("U[0, r) decreases at r = {r:e}"));
                }
                prev = u;
            }
            None => t.bound(r, Some(lo), lo, Some(hi)),
        }
    }
    let bracket = t.done();
    if !phi.unbounded {
        return vec![
            bracket,
            Tally::skip(spec, "subordinator-inversion", "bounded Bernstein function"),
        ];
    }
    let inv = subordinator_potential_inverted(phi);
    let mut t = Tally::new(spec, "subordinator-inversion");
    t.s.points = o.potential_grid.len();
    t.s.worst_margin = if inv.violation_rate > 0.0 {
        (INVERSION_VIOLATION_LIMIT / inv.violation_rate).ln()
    } else {
        f64::INFINITY
    };
    if inv.violation_rate >= INVERSION_VIOLATION_LIMIT {
        t.s.violations = 1;
    }
    let mut msg = format!(
        "raw violation rate {:.4}, largest excursion {:.3e}{}",
        inv.violation_rate,
        inv.max_excursion,
        if inv.low_confidence {
            ", low confidence"
        } else {
            ""
        }
    );
    if chosen.method() == PotentialMethod::ClosedForm {
        let dev = o
            .potential_grid
            .iter()
            .map(|&r| (inv.cdf(r) / chosen.cdf(r) - 1.0).abs())
            .fold(0.0, f64::max);
        msg.push_str(&format!("; max deviation from closed form {dev:.3e}"));
    }
    t.note(msg);
    vec![bracket, t.done()]
}

fn ball_checks(
    spec: &ProcessSpec,
    exp: &CharacteristicExponent,
    o: &VerifyOptions,
) -> Vec<CheckSummary> {
    let mut ball = Tally::new(spec, "ball-potential-bracket");
    let mut cap = Tally::new(spec, "capacity-lower-bound");
    for &r in &o.potential_grid {
        match ball_potential(spec, exp, r) {
            Ok(b) => match b.estimate {
                Some(g) => ball.bound(r, b.lower, g, Some(b.upper)),
                None => {
                    ball.ordered(r, b.lower, b.upper);
                    ball.note("bounds only: no kernel for this specification");
                }
            },
            Err(e) => ball.error(&e),
        }
        match capacity_estimate(spec, exp, r) {
            Ok(c) => match c.estimate {
                Some(v) => cap.bound(r, c.lower, v, None),
                None => {
                    cap.s.points += 1;
                    cap.note("bounds only: no kernel for this specification");
                }
            },
            Err(e) => cap.error(&e),
        }
    }
    vec![ball.done(), cap.done()]
}

fn kernel_checks(
    spec: &ProcessSpec,
    exp: &CharacteristicExponent,
    cert: &ScalingCertificate,
    o: &VerifyOptions,
) -> Result<Vec<CheckSummary>> {
    let d = spec.d();
    let dc = dimension_constants(d)?;
    let mut kt = Tally::new(spec, "kernel-bracket");
    let cert_opt = Some(cert).filter(|c| c.verified);
    let cert_note = format!(
        "certificate beta = {}, theta = {}, C = {:.4e}, verified = {}",
        cert.beta, cert.theta, cert.c, cert.verified
    );
    if !spec.is_sbm() {
        // No kernel: check the bracket constants are consistent where both ends exist.
        for &x in &o.potential_grid {
            match kernel_bracket(exp, cert_opt, x) {
                Ok(b) => kt.ordered(x, b.lower, b.upper),
                Err(e) => kt.error(&e),
            }
        }
        kt.note(format!(
            "bounds only: no kernel for this specification; {cert_note}"
        ));
        let why = "no kernel for this specification";
        return Ok(vec![
            kt.done(),
            Tally::skip(spec, "kernel-vs-ball-potential", why),
            Tally::skip(spec, "kernel-doubling", why),
        ]);
    }
    let mut gb = Tally::new(spec, "kernel-vs-ball-potential");
    let mut dbl = Tally::new(spec, "kernel-doubling");
    let kc = match cert_opt {
        Some(c) => Some(KernelConstants::from_certificate(d, c)?),
        None => None,
    };
    for &x in &o.potential_grid {
        let g = match kernel_bracket_sbm(spec, exp, cert_opt, x) {
            Ok(b) => {
                kt.bound(x, b.lower, b.estimate.unwrap_or(f64::NAN), Some(b.upper));
                b.estimate.unwrap_or(f64::NAN)
            }
            Err(e) => {
                kt.error(&e);
                continue;
            }
        };
        // G(x)|x|^d / G(B_|x|) lies in [C5/36e, C4/C2] where the C5 bound applies.
        match ball_potential(spec, exp, x) {
            Ok(b) => {
                let ratio = g * x.powi(d as i32) / b.estimate.unwrap_or(f64::NAN);
                let lo = kc
                    .as_ref()
                    .filter(|k| x <= k.lower_range())
                    .map(|k| k.c5 / BALL_UPPER);
                gb.bound(
                    x,
                    lo.or(Some(f64::MIN_POSITIVE)),
                    ratio,
                    Some(dc.c4 / dc.c2),
                );
            }
            Err(e) => gb.error(&e),
        }
        // 1 ≤ G(x)/G(2x) ≤ 2^d C4/C5 for |x| ≤ bR/2.
        if let Some(k) = kc.as_ref().filter(|k| x <= k.lower_range() / 2.0) {
            match green_kernel(spec, 2.0 * x) {
                Ok(g2) => dbl.bound(
                    x,
                    Some(1.0 - 1e-9),
                    g / g2,
                    Some(2f64.powi(d as i32) * dc.c4 / k.c5),
                ),
                Err(e) => dbl.error(&e),
            }
        }
    }
    kt.note(cert_note);
    if kc.is_none() {
        dbl.note("no verified certificate: doubling range unknown");
    }
    Ok(vec![kt.done(), gb.done(), dbl.done()])
}

fn laplace(spec: &ProcessSpec, exp: &CharacteristicExponent, o: &VerifyOptions) -> CheckSummary {
    if !spec.is_sbm() {
        return Tally::skip(
            spec,
            "laplace-cross-check",
            "not a subordinate Brownian motion",
        );
    }
    let mut t = Tally::new(spec, "laplace-cross-check");
    for &l in &o.laplace_lambdas {
        match laplace_crosscheck(spec, exp, l) {
            Ok(c) => t.bound(
                l,
                Some(c.radial * (1.0 - LAPLACE_TOLERANCE)),
                c.transform,
                Some(c.radial * (1.0 + LAPLACE_TOLERANCE)),
            ),
            Err(e) => t.error(&e),
        }
    }
    t.done()
}

/// Runs every applicable check for one specification.
pub fn verify_spec(spec: &ProcessSpec, o: &VerifyOptions) -> Vec<CheckSummary> {
    let exp = match psi_from_spec(spec) {
        Ok(e) => e,
        Err(e) => {
            let mut t = Tally::new(spec, "characteristic-exponent");
            t.error(&e);
            return vec![t.done()];
        }
    };
    let cert = standard_certificate(&exp);
    let mut out = vec![
        psi_star_vs_psi(spec, &exp, o),
        envelope_scaling(spec, &exp, o),
        pruitt(spec, &exp, o),
        envelope_sandwich(spec, &exp, o),
    ];
    out.extend(subordinator_checks(spec, o));
    if spec.d() < 3 {
        let why = format!("d = {} < 3", spec.d());
        for c in [
            "ball-potential-bracket",
            "capacity-lower-bound",
            "kernel-bracket",
            "kernel-vs-ball-potential",
            "kernel-doubling",
            "laplace-cross-check",
        ] {
            out.push(Tally::skip(spec, c, why.clone()));
        }
        return out;
    }
    out.extend(ball_checks(spec, &exp, o));
    match kernel_checks(spec, &exp, &cert, o) {
        Ok(v) => out.extend(v),
        Err(e) => {
            let mut t = Tally::new(spec, "kernel-bracket");
            t.error(&e);
            out.push(t.done());
        }
    }
    out.push(laplace(spec, &exp, o));
    out
}

/// Runs the suite over several specifications; output order follows input order.
pub fn verify_all(specs: &[ProcessSpec], o: &VerifyOptions) -> VerifyReport {
    let checks = specs
        .par_iter()
        .map(|s| verify_spec(s, o))
        .collect::<Vec<_>>()
        .concat();
    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::make_stable;

    #[test]
    fn stable_passes_and_skips_nothing_in_three_dimensions() {
        let spec = make_stable(1.0, 3).unwrap();
        let checks = verify_spec(&spec, &VerifyOptions::default());
        for c in &checks {
            assert!(c.passed(), "{c:?}");
            assert!(c.skipped.is_none(), "{c:?}");
        }
    }

    #[test]
    fn tally_flags_out_of_bracket_values() {
        let spec = make_stable(1.0, 3).unwrap();
        let mut t = Tally::new(&spec, "x");
        t.bound(1.0, Some(1.0), 2.0, Some(3.0));
        t.bound(2.0, Some(1.0), 4.0, Some(3.0));
        t.bound(3.0, Some(1.0), f64::NAN, Some(3.0));
        let s = t.done();
        assert_eq!((s.points, s.violations), (3, 2));
        assert!(s.worst_margin == f64::NEG_INFINITY);
    }
}
