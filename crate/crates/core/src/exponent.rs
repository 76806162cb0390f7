//! Characteristic exponents, their monotone envelopes, Pruitt functions,
//! Bernstein envelopes and weak lower scaling certificates.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::{
    project_density_1d, BernsteinFunction, ProcessKind, ProcessSpec, RadialLevyDensity,
};
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_radial, integrate_with_breaks, wynn_epsilon, QuadOpts};
use crate::special::log_grid;
use crate::table::LogTable;

/// Grid of the cached envelope.
pub const ENVELOPE_LO: f64 = 1e-6;
pub const ENVELOPE_HI: f64 = 1e6;
pub const ENVELOPE_POINTS: usize = 2048;

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Bernstein(BernsteinFunction),
    Projected {
        nu1: Arc<LogTable>,
        breaks: Vec<f64>,
    },
    Func(RadialFn),
}

/// Running maximum of `ψ0` on a log grid, interpolated linearly in log–log.
#[derive(Debug, Clone)]
struct Envelope {
    ln_lo: f64,
    step: f64,
    ln_m: Vec<f64>,
    lo_slope: f64,
    hi_slope: f64,
}

impl Envelope {
    fn build(values: &[f64], lo: f64, hi: f64) -> Envelope {
        let n = values.len();
        let mut m = Vec::with_capacity(n);
        let mut run = 0.0f64;
        for &v in values {
            run = run.max(v);
            m.push(run);
        }
        let ln_m: Vec<f64> = m.iter().map(|v| v.ln()).collect();
        let step = (hi.ln() - lo.ln()) / (n - 1) as f64;
        let slope = |a: f64, b: f64| {
            if a.is_finite() && b.is_finite() {
                ((b - a) / step).max(0.0)
            } else {
                0.0
            }
        };
        Envelope {
            ln_lo: lo.ln(),
            step,
            lo_slope: slope(ln_m[0], ln_m[1]),
            hi_slope: slope(ln_m[n - 2], ln_m[n - 1]),
            ln_m,
        }
    }

    fn eval(&self, r: f64) -> f64 {
        let n = self.ln_m.len();
        let t = (r.ln() - self.ln_lo) / self.step;
        if t <= 0.0 {
            return (self.ln_m[0] + self.lo_slope * t * self.step).exp();
        }
        if t >= (n - 1) as f64 {
            return (self.ln_m[n - 1] + self.hi_slope * (t - (n - 1) as f64) * self.step).exp();
        }
        let i = t.floor() as usize;
        let f = t - i as f64;
        let (a, b) = (self.ln_m[i], self.ln_m[i + 1]);
        if a.is_finite() {
            (a + f * (b - a)).exp()
        } else {
            b.exp() * f
        }
    }
}

/// Radial characteristic exponent `ψ0` with its monotone envelope `ψ*`.
#[derive(Clone)]
pub struct CharacteristicExponent {
    pub d: usize,
    pub a: f64,
    source: Source,
    monotone: bool,
    envelope: Option<Arc<Envelope>>,
}

impl fmt::Debug for CharacteristicExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharacteristicExponent")
            .field("d", &self.d)
            .field("a", &self.a)
            .field("monotone", &self.monotone)
            .finish_non_exhaustive()
    }
}

impl CharacteristicExponent {
    /// Exponent from an arbitrary radial profile; `monotone` asserts `ψ0` is non-decreasing.
    pub fn from_fn(
        d: usize,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        monotone: bool,
    ) -> Result<Self> {
        Self::with_source(d, 0.0, Source::Func(Arc::new(f)), monotone, ENVELOPE_POINTS)
    }

    fn with_source(
        d: usize,
        a: f64,
        source: Source,
        monotone: bool,
        points: usize,
    ) -> Result<Self> {
        let mut e = Self {
            d,
            a,
            source,
            monotone,
            envelope: None,
        };
        if !monotone {
            e.envelope = Some(Arc::new(e.build_envelope(points)?));
        }
        Ok(e)
    }

    fn build_envelope(&self, points: usize) -> Result<Envelope> {
        let grid = log_grid(ENVELOPE_LO, ENVELOPE_HI, points);
        let vals = grid
            .iter()
            .map(|&r| self.try_psi0(r))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Envelope::build(&vals, ENVELOPE_LO, ENVELOPE_HI))
    }

    /// Same exponent with the envelope rebuilt on `points` grid nodes.
    pub fn with_envelope_points(&self, points: usize) -> Result<Self> {
        Self::with_source(self.d, self.a, self.source.clone(), self.monotone, points)
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// `ψ0(r)`, or a quadrature diagnostic.
    pub fn try_psi0(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let r = r.abs();
        match &self.source {
            Source::Bernstein(phi) => Ok(phi.eval(r * r)),
            Source::Func(f) => Ok(f(r)),
            Source::Projected { nu1, breaks } => {
                let jump = psi_tilde_from_nu1(|z| nu1.eval(z), breaks, r)?;
                Ok(self.a * r * r + jump)
            }
        }
    }

    /// `ψ0(r)`; on quadrature failure returns the partial value reached.
    pub fn psi0(&self, r: f64) -> f64 {
        match self.try_psi0(r) {
            Ok(v) => v,
            Err(Error::Quadrature { partial, .. }) => partial,
            Err(_) => f64::NAN,
        }
    }

    /// `ψ*(r) = sup_{ρ ≤ r} ψ0(ρ)` from the cached envelope.
    pub fn psi_star(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match &self.envelope {
            None => self.psi0(r),
            Some(env) => env.eval(r),
        }
    }
}

/// `ψ̃0(r) = 2∫₀^∞ (1 − cos rz) ν1(z) dz` for a non-increasing `ν1`.
///
/// The first period is integrated with `2 sin²(rz/2)`; past it the integral
/// splits into the tail mass of `ν1` minus an alternating cosine series over
/// half periods, summed with Wynn's epsilon.
pub fn psi_tilde_from_nu1<F: Fn(f64) -> f64>(nu1: F, breaks: &[f64], r: f64) -> Result<f64> {
    let opts = QuadOpts::rel(1e-11);
    let period = 2.0 * PI / r;
    let first = integrate_radial(
        |z| {
            let s = (0.5 * r * z).sin();
            2.0 * s * s * nu1(z)
        },
        0.0,
        period,
        breaks,
        period / (2.0 * PI),
        opts,
    )
    .map_err(|e| e.into_error("first period of ψ"))?
    .value;
    let mass = integrate_radial(&nu1, period, f64::INFINITY, breaks, period, opts)
        .map_err(|e| e.into_error("tail mass of ν1"))?
        .value;
    let scale = (first + mass).abs();
    // ∫_{2π}^∞ cos(u) ν1(u/r) du / r, cut at the zeros of cos.
    let ub: Vec<f64> = breaks.iter().map(|b| b * r).collect();
    let term = |a: f64, b: f64| -> Result<f64> {
        let q = integrate_with_breaks(
            |u: f64| u.cos() * nu1(u / r),
            a,
            b,
            &ub,
            QuadOpts {
                abs_tol: 1e-15 * scale * r,
                rel_tol: 1e-11,
                max_intervals: 200,
            },
        )
        .map_err(|e| e.into_error("cosine series term of ψ"))?;
        Ok(q.value / r)
    };
    let mut sums = Vec::with_capacity(64);
    let mut acc = term(2.0 * PI, 2.5 * PI)?;
    sums.push(acc);
    let mut zeros = 0;
    let mut exact = false;
    let mut k = 0;
    let cos_part = loop {
        let a = 2.5 * PI + k as f64 * PI;
        let t = term(a, a + PI)?;
        acc += t;
        sums.push(acc);
        k += 1;
        if t == 0.0 {
            zeros += 1;
            if zeros >= 2 {
                exact = true;
            }
        } else {
            zeros = 0;
        }
        if exact {
            break acc;
        }
        if k >= 40 && k % 8 == 0 {
            let w1 = wynn_epsilon(&sums);
            let w0 = wynn_epsilon(&sums[..sums.len() - 8]);
            if (w1 - w0).abs() <= 1e-10 * scale.max(1e-300) || k >= 400 {
                break w1;
            }
        }
    };
    let v = 2.0 * (first + mass - cos_part);
    if !v.is_finite() {
        return Err(Error::Quadrature {
            what: "ψ".into(),
            partial: v,
            error: f64::INFINITY,
        });
    }
    Ok(v.max(0.0))
}

/// Characteristic exponent of a process specification.
pub fn psi_from_spec(spec: &ProcessSpec) -> Result<CharacteristicExponent> {
    psi_from_spec_with(spec, ENVELOPE_POINTS)
}

pub fn psi_from_spec_with(spec: &ProcessSpec, points: usize) -> Result<CharacteristicExponent> {
    match &spec.kind {
        // ψ0(r) = φ(r²) is non-decreasing, so ψ* = ψ0.
        ProcessKind::SubordinateBM { phi, d } => CharacteristicExponent::with_source(
            *d,
            phi.drift,
            Source::Bernstein(phi.clone()),
            true,
            points,
        ),
        ProcessKind::UnimodalLevy(nu) => psi_from_radial(nu, points),
    }
}

fn psi_from_radial(nu: &RadialLevyDensity, points: usize) -> Result<CharacteristicExponent> {
    if nu.is_zero() {
        return CharacteristicExponent::with_source(
            nu.d,
            nu.a,
            Source::Bernstein(BernsteinFunction::drift_only(nu.a)),
            true,
            points,
        );
    }
    if nu.d < 2 {
        return Err(Error::Unsupported("unimodal exponents need d ≥ 2".into()));
    }
    let nu1 = project_density_1d(nu)?.tabulate()?;
    CharacteristicExponent::with_source(
        nu.d,
        nu.a,
        Source::Projected {
            nu1: Arc::new(nu1),
            breaks: nu.all_breaks(),
        },
        false,
        points,
    )
}

/// Pruitt's function `h(r) = a r^{-2} + ∫ min(1, |z|²/r²) ν(dz)`.
pub fn pruitt_h(spec: &ProcessSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("pruitt_h needs r > 0"));
    }
    let nu = spec.radial_levy()?;
    pruitt_h_radial(&nu, r)
}

pub fn pruitt_h_radial(nu: &RadialLevyDensity, r: f64) -> Result<f64> {
    let opts = QuadOpts::rel(1e-10);
    let inner = nu.radial_moment(2.0, 0.0, r, opts)?;
    let outer = nu.radial_moment(0.0, r, f64::INFINITY, opts)?;
    Ok(nu.a / (r * r) + inner / (r * r) + outer)
}

/// Bernstein envelope `φ_env(λ) = ∫(1 − e^{−|z|²λ}) ν(dz) + aλ`.
pub fn bernstein_envelope(spec: &ProcessSpec) -> Result<BernsteinEnvelope> {
    Ok(BernsteinEnvelope {
        nu: spec.radial_levy()?,
    })
}

#[derive(Debug, Clone)]
pub struct BernsteinEnvelope {
    nu: RadialLevyDensity,
}

impl BernsteinEnvelope {
    pub fn try_eval(&self, lambda: f64) -> Result<f64> {
        if lambda <= 0.0 {
            return Ok(0.0);
        }
        let nu = &self.nu;
        let jump = if nu.is_zero() {
            0.0
        } else {
            let dm1 = nu.d as i32 - 1;
            let q = integrate_radial(
                |s| -(-s * s * lambda).exp_m1() * s.powi(dm1) * nu.nu0(s),
                0.0,
                nu.truncation.unwrap_or(f64::INFINITY),
                &nu.all_breaks(),
                1.0 / lambda.sqrt(),
                QuadOpts::rel(1e-10),
            )
            .map_err(|e| e.into_error("Bernstein envelope"))?;
            crate::special::sphere_area(nu.d) * q.value
        };
        Ok(nu.a * lambda + jump)
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        self.try_eval(lambda).unwrap_or(f64::NAN)
    }

    /// The envelope as a Bernstein function value object.
    pub fn gaussian_coefficient(&self) -> f64 {
        self.nu.a
    }
}

/// Weak lower scaling certificate `f(λr) ≥ Cλ^β f(r)`, `λ ≥ 1`, `r ≥ θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCertificate {
    pub beta: f64,
    pub theta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub slack: f64,
    pub verified: bool,
    #[serde(skip)]
    pub lambdas: Vec<f64>,
    #[serde(skip)]
    pub radii: Vec<f64>,
}

impl ScalingCertificate {
    pub fn is_global(&self) -> bool {
        self.verified && self.theta == 0.0
    }

    /// Upper end of the range where the certificate applies; `∞` when global.
    pub fn big_r(&self) -> f64 {
        if self.theta > 0.0 {
            1.0 / self.theta
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone)]
pub struct WlscOptions {
    pub betas: Vec<f64>,
    pub lambda_max: f64,
    pub r_max: f64,
    pub per_decade: usize,
    pub floor: f64,
}

impl Default for WlscOptions {
    fn default() -> Self {
        Self {
            betas: (1..=64).map(|k| k as f64 / 32.0).collect(),
            lambda_max: 1e4,
            r_max: 1e6,
            per_decade: 8,
            floor: 1e-3,
        }
    }
}

/// Fits `(β, C)` on probe pairs from log grids of `λ ∈ [1, 1e4]` and `r ∈ [max(θ, 1e-6), 1e6]`.
///
/// A β is admissible when `C(β) ≥ floor` and β does not exceed the local
/// log-slope of `f` at the far end of the probed range; the second condition
/// keeps the finite grid from certifying exponents the tail cannot sustain.
pub fn wlsc_fit(f: impl Fn(f64) -> f64, theta: f64, opts: &WlscOptions) -> ScalingCertificate {
    let r_lo = theta.max(1e-6);
    let h = std::f64::consts::LN_10 / opts.per_decade as f64;
    let nl = ((opts.lambda_max.ln() / h).round() as usize).max(1);
    let nr = ((opts.r_max / r_lo).ln().max(0.0) / h).floor() as usize;
    let ext: Vec<f64> = (0..=nr + nl)
        .map(|k| f(r_lo * (k as f64 * h).exp()))
        .collect();
    let lambdas: Vec<f64> = (0..=nl).map(|j| (j as f64 * h).exp()).collect();
    let radii: Vec<f64> = (0..=nr).map(|i| r_lo * (i as f64 * h).exp()).collect();
    let ln_ext: Vec<f64> = ext.iter().map(|v| v.ln()).collect();
    let c_of = |beta: f64| -> f64 {
        let mut c = f64::INFINITY;
        for i in 0..=nr {
            for j in 0..=nl {
                let v = (ln_ext[i + j] - ln_ext[i] - beta * j as f64 * h).exp();
                c = c.min(v);
            }
        }
        c
    };
    let top = ln_ext.len() - 1;
    let tail_slope = (ln_ext[top] - ln_ext[top - 1]) / h;
    let mut best: Option<(f64, f64)> = None;
    for &beta in &opts.betas {
        if beta > tail_slope + 1e-6 {
            continue;
        }
        let c = c_of(beta);
        if c >= opts.floor && best.is_none_or(|(b, _)| beta > b) {
            best = Some((beta, c));
        }
    }
    let (beta, c, verified) = match best {
        Some((b, c)) => (b, c, true),
        None => {
            let b = opts.betas.iter().copied().fold(f64::INFINITY, f64::min);
            (b, c_of(b), false)
        }
    };
    ScalingCertificate {
        beta,
        theta,
        c,
        slack: if c.is_finite() && c > 0.0 { 0.0 } else { -1.0 },
        verified,
        lambdas,
        radii,
    }
}

/// Slack `min f(λr)/(Cλ^β f(r)) − 1` of a given `(β, C)` on the default probe grids.
pub fn verify_certificate(
    f: impl Fn(f64) -> f64,
    beta: f64,
    theta: f64,
    c: f64,
    opts: &WlscOptions,
) -> ScalingCertificate {
    let r_lo = theta.max(1e-6);
    let h = std::f64::consts::LN_10 / opts.per_decade as f64;
    let nl = ((opts.lambda_max.ln() / h).round() as usize).max(1);
    let nr = ((opts.r_max / r_lo).ln().max(0.0) / h).floor() as usize;
    let lambdas: Vec<f64> = (0..=nl).map(|j| (j as f64 * h).exp()).collect();
    let radii: Vec<f64> = (0..=nr).map(|i| r_lo * (i as f64 * h).exp()).collect();
    let mut worst = f64::INFINITY;
    for &r in &radii {
        let fr = f(r);
        for &l in &lambdas {
            worst = worst.min(f(l * r) / (c * l.powf(beta) * fr));
        }
    }
    ScalingCertificate {
        beta,
        theta,
        c,
        slack: worst - 1.0,
        verified: worst >= 1.0,
        lambdas,
        radii,
    }
}

/// WLSC certificate of `ψ*` for a specification; θ = 0 requests a global one.
pub fn certificate_for(exp: &CharacteristicExponent, theta: f64) -> ScalingCertificate {
    wlsc_fit(|r| exp.psi_star(r), theta, &WlscOptions::default())
}

/// One row of the jump-probability report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpProbRow {
    pub r: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub ratio: f64,
    pub ratio_beta: Option<f64>,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpProbReport {
    pub s: f64,
    pub rows: Vec<JumpProbRow>,
    pub violated: bool,
}

/// Compares `P^x(|X_{τ_{B_s}}| ≥ r)` estimates with `ψ*(1/r)/ψ*(1/s)`.
///
/// Only the qualitative decay is enforced: an estimate may not exceed the one
/// at the next smaller `r` by more than three combined standard errors.
pub fn check_jump_prob_bound(
    exp: &CharacteristicExponent,
    cert: Option<&ScalingCertificate>,
    s: f64,
    estimates: &[(f64, f64, f64)],
) -> Result<JumpProbReport> {
    let mut sorted = estimates.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rows: Vec<JumpProbRow> = Vec::with_capacity(sorted.len());
    for &(r, est, se) in &sorted {
        if !(s > 0.0) || s > r / 2.0 {
            return Err(invalid(format!("need 0 < s ≤ r/2, got s = {s}, r = {r}")));
        }
        let bound = exp.psi_star(1.0 / r) / exp.psi_star(1.0 / s);
        let violated = rows
            .last()
            .is_some_and(|p| est > p.estimate + 3.0 * (se * se + p.stderr * p.stderr).sqrt());
        rows.push(JumpProbRow {
            r,
            estimate: est,
            stderr: se,
            bound,
            ratio: est / bound,
            ratio_beta: cert
                .filter(|c| c.verified)
                .map(|c| est / (s / r).powf(c.beta)),
            violated,
        });
    }
    let violated = rows.iter().any(|r| r.violated);
    Ok(JumpProbReport { s, rows, violated })
}
