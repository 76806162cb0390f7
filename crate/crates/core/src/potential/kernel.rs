//! Potential kernel `G(x) = ∫₀^∞ g_s(x) U(ds)`, ball potentials and capacities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::constants::{
    dimension_constants, heat_kernel, KernelConstants, SbmKernelConstants, BALL_UPPER,
};
use super::subordinator::{subordinator_potential, PotentialMethod, SubordinatorPotential};
use super::PotentialBracket;
use crate::catalog::{BernsteinFunction, ProcessKind, ProcessSpec};
use crate::error::{invalid, Error, Result};
use crate::exponent::{CharacteristicExponent, ScalingCertificate};
use crate::quad::{integrate_radial, QuadOpts};
use crate::special::{ball_volume, gamma, gamma_lr, sphere_area};
use crate::table::LogTable;

/// Cells of the logarithmic partition used against an inverted `U`.
pub const STIELTJES_CELLS: usize = 1024;
/// Decades of `s` covered on either side of the natural scale.
const STIELTJES_DECADES: f64 = 6.0;
/// The capacity upper band is this multiple of the point estimate; not a proven bound.
pub const CAPACITY_HEURISTIC_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMethod {
    /// Quadrature against a closed-form potential density.
    ClosedForm,
    /// Stieltjes sum against the inverted `U[0, ·)`.
    Stieltjes,
}

impl KernelMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelMethod::ClosedForm => "closed-form",
            KernelMethod::Stieltjes => "stieltjes",
        }
    }
}

fn sbm_parts(spec: &ProcessSpec) -> Result<(&BernsteinFunction, usize)> {
    match &spec.kind {
        ProcessKind::SubordinateBM { phi, d } => Ok((phi, *d)),
        ProcessKind::UnimodalLevy(_) => Err(Error::Unsupported(format!(
            "'{}' is not a subordinate Brownian motion; only bounds are available",
            spec.name
        ))),
    }
}

/// Power-law exponent `γ` of `U[0, s) ~ s^γ` for closed-form potentials.
fn closed_exponent(phi: &BernsteinFunction) -> f64 {
    let (a, b) = (
        phi.potential_cdf(1.0).unwrap_or(f64::NAN),
        phi.potential_cdf(2.0).unwrap_or(f64::NAN),
    );
    (b / a).ln() / std::f64::consts::LN_2
}

fn check_transient(gamma_exp: f64, d: usize, what: &str) -> Result<()> {
    if !(gamma_exp < d as f64 / 2.0 - 1e-9) {
        return Err(Error::Divergent(format!(
            "{what}: U[0, s) grows like s^{gamma_exp:.4} ≥ s^(d/2) with d = {d}; the process is recurrent"
        )));
    }
    Ok(())
}

/// `∫ w(s) U(ds)` over a log partition of `[scale·1e-6, scale·1e6]`.
///
/// Below the partition `w ≈ w_below`; above it `w(s) ≈ tail·s^{-d/2}` and `U`
/// follows its local power law, which gives the closed tail term.
fn stieltjes(
    u: &SubordinatorPotential,
    d: usize,
    scale: f64,
    w: impl Fn(f64) -> f64,
    w_below: f64,
    tail: f64,
) -> Result<f64> {
    let (a, b) = (
        scale.ln() - STIELTJES_DECADES * std::f64::consts::LN_10,
        scale.ln() + STIELTJES_DECADES * std::f64::consts::LN_10,
    );
    let h = (b - a) / STIELTJES_CELLS as f64;
    let mut prev = u.cdf(a.exp());
    let mut acc = w_below * prev;
    for i in 0..STIELTJES_CELLS {
        let hi = if i + 1 == STIELTJES_CELLS {
            b
        } else {
            a + h * (i + 1) as f64
        };
        let cur = u.cdf(hi.exp());
        let mid = (a + h * (i as f64 + 0.5)).exp();
        acc += w(mid) * (cur - prev);
        prev = cur;
    }
    let top = b.exp();
    let g = u.local_exponent(top);
    check_transient(g, d, "potential kernel")?;
    acc += tail * g * prev * top.powf(-(d as f64) / 2.0) / (d as f64 / 2.0 - g);
    if !acc.is_finite() {
        return Err(Error::Divergent("Stieltjes sum is not finite".into()));
    }
    Ok(acc)
}

fn green_with(
    phi: &BernsteinFunction,
    u: &SubordinatorPotential,
    d: usize,
    rho: f64,
) -> Result<(f64, KernelMethod)> {
    if !(rho > 0.0) {
        return Err(invalid(format!(
            "potential kernel needs |x| > 0, got {rho}"
        )));
    }
    match u.method() {
        PotentialMethod::ClosedForm => {
            check_transient(closed_exponent(phi), d, "potential kernel")?;
            let q = integrate_radial(
                |s| heat_kernel(d, s, rho) * phi.potential_density(s).unwrap_or(0.0),
                0.0,
                f64::INFINITY,
                &[],
                rho * rho,
                QuadOpts::rel(1e-11),
            )
            .map_err(|e| e.into_error("subordination integral"))?;
            Ok((q.value, KernelMethod::ClosedForm))
        }
        PotentialMethod::LaplaceInversion => {
            let tail = (4.0 * PI).powf(-(d as f64) / 2.0);
            let v = stieltjes(u, d, rho * rho, |s| heat_kernel(d, s, rho), 0.0, tail)?;
            Ok((v, KernelMethod::Stieltjes))
        }
        PotentialMethod::BracketOnly => Err(Error::Unsupported(
            "bounded Bernstein function: the potential measure has an atom at 0 and no kernel"
                .into(),
        )),
    }
}

/// `G(x)` at `|x| = rho` for a subordinate Brownian motion.
pub fn green_kernel(spec: &ProcessSpec, rho: f64) -> Result<f64> {
    let (phi, d) = sbm_parts(spec)?;
    let u = subordinator_potential(phi);
    green_with(phi, &u, d, rho).map(|(v, _)| v)
}

/// `Γ((d−α)/2) / (2^α π^{d/2} Γ(α/2)) · ρ^{α−d}`, the stable (Riesz) kernel.
pub fn riesz_kernel(alpha: f64, d: usize, rho: f64) -> f64 {
    let df = d as f64;
    gamma((df - alpha) / 2.0) / (2f64.powf(alpha) * PI.powf(df / 2.0) * gamma(alpha / 2.0))
        * rho.powf(alpha - df)
}

/// Tabulated `G` for repeated evaluation (Monte Carlo consumers).
#[derive(Debug, Clone)]
pub struct GreenKernel {
    pub d: usize,
    pub method: KernelMethod,
    table: LogTable,
}

impl GreenKernel {
    pub const LO: f64 = 1e-4;
    pub const HI: f64 = 1e4;

    pub fn new(spec: &ProcessSpec) -> Result<Self> {
        let (phi, d) = sbm_parts(spec)?;
        let u = subordinator_potential(phi);
        let method = green_with(phi, &u, d, 1.0)?.1;
        let err = std::cell::RefCell::new(None);
        let table = LogTable::build(
            |rho| match green_with(phi, &u, d, rho) {
                Ok((v, _)) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            Self::LO,
            Self::HI,
            &[],
            None,
            16,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        Ok(Self { d, method, table })
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.table.eval(rho)
    }
}

/// Upper bound `C4/(|x|^d ψ*(1/|x|))`, plus the `C5` lower bound for `|x| ≤ bR`
/// when a verified certificate is supplied.
pub fn kernel_bracket(
    exp: &CharacteristicExponent,
    cert: Option<&ScalingCertificate>,
    rho: f64,
) -> Result<PotentialBracket> {
    if !(rho > 0.0) {
        return Err(invalid(format!("kernel bracket needs |x| > 0, got {rho}")));
    }
    let d = exp.d;
    let dc = dimension_constants(d)?;
    let denom = rho.powi(d as i32) * exp.psi_star(1.0 / rho);
    let mut lower = None;
    let mut consts = vec![("C4".to_string(), dc.c4)];
    let mut notes = Vec::new();
    match cert.filter(|c| c.verified) {
        Some(c) => {
            let kc = KernelConstants::from_certificate(d, c)?;
            consts.extend([
                ("C5".to_string(), kc.c5),
                ("kappa".to_string(), kc.kappa),
                ("b".to_string(), kc.b),
            ]);
            if rho <= kc.lower_range() {
                lower = Some(kc.c5 / denom);
            } else {
                notes.push(format!(
                    "|x| = {rho} beyond bR = {}: upper bound only",
                    kc.lower_range()
                ));
            }
        }
        None => notes.push("no verified certificate: upper bound only".into()),
    }
    let mut b = PotentialBracket::new(rho, lower, None, dc.c4 / denom, "bounds");
    b.constants = consts;
    b.notes = notes;
    Ok(b)
}

/// [`kernel_bracket`] with the subordinate-BM lower bound `C6/(|x|^d φ(|x|^{-2}))`
/// and the computed kernel as estimate.
pub fn kernel_bracket_sbm(
    spec: &ProcessSpec,
    exp: &CharacteristicExponent,
    cert: Option<&ScalingCertificate>,
    rho: f64,
) -> Result<PotentialBracket> {
    let mut b = kernel_bracket(exp, cert, rho)?;
    let (phi, d) = sbm_parts(spec)?;
    let u = subordinator_potential(phi);
    let (g, method) = green_with(phi, &u, d, rho)?;
    if let Some(c) = cert.filter(|c| c.verified) {
        let sc = SbmKernelConstants::from_psi_certificate(d, c)?;
        b.constants.push(("C6".to_string(), sc.c6));
        if rho <= sc.big_r {
            let l6 = sc.c6 / (rho.powi(d as i32) * phi.eval(rho.powi(-2)));
            b.lower = Some(b.lower.map_or(l6, |l| l.max(l6)));
        }
    }
    let mut out = PotentialBracket::new(rho, b.lower, Some(g), b.upper, method.as_str());
    out.constants = b.constants;
    out.notes = b.notes;
    Ok(out)
}

fn ball_with(phi: &BernsteinFunction, u: &SubordinatorPotential, d: usize, r: f64) -> Result<f64> {
    let hd = d as f64 / 2.0;
    // P(|B_s| < r) for the Brownian motion with variance 2s per coordinate.
    let inside = |s: f64| {
        let z = r * r / (4.0 * s);
        if z > 700.0 + hd {
            1.0
        } else {
            gamma_lr(hd, z)
        }
    };
    match u.method() {
        PotentialMethod::ClosedForm => {
            check_transient(closed_exponent(phi), d, "ball potential")?;
            let q = integrate_radial(
                |s| inside(s) * phi.potential_density(s).unwrap_or(0.0),
                0.0,
                f64::INFINITY,
                &[],
                r * r,
                QuadOpts::rel(1e-12),
            )
            .map_err(|e| e.into_error("ball potential"))?;
            Ok(q.value)
        }
        PotentialMethod::LaplaceInversion => {
            let tail = (r * r / 4.0).powf(hd) / gamma(hd + 1.0);
            stieltjes(u, d, r * r, inside, 1.0, tail)
        }
        PotentialMethod::BracketOnly => {
            Err(Error::Unsupported("bounded Bernstein function".into()))
        }
    }
}

/// `G(B_r) = ∫₀^∞ P(|B_s| < r) U(ds)` for a subordinate Brownian motion.
pub fn ball_potential_estimate(spec: &ProcessSpec, r: f64) -> Result<f64> {
    let (phi, d) = sbm_parts(spec)?;
    if !(r > 0.0) {
        return Err(invalid(format!("ball potential needs r > 0, got {r}")));
    }
    ball_with(phi, &subordinator_potential(phi), d, r)
}

fn require_transient_dim(d: usize) -> Result<()> {
    if d < 3 {
        return Err(invalid(format!(
            "ball potential and capacity bounds need d ≥ 3, got {d}"
        )));
    }
    Ok(())
}

/// `C2/ψ*(1/r) ≤ G(B_r) ≤ 36e/ψ*(1/r)`, with the subordination estimate for SBMs.
pub fn ball_potential(
    spec: &ProcessSpec,
    exp: &CharacteristicExponent,
    r: f64,
) -> Result<PotentialBracket> {
    let d = spec.d();
    require_transient_dim(d)?;
    if !(r > 0.0) {
        return Err(invalid(format!("ball potential needs r > 0, got {r}")));
    }
    let dc = dimension_constants(d)?;
    let ps = exp.psi_star(1.0 / r);
    let (estimate, method) = if spec.is_sbm() {
        let (phi, _) = sbm_parts(spec)?;
        let u = subordinator_potential(phi);
        let m = match u.method() {
            PotentialMethod::ClosedForm => "closed-form",
            _ => "stieltjes",
        };
        (Some(ball_with(phi, &u, d, r)?), m)
    } else {
        (None, "bounds")
    };
    Ok(
        PotentialBracket::new(r, Some(dc.c2 / ps), estimate, BALL_UPPER / ps, method)
            .with_constant("C1", dc.c1)
            .with_constant("C2", dc.c2)
            .with_constant("36e", BALL_UPPER),
    )
}

/// Both sides of `λℒf(λ) = (4π)^{-d/2} ∫ e^{-|x|²/4} dx/ψ(√λ x)` with `f(u) = G(B_√u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceCheck {
    pub lambda: f64,
    /// `λ ∫₀^∞ e^{-λu} G(B_√u) du` by quadrature of ball potentials.
    pub transform: f64,
    /// The radial integral of `1/ψ0`.
    pub radial: f64,
    pub rel_diff: f64,
}

pub fn laplace_crosscheck(
    spec: &ProcessSpec,
    exp: &CharacteristicExponent,
    lambda: f64,
) -> Result<LaplaceCheck> {
    let (phi, d) = sbm_parts(spec)?;
    require_transient_dim(d)?;
    if !(lambda > 0.0) {
        return Err(invalid(format!("λ must be positive, got {lambda}")));
    }
    let u = subordinator_potential(phi);
    let err = std::cell::RefCell::new(None);
    let transform = integrate_radial(
        // Both ends contribute below double precision; skip them to keep the
        // Stieltjes partition inside the representable range.
        |v| match if lambda * v > 700.0 || v < 1e-200 {
            Ok(0.0)
        } else {
            ball_with(phi, &u, d, v.sqrt())
        } {
            Ok(f) => lambda * (-lambda * v).exp() * f,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        f64::INFINITY,
        &[],
        1.0 / lambda,
        QuadOpts::rel(1e-9),
    )
    .map_err(|e| e.into_error("Laplace transform of the ball potential"))?
    .value;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let sl = lambda.sqrt();
    let radial = integrate_radial(
        |rho| rho.powi(d as i32 - 1) * (-rho * rho / 4.0).exp() / exp.psi0(sl * rho),
        0.0,
        f64::INFINITY,
        &[],
        2.0,
        QuadOpts::rel(1e-11),
    )
    .map_err(|e| e.into_error("radial integral of 1/ψ"))?
    .value
        * sphere_area(d)
        * (4.0 * PI).powf(-(d as f64) / 2.0);
    Ok(LaplaceCheck {
        lambda,
        transform,
        radial,
        rel_diff: (transform / radial - 1.0).abs(),
    })
}

/// `|B_r|/G(B_r)` with the proven floor `(|B1|/36e) ψ*(1/r) r^d`; the upper end
/// is a heuristic multiple of the estimate.
pub fn capacity_estimate(
    spec: &ProcessSpec,
    exp: &CharacteristicExponent,
    r: f64,
) -> Result<PotentialBracket> {
    let d = spec.d();
    let ball = ball_potential(spec, exp, r)?;
    let dc = dimension_constants(d)?;
    let vol = ball_volume(d, r);
    let lower = dc.cap_lower * exp.psi_star(1.0 / r) * r.powi(d as i32);
    // General-set floor for a set of the same volume as B_r.
    let floor = dc.c3 * exp.psi_star(vol.powf(-1.0 / d as f64)) * vol;
    let estimate = ball.estimate.map(|g| vol / g);
    let upper = estimate.map_or(f64::INFINITY, |e| CAPACITY_HEURISTIC_FACTOR * e.max(lower));
    let mut b = PotentialBracket::new(r, Some(lower), estimate, upper, ball.method.clone())
        .with_constant("|B1|/36e", dc.cap_lower)
        .with_constant("C3", dc.c3)
        .with_constant("general-set floor", floor)
        .with_note(format!(
            "upper = {CAPACITY_HEURISTIC_FACTOR} x estimate is a heuristic band, not a proven bound"
        ));
    if estimate.is_none() {
        b = b.with_note("no kernel available: estimate omitted");
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_named, make_stable, NamedKind};
    use crate::exponent::psi_from_spec;

    #[test]
    fn brownian_kernel_and_ball() {
        let bm = make_stable(2.0, 3).unwrap();
        for &rho in &[0.1, 1.0, 10.0] {
            let g = green_kernel(&bm, rho).unwrap();
            assert!((g * 4.0 * PI * rho - 1.0).abs() < 1e-8, "{rho}: {g}");
        }
        let b = ball_potential_estimate(&bm, 2.0).unwrap();
        assert!((b / 2.0 - 1.0).abs() < 1e-9, "{b}");
    }

    #[test]
    fn recurrent_cases_are_divergent() {
        let s = make_stable(1.0, 1).unwrap();
        assert!(matches!(green_kernel(&s, 1.0), Err(Error::Divergent(_))));
        let bm2 = make_stable(2.0, 2).unwrap();
        assert!(matches!(green_kernel(&bm2, 1.0), Err(Error::Divergent(_))));
    }

    #[test]
    fn relativistic_stieltjes_matches_density_oracle() {
        // α = 1, m = 1: u(s) = 1 + erf(√s) + e^{-s}/√(πs).
        let spec = make_named(NamedKind::Relativistic { alpha: 1.0, m: 1.0 }, 3).unwrap();
        let u = |s: f64| 1.0 + crate::special::erf(s.sqrt()) + (-s).exp() / (PI * s).sqrt();
        for &rho in &[0.1, 1.0, 10.0] {
            let want = integrate_radial(
                |s| heat_kernel(3, s, rho) * u(s),
                0.0,
                f64::INFINITY,
                &[],
                rho * rho,
                QuadOpts::rel(1e-10),
            )
            .unwrap()
            .value;
            let got = green_kernel(&spec, rho).unwrap();
            assert!((got / want - 1.0).abs() < 2e-3, "{rho}: {got} vs {want}");
        }
    }

    #[test]
    fn unimodal_specs_get_bounds_only() {
        let spec = make_named(NamedKind::Truncated { alpha: 1.0 }, 3).unwrap();
        let exp = psi_from_spec(&spec).unwrap();
        let b = ball_potential(&spec, &exp, 1.0).unwrap();
        assert!(b.estimate.is_none() && !b.violated);
        assert!(green_kernel(&spec, 1.0).is_err());
    }
}
