//! Process zoo: subordinate Brownian motions given by a Bernstein function and
//! isotropic unimodal Lévy processes given by a radial Lévy density.
//!
//! Lévy densities are normalized with constant 1, `ν0(s) = f(s)/s^d`; every
//! downstream check is scale-covariant or bracket-style so the constant is
//! immaterial. The stable family is the exception: it is normalized so that
//! `ψ0(r) = r^α` exactly.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::expr::Expr;
use crate::quad::{integrate_radial, QuadOpts};
use crate::special::{gamma, log_grid, sphere_area};
use crate::table::LogTable;

/// How increments of the subordinator can be drawn exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerTag {
    StableExact,
    TemperedStableRejection,
    GenericNone,
}

#[derive(Debug, Clone)]
enum PhiKind {
    /// `λ^{α/2}`, `0 < α < 2`.
    Stable {
        alpha: f64,
    },
    /// `(λ + m^{2/α})^{α/2} − m`.
    Relativistic {
        alpha: f64,
        m: f64,
    },
    /// No jump part: the pure drift `bλ`.
    None,
    Custom(Expr),
}

/// Bernstein function `φ(λ) = bλ + (jump part)`.
#[derive(Debug, Clone)]
pub struct BernsteinFunction {
    pub drift: f64,
    kind: PhiKind,
    pub sampler: SamplerTag,
    pub special: bool,
    pub unbounded: bool,
}

impl BernsteinFunction {
    pub fn stable(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(invalid(format!("stable index α = {alpha} outside (0, 2]")));
        }
        if alpha == 2.0 {
            return Ok(Self::drift_only(1.0));
        }
        Ok(Self {
            drift: 0.0,
            kind: PhiKind::Stable { alpha },
            sampler: SamplerTag::StableExact,
            special: true,
            unbounded: true,
        })
    }

    pub fn drift_only(b: f64) -> Self {
        Self {
            drift: b,
            kind: PhiKind::None,
            sampler: SamplerTag::StableExact,
            special: true,
            unbounded: b > 0.0,
        }
    }

    pub fn relativistic(alpha: f64, m: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(invalid(format!("relativistic α = {alpha} outside (0, 2)")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid(format!(
                "relativistic mass m = {m} must be positive"
            )));
        }
        Ok(Self {
            drift: 0.0,
            kind: PhiKind::Relativistic { alpha, m },
            sampler: SamplerTag::TemperedStableRejection,
            special: true,
            unbounded: true,
        })
    }

    pub fn custom(expr: Expr, drift: f64, special: bool, unbounded: Option<bool>) -> Result<Self> {
        if !(drift >= 0.0) {
            return Err(invalid("drift must be non-negative"));
        }
        let mut phi = Self {
            drift,
            kind: PhiKind::Custom(expr),
            sampler: SamplerTag::GenericNone,
            special,
            unbounded: true,
        };
        phi.unbounded =
            unbounded.unwrap_or_else(|| drift > 0.0 || phi.eval(1e12) > 1.5 * phi.eval(1e6));
        phi.validate()?;
        Ok(phi)
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let jump = match &self.kind {
            PhiKind::Stable { alpha } => lambda.powf(alpha / 2.0),
            PhiKind::Relativistic { alpha, m } => {
                let k = m.powf(2.0 / alpha);
                let a2 = alpha / 2.0;
                // (λ+k)^{a} − k^{a} without cancellation for small λ.
                let ratio = (lambda / k).ln_1p() * a2;
                k.powf(a2) * ratio.exp_m1()
            }
            PhiKind::None => 0.0,
            PhiKind::Custom(e) => e.eval(lambda),
        };
        self.drift * lambda + jump
    }

    /// Stable index `α` when `φ(λ) = λ^{α/2}` (α = 2 for the unit drift).
    pub fn stable_index(&self) -> Option<f64> {
        match self.kind {
            PhiKind::Stable { alpha } => Some(alpha),
            PhiKind::None if self.drift == 1.0 => Some(2.0),
            _ => None,
        }
    }

    /// `(α, κ)` of an exponentially tilted stable subordinator, `κ = m^{2/α}`.
    pub fn tempered_params(&self) -> Option<(f64, f64)> {
        match self.kind {
            PhiKind::Relativistic { alpha, m } => Some((alpha, m.powf(2.0 / alpha))),
            _ => None,
        }
    }

    /// Closed-form potential density `u(s)` when known.
    pub fn potential_density(&self, s: f64) -> Option<f64> {
        match self.kind {
            PhiKind::Stable { alpha } => Some(s.powf(alpha / 2.0 - 1.0) / gamma(alpha / 2.0)),
            PhiKind::None if self.drift > 0.0 => Some(1.0 / self.drift),
            _ => None,
        }
    }

    /// Closed-form `U[0, r)` when known.
    pub fn potential_cdf(&self, r: f64) -> Option<f64> {
        match self.kind {
            PhiKind::Stable { alpha } => Some(r.powf(alpha / 2.0) / gamma(1.0 + alpha / 2.0)),
            PhiKind::None if self.drift > 0.0 => Some(r / self.drift),
            _ => None,
        }
    }

    pub fn has_closed_potential(&self) -> bool {
        self.potential_cdf(1.0).is_some()
    }

    /// Lévy density `μ(u)` of the subordinator when known in closed form.
    pub fn levy_density(&self, u: f64) -> Option<f64> {
        match self.kind {
            PhiKind::Stable { alpha } => {
                let a2 = alpha / 2.0;
                Some(a2 / gamma(1.0 - a2) * u.powf(-1.0 - a2))
            }
            PhiKind::Relativistic { alpha, m } => {
                let a2 = alpha / 2.0;
                let k = m.powf(2.0 / alpha);
                Some(a2 / gamma(1.0 - a2) * (-k * u).exp() * u.powf(-1.0 - a2))
            }
            PhiKind::None => Some(0.0),
            PhiKind::Custom(_) => None,
        }
    }

    /// Checks `φ(0) ≥ 0`, `φ` non-decreasing and `φ(λ)/λ` non-increasing on a log grid.
    pub fn validate(&self) -> Result<()> {
        let phi0 = self.eval(0.0);
        // Expressions like λ/log(1+λ) are 0/0 at the origin; the grid covers them.
        if phi0.is_finite() && phi0 < 0.0 || phi0.is_infinite() {
            return Err(Error::Spec(format!(
                "φ(0) = {phi0} is negative or undefined"
            )));
        }
        let grid = log_grid(1e-6, 1e6, 512);
        let vals: Vec<f64> = grid.iter().map(|&l| self.eval(l)).collect();
        // User expressions lose absolute precision near λ = 0.
        let noise = 1e-9 * (1.0 + self.eval(1.0).abs());
        for i in 0..grid.len() {
            if !vals[i].is_finite() || vals[i] < 0.0 {
                return Err(Error::Spec(format!(
                    "φ({}) = {} is not a finite non-negative value",
                    grid[i], vals[i]
                )));
            }
        }
        for i in 1..grid.len() {
            let tol = 1e-12 * vals[i].abs().max(vals[i - 1].abs()) + noise;
            if vals[i] < vals[i - 1] - tol {
                return Err(Error::Spec(format!(
                    "φ decreases between λ = {} and λ = {}",
                    grid[i - 1],
                    grid[i]
                )));
            }
            let (q0, q1) = (vals[i - 1] / grid[i - 1], vals[i] / grid[i]);
            if q1 > q0 * (1.0 + 1e-10) + noise / grid[i - 1] {
                return Err(Error::Spec(format!(
                    "φ(λ)/λ increases between λ = {} and λ = {}",
                    grid[i - 1],
                    grid[i]
                )));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        let jump = match &self.kind {
            PhiKind::Stable { alpha } => format!("λ^{}", alpha / 2.0),
            PhiKind::Relativistic { alpha, m } => {
                format!("(λ + {})^{} − {m}", m.powf(2.0 / alpha), alpha / 2.0)
            }
            PhiKind::None => String::new(),
            PhiKind::Custom(e) => e.source().to_string(),
        };
        match (self.drift > 0.0, jump.is_empty()) {
            (true, true) => format!("{}λ", self.drift),
            (true, false) => format!("{}λ + {jump}", self.drift),
            (false, _) => jump,
        }
    }
}

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Isotropic Lévy density `ν(dz) = ν0(|z|) dz` plus Gaussian part `aI`.
#[derive(Clone)]
pub struct RadialLevyDensity {
    pub d: usize,
    pub a: f64,
    pub truncation: Option<f64>,
    /// Radii where `ν0` jumps; quadratures split there.
    pub breakpoints: Vec<f64>,
    /// `(c, p)` when `ν0(s) = c s^{-p}` exactly.
    pub power_law: Option<(f64, f64)>,
    profile: ProfileFn,
}

impl fmt::Debug for RadialLevyDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialLevyDensity")
            .field("d", &self.d)
            .field("a", &self.a)
            .field("truncation", &self.truncation)
            .field("breakpoints", &self.breakpoints)
            .field("power_law", &self.power_law)
            .finish_non_exhaustive()
    }
}

impl RadialLevyDensity {
    pub fn new(
        d: usize,
        a: f64,
        profile: ProfileFn,
        truncation: Option<f64>,
        breakpoints: Vec<f64>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(invalid(format!(
                "gaussian coefficient a = {a} must be finite and non-negative"
            )));
        }
        if let Some(t) = truncation {
            if !(t > 0.0) {
                return Err(invalid("truncation radius must be positive"));
            }
        }
        Ok(Self {
            d,
            a,
            truncation,
            breakpoints,
            power_law: None,
            profile,
        })
    }

    /// `ν0(s) = c s^{-p}`.
    pub fn power(d: usize, c: f64, p: f64) -> Result<Self> {
        let mut r = Self::new(d, 0.0, Arc::new(move |s: f64| c * s.powf(-p)), None, vec![])?;
        r.power_law = Some((c, p));
        Ok(r)
    }

    /// Gaussian part only.
    pub fn gaussian(d: usize, a: f64) -> Result<Self> {
        Self::new(d, a, Arc::new(|_| 0.0), None, vec![])
    }

    pub fn nu0(&self, s: f64) -> f64 {
        if let Some(t) = self.truncation {
            if s >= t {
                return 0.0;
            }
        }
        (self.profile)(s)
    }

    pub fn profile(&self) -> ProfileFn {
        self.profile.clone()
    }

    pub fn is_zero(&self) -> bool {
        self.power_law.is_some_and(|(c, _)| c == 0.0)
            || (self.truncation.is_none()
                && self.breakpoints.is_empty()
                && self.nu0(1.0) == 0.0
                && self.nu0(1e-6) == 0.0)
    }

    /// Breakpoints and truncation radius, sorted.
    pub fn all_breaks(&self) -> Vec<f64> {
        let mut b = self.breakpoints.clone();
        if let Some(t) = self.truncation {
            b.push(t);
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn upper(&self) -> f64 {
        self.truncation.unwrap_or(f64::INFINITY)
    }

    /// `σ_{d−1} ∫_lo^hi s^{d−1+k} ν0(s) ds`.
    pub fn radial_moment(&self, k: f64, lo: f64, hi: f64, opts: QuadOpts) -> Result<f64> {
        let hi = hi.min(self.upper());
        if !(hi > lo) {
            return Ok(0.0);
        }
        let dm1 = self.d as f64 - 1.0 + k;
        if let Some((c, p)) = self.power_law {
            let e = dm1 + 1.0 - p;
            let v = if e == 0.0 {
                (hi / lo).ln()
            } else if (e > 0.0 && hi.is_infinite()) || (e < 0.0 && lo == 0.0) {
                return Err(Error::Divergent(format!(
                    "radial moment of order {k} on ({lo}, {hi})"
                )));
            } else {
                (hi.powf(e) - lo.powf(e)) / e
            };
            return Ok(sphere_area(self.d) * c * v);
        }
        let scale = if lo > 0.0 && hi.is_finite() {
            (lo * hi).sqrt()
        } else if lo > 0.0 {
            lo
        } else if hi.is_finite() {
            hi
        } else {
            1.0
        };
        let q = integrate_radial(
            |s| s.powf(dm1) * self.nu0(s),
            lo,
            hi,
            &self.all_breaks(),
            scale,
            opts,
        )
        .map_err(|e| e.into_error("radial moment of ν0"))?;
        if !q.value.is_finite() {
            return Err(Error::Divergent(format!(
                "radial moment of order {k} on ({lo}, {hi})"
            )));
        }
        Ok(sphere_area(self.d) * q.value)
    }

    /// `∫ (1 ∧ |z|²) ν(dz)`.
    pub fn levy_integral(&self) -> Result<f64> {
        let opts = QuadOpts::rel(1e-9);
        let inner = self.radial_moment(2.0, 0.0, 1.0, opts)?;
        let outer = self.radial_moment(0.0, 1.0, f64::INFINITY, opts)?;
        Ok(inner + outer)
    }

    /// Checks monotonicity on a 512-point log grid over `[1e-6, 1e6]` and integrability.
    pub fn validate(&self) -> Result<()> {
        let grid = log_grid(1e-6, 1e6, 512);
        let vals: Vec<f64> = grid.iter().map(|&s| self.nu0(s)).collect();
        for (s, v) in grid.iter().zip(&vals) {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::Spec(format!(
                    "ν0({s}) = {v} is not a finite non-negative value"
                )));
            }
        }
        for i in 1..grid.len() {
            if vals[i] > vals[i - 1] * (1.0 + 1e-12) {
                return Err(Error::Spec(format!(
                    "ν0 is not non-increasing: ν0({}) = {} < ν0({}) = {}",
                    grid[i - 1],
                    vals[i - 1],
                    grid[i],
                    vals[i]
                )));
            }
        }
        let m = self.levy_integral()?;
        if !m.is_finite() {
            return Err(Error::Spec("∫(1 ∧ |z|²) ν(dz) is not finite".into()));
        }
        Ok(())
    }
}

/// `ν1(z) = ∫_{R^{d−1}} ν0(√(|w|² + z²)) dw` by direct radial quadrature.
pub fn project_density_1d(nu: &RadialLevyDensity) -> Result<Nu1> {
    if nu.d < 2 {
        return Err(invalid("projection needs d ≥ 2"));
    }
    Ok(Nu1 { nu: nu.clone() })
}

/// Evaluator for the one-dimensional marginal density of `ν`.
#[derive(Debug, Clone)]
pub struct Nu1 {
    nu: RadialLevyDensity,
}

impl Nu1 {
    pub fn eval(&self, z: f64) -> Result<f64> {
        self.eval_with(z, QuadOpts::rel(1e-10))
    }

    pub fn eval_with(&self, z: f64, opts: QuadOpts) -> Result<f64> {
        let z = z.abs();
        let nu = &self.nu;
        let d = nu.d;
        if let Some((c, p)) = nu.power_law {
            // σ_{d−2} c z^{d−1−p} ∫_0^∞ t^{d−2}(1+t²)^{−p/2} dt
            let k = d as f64 - 1.0;
            let beta = gamma(k / 2.0) * gamma((p - k) / 2.0) / gamma(p / 2.0) / 2.0;
            return Ok(sphere_area(d - 1) * c * z.powf(k - p) * beta);
        }
        let top = nu.upper();
        if z >= top {
            return Ok(0.0);
        }
        let rho_max = if top.is_finite() {
            (top * top - z * z).sqrt()
        } else {
            f64::INFINITY
        };
        let breaks: Vec<f64> = nu
            .breakpoints
            .iter()
            .filter(|&&b| b > z)
            .map(|&b| (b * b - z * z).sqrt())
            .collect();
        let dm2 = d as i32 - 2;
        let q = integrate_radial(
            |rho| rho.powi(dm2) * nu.nu0((rho * rho + z * z).sqrt()),
            0.0,
            rho_max,
            &breaks,
            z.max(1e-300),
            opts,
        )
        .map_err(|e| e.into_error("projected density ν1"))?;
        Ok(sphere_area(d - 1) * q.value)
    }

    pub fn density(&self) -> &RadialLevyDensity {
        &self.nu
    }

    /// Log-grid table of `ν1` on `[1e-14, 1e12]` split at the profile breakpoints.
    pub fn tabulate(&self) -> Result<LogTable> {
        let nu = &self.nu;
        let (lo, hi) = (1e-14, 1e12);
        let err = std::cell::RefCell::new(None);
        let table = LogTable::build(
            |z| match self.eval_with(z, QuadOpts::rel(1e-11)) {
                Ok(v) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            lo,
            hi,
            &nu.breakpoints,
            nu.truncation,
            160,
        );
        // `LogTable::build` takes `Fn`; surface the first failure afterwards.
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(table),
        }
    }
}

/// Stable Lévy density constant: `ν0(s) = c s^{−d−α}` gives `ψ0(r) = r^α`.
pub fn stable_levy_constant(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * gamma((df + alpha) / 2.0)
        / (std::f64::consts::PI.powf(df / 2.0) * gamma(1.0 - alpha / 2.0))
}

/// Named members of the zoo besides the stable family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedKind {
    Relativistic { alpha: f64, m: f64 },
    Truncated { alpha: f64 },
    Tempered { alpha: f64 },
    Lamperti { alpha: f64, delta: f64 },
    Layered { alpha: f64, alpha1: f64 },
    LogPerturbed,
}

#[derive(Debug, Clone)]
pub enum ProcessKind {
    SubordinateBM { phi: BernsteinFunction, d: usize },
    UnimodalLevy(RadialLevyDensity),
}

/// JSON form of a process specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub name: String,
    pub kind: String,
    pub d: usize,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub name: String,
    pub kind: ProcessKind,
    document: SpecDocument,
    radial: Arc<OnceLock<std::result::Result<RadialLevyDensity, String>>>,
}

fn check_alpha(alpha: f64, what: &str) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(invalid(format!("{what} = {alpha} outside (0, 2)")))
    }
}

pub fn make_stable(alpha: f64, d: usize) -> Result<ProcessSpec> {
    let doc = SpecDocument {
        name: format!("stable-{alpha}"),
        kind: "stable".into(),
        d,
        params: [("alpha".to_string(), Value::from(alpha))]
            .into_iter()
            .collect(),
    };
    ProcessSpec::from_document(doc)
}

pub fn make_named(kind: NamedKind, d: usize) -> Result<ProcessSpec> {
    let (name, k, params): (String, &str, Vec<(&str, f64)>) = match kind {
        NamedKind::Relativistic { alpha, m } => (
            format!("relativistic-{alpha}-{m}"),
            "relativistic",
            vec![("alpha", alpha), ("m", m)],
        ),
        NamedKind::Truncated { alpha } => (
            format!("truncated-{alpha}"),
            "truncated",
            vec![("alpha", alpha)],
        ),
        NamedKind::Tempered { alpha } => (
            format!("tempered-{alpha}"),
            "tempered",
            vec![("alpha", alpha)],
        ),
        NamedKind::Lamperti { alpha, delta } => (
            format!("lamperti-{alpha}-{delta}"),
            "lamperti",
            vec![("alpha", alpha), ("delta", delta)],
        ),
        NamedKind::Layered { alpha, alpha1 } => (
            format!("layered-{alpha}-{alpha1}"),
            "layered",
            vec![("alpha", alpha), ("alpha1", alpha1)],
        ),
        NamedKind::LogPerturbed => ("log-perturbed".into(), "log-perturbed", vec![]),
    };
    let doc = SpecDocument {
        name,
        kind: k.into(),
        d,
        params: params
            .into_iter()
            .map(|(k, v)| (k.to_string(), Value::from(v)))
            .collect(),
    };
    ProcessSpec::from_document(doc)
}

/// The fixed catalog used by `verify`: all members in dimension `d`.
pub fn catalog(d: usize) -> Result<Vec<ProcessSpec>> {
    Ok(vec![
        make_stable(1.0, d)?,
        make_stable(1.5, d)?,
        make_stable(2.0, d)?,
        make_named(NamedKind::Relativistic { alpha: 1.0, m: 1.0 }, d)?,
        make_named(NamedKind::Truncated { alpha: 1.0 }, d)?,
        make_named(NamedKind::Tempered { alpha: 1.0 }, d)?,
        make_named(
            NamedKind::Lamperti {
                alpha: 1.0,
                delta: 1.0,
            },
            d,
        )?,
        make_named(
            NamedKind::Layered {
                alpha: 1.5,
                alpha1: 0.5,
            },
            d,
        )?,
        make_named(NamedKind::LogPerturbed, d)?,
    ])
}

fn param(doc: &SpecDocument, key: &str) -> Result<f64> {
    doc.params.get(key).and_then(Value::as_f64).ok_or_else(|| {
        Error::Spec(format!(
            "kind '{}' needs numeric parameter '{key}'",
            doc.kind
        ))
    })
}

fn opt_param(doc: &SpecDocument, key: &str) -> Result<Option<f64>> {
    match doc.params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::Spec(format!("parameter '{key}' must be numeric"))),
    }
}

fn opt_bool(doc: &SpecDocument, key: &str) -> Result<Option<bool>> {
    match doc.params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_bool()
            .map(Some)
            .ok_or_else(|| Error::Spec(format!("parameter '{key}' must be a boolean"))),
    }
}

fn str_param<'a>(doc: &'a SpecDocument, key: &str) -> Result<&'a str> {
    doc.params.get(key).and_then(Value::as_str).ok_or_else(|| {
        Error::Spec(format!(
            "kind '{}' needs string parameter '{key}'",
            doc.kind
        ))
    })
}

fn unimodal(
    d: usize,
    f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    truncation: Option<f64>,
    breaks: Vec<f64>,
) -> Result<RadialLevyDensity> {
    let di = d as i32;
    RadialLevyDensity::new(
        d,
        0.0,
        Arc::new(move |s: f64| f(s) / s.powi(di)),
        truncation,
        breaks,
    )
}

impl ProcessSpec {
    pub fn from_document(doc: SpecDocument) -> Result<Self> {
        let d = doc.d;
        if d == 0 {
            return Err(invalid("dimension d must be at least 1"));
        }
        let kind = match doc.kind.as_str() {
            "stable" => {
                let alpha = param(&doc, "alpha")?;
                ProcessKind::SubordinateBM {
                    phi: BernsteinFunction::stable(alpha)?,
                    d,
                }
            }
            "relativistic" => {
                let phi =
                    BernsteinFunction::relativistic(param(&doc, "alpha")?, param(&doc, "m")?)?;
                ProcessKind::SubordinateBM { phi, d }
            }
            "truncated" => {
                let alpha = param(&doc, "alpha")?;
                check_alpha(alpha, "α")?;
                ProcessKind::UnimodalLevy(unimodal(d, move |s| s.powf(-alpha), Some(1.0), vec![])?)
            }
            "tempered" => {
                let alpha = param(&doc, "alpha")?;
                check_alpha(alpha, "α")?;
                ProcessKind::UnimodalLevy(unimodal(
                    d,
                    move |s| s.powf(-alpha) * (-s).exp(),
                    None,
                    vec![],
                )?)
            }
            "lamperti" => {
                let alpha = param(&doc, "alpha")?;
                let delta = param(&doc, "delta")?;
                check_alpha(alpha, "α")?;
                if !(delta < alpha + 1.0) {
                    return Err(invalid(format!(
                        "lamperti needs δ < α + 1, got δ = {delta}, α = {alpha}"
                    )));
                }
                // f(r) = r e^{δr} (e^r − 1)^{−α−1}, evaluated in logs to avoid overflow.
                let f = move |s: f64| {
                    let ln_em1 = if s < 30.0 {
                        s.exp_m1().ln()
                    } else {
                        s + (-(-s).exp()).ln_1p()
                    };
                    (s.ln() + delta * s - (alpha + 1.0) * ln_em1).exp()
                };
                ProcessKind::UnimodalLevy(unimodal(d, f, None, vec![])?)
            }
            "layered" => {
                let alpha = param(&doc, "alpha")?;
                let alpha1 = param(&doc, "alpha1")?;
                check_alpha(alpha, "α")?;
                check_alpha(alpha1, "α1")?;
                let f = move |s: f64| {
                    if s < 1.0 {
                        s.powf(-alpha)
                    } else {
                        s.powf(-alpha1)
                    }
                };
                ProcessKind::UnimodalLevy(unimodal(d, f, None, vec![1.0])?)
            }
            "log-perturbed" => {
                let f = |s: f64| {
                    let l = (2.0 + 1.0 / s).ln();
                    1.0 / (s * s * l * l)
                };
                ProcessKind::UnimodalLevy(unimodal(d, f, None, vec![])?)
            }
            "sbm-custom" => {
                let expr = Expr::parse(str_param(&doc, "phi")?)?;
                let drift = opt_param(&doc, "drift")?.unwrap_or(0.0);
                let special = opt_bool(&doc, "special")?.unwrap_or(false);
                let unbounded = opt_bool(&doc, "unbounded")?;
                ProcessKind::SubordinateBM {
                    phi: BernsteinFunction::custom(expr, drift, special, unbounded)?,
                    d,
                }
            }
            "unimodal-custom" => {
                let expr = Expr::parse(str_param(&doc, "nu0")?)?;
                let a = opt_param(&doc, "a")?.unwrap_or(0.0);
                let truncation = opt_param(&doc, "truncation")?;
                let breaks = match doc.params.get("breakpoints") {
                    None | Some(Value::Null) => vec![],
                    Some(Value::Array(xs)) => xs
                        .iter()
                        .map(|v| {
                            v.as_f64()
                                .ok_or_else(|| Error::Spec("breakpoints must be numbers".into()))
                        })
                        .collect::<Result<Vec<f64>>>()?,
                    Some(_) => return Err(Error::Spec("breakpoints must be an array".into())),
                };
                let nu = RadialLevyDensity::new(
                    d,
                    a,
                    Arc::new(move |s| expr.eval(s)),
                    truncation,
                    breaks,
                )?;
                nu.validate()?;
                ProcessKind::UnimodalLevy(nu)
            }
            other => return Err(Error::Spec(format!("unknown kind '{other}'"))),
        };
        Ok(Self {
            name: doc.name.clone(),
            kind,
            document: doc,
            radial: Arc::new(OnceLock::new()),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDocument = serde_json::from_str(text)?;
        Self::from_document(doc)
    }

    pub fn document(&self) -> &SpecDocument {
        &self.document
    }

    /// Canonical JSON: keys sorted, no whitespace.
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(&self.document).expect("document serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    /// SHA-256 of the canonical JSON document, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Same process in another dimension.
    pub fn with_dimension(&self, d: usize) -> Result<Self> {
        let mut doc = self.document.clone();
        doc.d = d;
        Self::from_document(doc)
    }

    pub fn d(&self) -> usize {
        match &self.kind {
            ProcessKind::SubordinateBM { d, .. } => *d,
            ProcessKind::UnimodalLevy(nu) => nu.d,
        }
    }

    pub fn bernstein(&self) -> Option<&BernsteinFunction> {
        match &self.kind {
            ProcessKind::SubordinateBM { phi, .. } => Some(phi),
            ProcessKind::UnimodalLevy(_) => None,
        }
    }

    pub fn is_sbm(&self) -> bool {
        self.bernstein().is_some()
    }

    /// Gaussian coefficient `a` of `A = aI`.
    pub fn gaussian_coefficient(&self) -> f64 {
        match &self.kind {
            ProcessKind::SubordinateBM { phi, .. } => phi.drift,
            ProcessKind::UnimodalLevy(nu) => nu.a,
        }
    }

    /// Stable index when the process is isotropic α-stable (α = 2: Brownian).
    pub fn stable_index(&self) -> Option<f64> {
        self.bernstein().and_then(BernsteinFunction::stable_index)
    }

    /// Radial Lévy density view. For subordinate Brownian motions this is
    /// `ν0(s) = ∫ g_u(s) μ(u) du`, tabulated when no closed form exists.
    pub fn radial_levy(&self) -> Result<RadialLevyDensity> {
        match &self.kind {
            ProcessKind::UnimodalLevy(nu) => Ok(nu.clone()),
            ProcessKind::SubordinateBM { phi, d } => self
                .radial
                .get_or_init(|| sbm_radial(phi, *d).map_err(|e| e.to_string()))
                .clone()
                .map_err(Error::Unsupported),
        }
    }
}

fn sbm_radial(phi: &BernsteinFunction, d: usize) -> Result<RadialLevyDensity> {
    if let Some(alpha) = phi.stable_index() {
        if alpha == 2.0 {
            return RadialLevyDensity::gaussian(d, phi.drift);
        }
        let mut nu = RadialLevyDensity::power(d, stable_levy_constant(alpha, d), d as f64 + alpha)?;
        nu.a = phi.drift;
        return Ok(nu);
    }
    if phi.levy_density(1.0).is_none() {
        return Err(Error::Unsupported(format!(
            "no Lévy density known for the subordinator φ(λ) = {}",
            phi.describe()
        )));
    }
    let df = d as f64;
    let phi_c = phi.clone();
    let nu0 = move |s: f64| {
        let g = |u: f64| {
            (4.0 * std::f64::consts::PI * u).powf(-df / 2.0)
                * (-s * s / (4.0 * u)).exp()
                * phi_c.levy_density(u).unwrap_or(0.0)
        };
        integrate_radial(
            g,
            0.0,
            f64::INFINITY,
            &[],
            s * s / 4.0,
            QuadOpts::rel(1e-11),
        )
        .map(|q| q.value)
        .unwrap_or_else(|e| e.partial)
    };
    let table = Arc::new(LogTable::build(nu0, 1e-10, 300.0, &[], None, 40));
    RadialLevyDensity::new(d, phi.drift, Arc::new(move |s| table.eval(s)), None, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn stable_homogeneity_and_bounds() {
        let s = make_stable(1.5, 3).unwrap();
        let phi = s.bernstein().unwrap();
        assert!((phi.eval(16.0) / phi.eval(4.0) - 2f64.powf(1.5)).abs() < 1e-12);
        assert!(make_stable(0.0, 3).is_err());
        assert!(make_stable(2.1, 3).is_err());
        let bm = make_stable(2.0, 3).unwrap();
        assert_eq!(bm.bernstein().unwrap().eval(3.0), 3.0);
        assert!(bm.radial_levy().unwrap().is_zero());
    }

    #[test]
    fn relativistic_plug_in() {
        let s = make_named(NamedKind::Relativistic { alpha: 1.0, m: 1.0 }, 3).unwrap();
        let phi = s.bernstein().unwrap();
        assert_eq!(phi.eval(0.0), 0.0);
        assert!((phi.eval(3.0) - 1.0).abs() < 1e-14);
        assert!((phi.eval(1e-9) / 0.5e-9 - 1.0).abs() < 1e-9);
        assert_eq!(phi.sampler, SamplerTag::TemperedStableRejection);
    }

    #[test]
    fn named_profiles() {
        let t = make_named(NamedKind::Truncated { alpha: 1.0 }, 3).unwrap();
        assert_eq!(t.radial_levy().unwrap().nu0(2.0), 0.0);
        let l = make_named(
            NamedKind::Layered {
                alpha: 1.5,
                alpha1: 0.5,
            },
            3,
        )
        .unwrap();
        let nu = l.radial_levy().unwrap();
        let r = nu.nu0(1.0 - 1e-12) / nu.nu0(1.0);
        assert!((r - 1.0).abs() < 1e-9);
        assert!(make_named(
            NamedKind::Lamperti {
                alpha: 1.0,
                delta: 2.0
            },
            3
        )
        .is_err());
        assert!(make_named(NamedKind::Tempered { alpha: 2.0 }, 3).is_err());
    }

    #[test]
    fn lamperti_profile_matches_formula() {
        let l = make_named(
            NamedKind::Lamperti {
                alpha: 1.0,
                delta: 1.0,
            },
            3,
        )
        .unwrap();
        let nu = l.radial_levy().unwrap();
        for &s in &[1e-3, 0.5, 3.0, 40.0] {
            let f = s * f64::exp(s) * f64::exp_m1(s).powf(-2.0);
            assert!((nu.nu0(s) / (f / (s * s * s)) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn catalog_members_are_valid() {
        for spec in catalog(3).unwrap() {
            if let Ok(nu) = spec.radial_levy() {
                nu.validate()
                    .unwrap_or_else(|e| panic!("{}: {e}", spec.name));
            }
            if let Some(phi) = spec.bernstein() {
                phi.validate().unwrap();
            }
        }
    }

    #[test]
    fn projection_of_power_law() {
        // d = 3, ν0 = s^{-4}: ν1(1) = π; the generic path must agree.
        let nu = RadialLevyDensity::power(3, 1.0, 4.0).unwrap();
        let v = project_density_1d(&nu).unwrap().eval(1.0).unwrap();
        assert!((v - PI).abs() < 1e-12);
        let generic =
            RadialLevyDensity::new(3, 0.0, Arc::new(|s: f64| s.powi(-4)), None, vec![]).unwrap();
        let g = project_density_1d(&generic).unwrap().eval(1.0).unwrap();
        assert!((g - PI).abs() < 1e-8, "{g}");
        // d = 2, ν0 = s^{-3}: ν1(z) = 2 z^{-2}.
        let generic2 =
            RadialLevyDensity::new(2, 0.0, Arc::new(|s: f64| s.powi(-3)), None, vec![]).unwrap();
        let g2 = project_density_1d(&generic2).unwrap().eval(1.0).unwrap();
        assert!((g2 - 2.0).abs() < 1e-8, "{g2}");
    }

    #[test]
    fn stable_constant_reproduces_exponent() {
        // d = 3: ψ0(r) = 4π ∫ (1 − sin(rs)/(rs)) s² ν0(s) ds = r^α.
        for &alpha in &[0.5, 1.0, 1.5] {
            let c = stable_levy_constant(alpha, 3);
            let q = crate::quad::integrate_radial(
                |s: f64| {
                    let k = if s < 1e-4 {
                        s * s / 6.0
                    } else {
                        1.0 - s.sin() / s
                    };
                    4.0 * PI * k * s * s * c * s.powf(-3.0 - alpha)
                },
                0.0,
                f64::INFINITY,
                &[],
                1.0,
                QuadOpts::rel(1e-9),
            );
            // The tail is oscillatory; accept the partial value of a capped run.
            let v = q.map(|q| q.value).unwrap_or_else(|e| e.partial);
            assert!((v - 1.0).abs() < 1e-5, "α={alpha}: {v}");
        }
    }

    #[test]
    fn relativistic_density_small_scale_is_stable() {
        let s = make_named(NamedKind::Relativistic { alpha: 1.0, m: 1.0 }, 3).unwrap();
        let nu = s.radial_levy().unwrap();
        let c = stable_levy_constant(1.0, 3);
        let z = 1e-4;
        let ratio = nu.nu0(z) / (c * z.powi(-4));
        assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
        assert!(nu.nu0(10.0) < c * 1e-4 * 1e-2);
    }

    #[test]
    fn json_round_trip_and_fingerprint() {
        let text = r#"{"name":"x","kind":"stable","d":3,"params":{"alpha":1.0}}"#;
        let a = ProcessSpec::from_json(text).unwrap();
        let b = make_stable(1.0, 3).unwrap();
        assert_eq!(a.stable_index(), Some(1.0));
        assert_ne!(a.fingerprint(), b.fingerprint());
        let c =
            ProcessSpec::from_json(r#"{"d":3,"params":{"alpha":1.0},"kind":"stable","name":"x"}"#)
                .unwrap();
        assert_eq!(a.fingerprint(), c.fingerprint());
        assert!(ProcessSpec::from_json(r#"{"name":"x","kind":"nope","d":3}"#).is_err());
    }

    #[test]
    fn custom_kinds() {
        let s = ProcessSpec::from_json(
            r#"{"name":"c","kind":"sbm-custom","d":3,"params":{"phi":"lam/log(1+lam)-1"}}"#,
        );
        // λ/log(1+λ) − 1 is a valid Bernstein function with φ(0+) = 0.
        let s = s.unwrap();
        assert!(s.bernstein().unwrap().eval(1.0) > 0.0);
        let bad = ProcessSpec::from_json(
            r#"{"name":"c","kind":"unimodal-custom","d":3,"params":{"nu0":"s^(-2)*exp(s)"}}"#,
        );
        assert!(bad.is_err());
        let ok = ProcessSpec::from_json(
            r#"{"name":"c","kind":"unimodal-custom","d":3,"params":{"nu0":"s^(-4)","truncation":2.0}}"#,
        )
        .unwrap();
        assert_eq!(ok.radial_levy().unwrap().nu0(3.0), 0.0);
    }
}
