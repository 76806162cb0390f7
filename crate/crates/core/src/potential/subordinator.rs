//! Potential measure `U[0, r)` of a subordinator.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::constants::{SUB_LOWER, SUB_UPPER};
use crate::catalog::BernsteinFunction;
use crate::special::log_grid;

/// Which path produced `U[0, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialMethod {
    ClosedForm,
    LaplaceInversion,
    /// Bounded `φ`: only the two-sided bracket is available.
    BracketOnly,
}

impl PotentialMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            PotentialMethod::ClosedForm => "closed-form",
            PotentialMethod::LaplaceInversion => "laplace-inversion",
            PotentialMethod::BracketOnly => "bracket-only",
        }
    }
}

/// Gaver–Stehfest order.
pub const STEHFEST_ORDER: usize = 12;
/// Inversion grid `r ∈ [1e-12, 1e12]`.
pub const INVERSION_LO: f64 = 1e-12;
pub const INVERSION_HI: f64 = 1e12;
const INVERSION_PER_DECADE: usize = 100;
/// Relative bracket excursion before clamping that marks a low-confidence result.
pub const LOW_CONFIDENCE_EXCURSION: f64 = 0.10;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Stehfest weights `V_k`, `k = 1..=n` (`n` even).
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    assert!(n.is_multiple_of(2) && n > 0);
    let h = n / 2;
    (1..=n)
        .map(|k| {
            let mut s = 0.0;
            for j in k.div_ceil(2)..=k.min(h) {
                s += (j as f64).powi(h as i32) * factorial(2 * j)
                    / (factorial(h - j)
                        * factorial(j)
                        * factorial(j - 1)
                        * factorial(k - j)
                        * factorial(2 * j - k));
            }
            if (k + h).is_multiple_of(2) {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Gaver–Stehfest inverse of a Laplace transform `F` at `t > 0`.
pub fn stehfest_invert(f: impl Fn(f64) -> f64, t: f64, weights: &[f64]) -> f64 {
    let a = LN_2 / t;
    weights
        .iter()
        .enumerate()
        .map(|(k, w)| w * f((k + 1) as f64 * a))
        .sum::<f64>()
        * a
}

#[derive(Debug, Clone)]
struct InversionTable {
    lnr0: f64,
    step: f64,
    ln_u: Vec<f64>,
}

/// `U[0, r) = E ∫₀^∞ 1{T_t < r} dt` with the bracket `(1 − 2/e)/(2φ(1/r)) ≤ U[0, r) ≤ e/φ(1/r)`.
#[derive(Debug, Clone)]
pub struct SubordinatorPotential {
    phi: BernsteinFunction,
    method: PotentialMethod,
    table: Option<InversionTable>,
    /// Fraction of grid points whose raw inversion left the bracket.
    pub violation_rate: f64,
    /// Largest relative excursion outside the bracket before clamping.
    pub max_excursion: f64,
    pub low_confidence: bool,
}

/// Chooses the closed form when available, otherwise inverts numerically.
pub fn subordinator_potential(phi: &BernsteinFunction) -> SubordinatorPotential {
    if !phi.unbounded {
        return SubordinatorPotential::bare(phi, PotentialMethod::BracketOnly);
    }
    if phi.has_closed_potential() {
        return SubordinatorPotential::bare(phi, PotentialMethod::ClosedForm);
    }
    subordinator_potential_inverted(phi)
}

/// Always inverts `λ ↦ 1/(λφ(λ))`, even when a closed form exists.
pub fn subordinator_potential_inverted(phi: &BernsteinFunction) -> SubordinatorPotential {
    let weights = stehfest_weights(STEHFEST_ORDER);
    let grid = log_grid(
        INVERSION_LO,
        INVERSION_HI,
        ((INVERSION_HI / INVERSION_LO).log10() as usize) * INVERSION_PER_DECADE + 1,
    );
    let transform = |lam: f64| 1.0 / (lam * phi.eval(lam));
    let mut outside = 0usize;
    let mut max_excursion: f64 = 0.0;
    let mut running: f64 = 0.0;
    let mut ln_u = Vec::with_capacity(grid.len());
    for &r in &grid {
        let raw = stehfest_invert(transform, r, &weights);
        let (lo, hi) = bracket(phi, r);
        let excursion = if raw < lo {
            (lo - raw) / lo
        } else if raw > hi {
            (raw - hi) / hi
        } else {
            0.0
        };
        if excursion > 0.0 || !raw.is_finite() {
            outside += 1;
        }
        max_excursion = max_excursion.max(if raw.is_finite() {
            excursion
        } else {
            f64::INFINITY
        });
        let clamped = if raw.is_finite() {
            raw.clamp(lo, hi)
        } else {
            lo
        };
        running = running.max(clamped);
        ln_u.push(running.ln());
    }
    let n = grid.len();
    SubordinatorPotential {
        phi: phi.clone(),
        method: PotentialMethod::LaplaceInversion,
        table: Some(InversionTable {
            lnr0: grid[0].ln(),
            step: (grid[n - 1].ln() - grid[0].ln()) / (n - 1) as f64,
            ln_u,
        }),
        violation_rate: outside as f64 / n as f64,
        max_excursion,
        low_confidence: max_excursion > LOW_CONFIDENCE_EXCURSION,
    }
}

fn bracket(phi: &BernsteinFunction, r: f64) -> (f64, f64) {
    let p = phi.eval(1.0 / r);
    (SUB_LOWER / p, SUB_UPPER / p)
}

impl SubordinatorPotential {
    fn bare(phi: &BernsteinFunction, method: PotentialMethod) -> Self {
        Self {
            phi: phi.clone(),
            method,
            table: None,
            violation_rate: 0.0,
            max_excursion: 0.0,
            low_confidence: false,
        }
    }

    pub fn method(&self) -> PotentialMethod {
        self.method
    }

    pub fn source(&self) -> &BernsteinFunction {
        &self.phi
    }

    /// Proven bracket at `r`.
    pub fn bracket(&self, r: f64) -> (f64, f64) {
        bracket(&self.phi, r)
    }

    /// `U[0, r)`, or `None` when only the bracket is known.
    pub fn estimate(&self, r: f64) -> Option<f64> {
        if !(r > 0.0) {
            return Some(0.0);
        }
        match self.method {
            PotentialMethod::ClosedForm => self.phi.potential_cdf(r),
            PotentialMethod::BracketOnly => None,
            PotentialMethod::LaplaceInversion => {
                let t = self.table.as_ref().expect("inversion table");
                let n = t.ln_u.len();
                let x = (r.ln() - t.lnr0) / t.step;
                // Log-log linear inside the grid; end power laws outside.
                let i = (x.floor() as isize).clamp(0, n as isize - 2) as usize;
                let slope = t.ln_u[i + 1] - t.ln_u[i];
                let v = (t.ln_u[i] + slope * (x - i as f64)).exp();
                let (lo, hi) = self.bracket(r);
                Some(v.min(hi).max(lo))
            }
        }
    }

    /// `U[0, r)`, `NaN` when only the bracket is known.
    pub fn cdf(&self, r: f64) -> f64 {
        self.estimate(r).unwrap_or(f64::NAN)
    }

    /// Log-log slope of `U` at `r` (local power-law exponent).
    pub fn local_exponent(&self, r: f64) -> f64 {
        let h: f64 = 1e-3;
        let (a, b) = (self.cdf(r * (-h).exp()), self.cdf(r * h.exp()));
        (b.ln() - a.ln()) / (2.0 * h)
    }
}
