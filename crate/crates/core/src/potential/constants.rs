//! Explicit constants of the potential-measure and kernel estimates.

use std::collections::HashMap;
use std::f64::consts::{E, PI};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exponent::ScalingCertificate;
use crate::quad::{integrate_radial, QuadOpts};
use crate::special::{gamma_ur, sphere_area, unit_ball_volume, upper_gamma_2};

/// Upper constant `36e` of the ball-potential bracket.
pub const BALL_UPPER: f64 = 36.0 * E;
/// Upper constant of the Laplace transform bound for `r ↦ G(B_√r)`.
pub const LAPLACE_UPPER: f64 = 36.0;
/// Lower constant `(1 − 2/e)/2` of the subordinator potential bracket.
pub const SUB_LOWER: f64 = (1.0 - 2.0 / E) / 2.0;
/// Upper constant `e` of the subordinator potential bracket.
pub const SUB_UPPER: f64 = E;

/// Constants depending only on the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionConstants {
    pub d: usize,
    /// `2^{-(d+1)} π^{-d/2} ∫ e^{-|x|²/4} (1+|x|²)^{-1} dx`.
    pub c1: f64,
    /// Root of `(144e/C1) Γ(2, κ) = 1/2`.
    pub kappa: f64,
    /// `C1 / (4(κ + 1))`, lower constant of the ball-potential bracket.
    pub c2: f64,
    /// `|B1|² / (72e(1 + |B1|²))`, general-set capacity floor.
    pub c3: f64,
    /// `36e / |B1|`, upper constant of the kernel bracket.
    pub c4: f64,
    /// `|B1| / 36e`, lower constant of the ball capacity bracket.
    pub cap_lower: f64,
    /// `Γ(d/2 − 1, 1/4)/Γ(d/2 − 1) · (1 − e^{-3/4})`, the special-SBM Green floor.
    pub c7: f64,
    pub unit_ball: f64,
}

fn compute(d: usize) -> Result<DimensionConstants> {
    if d < 3 {
        return Err(invalid(format!("potential constants need d ≥ 3, got {d}")));
    }
    let df = d as f64;
    let radial = integrate_radial(
        |s| s.powi(d as i32 - 1) * (-s * s / 4.0).exp() / (1.0 + s * s),
        0.0,
        f64::INFINITY,
        &[],
        2.0,
        QuadOpts::rel(1e-13),
    )
    .map_err(|e| e.into_error("C1"))?
    .value;
    let c1 = sphere_area(d) * radial / (2f64.powf(df + 1.0) * PI.powf(df / 2.0));
    // Γ(2, κ) = C1/(288e); Γ(2, ·) is decreasing from 1.
    let target = c1 / (288.0 * E);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while upper_gamma_2(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if upper_gamma_2(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kappa = 0.5 * (lo + hi);
    let b1 = unit_ball_volume(d);
    Ok(DimensionConstants {
        d,
        c1,
        kappa,
        c2: c1 / (4.0 * (kappa + 1.0)),
        c3: b1 * b1 / (72.0 * E * (1.0 + b1 * b1)),
        c4: BALL_UPPER / b1,
        cap_lower: b1 / BALL_UPPER,
        c7: gamma_ur(df / 2.0 - 1.0, 0.25) * (1.0 - (-0.75f64).exp()),
        unit_ball: b1,
    })
}

/// Cached per-dimension constants (evaluated once per `d`).
pub fn dimension_constants(d: usize) -> Result<DimensionConstants> {
    static CACHE: OnceLock<Mutex<HashMap<usize, DimensionConstants>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().expect("constants cache").get(&d) {
        return Ok(*c);
    }
    let c = compute(d)?;
    cache.lock().expect("constants cache").insert(d, c);
    Ok(c)
}

/// Kernel lower-bound constants derived from a verified WLSC certificate of `ψ*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub d: usize,
    pub beta: f64,
    pub c_star: f64,
    /// `C2/(36e)`: ratio of the two ball-potential constants.
    pub comparability: f64,
    /// `(24/(C2/(36e) · C*))^{1/β}`.
    pub kappa: f64,
    /// `36e/(|B1| κ^d)`.
    pub c5: f64,
    /// Lower bound holds for `|x| ≤ b R`.
    pub b: f64,
    /// `R = 1/θ` of the certificate.
    pub big_r: f64,
}

impl KernelConstants {
    pub fn from_certificate(d: usize, cert: &ScalingCertificate) -> Result<Self> {
        if !cert.verified {
            return Err(invalid(
                "kernel lower constants need a verified certificate",
            ));
        }
        let dc = dimension_constants(d)?;
        let comparability = dc.c2 / BALL_UPPER;
        let kappa = (24.0 / (comparability * cert.c)).powf(1.0 / cert.beta);
        Ok(Self {
            d,
            beta: cert.beta,
            c_star: cert.c,
            comparability,
            kappa,
            c5: BALL_UPPER / (dc.unit_ball * kappa.powi(d as i32)),
            b: 1.0 / kappa,
            big_r: cert.big_r(),
        })
    }

    /// `|x|` up to which the `C5` lower bound is proven.
    pub fn lower_range(&self) -> f64 {
        self.b * self.big_r
    }

    /// `L = (4 C4/(C5 (1 − ε)))^{1/(d−2)} ∨ b^{-1}` for `G_{B_r}(x, y) ≥ ε G(x − y)`.
    pub fn green_floor_l(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!("ε = {eps} outside (0, 1)")));
        }
        let c4 = dimension_constants(self.d)?.c4;
        let l = (4.0 * c4 / (self.c5 * (1.0 - eps))).powf(1.0 / (self.d as f64 - 2.0));
        Ok(l.max(1.0 / self.b))
    }
}

/// Constants of the subordinate-BM kernel lower bound `G(x) ≥ C6/(|x|^d φ(|x|^{-2}))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmKernelConstants {
    pub d: usize,
    /// Scaling exponent and constant of `φ` (half of the exponent of `ψ`).
    pub beta_phi: f64,
    pub c_star: f64,
    /// `2e²/((e − 2) C*)`.
    pub c2: f64,
    /// `(2 c2)^{-1/β}`.
    pub kappa: f64,
    /// `(1 − 2/e)/4 · (g_κ(1) ∧ g_1(1))`.
    pub c6: f64,
    pub big_r: f64,
}

/// Gaussian kernel `g_s(y) = (4πs)^{-d/2} e^{-|y|²/(4s)}` at radius `rho`.
pub fn heat_kernel(d: usize, s: f64, rho: f64) -> f64 {
    // Log form: the two factors over/underflow separately for tiny s.
    (-(d as f64) / 2.0 * (4.0 * PI * s).ln() - rho * rho / (4.0 * s)).exp()
}

impl SbmKernelConstants {
    /// From a certificate of `ψ(ξ) = φ(|ξ|²)`; `φ` then satisfies WLSC with `β/2`, `θ²`, same `C`.
    pub fn from_psi_certificate(d: usize, cert: &ScalingCertificate) -> Result<Self> {
        if !cert.verified {
            return Err(invalid(
                "kernel lower constants need a verified certificate",
            ));
        }
        if d < 3 {
            return Err(invalid(format!("kernel bounds need d ≥ 3, got {d}")));
        }
        let beta_phi = cert.beta / 2.0;
        let c2 = 2.0 * E * E / ((E - 2.0) * cert.c);
        let kappa = (2.0 * c2).powf(-1.0 / beta_phi);
        let g = heat_kernel(d, kappa, 1.0).min(heat_kernel(d, 1.0, 1.0));
        Ok(Self {
            d,
            beta_phi,
            c_star: cert.c,
            c2,
            kappa,
            c6: (1.0 - 2.0 / E) / 4.0 * g,
            big_r: cert.big_r(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c1_matches_direct_three_dimensional_integral() {
        // d = 3: 4π ∫ ρ² e^{-ρ²/4}/(1+ρ²) dρ / (16 π^{3/2}); the radial
        // integral is √π − (π/2) e^{1/4} erfc(1/2).
        // Evaluated at 30 digits.
        let want = 0.113_589_659_808_738_24;
        let c = dimension_constants(3).unwrap();
        assert!((c.c1 / want - 1.0).abs() < 1e-10, "{} vs {want}", c.c1);
        assert!((upper_gamma_2(c.kappa) * 144.0 * E / c.c1 - 0.5).abs() < 1e-12);
        assert!(c.c2 > 0.0 && c.c2 < c.c1);
    }

    #[test]
    fn named_constants() {
        let c = dimension_constants(3).unwrap();
        assert!((c.c4 - 23.361_911_444_671_157).abs() < 1e-12);
        assert!((c.cap_lower - 0.042796).abs() < 1e-5);
        // Γ(1/2, 1/4)/Γ(1/2) = erfc(1/2), at 30 digits.
        let c7 = 0.479_500_122_186_953_5 * (1.0 - (-0.75f64).exp());
        assert!((c.c7 / c7 - 1.0).abs() < 1e-9, "{} vs {c7}", c.c7);
        assert!(dimension_constants(2).is_err());
    }
}
