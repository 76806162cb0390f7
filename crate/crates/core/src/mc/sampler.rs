//! Exact and approximate increment samplers.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};

use crate::catalog::{ProcessKind, ProcessSpec, RadialLevyDensity, SamplerTag};
use crate::error::{invalid, Error, Result};
use crate::quad::{kronrod21, QuadOpts};
use crate::special::log_grid;

/// Points of the radial inverse CDF.
pub const RADIUS_TABLE_POINTS: usize = 4096;
/// Tail mass (relative to `Λ(ε)`) left to the power-law extrapolation.
const RADIUS_TAIL_MASS: f64 = 1e-10;

/// Unit positive `a`-stable variable with `E e^{-λS} = e^{-λ^a}` (Kanter's representation).
pub fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a == 1.0 {
        return 1.0;
    }
    let theta = PI * rng.random::<f64>();
    let e: f64 = Exp1.sample(rng);
    let ln_a = (a / (1.0 - a)) * (a * theta).sin().ln() + ((1.0 - a) * theta).sin().ln()
        - theta.sin().ln() / (1.0 - a);
    (((1.0 - a) / a) * (ln_a - e.ln())).exp()
}

/// Inverse CDF of the jump radius `|z| ≥ ε` under `ν`.
#[derive(Debug, Clone)]
pub struct RadiusTable {
    eps: f64,
    /// `ln ρ_i`, increasing.
    ln_rho: Vec<f64>,
    /// `ln T(ρ_i)/Λ`, the normalised tail mass, decreasing from 0.
    ln_tail: Vec<f64>,
    /// Power-law exponent of the tail beyond the table (`T ∝ ρ^{-p}`); `None` when truncated.
    tail_exponent: Option<f64>,
    pub rate: f64,
}

impl RadiusTable {
    pub fn build(nu: &RadialLevyDensity, eps: f64) -> Result<Self> {
        let opts = QuadOpts::rel(1e-10);
        let total = nu.radial_moment(0.0, eps, f64::INFINITY, opts)?;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Unsupported(format!(
                "no jumps of size ≥ {eps} (Λ = {total})"
            )));
        }
        let (hi, truncated) = match nu.truncation {
            Some(t) => (t, true),
            None => {
                let mut hi = eps * 10.0;
                while nu.radial_moment(0.0, hi, f64::INFINITY, opts)? > RADIUS_TAIL_MASS * total
                    && hi < eps * 1e30
                {
                    hi *= 10.0;
                }
                (hi, false)
            }
        };
        let mut grid = log_grid(eps, hi, RADIUS_TABLE_POINTS - 1);
        for b in nu.all_breaks() {
            if b > eps && b < hi {
                grid.push(b);
            }
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let sigma = crate::special::sphere_area(nu.d);
        let dm1 = nu.d as i32 - 1;
        // Cell masses from the top down so the tail keeps full relative precision.
        let n = grid.len();
        let mut tail = vec![0.0; n];
        tail[n - 1] = if truncated {
            0.0
        } else {
            nu.radial_moment(0.0, hi, f64::INFINITY, opts)?
        };
        for i in (0..n - 1).rev() {
            let (a, b) = (grid[i], grid[i + 1]);
            let (m, _) = kronrod21(
                |u: f64| {
                    let s = u.exp();
                    s.powi(dm1 + 1) * nu.nu0(s)
                },
                a.ln(),
                b.ln(),
            );
            tail[i] = tail[i + 1] + sigma * m;
        }
        let norm = tail[0];
        let ln_tail: Vec<f64> = tail.iter().map(|t| (t / norm).ln()).collect();
        let tail_exponent = (!truncated).then(|| {
            let k = n - 2;
            -(ln_tail[k + 1] - ln_tail[k]) / (grid[k + 1].ln() - grid[k].ln())
        });
        Ok(Self {
            eps,
            ln_rho: grid.iter().map(|g| g.ln()).collect(),
            ln_tail,
            tail_exponent,
            rate: norm,
        })
    }

    /// Radius with normalised tail mass `v ∈ (0, 1]`.
    pub fn radius(&self, v: f64) -> f64 {
        let lv = v.ln();
        let n = self.ln_tail.len();
        let last = self.ln_tail[n - 1];
        if lv < last {
            // Only reachable for untruncated tails: power-law extrapolation.
            let p = self.tail_exponent.unwrap_or(f64::INFINITY);
            return (self.ln_rho[n - 1] + (last - lv) / p).exp();
        }
        // ln_tail decreases from 0: cell i has ln_tail[i] ≥ lv > ln_tail[i+1].
        let k = self.ln_tail.partition_point(|&t| t >= lv);
        let i = k.max(1).min(n - 1) - 1;
        let (t0, t1) = (self.ln_tail[i], self.ln_tail[i + 1]);
        let frac = if t1.is_finite() {
            if t0 > t1 {
                (t0 - lv) / (t0 - t1)
            } else {
                0.0
            }
        } else {
            // Last cell of a truncated tail: interpolate the mass itself.
            1.0 - v / t0.exp()
        };
        let rho =
            (self.ln_rho[i] + frac.clamp(0.0, 1.0) * (self.ln_rho[i + 1] - self.ln_rho[i])).exp();
        rho.max(self.eps)
    }
}

/// How increments are produced for a given specification and step.
#[derive(Debug, Clone)]
enum Kind {
    /// `X = √(2S) N` with `S` a subordinator increment.
    Subordinated {
        drift: f64,
        /// `(a, scale)`: `S_jump = scale · S_a`; `a = α/2`.
        stable: Option<(f64, f64)>,
        /// Exponential tilt `κ` of the stable part.
        tilt: Option<f64>,
    },
    /// Gaussian (Brownian part plus small jumps) and compound Poisson large jumps.
    Levy { radius: RadiusTable },
}

/// One increment over `Δt`: a Gaussian part and a list of jumps (flattened).
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    pub d: usize,
    pub dt: f64,
    pub eps: f64,
    /// Per-coordinate variance of the continuous Gaussian part over one step (0 if none).
    pub gauss_var: f64,
    kind: Kind,
}

impl IncrementSampler {
    pub fn new(spec: &ProcessSpec, dt: f64, eps: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("Δt = {dt} must be positive")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid(format!("ε = {eps} must be positive")));
        }
        let d = spec.d();
        match &spec.kind {
            ProcessKind::SubordinateBM { phi, .. } => {
                let alpha = phi.stable_index();
                match phi.sampler {
                    SamplerTag::StableExact => {
                        let stable = alpha
                            .filter(|&a| a < 2.0)
                            .map(|a| (a / 2.0, dt.powf(2.0 / a)));
                        let pure_drift = stable.is_none();
                        Ok(Self {
                            d,
                            dt,
                            eps,
                            gauss_var: if pure_drift {
                                2.0 * phi.drift * dt
                            } else {
                                0.0
                            },
                            kind: Kind::Subordinated {
                                drift: phi.drift,
                                stable,
                                tilt: None,
                            },
                        })
                    }
                    SamplerTag::TemperedStableRejection => {
                        let (alpha, kappa) = phi.tempered_params().ok_or_else(|| {
                            Error::Unsupported(
                                "tempered sampler without tempered parameters".into(),
                            )
                        })?;
                        Ok(Self {
                            d,
                            dt,
                            eps,
                            gauss_var: 0.0,
                            kind: Kind::Subordinated {
                                drift: phi.drift,
                                stable: Some((alpha / 2.0, dt.powf(2.0 / alpha))),
                                tilt: Some(kappa),
                            },
                        })
                    }
                    SamplerTag::GenericNone => Err(Error::Unsupported(format!(
                        "'{}': no increment sampler for φ(λ) = {}",
                        spec.name,
                        phi.describe()
                    ))),
                }
            }
            ProcessKind::UnimodalLevy(nu) => {
                if nu.is_zero() {
                    return Ok(Self {
                        d,
                        dt,
                        eps,
                        gauss_var: 2.0 * nu.a * dt,
                        kind: Kind::Subordinated {
                            drift: nu.a,
                            stable: None,
                            tilt: None,
                        },
                    });
                }
                let small = nu.radial_moment(2.0, 0.0, eps, QuadOpts::rel(1e-10))?;
                let radius = RadiusTable::build(nu, eps)?;
                Ok(Self {
                    d,
                    dt,
                    eps,
                    gauss_var: 2.0 * nu.a * dt + dt * small / d as f64,
                    kind: Kind::Levy { radius },
                })
            }
        }
    }

    /// Rate `Λ(ε)` of compound Poisson jumps, 0 for subordinated samplers.
    pub fn jump_rate(&self) -> f64 {
        match &self.kind {
            Kind::Levy { radius } => radius.rate,
            Kind::Subordinated { .. } => 0.0,
        }
    }

    /// True when the Gaussian part is a continuous path (bridge test applies).
    pub fn has_continuous_part(&self) -> bool {
        self.gauss_var > 0.0
    }

    fn subordinator<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        drift: f64,
        stable: Option<(f64, f64)>,
        tilt: Option<f64>,
    ) -> f64 {
        let jump = match (stable, tilt) {
            (None, _) => 0.0,
            (Some((a, scale)), None) => scale * positive_stable(a, rng),
            (Some((a, scale)), Some(k)) => loop {
                let s = scale * positive_stable(a, rng);
                if rng.random::<f64>() <= (-k * s).exp() {
                    break s;
                }
            },
        };
        drift * self.dt + jump
    }

    /// Writes the Gaussian part into `gauss` and appends jump vectors to `jumps`.
    ///
    /// For subordinated samplers the whole increment is returned in `gauss`;
    /// it is a continuous move only when [`Self::has_continuous_part`].
    pub fn sample_parts<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        gauss: &mut [f64],
        jumps: &mut Vec<f64>,
    ) {
        jumps.clear();
        match &self.kind {
            Kind::Subordinated {
                drift,
                stable,
                tilt,
            } => {
                let s = self.subordinator(rng, *drift, *stable, *tilt);
                let sd = (2.0 * s).sqrt();
                for g in gauss.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *g = sd * z;
                }
            }
            Kind::Levy { radius } => {
                let sd = self.gauss_var.sqrt();
                for g in gauss.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *g = sd * z;
                }
                let mean = radius.rate * self.dt;
                let k = if mean > 0.0 {
                    Poisson::new(mean)
                        .map(|p| p.sample(rng) as usize)
                        .unwrap_or(0)
                } else {
                    0
                };
                for _ in 0..k {
                    let v: f64 = 1.0 - rng.random::<f64>();
                    let rho = radius.radius(v);
                    let start = jumps.len();
                    let mut norm2 = 0.0;
                    for _ in 0..self.d {
                        let z: f64 = StandardNormal.sample(rng);
                        norm2 += z * z;
                        jumps.push(z);
                    }
                    let f = rho / norm2.sqrt();
                    for c in &mut jumps[start..] {
                        *c *= f;
                    }
                }
            }
        }
    }

    /// One full increment.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut g = vec![0.0; self.d];
        let mut j = Vec::new();
        self.sample_parts(rng, &mut g, &mut j);
        for chunk in j.chunks(self.d) {
            for (a, b) in g.iter_mut().zip(chunk) {
                *a += b;
            }
        }
        g
    }
}

/// One increment of `spec` over `dt` (builds a sampler; prefer [`IncrementSampler`] in loops).
pub fn sample_increment<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    dt: f64,
    eps: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(IncrementSampler::new(spec, dt, eps)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_named, make_stable, NamedKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn half_stable_laplace_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 200_000;
        let lam = 0.7;
        let m: f64 = (0..n)
            .map(|_| (-lam * positive_stable(0.5, &mut rng)).exp())
            .sum::<f64>()
            / n as f64;
        let want = (-lam.sqrt()).exp();
        assert!((m - want).abs() < 4e-3, "{m} vs {want}");
        let m: f64 = (0..n)
            .map(|_| (-lam * positive_stable(0.75, &mut rng)).exp())
            .sum::<f64>()
            / n as f64;
        assert!((m - (-lam.powf(0.75)).exp()).abs() < 4e-3);
    }

    #[test]
    fn radius_table_inverts_power_law_tail() {
        // ν0 = s^{-4} in d = 3: T(ρ) ∝ ρ^{-1}, so radius(v) = ε/v.
        let nu = RadialLevyDensity::power(3, 1.0, 4.0).unwrap();
        let t = RadiusTable::build(&nu, 0.01).unwrap();
        assert!((t.rate - 4.0 * PI * 100.0).abs() < 1e-6 * t.rate);
        for &v in &[1.0, 0.5, 1e-3, 1e-8, 1e-12] {
            assert!((t.radius(v) / (0.01 / v) - 1.0).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn brownian_increment_covariance() {
        let bm = make_stable(2.0, 3).unwrap();
        let s = IncrementSampler::new(&bm, 1.0, 0.01).unwrap();
        assert!(s.has_continuous_part());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut acc = [0.0; 3];
        for _ in 0..n {
            let v = s.sample(&mut rng);
            for i in 0..3 {
                acc[i] += v[i] * v[i];
            }
        }
        for a in acc {
            assert!((a / n as f64 - 2.0).abs() < 0.05);
        }
    }

    #[test]
    fn generic_custom_sbm_is_unsupported() {
        let spec = crate::catalog::ProcessSpec::from_json(
            r#"{"name":"c","kind":"sbm-custom","d":3,"params":{"phi":"l/(1+l)"}}"#,
        );
        if let Ok(spec) = spec {
            assert!(IncrementSampler::new(&spec, 0.1, 0.01).is_err());
        }
        let t = make_named(NamedKind::Truncated { alpha: 1.0 }, 3).unwrap();
        let s = IncrementSampler::new(&t, 0.01, 0.01).unwrap();
        assert!(s.jump_rate() > 0.0);
    }
}
