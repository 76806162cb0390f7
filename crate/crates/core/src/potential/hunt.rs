//! Monte Carlo backed Green functions and Poisson kernels of balls.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::kernel::GreenKernel;
use crate::catalog::ProcessSpec;
use crate::error::{invalid, Error, Result};
use crate::mc::{mean_se, ExitRecord, OccupationHistogram};
use crate::quad::{integrate, integrate_with_breaks, QuadOpts};
use crate::special::sphere_area;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `G_{B_r}(x, y)` by the Hunt formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuntGreen {
    pub value: f64,
    pub stderr: f64,
    /// `G(y − x)`, the free kernel term.
    pub free: f64,
    /// Set when the raw difference was negative and clamped to 0.
    pub clamped: bool,
    pub samples: usize,
}

/// `G(y − x) − E^x G(X_{τ_{B_r}} − y)` from exit records started at `x`.
pub fn hunt_green(
    kernel: &GreenKernel,
    r: f64,
    x: &[f64],
    y: &[f64],
    exits: &[ExitRecord],
) -> Result<HuntGreen> {
    let sep = dist(x, y);
    if sep < 1e-6 * r {
        return Err(invalid(format!(
            "|x − y| = {sep:e} is too small for kernel evaluation"
        )));
    }
    let inside = |p: &[f64]| p.iter().map(|v| v * v).sum::<f64>().sqrt() < r;
    if !inside(x) || !inside(y) {
        return Err(Error::Contract(format!(
            "x and y must lie in the ball of radius {r}"
        )));
    }
    if exits.is_empty() {
        return Err(invalid("no exit samples"));
    }
    let free = kernel.eval(sep);
    let (mean, stderr) = mean_se(exits.iter().map(|e| kernel.eval(dist(&e.exit, y))));
    let raw = free - mean;
    Ok(HuntGreen {
        value: raw.max(0.0),
        stderr,
        free,
        clamped: raw < 0.0,
        samples: exits.len(),
    })
}

/// A target region outside `B̄_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExteriorRegion {
    /// Axis-aligned cube; `ν(Z − y)` uses the midpoint rule.
    Cube { center: Vec<f64>, side: f64 },
    /// `{inner ≤ |z| < outer}`; `outer` may be infinite.
    Shell { inner: f64, outer: f64 },
}

impl ExteriorRegion {
    pub fn contains(&self, z: &[f64]) -> bool {
        match self {
            ExteriorRegion::Cube { center, side } => z
                .iter()
                .zip(center)
                .all(|(a, c)| (a - c).abs() <= side / 2.0),
            ExteriorRegion::Shell { inner, outer } => {
                let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                n >= *inner && n < *outer
            }
        }
    }

    fn mass_from(&self, nu0: &dyn Fn(f64) -> f64, d: usize, y: &[f64]) -> Result<f64> {
        match self {
            ExteriorRegion::Cube { center, side } => Ok(nu0(dist(center, y)) * side.powi(d as i32)),
            ExteriorRegion::Shell { inner, outer } => {
                let t = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                shell_mass(nu0, d, t, *inner, *outer)
            }
        }
    }
}

/// `∫_{inner ≤ |z| < outer} ν0(|z − y|) dz` for `|y| = t < inner`.
fn shell_mass(nu0: &dyn Fn(f64) -> f64, d: usize, t: f64, inner: f64, outer: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Unsupported("shell regions need d ≥ 2".into()));
    }
    let opts = QuadOpts::rel(1e-7);
    let sphere_avg = |rho: f64| -> f64 {
        if t == 0.0 {
            return nu0(rho);
        }
        // Average of ν0(|ρω − y|) over the unit sphere, in the polar angle.
        let w = sphere_area(d - 1) / sphere_area(d);
        let f = |th: f64| {
            nu0((rho * rho + t * t - 2.0 * rho * t * th.cos())
                .max(0.0)
                .sqrt())
                * th.sin().powi(d as i32 - 2)
        };
        integrate(f, 0.0, std::f64::consts::PI, opts)
            .map(|q| q.value)
            .unwrap_or_else(|e| e.partial)
            * w
    };
    let breaks = [inner + t, 2.0 * inner, 4.0 * inner];
    let q = integrate_with_breaks(
        |rho| sphere_area(d) * rho.powi(d as i32 - 1) * sphere_avg(rho),
        inner,
        outer,
        &breaks,
        opts,
    )
    .map_err(|e| e.into_error("shell mass of ν"))?;
    Ok(q.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonCell {
    pub region: ExteriorRegion,
    pub mass: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonKernel {
    pub r: f64,
    pub x0: Vec<f64>,
    pub cells: Vec<PoissonCell>,
}

impl PoissonKernel {
    pub fn total(&self) -> (f64, f64) {
        let m = self.cells.iter().map(|c| c.mass).sum();
        let se = self.cells.iter().map(|c| c.stderr).sum();
        (m, se)
    }
}

/// `P_{B_r}(x, Z) = Σ_y ν(Z − y) · occupation(y)` for each exterior region `Z`.
///
/// Cell standard errors are combined as `Σ_y ν(Z − y)·se(y)`, an upper bound
/// on the standard error whatever the correlation between cells.
pub fn poisson_kernel(
    spec: &ProcessSpec,
    occ: &OccupationHistogram,
    regions: &[ExteriorRegion],
) -> Result<PoissonKernel> {
    let nu = spec.radial_levy()?;
    if nu.is_zero() {
        return Err(Error::Unsupported(
            "no Lévy density: exits are continuous and the Poisson kernel vanishes".into(),
        ));
    }
    let nu0 = |s: f64| nu.nu0(s);
    // Occupied cells straddling the sphere are attributed to a point just inside it.
    let t_max = occ.r - occ.side / 2.0;
    let mut cells = Vec::with_capacity(regions.len());
    for region in regions {
        match region {
            ExteriorRegion::Cube { center, side } => {
                let gap: f64 = center
                    .iter()
                    .map(|c| (c.abs() - side / 2.0).max(0.0).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if gap <= occ.r {
                    return Err(Error::Contract(
                        "exterior cube must lie outside the closed ball".into(),
                    ));
                }
            }
            ExteriorRegion::Shell { inner, outer } => {
                if *inner < occ.r || outer <= inner {
                    return Err(Error::Contract(
                        "exterior shell must satisfy r ≤ inner < outer".into(),
                    ));
                }
            }
        }
        let mut memo: HashMap<u64, f64> = HashMap::new();
        let (mut mass, mut se) = (0.0, 0.0);
        for (i, y, m) in occ.cells() {
            let w = match region {
                ExteriorRegion::Shell { inner, outer } => {
                    let t2: f64 = y.iter().map(|v| v * v).sum();
                    // Cell centres sit on a half-integer lattice: 4|y|²/side² is an integer.
                    let key = (4.0 * t2 / (occ.side * occ.side)).round() as u64;
                    match memo.get(&key) {
                        Some(w) => *w,
                        None => {
                            let w = shell_mass(&nu0, occ.d, t2.sqrt().min(t_max), *inner, *outer)?;
                            memo.insert(key, w);
                            w
                        }
                    }
                }
                _ => region.mass_from(&nu0, occ.d, &y)?,
            };
            mass += w * m;
            se += w * occ.stderr[i];
        }
        cells.push(PoissonCell {
            region: region.clone(),
            mass,
            stderr: se,
        });
    }
    Ok(PoissonKernel {
        r: occ.r,
        x0: occ.x0.clone(),
        cells,
    })
}
