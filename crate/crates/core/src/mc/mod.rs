//! Monte Carlo path simulation: exits from balls, hitting before exit and
//! occupation (Green) measures.
//!
//! Replica `i` draws from its own ChaCha8 stream keyed by `(seed, purpose)`, so
//! aggregates are identical for any number of worker threads.

mod sampler;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::ProcessSpec;
use crate::error::{invalid, Error, Result};

pub use sampler::{
    positive_stable, sample_increment, IncrementSampler, RadiusTable, RADIUS_TABLE_POINTS,
};

pub type McRng = ChaCha8Rng;

/// Replicas per occupation accumulation block.
const OCCUPATION_BLOCK: usize = 256;

/// Simulation controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub dt: f64,
    pub eps: f64,
    pub max_steps: u64,
    pub seed: u64,
    pub n: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            eps: 0.01,
            max_steps: 10_000_000,
            seed: 0,
            n: 10_000,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("Δt = {} must be positive", self.dt)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(invalid(format!("ε = {} must be positive", self.eps)));
        }
        if self.n == 0 {
            return Err(invalid("replica count must be at least 1"));
        }
        if self.max_steps == 0 {
            return Err(invalid("max steps must be at least 1"));
        }
        Ok(())
    }

    /// Default small-jump cutoff `min(0.01, r/100)`.
    pub fn default_eps(r: f64) -> f64 {
        (r / 100.0).min(0.01)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream key for a `(seed, purpose)` pair; purposes separate independent uses.
pub fn stream_key(seed: u64, purpose: u64) -> u64 {
    splitmix64(seed ^ splitmix64(purpose))
}

/// Generator for replica `index` under `key`.
pub fn replica_rng(key: u64, index: u64) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Runs `f` for every replica and returns results in replica order.
pub fn map_replicas<T: Send>(
    n: usize,
    key: u64,
    f: impl Fn(usize, &mut McRng) -> T + Sync,
) -> Vec<T> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(key, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// First exit from `B_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitRecord {
    pub tau: f64,
    pub exit: Vec<f64>,
    pub pre_exit: Vec<f64>,
    pub steps: u64,
    pub jumped: bool,
    /// Index of the replica stream that produced the path.
    #[serde(default)]
    pub replica: usize,
}

/// How a walk ended.
#[derive(Debug, Clone, PartialEq)]
pub enum WalkEnd {
    Exit(ExitRecord),
    /// The stop predicate fired (e.g. the path entered a target set).
    Stopped {
        steps: u64,
        at: Vec<f64>,
    },
    Censored {
        steps: u64,
    },
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Stateless path engine for one specification and step size.
#[derive(Debug, Clone)]
pub struct PathSimulator {
    pub sampler: IncrementSampler,
    pub max_steps: u64,
}

impl PathSimulator {
    pub fn new(spec: &ProcessSpec, dt: f64, eps: f64, max_steps: u64) -> Result<Self> {
        Ok(Self {
            sampler: IncrementSampler::new(spec, dt, eps)?,
            max_steps,
        })
    }

    pub fn from_config(spec: &ProcessSpec, cfg: &PathConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(spec, cfg.dt, cfg.eps, cfg.max_steps)
    }

    pub fn d(&self) -> usize {
        self.sampler.d
    }

    /// Walks from `x0` until exit from `B_r`, `stop(position)` fires, or censoring.
    ///
    /// `occupy(position, dt)` is called once per completed in-ball step with the
    /// position at the start of the step.
    pub fn walk<R: Rng + ?Sized>(
        &self,
        x0: &[f64],
        r: f64,
        rng: &mut R,
        mut stop: impl FnMut(&[f64]) -> bool,
        mut occupy: impl FnMut(&[f64], f64),
    ) -> WalkEnd {
        let d = self.d();
        let dt = self.sampler.dt;
        let mut pos = x0.to_vec();
        if stop(&pos) {
            return WalkEnd::Stopped { steps: 0, at: pos };
        }
        let mut gauss = vec![0.0; d];
        let mut jumps = Vec::new();
        let mut next = vec![0.0; d];
        let continuous = self.sampler.has_continuous_part();
        let var = self.sampler.gauss_var;
        for step in 1..=self.max_steps {
            self.sampler.sample_parts(rng, &mut gauss, &mut jumps);
            for i in 0..d {
                next[i] = pos[i] + gauss[i];
            }
            let rn = norm(&next);
            let tau = step as f64 * dt;
            if rn >= r {
                let exit = if continuous {
                    next.iter().map(|v| v * r / rn).collect()
                } else {
                    next.clone()
                };
                occupy(&pos, dt);
                return WalkEnd::Exit(ExitRecord {
                    replica: 0,
                    tau,
                    exit,
                    pre_exit: pos,
                    steps: step,
                    jumped: !continuous,
                });
            }
            if continuous {
                // Brownian bridge against the tangent plane of the nearest boundary point.
                let (d1, d2) = (r - norm(&pos), r - rn);
                let p = (-2.0 * d1 * d2 / var).exp();
                if rng.random::<f64>() < p {
                    occupy(&pos, dt);
                    return WalkEnd::Exit(ExitRecord {
                        replica: 0,
                        tau,
                        exit: next.iter().map(|v| v * r / rn).collect(),
                        pre_exit: pos,
                        steps: step,
                        jumped: false,
                    });
                }
            }
            if stop(&next) {
                occupy(&pos, dt);
                return WalkEnd::Stopped {
                    steps: step,
                    at: next,
                };
            }
            for jump in jumps.chunks(d) {
                let before = next.clone();
                for i in 0..d {
                    next[i] += jump[i];
                }
                if norm(&next) >= r {
                    occupy(&pos, dt);
                    return WalkEnd::Exit(ExitRecord {
                        replica: 0,
                        tau,
                        exit: next.clone(),
                        pre_exit: before,
                        steps: step,
                        jumped: true,
                    });
                }
                if stop(&next) {
                    occupy(&pos, dt);
                    return WalkEnd::Stopped {
                        steps: step,
                        at: next,
                    };
                }
            }
            occupy(&pos, dt);
            std::mem::swap(&mut pos, &mut next);
        }
        WalkEnd::Censored {
            steps: self.max_steps,
        }
    }

    /// Exit record of one path, or `None` when censored.
    pub fn exit<R: Rng + ?Sized>(&self, x0: &[f64], r: f64, rng: &mut R) -> Option<ExitRecord> {
        match self.walk(x0, r, rng, |_| false, |_, _| {}) {
            WalkEnd::Exit(e) => Some(e),
            _ => None,
        }
    }
}

/// Exit records of `n` independent paths (censored ones dropped and counted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitBatch {
    pub r: f64,
    pub x0: Vec<f64>,
    pub records: Vec<ExitRecord>,
    pub censored: usize,
}

impl ExitBatch {
    pub fn n(&self) -> usize {
        self.records.len() + self.censored
    }

    pub fn censoring_rate(&self) -> f64 {
        self.censored as f64 / self.n().max(1) as f64
    }

    /// Mean exit time over uncensored paths with its standard error.
    pub fn mean_tau(&self) -> (f64, f64) {
        mean_se(self.records.iter().map(|e| e.tau))
    }

    /// Fraction of uncensored paths with `pred(exit)`, with binomial standard error.
    pub fn proportion(&self, pred: impl Fn(&[f64]) -> bool) -> (f64, f64) {
        let n = self.records.len().max(1) as f64;
        let k = self.records.iter().filter(|e| pred(&e.exit)).count() as f64;
        let p = k / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }

    pub fn jumped_fraction(&self) -> (f64, f64) {
        let n = self.records.len().max(1) as f64;
        let p = self.records.iter().filter(|e| e.jumped).count() as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }
}

/// Sample mean and its standard error, summed in order.
pub fn mean_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut s, mut s2) = (0.0, 0.0, 0.0);
    for v in values {
        n += 1.0;
        s += v;
        s2 += v * v;
    }
    if n == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let m = s / n;
    let var = if n > 1.0 {
        ((s2 - n * m * m) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    (m, (var / n).sqrt())
}

fn check_start(x0: &[f64], r: f64, d: usize) -> Result<()> {
    if x0.len() != d {
        return Err(invalid(format!(
            "start point has {} coordinates, expected {d}",
            x0.len()
        )));
    }
    if !(r > 0.0) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    if !(norm(x0) < r) {
        return Err(Error::Contract(format!(
            "start point must lie in the open ball of radius {r}"
        )));
    }
    Ok(())
}

/// Exit records from `x0` with replica streams keyed by `key`.
pub fn exits_with(
    sim: &PathSimulator,
    x0: &[f64],
    r: f64,
    n: usize,
    key: u64,
) -> Result<ExitBatch> {
    check_start(x0, r, sim.d())?;
    let out = map_replicas(n, key, |i, rng| {
        sim.exit(x0, r, rng).map(|mut e| {
            e.replica = i;
            e
        })
    });
    let censored = out.iter().filter(|o| o.is_none()).count();
    Ok(ExitBatch {
        r,
        x0: x0.to_vec(),
        records: out.into_iter().flatten().collect(),
        censored,
    })
}

/// `cfg.n` exit records of `spec` from `x0` out of `B_r`.
pub fn simulate_exit(
    spec: &ProcessSpec,
    x0: &[f64],
    r: f64,
    cfg: &PathConfig,
) -> Result<ExitBatch> {
    let sim = PathSimulator::from_config(spec, cfg)?;
    exits_with(&sim, x0, r, cfg.n, stream_key(cfg.seed, 1))
}

/// One point of an estimated harmonic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPoint {
    pub x: Vec<f64>,
    pub h: f64,
    pub stderr: f64,
    pub censored: usize,
}

/// `h_F(x) = P^x(X_{τ_{B_r}} ∈ F)` on a grid of starting points.
///
/// Every grid point uses the same replica streams (common random numbers).
pub fn estimate_harmonic(
    spec: &ProcessSpec,
    r: f64,
    f: impl Fn(&[f64]) -> bool,
    xs: &[Vec<f64>],
    cfg: &PathConfig,
) -> Result<Vec<HarmonicPoint>> {
    let sim = PathSimulator::from_config(spec, cfg)?;
    let key = stream_key(cfg.seed, 2);
    xs.iter()
        .map(|x| {
            let b = exits_with(&sim, x, r, cfg.n, key)?;
            let (h, stderr) = b.proportion(&f);
            Ok(HarmonicPoint {
                x: x.clone(),
                h,
                stderr,
                censored: b.censored,
            })
        })
        .collect()
}

type Indicator = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A closed target set given by an indicator and an enclosing box.
#[derive(Clone)]
pub struct TargetSet {
    indicator: Indicator,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub volume: Option<f64>,
    /// Exact `sup |z|` over the set when known; otherwise the box corner is used.
    pub reach: Option<f64>,
}

impl std::fmt::Debug for TargetSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TargetSet")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish()
    }
}

impl TargetSet {
    pub fn new(
        indicator: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> Self {
        Self {
            indicator: Arc::new(indicator),
            lo,
            hi,
            volume: None,
            reach: None,
        }
    }

    /// Closed ball `B̄(center, radius)`.
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        let c = center.clone();
        let lo = center.iter().map(|v| v - radius).collect();
        let hi = center.iter().map(|v| v + radius).collect();
        let d = center.len();
        let mut t = Self::new(
            move |z| {
                z.iter()
                    .zip(&c)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    <= radius * radius
            },
            lo,
            hi,
        );
        t.volume = Some(crate::special::ball_volume(d, radius));
        t.reach = Some(norm(&center) + radius);
        t
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        (self.indicator)(z)
    }

    /// Whether the enclosing box lies in the closed ball `B̄_rho`.
    pub fn inside_ball(&self, rho: f64) -> bool {
        if let Some(reach) = self.reach {
            return reach <= rho * (1.0 + 1e-12);
        }
        let far: f64 = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| a.abs().max(b.abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        far <= rho * (1.0 + 1e-12)
    }
}

/// Probability with binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub p: f64,
    pub stderr: f64,
    pub n: usize,
    pub censored: usize,
}

impl Proportion {
    pub fn from_flags(flags: impl Iterator<Item = Option<bool>>) -> Self {
        let (mut n, mut k, mut c) = (0usize, 0usize, 0usize);
        for f in flags {
            match f {
                Some(hit) => {
                    n += 1;
                    k += hit as usize;
                }
                None => c += 1,
            }
        }
        let p = k as f64 / n.max(1) as f64;
        Self {
            p,
            stderr: (p * (1.0 - p) / n.max(1) as f64).sqrt(),
            n,
            censored: c,
        }
    }
}

/// `P^{x0}(T_A < τ_{B_r})` with streams keyed by `key`.
///
/// `r0` is the radius the target must fit in (`A ⊂ B̄_{r0}`, `|x0| ≤ r0`).
pub fn hitting_with(
    sim: &PathSimulator,
    a: &TargetSet,
    r: f64,
    r0: f64,
    x0: &[f64],
    n: usize,
    key: u64,
) -> Result<Proportion> {
    check_start(x0, r, sim.d())?;
    if !a.inside_ball(r0) {
        return Err(Error::Contract(format!(
            "target set is not inside the ball of radius {r0}"
        )));
    }
    if norm(x0) > r0 * (1.0 + 1e-12) {
        return Err(Error::Contract(format!(
            "start point outside the ball of radius {r0}"
        )));
    }
    let flags = map_replicas(n, key, |_, rng| {
        match sim.walk(x0, r, rng, |z| a.contains(z), |_, _| {}) {
            WalkEnd::Stopped { .. } => Some(true),
            WalkEnd::Exit(_) => Some(false),
            WalkEnd::Censored { .. } => None,
        }
    });
    Ok(Proportion::from_flags(flags.into_iter()))
}

/// Hitting probability of `A` before leaving `B_r`, for `A ⊂ B̄_{r0}`.
pub fn estimate_hitting_before_exit(
    spec: &ProcessSpec,
    a: &TargetSet,
    r: f64,
    r0: f64,
    x0: &[f64],
    cfg: &PathConfig,
) -> Result<Proportion> {
    let sim = PathSimulator::from_config(spec, cfg)?;
    hitting_with(&sim, a, r, r0, x0, cfg.n, stream_key(cfg.seed, 3))
}

/// Expected time spent in each cubic cell of `[-r, r]^d` before leaving `B_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationHistogram {
    pub d: usize,
    pub r: f64,
    pub x0: Vec<f64>,
    pub side: f64,
    /// Cells per axis.
    pub per_axis: usize,
    /// Mean time per cell (sum over replicas ÷ N).
    pub mass: Vec<f64>,
    pub stderr: Vec<f64>,
    pub mean_tau: f64,
    pub n: usize,
    pub censored: usize,
}

impl OccupationHistogram {
    pub fn cell_volume(&self) -> f64 {
        self.side.powi(self.d as i32)
    }

    pub fn index_of(&self, z: &[f64]) -> Option<usize> {
        let mut idx = 0usize;
        for &c in z.iter().rev() {
            let k = ((c + self.r) / self.side).floor();
            if k < 0.0 || k >= self.per_axis as f64 {
                return None;
            }
            idx = idx * self.per_axis + k as usize;
        }
        Some(idx)
    }

    pub fn center(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        (0..self.d)
            .map(|_| {
                let k = rem % self.per_axis;
                rem /= self.per_axis;
                -self.r + (k as f64 + 0.5) * self.side
            })
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Non-empty cells as `(index, center, mass)`.
    pub fn cells(&self) -> impl Iterator<Item = (usize, Vec<f64>, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(|(i, m)| (i, self.center(i), *m))
    }
}

/// Occupation histogram of `B_r` from `x0` with cells of side `r/16`.
pub fn occupation(
    spec: &ProcessSpec,
    r: f64,
    x0: &[f64],
    cfg: &PathConfig,
) -> Result<OccupationHistogram> {
    let sim = PathSimulator::from_config(spec, cfg)?;
    occupation_with(&sim, r, x0, 16, cfg.n, stream_key(cfg.seed, 4))
}

pub fn occupation_with(
    sim: &PathSimulator,
    r: f64,
    x0: &[f64],
    half_cells: usize,
    n: usize,
    key: u64,
) -> Result<OccupationHistogram> {
    let d = sim.d();
    check_start(x0, r, d)?;
    if d > 3 {
        return Err(Error::Unsupported(
            "occupation histograms are dense and limited to d ≤ 3".into(),
        ));
    }
    let per_axis = 2 * half_cells;
    let cells = per_axis.pow(d as u32);
    let mut template = OccupationHistogram {
        d,
        r,
        x0: x0.to_vec(),
        side: r / half_cells as f64,
        per_axis,
        mass: vec![],
        stderr: vec![],
        mean_tau: 0.0,
        n,
        censored: 0,
    };
    let blocks = n.div_ceil(OCCUPATION_BLOCK);
    struct Block {
        sum: Vec<f64>,
        sum2: Vec<f64>,
        taus: Vec<f64>,
        censored: usize,
    }
    let layout = template.clone();
    let parts: Vec<Block> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut blk = Block {
                sum: vec![0.0; cells],
                sum2: vec![0.0; cells],
                taus: Vec::new(),
                censored: 0,
            };
            let mut scratch = vec![0.0; cells];
            let mut touched: Vec<usize> = Vec::new();
            let end = ((b + 1) * OCCUPATION_BLOCK).min(n);
            for i in b * OCCUPATION_BLOCK..end {
                let mut rng = replica_rng(key, i as u64);
                let res = sim.walk(
                    x0,
                    r,
                    &mut rng,
                    |_| false,
                    |z, dt| {
                        if let Some(k) = layout.index_of(z) {
                            if scratch[k] == 0.0 {
                                touched.push(k);
                            }
                            scratch[k] += dt;
                        }
                    },
                );
                match res {
                    WalkEnd::Exit(e) => {
                        blk.taus.push(e.tau);
                        for &k in &touched {
                            blk.sum[k] += scratch[k];
                            blk.sum2[k] += scratch[k] * scratch[k];
                        }
                    }
                    _ => blk.censored += 1,
                }
                for &k in &touched {
                    scratch[k] = 0.0;
                }
                touched.clear();
            }
            blk
        })
        .collect();
    let mut sum = vec![0.0; cells];
    let mut sum2 = vec![0.0; cells];
    let mut taus = Vec::with_capacity(n);
    let mut censored = 0;
    for p in parts {
        for k in 0..cells {
            sum[k] += p.sum[k];
            sum2[k] += p.sum2[k];
        }
        taus.extend(p.taus);
        censored += p.censored;
    }
    let m = taus.len().max(1) as f64;
    template.mass = sum.iter().map(|s| s / m).collect();
    template.stderr = sum
        .iter()
        .zip(&sum2)
        .map(|(s, s2)| {
            let mean = s / m;
            (((s2 / m) - mean * mean).max(0.0) / m).sqrt()
        })
        .collect();
    template.mean_tau = mean_se(taus.into_iter()).0;
    template.censored = censored;
    Ok(template)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::make_stable;

    #[test]
    fn replica_streams_are_independent_of_scheduling() {
        let a: Vec<u64> = map_replicas(64, 9, |_, rng| rng.random());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b: Vec<u64> = pool.install(|| map_replicas(64, 9, |_, rng| rng.random()));
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn brownian_exit_time_from_center() {
        let bm = make_stable(2.0, 3).unwrap();
        let cfg = PathConfig {
            dt: 1e-4,
            n: 4000,
            seed: 5,
            ..Default::default()
        };
        let b = simulate_exit(&bm, &[0.0, 0.0, 0.0], 1.0, &cfg).unwrap();
        let (m, se) = b.mean_tau();
        assert!((m - 1.0 / 6.0).abs() < 0.05 / 6.0 + 3.0 * se, "{m} ± {se}");
        assert!(b
            .records
            .iter()
            .all(|e| norm(&e.exit) >= 1.0 - 1e-12 && norm(&e.pre_exit) < 1.0));
    }

    #[test]
    fn occupation_mass_equals_mean_exit_time() {
        let s = make_stable(1.0, 3).unwrap();
        let cfg = PathConfig {
            dt: 1e-2,
            n: 600,
            seed: 2,
            ..Default::default()
        };
        let h = occupation(&s, 1.0, &[0.0, 0.0, 0.0], &cfg).unwrap();
        assert!((h.total_mass() - h.mean_tau).abs() < 1e-9 * h.mean_tau);
        assert_eq!(
            h.index_of(&[0.01, 0.01, 0.01]).map(|i| h.center(i)),
            Some(vec![1.0 / 32.0; 3])
        );
    }

    #[test]
    fn hitting_contracts() {
        let s = make_stable(1.0, 3).unwrap();
        let cfg = PathConfig {
            dt: 1e-2,
            n: 50,
            ..Default::default()
        };
        let a = TargetSet::ball(vec![0.0; 3], 0.1);
        assert!(estimate_hitting_before_exit(&s, &a, 1.0, 0.05, &[0.0; 3], &cfg).is_err());
        let p = estimate_hitting_before_exit(&s, &a, 1.0, 0.2, &[0.0; 3], &cfg).unwrap();
        assert_eq!(p.p, 1.0);
    }
}
