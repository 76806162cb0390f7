//! Monte Carlo experiments: scale-invariant Harnack ratios, Krylov–Safonov
//! hitting floors, exit-distribution comparability, Hölder exponents and jump
//! probabilities.
//!
//! Time steps are relative: a ball of radius `r` is simulated with
//! `Δt = cfg.dt / ψ*(1/r)`, the natural time scale of its exit time. Every
//! `(radius, start point)` pair owns a replica stream derived from the seed, so
//! reports are identical for any number of worker threads.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog::ProcessSpec;
use crate::error::{invalid, Error, Result};
use crate::exponent::{check_jump_prob_bound, pruitt_h, psi_from_spec, CharacteristicExponent};
use crate::mc::{
    exits_with, hitting_with, map_replicas, stream_key, PathConfig, PathSimulator, TargetSet,
};
use crate::potential::{dimension_constants, KernelConstants};
use crate::special::ball_volume;
use crate::verify::standard_certificate;

const PURPOSE_HARNACK: u64 = 11;
const PURPOSE_KS: u64 = 12;
const PURPOSE_EXITCOMP: u64 = 13;
const PURPOSE_HOLDER: u64 = 14;
const PURPOSE_JUMP: u64 = 15;

/// Largest tolerated share of censored paths before a report turns inconclusive.
pub const CENSORING_LIMIT: f64 = 1e-3;

/// Simulation controls shared by all experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n: usize,
    /// Time step in units of `1/ψ*(1/r)`.
    pub dt: f64,
    /// Small-jump cutoff; `min(0.01, r/100)` when absent.
    pub eps: Option<f64>,
    pub max_steps: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 10_000,
            dt: 1e-2,
            eps: None,
            max_steps: 10_000_000,
        }
    }
}

impl ExperimentConfig {
    /// Absolute path controls for the ball of radius `r`.
    pub fn path_config(&self, exp: &CharacteristicExponent, r: f64) -> PathConfig {
        PathConfig {
            dt: self.dt / exp.psi_star(1.0 / r),
            eps: self.eps.unwrap_or_else(|| PathConfig::default_eps(r)),
            max_steps: self.max_steps,
            seed: self.seed,
            n: self.n,
        }
    }

    fn simulator(
        &self,
        spec: &ProcessSpec,
        exp: &CharacteristicExponent,
        r: f64,
    ) -> Result<PathSimulator> {
        let pc = self.path_config(exp, r);
        pc.validate()?;
        PathSimulator::from_config(spec, &pc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// A named table of rows; non-finite numbers serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Numeric cell at `row` in the named column.
    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|n| n == column)?;
        self.rows.get(row)?.get(c)?.as_f64()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub spec_name: String,
    pub spec_fingerprint: String,
    pub config: ExperimentConfig,
    /// Experiment-specific options.
    pub parameters: Value,
    pub tables: Vec<Table>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl Report {
    fn new(
        experiment: &str,
        spec: &ProcessSpec,
        cfg: &ExperimentConfig,
        parameters: impl Serialize,
    ) -> Self {
        Self {
            experiment: experiment.into(),
            spec_name: spec.name.clone(),
            spec_fingerprint: spec.fingerprint(),
            config: cfg.clone(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            tables: Vec::new(),
            verdict: Verdict::Inconclusive,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Downgrades a passing verdict when too many paths were censored.
    fn finish(&mut self, censoring: &Censoring) {
        let rate = censoring.rate();
        if rate > CENSORING_LIMIT {
            self.notes.push(format!(
                "censoring rate {rate:.3e} exceeds {CENSORING_LIMIT:e}: raise max steps or Δt"
            ));
            if self.verdict == Verdict::Pass {
                self.verdict = Verdict::Inconclusive;
            }
        }
    }
}

fn v(x: impl Into<Value>) -> Value {
    x.into()
}

#[derive(Default)]
struct Censoring {
    censored: usize,
    total: usize,
}

impl Censoring {
    fn add(&mut self, censored: usize, total: usize) {
        self.censored += censored;
        self.total += total;
    }

    fn rate(&self) -> f64 {
        self.censored as f64 / self.total.max(1) as f64
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn axis_point(d: usize, axis: usize, t: f64) -> Vec<f64> {
    let mut x = vec![0.0; d];
    x[axis] = t;
    x
}

/// Derived replica key for one `(scale, point)` pair.
fn cell_key(seed: u64, purpose: u64, scale: usize, point: usize) -> u64 {
    stream_key(
        stream_key(stream_key(seed, purpose), scale as u64),
        point as u64,
    )
}

type Region = (String, Box<dyn Fn(&[f64]) -> bool + Send + Sync>);

/// Per-replica bitmask of the regions containing the exit position (`None` if censored).
fn exit_masks(
    sim: &PathSimulator,
    x: &[f64],
    r: f64,
    n: usize,
    key: u64,
    regions: &[Region],
) -> Vec<Option<u64>> {
    debug_assert!(regions.len() <= 64);
    map_replicas(n, key, |_, rng| {
        sim.exit(x, r, rng).map(|e| {
            regions.iter().enumerate().fold(
                0u64,
                |m, (i, (_, f))| if f(&e.exit) { m | (1 << i) } else { m },
            )
        })
    })
}

/// Proportion and binomial standard error of region `i` among uncensored replicas.
fn proportion(masks: &[Option<u64>], i: usize) -> (f64, f64) {
    let n = masks.iter().flatten().count().max(1) as f64;
    let k = masks
        .iter()
        .flatten()
        .filter(|m| *m & (1 << i) != 0)
        .count() as f64;
    let p = k / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

fn censored(masks: &[Option<u64>]) -> usize {
    masks.iter().filter(|m| m.is_none()).count()
}

/// Radius `r0 = r/(2L + 1)` of the inner ball: `L = 2` for special subordinate
/// Brownian motions, otherwise the Green-function floor constant at `ε = C7`.
pub fn inner_radius(
    spec: &ProcessSpec,
    exp: &CharacteristicExponent,
    r: f64,
) -> Result<(f64, f64)> {
    let l = match spec.bernstein() {
        Some(phi) if phi.special => 2.0,
        _ => {
            let cert = standard_certificate(exp);
            if !cert.verified {
                return Err(Error::Unsupported(
                    "no verified scaling certificate: the inner radius is undefined".into(),
                ));
            }
            let dc = dimension_constants(spec.d())?;
            KernelConstants::from_certificate(spec.d(), &cert)?.green_floor_l(dc.c7)?
        }
    };
    Ok((l, r / (2.0 * l + 1.0)))
}

// ---------------------------------------------------------------------------
// Harnack

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackOptions {
    pub radii: Vec<f64>,
    /// Largest accepted `max_r / min_r` of the per-radius maximal ratios.
    pub spread_limit: f64,
}

impl HarnackOptions {
    /// Radii `{1/4, 1, 4}`; spread limit 2 for stable processes and 3 otherwise.
    pub fn for_spec(spec: &ProcessSpec) -> Self {
        Self {
            radii: vec![0.25, 1.0, 4.0],
            spread_limit: if spec.stable_index().is_some() {
                2.0
            } else {
                3.0
            },
        }
    }
}

/// Exterior sets `F` of the Harnack family at radius `r`.
fn harnack_family(r: f64) -> Vec<Region> {
    let band = move |lo: f64, hi: f64| move |z: &[f64]| (lo * r..hi * r).contains(&norm(z));
    vec![
        ("complement".into(), Box::new(move |z: &[f64]| norm(z) >= r)),
        (
            "cap".into(),
            Box::new(move |z: &[f64]| z[0] > 0.0 && norm(z) >= r),
        ),
        ("shell-1".into(), Box::new(band(1.0, 2.0))),
        ("shell-2".into(), Box::new(band(2.0, 3.0))),
        ("beyond-2r".into(), Box::new(band(2.0, f64::INFINITY))),
        ("tail".into(), Box::new(band(3.0, f64::INFINITY))),
    ]
}

/// Nested pairs `(F1, F2)` with `F1 ⊂ F2`, by family index.
const HARNACK_NESTED: [(usize, usize); 5] = [(1, 0), (2, 0), (3, 4), (5, 4), (4, 0)];

/// `3^min(d,3)` points with coordinates in `{−r/4, 0, r/4}`, all inside `B_{r/2}`.
fn harnack_grid(d: usize, r: f64) -> Vec<Vec<f64>> {
    let k = d.min(3);
    (0..3usize.pow(k as u32))
        .map(|mut idx| {
            let mut x = vec![0.0; d];
            for c in x.iter_mut().take(k) {
                *c = (idx % 3) as f64 * r / 4.0 - r / 4.0;
                idx /= 3;
            }
            x
        })
        .collect()
}

/// `max/min` of `h_F(x) = P^x(X_{τ_{B_r}} ∈ F)` over a grid in `B_{r/2}` for each
/// `F` and radius, and the spread of the per-radius maxima across radii.
pub fn harnack_ratio(
    spec: &ProcessSpec,
    opts: &HarnackOptions,
    cfg: &ExperimentConfig,
) -> Result<Report> {
    if opts.radii.is_empty() || opts.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("Harnack radii must be positive"));
    }
    let exp = psi_from_spec(spec)?;
    let mut rep = Report::new("harnack", spec, cfg, opts);
    let mut cens = Censoring::default();
    let mut values = Table::new("harmonic", &["r", "point", "x", "set", "h", "stderr"]);
    let mut ratios = Table::new(
        "ratios",
        &[
            "r",
            "set",
            "min_h",
            "min_stderr",
            "max_h",
            "max_stderr",
            "ratio",
            "skipped",
        ],
    );
    let mut per_r = Table::new("per_radius", &["r", "max_ratio", "set"]);
    let mut nested_violations = 0usize;
    let mut maxima = Vec::new();
    for (ri, &r) in opts.radii.iter().enumerate() {
        let sim = cfg.simulator(spec, &exp, r)?;
        let family = harnack_family(r);
        let grid = harnack_grid(spec.d(), r);
        let mut h = vec![vec![(0.0, 0.0); family.len()]; grid.len()];
        for (pi, x) in grid.iter().enumerate() {
            let masks = exit_masks(
                &sim,
                x,
                r,
                cfg.n,
                cell_key(cfg.seed, PURPOSE_HARNACK, ri, pi),
                &family,
            );
            cens.add(censored(&masks), masks.len());
            for (fi, (name, _)) in family.iter().enumerate() {
                let (p, se) = proportion(&masks, fi);
                h[pi][fi] = (p, se);
                values.push(vec![
                    v(r),
                    v(pi),
                    v(x.clone()),
                    v(name.clone()),
                    v(p),
                    v(se),
                ]);
            }
            for &(a, b) in &HARNACK_NESTED {
                let ((pa, sa), (pb, sb)) = (h[pi][a], h[pi][b]);
                if pa > pb + 3.0 * (sa * sa + sb * sb).sqrt() {
                    nested_violations += 1;
                }
            }
        }
        let mut best: Option<(f64, String)> = None;
        for (fi, (name, _)) in family.iter().enumerate() {
            let col: Vec<(f64, f64)> = h.iter().map(|row| row[fi]).collect();
            let lo = col
                .iter()
                .copied()
                .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
            let hi =
                col.iter().copied().fold(
                    (f64::NEG_INFINITY, 0.0),
                    |a, b| if b.0 > a.0 { b } else { a },
                );
            // Skip F when some grid value cannot be told apart from 0.
            let skipped = col.iter().any(|(p, se)| p - 3.0 * se <= 0.0);
            let ratio = hi.0 / lo.0;
            ratios.push(vec![
                v(r),
                v(name.clone()),
                v(lo.0),
                v(lo.1),
                v(hi.0),
                v(hi.1),
                v(ratio),
                v(skipped),
            ]);
            if skipped {
                rep.notes.push(format!(
                    "r = {r}: set '{name}' skipped, some h within 3 stderr of 0"
                ));
            } else if fi != 0 && best.as_ref().is_none_or(|(b, _)| ratio > *b) {
                best = Some((ratio, name.clone()));
            }
        }
        match best {
            Some((m, name)) => {
                per_r.push(vec![v(r), v(m), v(name)]);
                maxima.push(m);
            }
            None => {
                per_r.push(vec![v(r), Value::Null, Value::Null]);
                rep.notes
                    .push(format!("r = {r}: every non-trivial set skipped"));
            }
        }
    }
    let mut summary = Table::new("summary", &["spread", "spread_limit", "nested_violations"]);
    let spread = if maxima.len() == opts.radii.len() {
        let hi = maxima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    } else {
        f64::NAN
    };
    summary.push(vec![v(spread), v(opts.spread_limit), v(nested_violations)]);
    rep.verdict = if spread.is_nan() {
        Verdict::Inconclusive
    } else if maxima.iter().all(|m| m.is_finite())
        && spread <= opts.spread_limit
        && nested_violations == 0
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rep.tables = vec![summary, per_r, ratios, values];
    rep.finish(&cens);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Krylov–Safonov

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrylovSafonovOptions {
    pub radii: Vec<f64>,
    /// Target radii `ρ` as fractions of `r0`.
    pub shrink: Vec<f64>,
    /// Start points `t·r0·e1` on the first axis.
    pub axis: Vec<f64>,
    /// Required floor of the normalized hitting ratio.
    pub floor: f64,
}

impl Default for KrylovSafonovOptions {
    fn default() -> Self {
        Self {
            radii: vec![1.0, 4.0],
            shrink: vec![1.0, 0.5, 0.25],
            axis: vec![-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9],
            floor: 0.01,
        }
    }
}

/// `m(ρ, r, x) = P^x(T_{B̄_ρ} < τ_{B_r}) |B_{r0}|/|B̄_ρ|` on an axis grid in `B_{r0}`.
///
/// For self-similar (stable) processes the tables at consecutive radii must
/// agree cell by cell within three combined standard errors.
pub fn krylov_safonov(
    spec: &ProcessSpec,
    opts: &KrylovSafonovOptions,
    cfg: &ExperimentConfig,
) -> Result<Report> {
    if opts.shrink.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
        return Err(invalid("shrink fractions must lie in (0, 1]"));
    }
    if opts.axis.iter().any(|t| !(t.abs() < 1.0)) {
        return Err(invalid("axis fractions must lie in (−1, 1)"));
    }
    let exp = psi_from_spec(spec)?;
    let d = spec.d();
    let mut rep = Report::new("ks", spec, cfg, opts);
    let mut cens = Censoring::default();
    let mut table = Table::new(
        "hitting",
        &[
            "r",
            "r0",
            "rho_fraction",
            "x_fraction",
            "p",
            "stderr",
            "m",
            "m_stderr",
        ],
    );
    let mut m_grid: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut min_m = f64::INFINITY;
    for (ri, &r) in opts.radii.iter().enumerate() {
        let (l, r0) = inner_radius(spec, &exp, r)?;
        if ri == 0 {
            rep.notes.push(format!("L = {l}, r0 = r/(2L + 1)"));
        }
        let sim = cfg.simulator(spec, &exp, r)?;
        let mut cells = Vec::new();
        for (si, &s) in opts.shrink.iter().enumerate() {
            let rho = s * r0;
            let a = TargetSet::ball(vec![0.0; d], rho);
            let scale = ball_volume(d, r0) / ball_volume(d, rho);
            for (xi, &t) in opts.axis.iter().enumerate() {
                let x = axis_point(d, 0, t * r0);
                let key = cell_key(cfg.seed, PURPOSE_KS, ri, si * opts.axis.len() + xi);
                let p = hitting_with(&sim, &a, r, r0, &x, cfg.n, key)?;
                cens.add(p.censored, p.n + p.censored);
                let (m, se) = (p.p * scale, p.stderr * scale);
                min_m = min_m.min(m);
                table.push(vec![
                    v(r),
                    v(r0),
                    v(s),
                    v(t),
                    v(p.p),
                    v(p.stderr),
                    v(m),
                    v(se),
                ]);
                cells.push((m, se));
            }
        }
        m_grid.push(cells);
    }
    let mut trend = Table::new("trend", &["rho_fraction", "min_m"]);
    let per = opts.axis.len();
    for (si, &s) in opts.shrink.iter().enumerate() {
        let m = m_grid
            .iter()
            .flat_map(|cells| cells[si * per..(si + 1) * per].iter().map(|c| c.0))
            .fold(f64::INFINITY, f64::min);
        trend.push(vec![v(s), v(m)]);
    }
    let self_similar = spec.stable_index().is_some();
    let mut pairs = Table::new(
        "scale_pairs",
        &["r", "r_next", "cells", "disagreements", "max_z"],
    );
    let mut disagreements = 0usize;
    for w in 0..m_grid.len().saturating_sub(1) {
        let (a, b) = (&m_grid[w], &m_grid[w + 1]);
        let mut bad = 0usize;
        let mut max_z: f64 = 0.0;
        for (x, y) in a.iter().zip(b) {
            let se = (x.1 * x.1 + y.1 * y.1).sqrt();
            let diff = (x.0 - y.0).abs();
            if diff > 3.0 * se {
                bad += 1;
            }
            if se > 0.0 {
                max_z = max_z.max(diff / se);
            }
        }
        pairs.push(vec![
            v(opts.radii[w]),
            v(opts.radii[w + 1]),
            v(a.len()),
            v(bad),
            v(max_z),
        ]);
        disagreements += bad;
    }
    if !self_similar && disagreements > 0 {
        rep.notes
            .push("scale pairs need not agree for a process that is not self-similar".into());
    }
    let mut summary = Table::new("summary", &["min_m", "floor", "scale_disagreements"]);
    summary.push(vec![v(min_m), v(opts.floor), v(disagreements)]);
    rep.verdict = if min_m >= opts.floor && (!self_similar || disagreements == 0) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rep.tables = vec![summary, trend, pairs, table];
    rep.finish(&cens);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Exit-distribution comparability

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitCompOptions {
    pub r: f64,
    /// Largest accepted finite ratio.
    pub ratio_limit: f64,
}

impl Default for ExitCompOptions {
    fn default() -> Self {
        Self {
            r: 1.0,
            ratio_limit: 10.0,
        }
    }
}

/// Cells of `{|z| > r}`: shells `[kr, (k+1)r)`, `k = 1..3`, split by the sign of
/// `z1`, and the tail `{|z| ≥ 4r}`.
fn exit_cells(r: f64) -> Vec<Region> {
    let mut cells: Vec<Region> = Vec::new();
    for k in 1..=3 {
        let (lo, hi) = (k as f64 * r, (k + 1) as f64 * r);
        cells.push((
            format!("shell-{k}+"),
            Box::new(move |z: &[f64]| z[0] > 0.0 && (lo..hi).contains(&norm(z))),
        ));
        cells.push((
            format!("shell-{k}-"),
            Box::new(move |z: &[f64]| z[0] <= 0.0 && (lo..hi).contains(&norm(z))),
        ));
    }
    cells.push(("tail".into(), Box::new(move |z: &[f64]| norm(z) >= 4.0 * r)));
    cells
}

/// `P^x(X_{τ_{B_{r0}}} ∈ Z) / P^y(X_{τ_{B_r}} ∈ Z)` for `x, y ∈ B_{r0/2}` and
/// exterior cells `Z ⊂ {|z| > r}`.
pub fn exit_comparability(
    spec: &ProcessSpec,
    opts: &ExitCompOptions,
    cfg: &ExperimentConfig,
) -> Result<Report> {
    if !(opts.r > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    let exp = psi_from_spec(spec)?;
    let d = spec.d();
    let r = opts.r;
    let (l, r0) = inner_radius(spec, &exp, r)?;
    let mut rep = Report::new("exitcomp", spec, cfg, opts);
    rep.notes.push(format!("L = {l}, r0 = {r0}"));
    let mut cens = Censoring::default();
    let mut points = vec![vec![0.0; d]];
    for axis in 0..d.min(2) {
        for sgn in [1.0, -1.0] {
            points.push(axis_point(d, axis, sgn * 0.4 * r0));
        }
    }
    let cells = exit_cells(r);
    let mut dist = Table::new(
        "exit_distribution",
        &["ball", "point", "x", "cell", "p", "stderr"],
    );
    // est[ball][point][cell], ball 0 = B_{r0}, ball 1 = B_r.
    let mut est = vec![vec![vec![(0.0, 0.0); cells.len()]; points.len()]; 2];
    for (bi, &radius) in [r0, r].iter().enumerate() {
        let sim = cfg.simulator(spec, &exp, radius)?;
        for (pi, x) in points.iter().enumerate() {
            let key = cell_key(cfg.seed, PURPOSE_EXITCOMP, bi, pi);
            let masks = exit_masks(&sim, x, radius, cfg.n, key, &cells);
            cens.add(censored(&masks), masks.len());
            for (ci, (name, _)) in cells.iter().enumerate() {
                let (p, se) = proportion(&masks, ci);
                est[bi][pi][ci] = (p, se);
                dist.push(vec![
                    v(radius),
                    v(pi),
                    v(x.clone()),
                    v(name.clone()),
                    v(p),
                    v(se),
                ]);
            }
        }
    }
    let mut ratios = Table::new(
        "ratios",
        &["x", "y", "cell", "ratio", "stderr", "violation"],
    );
    let mut violations = 0usize;
    let mut max_ratio: f64 = 0.0;
    let mut tail_max: f64 = 0.0;
    for xi in 0..points.len() {
        for yi in 0..points.len() {
            for (ci, (name, _)) in cells.iter().enumerate() {
                let (num, sn) = est[0][xi][ci];
                let (den, sd) = est[1][yi][ci];
                let violation = den == 0.0 && num > 3.0 * sn;
                let (ratio, se) = if den > 0.0 {
                    let q = num / den;
                    let rel = if num > 0.0 { (sn / num).powi(2) } else { 0.0 } + (sd / den).powi(2);
                    (q, q * rel.sqrt())
                } else {
                    (f64::NAN, f64::NAN)
                };
                if violation {
                    violations += 1;
                }
                if ratio.is_finite() {
                    max_ratio = max_ratio.max(ratio);
                    if name == "tail" {
                        tail_max = tail_max.max(ratio);
                    }
                }
                ratios.push(vec![
                    v(xi),
                    v(yi),
                    v(name.clone()),
                    v(ratio),
                    v(se),
                    v(violation),
                ]);
            }
        }
    }
    // Isotropy: P^x(Z) = P^{-x}(-Z) for the antipodal pair on the first axis, ball B_r.
    let mut iso = Table::new("isotropy", &["cell", "p_x", "p_minus_x", "z"]);
    let mut iso_bad = 0usize;
    if points.len() >= 3 {
        for k in 0..3 {
            for (a, b) in [(2 * k, 2 * k + 1), (2 * k + 1, 2 * k)] {
                let (p1, s1) = est[1][1][a];
                let (p2, s2) = est[1][2][b];
                let se = (s1 * s1 + s2 * s2).sqrt();
                let z = if se > 0.0 { (p1 - p2).abs() / se } else { 0.0 };
                if z > 3.0 {
                    iso_bad += 1;
                }
                iso.push(vec![v(cells[a].0.clone()), v(p1), v(p2), v(z)]);
            }
        }
    }
    if iso_bad > 0 {
        rep.notes
            .push(format!("{iso_bad} isotropy comparisons beyond 3 stderr"));
    }
    let mut summary = Table::new(
        "summary",
        &["max_ratio", "tail_max_ratio", "ratio_limit", "violations"],
    );
    summary.push(vec![
        v(max_ratio),
        v(tail_max),
        v(opts.ratio_limit),
        v(violations),
    ]);
    rep.verdict = if violations == 0 && max_ratio <= opts.ratio_limit {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rep.tables = vec![summary, ratios, iso, dist];
    rep.finish(&cens);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Hölder

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderOptions {
    pub r: f64,
    /// Pairs `|x − y| = r 2^{-k}`, `k = 1..=levels`.
    pub levels: usize,
    /// Exterior set: `"cap"` (`z1 > 0`) or `"complement"` (constant `h`).
    pub set: String,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self {
            r: 1.0,
            levels: 6,
            set: "cap".into(),
        }
    }
}

/// Weighted least-squares slope of `ln|h(x) − h(y)|` against `ln|x − y|`.
///
/// Returns `(slope, stderr)` with weights `(Δh/se)²` from the delta method.
pub fn weighted_slope(points: &[(f64, f64, f64)]) -> (f64, f64) {
    // points: (delta, |Δh|, se)
    let w: Vec<f64> = points.iter().map(|(_, dh, se)| (dh / se).powi(2)).collect();
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = w.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&xs).map(|(w, x)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = w
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(w, (x, y))| w * (x - xm) * (y - ym))
        .sum();
    (sxy / sxx, (1.0 / sxx).sqrt())
}

/// Fitted Hölder exponent of `h_F` from dyadic pairs `∓r 2^{-k-1} e1` with common
/// random numbers; differences below three paired standard errors are dropped.
pub fn holder_exponent(
    spec: &ProcessSpec,
    opts: &HolderOptions,
    cfg: &ExperimentConfig,
) -> Result<Report> {
    if !(opts.r > 0.0) || opts.levels == 0 {
        return Err(invalid(
            "Hölder experiment needs r > 0 and at least one level",
        ));
    }
    let r = opts.r;
    let f: Region = match opts.set.as_str() {
        "cap" => (
            "cap".into(),
            Box::new(move |z: &[f64]| z[0] > 0.0 && norm(z) >= r),
        ),
        "complement" => ("complement".into(), Box::new(move |z: &[f64]| norm(z) >= r)),
        other => {
            return Err(invalid(format!(
                "unknown exterior set '{other}' (cap or complement)"
            )))
        }
    };
    let regions = [f];
    let exp = psi_from_spec(spec)?;
    let d = spec.d();
    let sim = cfg.simulator(spec, &exp, r)?;
    let mut rep = Report::new("holder", spec, cfg, opts);
    let mut cens = Censoring::default();
    // One stream family for every point: paired differences share randomness.
    let key = cell_key(cfg.seed, PURPOSE_HOLDER, 0, 0);
    let mut pairs = Table::new(
        "pairs",
        &["k", "delta", "h_x", "h_y", "diff", "stderr", "usable"],
    );
    let mut usable = Vec::new();
    for k in 1..=opts.levels {
        let delta = r * 0.5f64.powi(k as i32);
        let x = axis_point(d, 0, -delta / 2.0);
        let y = axis_point(d, 0, delta / 2.0);
        let mx = exit_masks(&sim, &x, r, cfg.n, key, &regions);
        let my = exit_masks(&sim, &y, r, cfg.n, key, &regions);
        cens.add(censored(&mx) + censored(&my), 2 * cfg.n);
        let diffs: Vec<f64> = mx
            .iter()
            .zip(&my)
            .filter_map(|(a, b)| Some((b.as_ref()? & 1) as f64 - (a.as_ref()? & 1) as f64))
            .collect();
        let (diff, se) = crate::mc::mean_se(diffs.into_iter());
        let (hx, hy) = (proportion(&mx, 0).0, proportion(&my, 0).0);
        let ok = diff.abs() > 3.0 * se && se > 0.0;
        if ok {
            usable.push((delta, diff.abs(), se));
        }
        pairs.push(vec![v(k), v(delta), v(hx), v(hy), v(diff), v(se), v(ok)]);
    }
    let mut fit = Table::new("fit", &["delta_hat", "stderr", "pairs"]);
    if usable.len() < 3 {
        fit.push(vec![Value::Null, Value::Null, v(usable.len())]);
        rep.notes
            .push(format!("only {} usable pairs: no fit", usable.len()));
        rep.verdict = Verdict::Inconclusive;
    } else {
        let (slope, se) = weighted_slope(&usable);
        fit.push(vec![v(slope), v(se), v(usable.len())]);
        rep.verdict = if slope - 3.0 * se > 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }
    rep.tables = vec![fit, pairs];
    rep.finish(&cens);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Jump probabilities

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpOptions {
    /// Radius of the ball left by the path.
    pub s: f64,
    /// Thresholds `r ≥ 2s` for `P^0(|X_{τ_{B_s}}| ≥ r)`.
    pub radii: Vec<f64>,
    /// Radii for the exit-time scaling table.
    pub exit_radii: Vec<f64>,
}

impl Default for JumpOptions {
    fn default() -> Self {
        Self {
            s: 0.5,
            radii: vec![1.0, 2.0, 4.0],
            exit_radii: vec![0.25, 1.0, 4.0],
        }
    }
}

/// `P^0(|X_{τ_{B_s}}| ≥ r)` against `ψ*(1/r)/ψ*(1/s)` and against
/// `h(r)·E^0 τ_{B_s}`, plus `E^0 τ_{B_r} ψ*(1/r)` across radii.
pub fn jump_probabilities(
    spec: &ProcessSpec,
    opts: &JumpOptions,
    cfg: &ExperimentConfig,
) -> Result<Report> {
    if opts
        .radii
        .iter()
        .any(|r| !(opts.s > 0.0 && *r >= 2.0 * opts.s))
    {
        return Err(invalid("need 0 < s ≤ r/2 for every threshold"));
    }
    let exp = psi_from_spec(spec)?;
    let cert = standard_certificate(&exp);
    let d = spec.d();
    let mut rep = Report::new("jump", spec, cfg, opts);
    let mut cens = Censoring::default();
    let origin = vec![0.0; d];
    let sim = cfg.simulator(spec, &exp, opts.s)?;
    let batch = exits_with(
        &sim,
        &origin,
        opts.s,
        cfg.n,
        cell_key(cfg.seed, PURPOSE_JUMP, 0, 0),
    )?;
    cens.add(batch.censored, batch.n());
    let (tau, _) = batch.mean_tau();
    let estimates: Vec<(f64, f64, f64)> = opts
        .radii
        .iter()
        .map(|&r| {
            let (p, se) = batch.proportion(|z| norm(z) >= r);
            (r, p, se)
        })
        .collect();
    let jr = check_jump_prob_bound(&exp, Some(&cert), opts.s, &estimates)?;
    let mut jt = Table::new(
        "jump",
        &[
            "r",
            "estimate",
            "stderr",
            "bound",
            "ratio",
            "ratio_beta",
            "h_tau",
            "ratio_h_tau",
            "violated",
        ],
    );
    let mut max_h_ratio: f64 = 0.0;
    for row in &jr.rows {
        let ht = pruitt_h(spec, row.r)? * tau;
        let q = row.estimate / ht;
        max_h_ratio = max_h_ratio.max(q);
        jt.push(vec![
            v(row.r),
            v(row.estimate),
            v(row.stderr),
            v(row.bound),
            v(row.ratio),
            row.ratio_beta.map_or(Value::Null, v),
            v(ht),
            v(q),
            v(row.violated),
        ]);
    }
    let mut et = Table::new("exit_time", &["r", "mean_tau", "stderr", "scaled"]);
    let mut scaled = Vec::new();
    for (i, &r) in opts.exit_radii.iter().enumerate() {
        let sim = cfg.simulator(spec, &exp, r)?;
        let b = exits_with(
            &sim,
            &origin,
            r,
            cfg.n,
            cell_key(cfg.seed, PURPOSE_JUMP, 1, i),
        )?;
        cens.add(b.censored, b.n());
        let (m, se) = b.mean_tau();
        let s = m * exp.psi_star(1.0 / r);
        scaled.push(s);
        et.push(vec![v(r), v(m), v(se), v(s)]);
    }
    let band = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        / scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let mut summary = Table::new(
        "summary",
        &["max_ratio_h_tau", "exit_time_band", "decay_violated"],
    );
    summary.push(vec![v(max_h_ratio), v(band), v(jr.violated)]);
    rep.verdict = if jr.violated {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    rep.tables = vec![summary, jt, et];
    rep.finish(&cens);
    Ok(rep)
}

/// Options of any experiment, tagged by its name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "lowercase")]
pub enum ExperimentOptions {
    Harnack(HarnackOptions),
    Ks(KrylovSafonovOptions),
    Exitcomp(ExitCompOptions),
    Holder(HolderOptions),
    Jump(JumpOptions),
}

/// Experiment names accepted by [`ExperimentOptions::defaults`].
pub const EXPERIMENTS: [&str; 5] = ["harnack", "ks", "exitcomp", "holder", "jump"];

impl ExperimentOptions {
    pub fn defaults(name: &str, spec: &ProcessSpec) -> Result<Self> {
        Ok(match name {
            "harnack" => Self::Harnack(HarnackOptions::for_spec(spec)),
            "ks" => Self::Ks(KrylovSafonovOptions::default()),
            "exitcomp" => Self::Exitcomp(ExitCompOptions::default()),
            "holder" => Self::Holder(HolderOptions::default()),
            "jump" => Self::Jump(JumpOptions::default()),
            other => {
                return Err(invalid(format!(
                    "unknown experiment '{other}' (expected one of {})",
                    EXPERIMENTS.join(", ")
                )))
            }
        })
    }

    /// Replaces the radii: all of them for multi-radius experiments, the first
    /// one otherwise; for `jump` they are the thresholds `r`.
    pub fn with_radii(mut self, radii: &[f64]) -> Self {
        if radii.is_empty() {
            return self;
        }
        match &mut self {
            Self::Harnack(o) => o.radii = radii.to_vec(),
            Self::Ks(o) => o.radii = radii.to_vec(),
            Self::Exitcomp(o) => o.r = radii[0],
            Self::Holder(o) => o.r = radii[0],
            Self::Jump(o) => o.radii = radii.to_vec(),
        }
        self
    }

    pub fn run(&self, spec: &ProcessSpec, cfg: &ExperimentConfig) -> Result<Report> {
        match self {
            Self::Harnack(o) => harnack_ratio(spec, o, cfg),
            Self::Ks(o) => krylov_safonov(spec, o, cfg),
            Self::Exitcomp(o) => exit_comparability(spec, o, cfg),
            Self::Holder(o) => holder_exponent(spec, o, cfg),
            Self::Jump(o) => jump_probabilities(spec, o, cfg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::make_stable;

    fn small(n: usize) -> ExperimentConfig {
        ExperimentConfig {
            seed: 3,
            n,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn harnack_grid_lies_in_half_ball() {
        let g = harnack_grid(3, 2.0);
        assert_eq!(g.len(), 27);
        assert!(g.iter().all(|x| norm(x) < 1.0));
        assert_eq!(harnack_grid(5, 1.0).len(), 27);
    }

    #[test]
    fn weighted_slope_recovers_power_law() {
        let pts: Vec<(f64, f64, f64)> = (1..6)
            .map(|k| {
                let d = 0.5f64.powi(k);
                (d, 0.3 * d.powf(0.7), 0.01 * d)
            })
            .collect();
        let (s, se) = weighted_slope(&pts);
        assert!((s - 0.7).abs() < 1e-12 && se > 0.0);
    }

    #[test]
    fn complement_gives_unit_ratio_and_inconclusive_holder() {
        let spec = make_stable(1.0, 3).unwrap();
        let cfg = small(200);
        let opts = HarnackOptions {
            radii: vec![1.0],
            spread_limit: 2.0,
        };
        let rep = harnack_ratio(&spec, &opts, &cfg).unwrap();
        let t = rep.table("ratios").unwrap();
        let row = t.rows.iter().find(|r| r[1] == "complement").unwrap();
        assert_eq!(row[6], 1.0);
        let h = holder_exponent(
            &spec,
            &HolderOptions {
                set: "complement".into(),
                ..Default::default()
            },
            &cfg,
        )
        .unwrap();
        assert_eq!(h.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn inner_radius_uses_two_for_special_sbm() {
        let spec = make_stable(1.0, 3).unwrap();
        let exp = psi_from_spec(&spec).unwrap();
        let (l, r0) = inner_radius(&spec, &exp, 5.0).unwrap();
        assert_eq!((l, r0), (2.0, 1.0));
    }
}
