//! Globally adaptive Gauss–Kronrod (21-point) quadrature with breakpoints,
//! semi-infinite maps, logarithmic radial integration and Wynn's epsilon
//! extrapolation for alternating tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Error;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

impl QuadOpts {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// Failure of an adaptive rule: carries the partial sum reached so far.
#[derive(Debug, Clone, Copy)]
pub struct QuadFailure {
    pub partial: f64,
    pub error: f64,
}

impl QuadFailure {
    pub fn into_error(self, what: &str) -> Error {
        Error::Quadrature {
            what: what.to_string(),
            partial: self.partial,
            error: self.error,
        }
    }
}

pub type QuadResult = std::result::Result<Quad, QuadFailure>;

/// Variable change applied to a piece before the Kronrod rule sees it.
#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// x = a + t / (1 - t), t in [0, 1)
    ToPosInf(f64),
    /// x = b - t / (1 - t), t in [0, 1)
    ToNegInf(f64),
}

impl Map {
    #[inline]
    fn apply<F: Fn(f64) -> f64>(self, f: &F, t: f64) -> f64 {
        match self {
            Map::Identity => f(t),
            Map::ToPosInf(a) => {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            }
            Map::ToNegInf(b) => {
                let s = 1.0 - t;
                f(b - t / s) / (s * s)
            }
        }
    }
}

struct Segment {
    map: Map,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod evaluation with the QUADPACK error heuristic.
fn gk21<F: Fn(f64) -> f64>(f: &F, map: Map, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = map.apply(f, c);
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = map.apply(f, c - dx);
        let f2 = map.apply(f, c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kron * 0.5;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kron * h;
    let asc = asc * h.abs();
    let mut err = ((kron - gauss) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if !value.is_finite() {
        return (value, f64::INFINITY);
    }
    (value, err)
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, pieces: &[(Map, f64, f64)], opts: QuadOpts) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    for &(map, a, b) in pieces {
        if a == b {
            continue;
        }
        let (v, e) = gk21(f, map, a, b);
        evals += 21;
        total += v;
        err += e;
        heap.push(Segment {
            map,
            a,
            b,
            value: v,
            error: e,
        });
    }
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol || heap.is_empty() {
            break;
        }
        if heap.len() >= opts.max_intervals || !total.is_finite() {
            return Err(QuadFailure {
                partial: total,
                error: err,
            });
        }
        let seg = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in floating point.
            return Err(QuadFailure {
                partial: total,
                error: err,
            });
        }
        let (v1, e1) = gk21(f, seg.map, seg.a, mid);
        let (v2, e2) = gk21(f, seg.map, mid, seg.b);
        evals += 42;
        total += v1 + v2 - seg.value;
        err += e1 + e2 - seg.error;
        heap.push(Segment {
            map: seg.map,
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            map: seg.map,
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum from the segments to shed accumulated rounding in `total`.
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = segs.iter().map(|s| s.value).sum();
    let error: f64 = segs.iter().map(|s| s.error).sum();
    Ok(Quad {
        value,
        error,
        evals,
    })
}

/// Fixed 21-point Kronrod estimate (no adaptivity).
pub fn kronrod21<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    gk21(&f, Map::Identity, a, b)
}

/// Adaptive integral over a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOpts) -> QuadResult {
    integrate_with_breaks(f, a, b, &[], opts)
}

/// Adaptive integral over `[a, b]` (either end may be infinite) split at `breaks`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOpts,
) -> QuadResult {
    if a == b {
        return Ok(Quad {
            value: 0.0,
            error: 0.0,
            evals: 0,
        });
    }
    if a > b {
        return integrate_with_breaks(f, b, a, breaks, opts).map(|q| Quad {
            value: -q.value,
            ..q
        });
    }
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b && x.is_finite())
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut pieces = Vec::new();
    let mut nodes = Vec::with_capacity(pts.len() + 2);
    nodes.push(a);
    nodes.extend(pts);
    nodes.push(b);
    // Infinite ends need a finite anchor next to them.
    if nodes.len() == 2 && a.is_infinite() && b.is_infinite() {
        nodes.insert(1, 0.0);
    }
    for w in nodes.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        match (lo.is_infinite(), hi.is_infinite()) {
            (false, false) => pieces.push((Map::Identity, lo, hi)),
            (false, true) => pieces.push((Map::ToPosInf(lo), 0.0, 1.0)),
            (true, false) => pieces.push((Map::ToNegInf(hi), 0.0, 1.0)),
            (true, true) => unreachable!(),
        }
    }
    adaptive(&f, &pieces, opts)
}

/// `∫_lo^hi g(s) ds` for `0 <= lo < hi <= ∞`, computed in the variable `u = ln s`.
///
/// Suited to radial integrands that span many decades. `breaks` are points in
/// `s` where `g` is not smooth; `scale` anchors the logarithmic split.
pub fn integrate_radial<G: Fn(f64) -> f64>(
    g: G,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    scale: f64,
    opts: QuadOpts,
) -> QuadResult {
    if !(hi > lo) {
        return Ok(Quad {
            value: 0.0,
            error: 0.0,
            evals: 0,
        });
    }
    let ulo = if lo > 0.0 { lo.ln() } else { f64::NEG_INFINITY };
    let uhi = if hi.is_finite() {
        hi.ln()
    } else {
        f64::INFINITY
    };
    let mut ubreaks: Vec<f64> = breaks
        .iter()
        .filter(|&&b| b > lo && b < hi)
        .map(|b| b.ln())
        .collect();
    if scale > lo && scale < hi && scale.is_finite() {
        let us = scale.ln();
        ubreaks.push(us);
        // Flanking anchors keep the semi-infinite maps away from the bulk.
        for k in [-8.0, 8.0] {
            let u = us + k;
            if u > ulo && u < uhi {
                ubreaks.push(u);
            }
        }
    }
    let h = |u: f64| {
        if u > 709.0 {
            return 0.0;
        }
        let s = u.exp();
        if s == 0.0 {
            return 0.0;
        }
        let v = g(s) * s;
        // Far out in u the factors of an integrable radial integrand can
        // under/overflow separately; treat such points as negligible.
        if !v.is_finite() && u.abs() > 100.0 {
            0.0
        } else {
            v
        }
    };
    integrate_with_breaks(h, ulo, uhi, &ubreaks, opts)
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the extrapolated limit from the full table.
pub fn wynn_epsilon(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    if n == 0 {
        return 0.0;
    }
    if n < 3 {
        return partial_sums[n - 1];
    }
    // eps[k][j]: column k, row j. Column -1 is all zeros.
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partial_sums.to_vec();
    let mut best = partial_sums[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        let mut degenerate = false;
        for j in 0..cur.len() - 1 {
            let diff = cur[j + 1] - cur[j];
            if diff == 0.0 || !diff.is_finite() {
                degenerate = true;
                break;
            }
            next.push(prev[j + 1] + 1.0 / diff);
        }
        if degenerate {
            break;
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, QuadOpts::default()).unwrap();
        assert!((q.value - 0.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        let q = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, QuadOpts::rel(1e-10)).unwrap();
        assert!((q.value - 2.0).abs() < 1e-8, "{}", q.value);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let q = integrate_with_breaks(
            |x: f64| (-x * x).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &[],
            QuadOpts::default(),
        )
        .unwrap();
        assert!((q.value - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn radial_power_law_tail() {
        // ∫_1^∞ s^{-2} ds = 1, ∫_0^1 s^{-1/2} ds = 2
        let q = integrate_radial(
            |s: f64| s.powi(-2),
            1.0,
            f64::INFINITY,
            &[],
            1.0,
            QuadOpts::default(),
        )
        .unwrap();
        assert!((q.value - 1.0).abs() < 1e-9);
        let q = integrate_radial(
            |s: f64| s.powf(-0.5),
            0.0,
            1.0,
            &[],
            0.5,
            QuadOpts::default(),
        )
        .unwrap();
        assert!((q.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn radial_with_jump() {
        let g = |s: f64| if s < 1.0 { 1.0 } else { (-s).exp() };
        let q = integrate_radial(g, 0.0, f64::INFINITY, &[1.0], 1.0, QuadOpts::default()).unwrap();
        assert!((q.value - (1.0 + (-1.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic() {
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        let est = wynn_epsilon(&sums);
        assert!((est - 2f64.ln()).abs() < 1e-10, "{est}");
    }

    #[test]
    fn failure_carries_partial() {
        let opts = QuadOpts {
            abs_tol: 0.0,
            rel_tol: 1e-15,
            max_intervals: 3,
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, opts);
        let e = r.unwrap_err();
        assert!(e.partial.is_finite());
    }
}
