//! Tabulated positive functions on logarithmic grids with log–log Lagrange
//! interpolation, split at known discontinuities.

/// One smooth piece: samples of `f` on a log grid over `[lo, hi]`.
#[derive(Debug, Clone)]
struct Piece {
    lnx0: f64,
    step: f64,
    lny: Vec<f64>,
    y: Vec<f64>,
}

impl Piece {
    fn build<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, per_decade: usize) -> Piece {
        let (a, b) = (lo.ln(), hi.ln());
        let decades = (b - a) / std::f64::consts::LN_10;
        let n = ((decades * per_decade as f64).ceil() as usize).max(4) + 1;
        let step = (b - a) / (n - 1) as f64;
        // Pull the outermost samples a hair inside so one-sided limits are used.
        let nudge = 1e-12;
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let u = if i == 0 {
                    a + nudge * step
                } else if i == n - 1 {
                    b - nudge * step
                } else {
                    a + step * i as f64
                };
                f(u.exp()).max(0.0)
            })
            .collect();
        let lny = y
            .iter()
            .map(|v| if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY })
            .collect();
        Piece {
            lnx0: a,
            step,
            lny,
            y,
        }
    }

    fn len(&self) -> usize {
        self.y.len()
    }

    fn eval(&self, lnx: f64) -> f64 {
        let n = self.len();
        let t = (lnx - self.lnx0) / self.step;
        let i = (t.floor() as isize).clamp(1, n as isize - 3) as usize;
        let i0 = i - 1;
        let ok = self.lny[i0..i0 + 4].iter().all(|v| v.is_finite());
        let xs = [i0 as f64, i0 as f64 + 1.0, i0 as f64 + 2.0, i0 as f64 + 3.0];
        let pts: [f64; 4] = if ok {
            [
                self.lny[i0],
                self.lny[i0 + 1],
                self.lny[i0 + 2],
                self.lny[i0 + 3],
            ]
        } else {
            [self.y[i0], self.y[i0 + 1], self.y[i0 + 2], self.y[i0 + 3]]
        };
        let mut acc = 0.0;
        for j in 0..4 {
            let mut w = 1.0;
            for k in 0..4 {
                if k != j {
                    w *= (t - xs[k]) / (xs[j] - xs[k]);
                }
            }
            acc += w * pts[j];
        }
        if ok {
            acc.exp()
        } else {
            // Linear fallback near zeros: never invent negative mass.
            let j = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
            let frac = (t - j as f64).clamp(0.0, 1.0);
            (self.y[j] * (1.0 - frac) + self.y[j + 1] * frac).max(0.0)
        }
    }

    /// Log–log slope across the first or last grid step.
    fn end_slope(&self, last: bool) -> Option<f64> {
        let n = self.len();
        let (p, q) = if last { (n - 2, n - 1) } else { (0, 1) };
        let (a, b) = (self.lny[p], self.lny[q]);
        (a.is_finite() && b.is_finite()).then(|| (b - a) / self.step)
    }
}

/// Piecewise log-grid table of a non-negative function on `(0, ∞)`.
///
/// Outside `[lo, hi]` the table extrapolates with the end power law; beyond
/// `zero_beyond` it returns exactly 0.
#[derive(Debug, Clone)]
pub struct LogTable {
    bounds: Vec<f64>,
    pieces: Vec<Piece>,
    zero_beyond: Option<f64>,
    lo_slope: Option<f64>,
    hi_slope: Option<f64>,
}

impl LogTable {
    pub fn build<F: Fn(f64) -> f64>(
        f: F,
        lo: f64,
        hi: f64,
        breaks: &[f64],
        zero_beyond: Option<f64>,
        per_decade: usize,
    ) -> LogTable {
        assert!(lo > 0.0 && hi > lo);
        let hi_eff = zero_beyond.map_or(hi, |z| z.min(hi));
        let mut bounds = vec![lo];
        let mut bs: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&b| b > lo && b < hi_eff)
            .collect();
        bs.sort_by(f64::total_cmp);
        bs.dedup();
        bounds.extend(bs);
        bounds.push(hi_eff);
        let pieces: Vec<Piece> = bounds
            .windows(2)
            .map(|w| Piece::build(&f, w[0], w[1], per_decade))
            .collect();
        let lo_slope = pieces.first().and_then(|p| p.end_slope(false));
        let hi_slope = pieces.last().and_then(|p| p.end_slope(true));
        LogTable {
            bounds,
            pieces,
            zero_beyond,
            lo_slope,
            hi_slope,
        }
    }

    pub fn lo(&self) -> f64 {
        self.bounds[0]
    }

    pub fn hi(&self) -> f64 {
        *self.bounds.last().expect("bounds")
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NAN;
        }
        if let Some(z) = self.zero_beyond {
            if x >= z {
                return 0.0;
            }
        }
        let lnx = x.ln();
        if x < self.lo() {
            let p = &self.pieces[0];
            return match self.lo_slope {
                Some(s) => (p.lny[0] + s * (lnx - p.lnx0)).exp(),
                None => p.y[0],
            };
        }
        if x > self.hi() {
            let p = self.pieces.last().expect("pieces");
            let n = p.len();
            let lnhi = p.lnx0 + p.step * (n - 1) as f64;
            return match self.hi_slope {
                Some(s) => (p.lny[n - 1] + s * (lnx - lnhi)).exp(),
                None => 0.0,
            };
        }
        let k = self.bounds[1..]
            .partition_point(|&b| b <= x)
            .min(self.pieces.len() - 1);
        self.pieces[k].eval(lnx)
    }

    /// Power-law exponent used for extrapolation below the table.
    pub fn lower_slope(&self) -> Option<f64> {
        self.lo_slope
    }

    /// Power-law exponent used for extrapolation above the table.
    pub fn upper_slope(&self) -> Option<f64> {
        self.hi_slope
    }
}
