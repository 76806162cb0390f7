//! Special functions and ball/sphere geometry used throughout.

use std::f64::consts::PI;

pub use statrs::function::erf::{erf, erfc};
pub use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    (h * PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// Volume of the ball of radius `r` in `R^d`.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    unit_ball_volume(d) * r.powi(d as i32)
}

/// Surface area of the unit sphere `S^{d-1}` in `R^d`; for `d = 1` this is 2.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

/// Upper incomplete gamma `Γ(2, x) = (1 + x) e^{-x}`.
pub fn upper_gamma_2(x: f64) -> f64 {
    (1.0 + x) * (-x).exp()
}

/// `n` points logarithmically spaced on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_area(1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-6, 1e6, 2048);
        assert_eq!(g.len(), 2048);
        assert_eq!(g[0], 1e-6);
        assert_eq!(g[2047], 1e6);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
