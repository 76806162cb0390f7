//! Potential measures, potential kernels, ball potentials and capacities,
//! each reported inside its proven two-sided bracket.

mod constants;
mod hunt;
mod kernel;
mod subordinator;

use serde::{Deserialize, Serialize};

pub use constants::{
    dimension_constants, heat_kernel, DimensionConstants, KernelConstants, SbmKernelConstants,
    BALL_UPPER, LAPLACE_UPPER, SUB_LOWER, SUB_UPPER,
};
pub use hunt::{hunt_green, poisson_kernel, ExteriorRegion, HuntGreen, PoissonCell, PoissonKernel};
pub use kernel::{
    ball_potential, ball_potential_estimate, capacity_estimate, green_kernel, kernel_bracket,
    kernel_bracket_sbm, laplace_crosscheck, riesz_kernel, GreenKernel, KernelMethod, LaplaceCheck,
    CAPACITY_HEURISTIC_FACTOR,
};
pub use subordinator::{
    stehfest_invert, stehfest_weights, subordinator_potential, subordinator_potential_inverted,
    PotentialMethod, SubordinatorPotential, STEHFEST_ORDER,
};

/// A value with its proven lower/upper bounds and the constants used.
///
/// `violated` is set when the estimate falls outside `[lower, upper]` or the
/// bounds themselves cross.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialBracket {
    /// Radius or `|x|` at which the bracket was evaluated.
    pub at: f64,
    pub lower: Option<f64>,
    pub estimate: Option<f64>,
    pub upper: f64,
    pub violated: bool,
    pub method: String,
    pub constants: Vec<(String, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl PotentialBracket {
    pub fn new(
        at: f64,
        lower: Option<f64>,
        estimate: Option<f64>,
        upper: f64,
        method: impl Into<String>,
    ) -> Self {
        let mut b = Self {
            at,
            lower,
            estimate,
            upper,
            violated: false,
            method: method.into(),
            constants: Vec::new(),
            notes: Vec::new(),
        };
        b.recheck();
        b
    }

    fn recheck(&mut self) {
        let lo = self.lower.unwrap_or(0.0);
        let crossed = lo > self.upper;
        let outside = self.estimate.is_some_and(|e| !(e >= lo && e <= self.upper));
        self.violated = crossed || outside;
    }

    pub fn with_constant(mut self, name: &str, value: f64) -> Self {
        self.constants.push((name.to_string(), value));
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    /// `estimate / lower` and `upper / estimate` margins, when defined.
    pub fn margins(&self) -> (Option<f64>, Option<f64>) {
        match self.estimate {
            Some(e) => (self.lower.map(|l| e / l), Some(self.upper / e)),
            None => (None, None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_flags() {
        assert!(!PotentialBracket::new(1.0, Some(1.0), Some(2.0), 3.0, "t").violated);
        assert!(PotentialBracket::new(1.0, Some(1.0), Some(4.0), 3.0, "t").violated);
        assert!(PotentialBracket::new(1.0, Some(4.0), None, 3.0, "t").violated);
        assert!(PotentialBracket::new(1.0, None, Some(f64::NAN), 3.0, "t").violated);
        let b = PotentialBracket::new(1.0, None, None, 3.0, "t").with_constant("C4", 2.0);
        assert_eq!(b.constant("C4"), Some(2.0));
    }
}
