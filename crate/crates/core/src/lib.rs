//! Potential theory of isotropic unimodal Lévy processes: characteristic
//! exponents, scaling certificates, potential kernels, capacities and Monte
//! Carlo checks of Harnack-type estimates.

// `!(x > 0.0)` is the idiom for rejecting NaN along with non-positive input.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod experiments;
pub mod exponent;
pub mod expr;
pub mod mc;
pub mod potential;
pub mod quad;
pub mod special;
pub mod table;
pub mod verify;

pub use catalog::{
    catalog, make_named, make_stable, BernsteinFunction, NamedKind, ProcessSpec, RadialLevyDensity,
    SpecDocument,
};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentOptions, Report, Table, Verdict, EXPERIMENTS};
pub use exponent::{
    certificate_for, pruitt_h, psi_from_spec, CharacteristicExponent, ScalingCertificate,
};
pub use mc::{ExitBatch, ExitRecord, OccupationHistogram, PathConfig, PathSimulator, Proportion};
pub use potential::{PotentialBracket, SubordinatorPotential};
pub use verify::{verify_all, verify_spec, CheckSummary, VerifyOptions, VerifyReport};
