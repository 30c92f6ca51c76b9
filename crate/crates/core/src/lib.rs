//! Joint measurability of two-outcome qubit observables and optimal
//! approximate joint measurements of noncommuting sharp observables.
//!
//! Operators are handled in Bloch coordinates `(alpha, a)` for
//! `½(alpha·I + a·σ)`. The [`oracle`] module recomputes key quantities from
//! explicit 2×2 matrices and exhaustive grids for cross-checking.

pub mod approximation;
pub mod effect;
pub mod error;
pub mod jointness;
pub mod measures;
pub mod oracle;

pub use approximation::{
    axis_intercept, boundary_curve, d0, d0_coarse, min_d2_given_d1, BoundaryCurve,
    BoundarySample, SolverOptions, TargetPair,
};
pub use effect::{
    commutator_norm, BlochOperator, Effect, SimpleObservable, SpectralDecomposition,
    UnitVector3, Vec3,
};
pub use error::{Error, Result};
pub use jointness::{
    decide_jm, GammaInterval, JmStatus, JmVerdict, JointObservable, StochasticMatrix2,
    CovariantParams,
};
pub use measures::{distance, sharpness, SharpnessReport};
