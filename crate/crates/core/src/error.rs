use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The operator ½(αI + a·σ) has an eigenvalue outside [0, 1]; `deficit`
    /// is the amount by which the worst eigenvalue leaves the interval.
    #[error("not an effect: eigenvalue deficit {deficit:e}")]
    NotAnEffect { deficit: f64 },

    #[error("degenerate axis: Bloch vector is zero")]
    DegenerateAxis,

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("parameter `{name}` = {value} out of range: {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("degenerate direction: {0}")]
    DegenerateDirection(&'static str),

    #[error("observables are not jointly measurable")]
    NotJointlyMeasurable,

    #[error("covariant parameters infeasible: {constraint}")]
    ParamsInfeasible { constraint: String },

    #[error("marginals are not covariant under the given axis (residual {residual:e})")]
    MarginalsNotCovariant { residual: f64 },

    #[error("stochastic matrices violate the ordering λ++ ≥ λ+-, μ++ ≥ μ+-")]
    OrderingViolated,

    #[error("target directions are collinear")]
    DegenerateTargets,

    #[error("invalid joint observable: {0}")]
    InvalidJoint(String),

    #[error("solver did not converge: {0}")]
    SolverDidNotConverge(String),
}
