//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong when building operators, decomposing blocks,
/// evaluating closed forms, or propagating states.
#[derive(Debug, Error)]
pub enum Error {
    /// Two operators (or an operator and a state) have incompatible dimensions.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A matrix that must be Hermitian is not, within tolerance.
    #[error("matrix is not Hermitian (max deviation {max_dev:.3e})")]
    NonHermitian { max_dev: f64 },

    /// A sweep rate that must be strictly positive was not.
    #[error("sweep rate must be positive and finite, got {alpha}")]
    InvalidSweepRate { alpha: f64 },

    /// A probability argument fell outside [0, 1].
    #[error("probability out of range [0, 1]: {value}")]
    ProbabilityOutOfRange { value: f64 },

    /// A dimensionless sweep exponent that must be non-negative was not.
    #[error("sweep exponent must be non-negative, got {value}")]
    NegativeExponent { value: f64 },

    /// Both transverse couplings of a block vanish, so no finite sweep rate
    /// can reach the requested target.
    #[error("transverse coupling magnitude is zero; condition unattainable at finite sweep rate")]
    ZeroTransverseMagnitude,

    /// The longitudinal qutrit coupling is not supported by the pair model.
    #[error("nonzero gamma_z is not supported for the qutrit pair (breaks the parity block structure); got {value}")]
    UnsupportedGammaZ { value: f64 },

    /// The couplings violate a constraint required by a reduction.
    #[error("reduction constraint violated: {constraint} (deviation {deviation:.3e})")]
    ConstraintViolated {
        constraint: &'static str,
        deviation: f64,
    },

    /// A scenario label is not meaningful for the requested system.
    #[error("scenario {name} is not supported here: {reason}")]
    UnsupportedScenario { name: String, reason: String },

    /// A state vector is not normalized within tolerance.
    #[error("state is not normalized: |norm - 1| = {deviation:.3e}")]
    UnnormalizedState { deviation: f64 },

    /// A basis label does not exist in the requested basis.
    #[error("unknown basis label {label:?}")]
    UnknownLabel { label: String },

    /// A density matrix failed a structural precondition.
    #[error("invalid density matrix: {reason} (deviation {deviation:.3e})")]
    InvalidDensityMatrix {
        reason: &'static str,
        deviation: f64,
    },

    /// The adaptive stepper hit its step budget before reaching the end of
    /// the window. The partial series is carried for diagnosis.
    #[error("step limit {max_steps} exceeded at t = {reached:.6} (target {target:.6})")]
    StepLimitExceeded {
        max_steps: usize,
        reached: f64,
        target: f64,
        partial: Box<crate::propagate::TimeSeriesResult>,
    },

    /// An asymptotic estimate was requested from an empty series.
    #[error("cannot estimate an asymptote from an empty time series")]
    EmptySeries,

    /// A configuration value is structurally invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
