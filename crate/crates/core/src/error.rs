use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("probability {value} for cell {cell} is outside [0, 1]")]
    ProbabilityOutOfRange { cell: &'static str, value: f64 },

    #[error("distribution is not normalized: cells sum to {0}")]
    NotNormalized(f64),

    #[error("charge weights must sum to 1, got {0}")]
    WeightMismatch(f64),

    #[error("invalid velocity: |beta| = {0} exceeds 1")]
    SuperluminalVelocity(f64),

    #[error("invalid aperture: {0}")]
    InvalidAperture(String),

    #[error("vector is not a unit vector (norm {0})")]
    NotUnitVector(f64),

    #[error("four-vector is not null (interval {0})")]
    NotNullVector(f64),

    #[error("four-vector is not timelike (interval {0})")]
    NotTimelike(f64),

    #[error("field vector has zero magnitude")]
    ZeroField,

    #[error("anisotropy parameter r = {0} must satisfy |r| < 1")]
    AnisotropyOutOfRange(f64),

    #[error("anisotropy parameter r = {0} must lie in (0, 1) for probability evaluation")]
    ProbabilityExponentOutOfRange(f64),

    #[error("norm is singular: zero projection on the preferred direction with negative r")]
    SingularNorm,

    #[error("view {view} is not defined for model {model}")]
    UnsupportedView { model: &'static str, view: &'static str },

    #[error("trial count must be at least 1")]
    ZeroTrials,

    #[error("cannot merge tallies: {0}")]
    IncompatibleTally(String),

    #[error("scan resolution {0} degrees is invalid: {1}")]
    InvalidResolution(f64, &'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
