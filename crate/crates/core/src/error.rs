use num_complex::Complex64;
use thiserror::Error;

/// Failure modes of the numerical core.
///
/// Every variant has a stable [`Error::kind`] tag, used by the ensemble
/// runner to count per-realization failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-positive mode frequency {min} (carrier too small for the spectral width)")]
    NonPositiveFrequency { min: f64 },

    #[error("too few modes: {found} in window, need at least {required}")]
    TooFewModes { found: usize, required: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "eigenvector matrix near-defective (condition {condition:.3e}); closest eigenvalues {first} and {second}"
    )]
    NearDefective {
        condition: f64,
        first: Complex64,
        second: Complex64,
    },

    #[error("left and right vectors are (numerically) orthogonal: |l'r| = {overlap:.3e}")]
    DegenerateVectors { overlap: f64 },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("unstable dynamics: largest eigenvalue real part {max_real:.3e}")]
    UnstableDynamics { max_real: f64 },

    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("marginally stable dynamics (max Re = {max_real:.3e}) with non-zero noise")]
    MarginallyStable { max_real: f64 },

    #[error("negative intensity {0}")]
    NegativeIntensity(f64),

    #[error("below threshold: unsaturated gain {unsaturated_gain:.6e} <= narrowest width {gamma_min:.6e}")]
    BelowThreshold {
        unsaturated_gain: f64,
        gamma_min: f64,
    },

    #[error("two narrowest resonances are degenerate (width gap {gap:.3e}); single-line lasing ill-defined")]
    NearDegenerateLasingMode { gap: f64 },

    #[error("fluctuation matrix has no zero mode: smallest |eigenvalue| = {smallest:.3e}")]
    ZeroModeMissing { smallest: f64 },

    #[error("zero laser intensity")]
    ZeroIntensity,
}

impl Error {
    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NonPositiveFrequency { .. } => "NonPositiveFrequency",
            Error::TooFewModes { .. } => "TooFewModes",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NearDefective { .. } => "NearDefective",
            Error::DegenerateVectors { .. } => "DegenerateVectors",
            Error::NoConvergence => "NoConvergence",
            Error::UnstableDynamics { .. } => "UnstableDynamics",
            Error::NonPositiveStep(_) => "NonPositiveStep",
            Error::MarginallyStable { .. } => "MarginallyStable",
            Error::NegativeIntensity(_) => "NegativeIntensity",
            Error::BelowThreshold { .. } => "BelowThreshold",
            Error::NearDegenerateLasingMode { .. } => "NearDegenerateLasingMode",
            Error::ZeroModeMissing { .. } => "ZeroModeMissing",
            Error::ZeroIntensity => "ZeroIntensity",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
