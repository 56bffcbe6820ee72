use thiserror::Error;

/// Errors raised by the measure, distance and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("intensity {lambda} exceeds the total mass {total} of the measure")]
    IntensityExceedsMass { lambda: f64, total: f64 },

    #[error("zero tail mass beyond level {level}")]
    ZeroTailMass { level: f64 },

    /// The reference law has no finite second moment, so the untruncated
    /// Wasserstein-2 distance has a pole here.
    #[error("reference distribution has an infinite second moment")]
    InfiniteSecondMoment,

    #[error("quadrature did not reach tolerance {tolerance:e} within {budget} evaluations")]
    QuadratureTolerance { tolerance: f64, budget: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("sample value {value} lies below the cutoff {rho}")]
    SampleBelowCutoff { value: f64, rho: f64 },

    #[error("series of length {len} is too short (need at least {min})")]
    SeriesTooShort { len: usize, min: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("interquartile range of the increments is zero")]
    DegenerateScale,

    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    #[error("operation not supported: {0}")]
    Unsupported(&'static str),
}

pub type Result<T> = std::result::Result<T, LevyError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> LevyError {
    LevyError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
