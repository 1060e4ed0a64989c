use thiserror::Error;

/// Errors raised by the analytic and Monte-Carlo code paths.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter is outside its admissible range. `name` is the
    /// parameter's configuration key, so callers can point at the offending line.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("lattice side count {0} must be odd")]
    EvenSideCount(usize),

    #[error("pixel pitch is only {ratio:.3} waists; at least {min} are required for independent pixels")]
    PixelsOverlap { ratio: f64, min: f64 },

    #[error("direct lattice sum refused for N = {0} (limit {limit})", limit = crate::spatial::DIRECT_SUM_MAX_N)]
    LatticeTooLarge(usize),

    #[error("{what} is negative ({value:e}) at omega = {omega:e}")]
    NegativePsd {
        what: &'static str,
        value: f64,
        omega: f64,
    },

    #[error("spectrum query is inconsistent: {0}")]
    InvalidQuery(String),

    #[error("analytic spectrum went negative ({value:e}) at q = ({qx:e}, {qy:e}), omega = {omega:e}")]
    NegativeSpectrum {
        value: f64,
        qx: f64,
        qy: f64,
        omega: f64,
    },

    #[error("simulation config violates `{constraint}`: {detail}")]
    SimulationConfig {
        constraint: &'static str,
        detail: String,
    },

    #[error("insufficient data for spectral estimation: {0}")]
    InsufficientDuration(String),

    #[error("shot-noise floor vanishes (no mean field); the linearized current is identically zero")]
    DegenerateShotFloor,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0".into(),
        })
    }
}
