use thiserror::Error;

/// Errors raised by the phase-space engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A derivative or polynomial order beyond what the evaluator supports.
    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The caller broke a documented precondition (e.g. even order where only odd orders exist).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("range error: {what} overflows double precision (magnitude {magnitude:e})")]
    Range { what: &'static str, magnitude: f64 },

    #[error("term `{0}` has no closed-form resummation; use the series path")]
    UnsupportedTerm(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be finite, got {value}"
        )))
    }
}
