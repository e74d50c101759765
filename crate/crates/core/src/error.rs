use thiserror::Error;

/// Counters carried by a simulation that produced too few successful
/// updates to form its measurement window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunCounters {
    pub n_slots: u64,
    pub n_recharges: u64,
    pub n_successes: u64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "simulation produced {} successful update(s) in {} slots ({} recharges); not enough to measure age",
        .0.n_successes, .0.n_slots, .0.n_recharges
    )]
    NoSuccesses(RunCounters),

    #[error("malformed event log: {0}")]
    MalformedLog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// Rejects non-finite or non-positive values.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(domain(format!("{name} must be a finite positive number, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(domain(format!("{name} must be finite and non-negative, got {value}")))
    }
}

pub(crate) fn require_probability(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(domain(format!("{name} must lie in (0, 1], got {value}")))
    }
}
