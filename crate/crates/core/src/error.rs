use thiserror::Error;

/// Errors raised by the simulator, the circuit builder and the search pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QarnError {
    /// Caller supplied something outside an operation's domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested state vector would exceed the configured amplitude cap.
    /// `required` saturates at `u128::MAX`.
    #[error("state of {} amplitudes exceeds the cap of {cap}", amplitude_count(*.required))]
    Capacity { required: u128, cap: u128 },

    /// Floating-point drift beyond tolerance, e.g. the norm left the unit sphere.
    #[error("numeric error: {0}")]
    Numeric(String),
}

fn amplitude_count(required: u128) -> String {
    if required == u128::MAX {
        "at least 2^128".to_string()
    } else {
        required.to_string()
    }
}

pub type Result<T> = std::result::Result<T, QarnError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(QarnError::InvalidInput(msg.into()))
}
