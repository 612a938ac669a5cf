use thiserror::Error;

/// Numeric or domain failure raised by the physics and statistics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("conditioning on an event of zero probability ({0})")]
    ZeroProbability(&'static str),
    #[error("division by zero: {0}")]
    Undefined(&'static str),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64, DomainError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(DomainError::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<f64, DomainError> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(DomainError::OutOfRange {
            name,
            value,
            range: "[0, inf)",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64, DomainError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(DomainError::OutOfRange {
            name,
            value,
            range: "(0, inf)",
        })
    }
}
