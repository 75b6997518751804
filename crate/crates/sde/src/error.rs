use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("noise calibration failed: {0}")]
    Calibration(String),
}

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> SdeError {
    SdeError::Parameter { name, reason: reason.into() }
}
