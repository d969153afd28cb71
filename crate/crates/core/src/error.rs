use thiserror::Error;

use crate::spectra::ValidityReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("tail sequence violates validity conditions (first violation at n = {first:?})", first = .0.first_violation)]
    InvalidTail(ValidityReport),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("chain is not totally ordered in the host poset: {0}")]
    InvalidChain(String),

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("schedule reaches ln(1+n) = {requested:e}, beyond the generator's validity limit {limit:e}")]
    ScheduleExceedsValidity { requested: f64, limit: f64 },

    #[error("no admissible shift found below x = {0:e}")]
    NoShift(f64),

    #[error("{context}: {message}")]
    Parse { context: String, message: String },
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
