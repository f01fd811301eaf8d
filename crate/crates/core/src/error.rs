use thiserror::Error;

/// Errors raised while building constellations, channels, or evaluating bounds.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate constellation: {0}")]
    DegenerateConstellation(String),
    #[error("repeated signal: signals {0} and {1} coincide")]
    RepeatedSignal(usize, usize),
    #[error("permutation size unsupported: L = {0} (expected 2..={1})")]
    PermutationSizeUnsupported(usize, usize),
    #[error("count overflow: {0}")]
    CountOverflow(String),
    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),
    #[error("correlation coefficient out of range: rho = {0} (expected 0 <= rho < 1)")]
    RhoOutOfRange(f64),
    #[error("stationarity root not bracketed (upper end reached {0:e})")]
    RootNotBracketed(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("level out of range: {0}")]
    LevelOutOfRange(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// True for errors caused by bad user input rather than a numeric breakdown.
    pub fn is_config(&self) -> bool {
        !matches!(
            self,
            Error::RootNotBracketed(_) | Error::Numeric(_) | Error::LevelOutOfRange(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
