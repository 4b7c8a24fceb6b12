use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("domain violation: {what} at t = {at}")]
    Domain { what: String, at: f64 },

    #[error("singularity: {what} at t = {at}")]
    Singularity { what: String, at: f64 },

    #[error("overflow while evaluating at t = {at}")]
    Overflow { at: f64 },

    #[error("point {t} lies outside the domain {domain}")]
    OutsideDomain { t: f64, domain: String },

    #[error("transform not applicable: {0}")]
    Transform(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Errors caused by the caller's input rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownIdentifier { .. }
                | Error::InvalidInput(_)
                | Error::Transform(_)
                | Error::UnknownScenario(_)
                | Error::Io(_)
                | Error::DimensionMismatch { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}
