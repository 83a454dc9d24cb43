use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or symbol coefficient lies outside its admissible range.
    #[error("parameter `{field}` out of domain: {message}")]
    Parameter {
        field: &'static str,
        message: String,
    },

    #[error("degenerate symbol: {0}")]
    DegenerateSymbol(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("resolution too small for {what}: got {got}, need at least {min}")]
    Resolution {
        what: &'static str,
        got: usize,
        min: usize,
    },

    #[error("usage error: {0}")]
    Usage(String),

    /// Constraint rows are linearly dependent; `rows` lists the offenders.
    #[error("constraint block is rank deficient (dependent rows {rows:?})")]
    RankDeficient { rows: Vec<usize> },

    #[error("discretization error: {0}")]
    Discretization(String),

    #[error("eigensolver failed for mode k = {k}")]
    Eigensolver { k: i32 },

    #[error("lambda = {re} + {im}i is within {tol:e} of the spectrum")]
    Singular { re: f64, im: f64, tol: f64 },

    #[error("internal consistency violated: {0}")]
    Inconsistent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, message: impl Into<String>) -> Self {
        Error::Parameter {
            field,
            message: message.into(),
        }
    }

    /// Whether the error stems from user input rather than from the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parameter { .. }
                | Error::Geometry(_)
                | Error::Resolution { .. }
                | Error::Usage(_)
                | Error::Config { .. }
        )
    }
}
