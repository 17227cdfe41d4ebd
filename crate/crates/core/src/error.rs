use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("index {index} out of range for a dataset of {len} examples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("point outside the domain of the mirror map: {0}")]
    Domain(String),

    #[error("{solver} did not converge (residual {residual:e})")]
    SolverFailure { solver: &'static str, residual: f64 },

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },

    /// `gap_bound` and `tol` describe whichever certificate was still short:
    /// the objective gap, or the distance when one was requested.
    #[error("oracle could not certify a minimizer: bound {gap_bound:e} above {tol:e} after {iterations} iterations")]
    OracleFailure {
        gap_bound: f64,
        tol: f64,
        iterations: usize,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps the error with a short description of where it happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Strips [`Error::Context`] layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_oracle_failure(&self) -> bool {
        matches!(self.root(), Error::OracleFailure { .. })
    }
}
