use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("{what} did not converge within {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("quadrature for {what} failed refinement check (deviation {deviation:.3e})")]
    Quadrature { what: &'static str, deviation: f64 },

    #[error("quadrature cost guard: {0}")]
    CostGuard(String),

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("line {line}: {field}: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in result tables.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::Domain(_) => "domain",
            Error::NonConvergence { .. } => "nonconvergence",
            Error::Quadrature { .. } => "quadrature",
            Error::CostGuard(_) => "cost_guard",
            Error::Inconsistent(_) => "inconsistent",
            Error::Unsupported(_) => "unsupported",
            Error::Overflow(_) => "overflow",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Quadrature { .. }
                | Error::CostGuard(_)
                | Error::Overflow(_)
        )
    }
}
