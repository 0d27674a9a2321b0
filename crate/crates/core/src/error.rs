use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants fall into two families: input validation problems (bad
/// distributions, malformed scenarios, insufficient moment orders) and
/// numerical failures (non-convergence, solver trouble, residual checks).
/// [`Error::is_numerical`] separates the two so front ends can pick an exit
/// status.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("moment order {requested} requested but only {available} available")]
    InsufficientOrder { requested: usize, available: usize },

    #[error("moment order {requested} exceeds the supported limit {limit}")]
    OrderLimit { requested: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("imaginary residual {residual:.3e} exceeds tolerance in trigonometric moment")]
    ImaginaryResidual { residual: f64 },

    #[error("numerical integration did not converge (estimated error {estimate:.3e})")]
    NonConvergence { estimate: f64 },

    #[error("semidefinite solver failed: {0}")]
    Solver(String),

    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),

    #[error("moment expansion exceeded the cap of {cap} tracked moments")]
    ExpansionCap { cap: usize },

    #[error("missing base moment {0}")]
    MissingBaseMoment(String),

    #[error("method `{method}` cannot evaluate {representation}")]
    MethodMismatch {
        method: String,
        representation: String,
    },

    #[error("empty horizon")]
    EmptyHorizon,

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical routine rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ImaginaryResidual { .. }
                | Error::NonConvergence { .. }
                | Error::Solver(_)
                | Error::ExpansionCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
