use thiserror::Error;

/// Every failure the library can report.
///
/// Variants map onto the command-line exit codes: configuration problems
/// exit with 2, everything numerical exits with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no sign change of u before the step cap ({steps} steps, r = {r:.6e})")]
    NoZeroFound { steps: usize, r: f64 },
    #[error("stiffness failure: {0}")]
    StiffnessFailure(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("dimension N = {0} is not supported here")]
    DimensionUnsupported(usize),
    #[error("numeric overflow: {0}")]
    RangeOverflow(String),
    #[error("bisection failed: {0}")]
    BisectionFailure(String),
    #[error("linear solver diverged after {iterations} iterations (relative residual {residual:.3e})")]
    SolverDivergence { iterations: usize, residual: f64 },
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("node is closer than 3h to the boundary")]
    TooCloseToBoundary,
    #[error("points closer than the minimum separation: {0}")]
    PointsTooClose(String),
    #[error("Newton/Picard did not converge at lambda = {lambda}: pde residual {pde:.3e}, constraint residual {constraint:.3e}")]
    NoConvergence { lambda: f64, pde: f64, constraint: f64 },
    #[error("psi is not positive in the interior (min {0:.3e})")]
    NonPositivePsi(f64),
    #[error("sign mismatch: {0}")]
    SignMismatch(String),
    #[error("spike report is empty")]
    EmptyReport,
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) | Error::OutOfRange(_) | Error::DimensionUnsupported(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
