use chrono::NaiveDate;

/// Errors produced by the horserace engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value lies outside the domain of an operation, e.g. the log of a non-positive number.
    #[error("domain error in '{series}' at {date}: {message}")]
    Domain {
        series: String,
        date: NaiveDate,
        message: String,
    },
    /// The input is shorter than the operation requires.
    #[error("series too short: need at least {needed} observations, got {got}")]
    Length { needed: usize, got: usize },
    /// The input has no variation where variation is required.
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    /// Generic invalid argument.
    #[error("invalid input: {0}")]
    Input(String),
    /// Two or more series do not share an index, or an index is malformed.
    #[error("index error: {0}")]
    Index(String),
    /// The regression design matrix is (numerically) rank deficient.
    #[error("collinear regressors: {0}")]
    Collinear(String),
    /// The likelihood optimiser hit its iteration cap.
    #[error(
        "optimiser did not converge after {iterations} iterations \
         (best log-likelihood {best_loglik:.6}, gradient norm {grad_norm:.3e})"
    )]
    Convergence {
        iterations: usize,
        best_loglik: f64,
        grad_norm: f64,
    },
    /// No candidate model in an order search could be fitted.
    #[error("order selection failed: {0}")]
    Selection(String),
    /// Inconsistent run configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed input file.
    #[error("{file}: line {line}: {message}")]
    Ingest {
        file: String,
        line: usize,
        message: String,
    },
    /// A daily series is missing a date.
    #[error("gap in '{series}': missing date {date}")]
    Gap { series: String, date: NaiveDate },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
