use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum OgiError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("simulation aborted: non-finite spot variance at day {day}, grid index {index} (value {value})")]
    NonFiniteState { day: usize, index: usize, value: f64 },

    #[error("optimizer did not converge after {evals} evaluations (best objective {objective})")]
    NonConvergence { evals: usize, objective: f64 },

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    #[error("quadrature did not reach tolerance {tol} on [{a}, {b}] (estimate {estimate})")]
    QuadratureFailure { a: f64, b: f64, tol: f64, estimate: f64 },

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, OgiError>;
