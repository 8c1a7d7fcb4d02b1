use thiserror::Error;

/// Everything that can go wrong between reading a config file and writing results.
#[derive(Debug, Error)]
pub enum QmemError {
    /// A physical or numerical parameter is outside its admissible domain.
    #[error("parameter domain error: {0}")]
    ParamDomain(String),

    /// Config file rejected; `line` is 1-based.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    /// Solver state became non-finite.
    #[error("numerical failure at step {step}: solver state is not finite")]
    Numerical { step: usize },

    /// The self-consistent solver drifted off the operator identity
    /// (phi_avg - phi_ind) = phi_d by more than the allowed residual.
    #[error(
        "consistency failure at step {step}: |(phi_avg - phi_ind) - phi_d| = {residual:e} rad"
    )]
    Consistency { step: usize, residual: f64 },

    /// Analysis asked for structure the series does not contain
    /// (e.g. loop extraction with fewer than two voltage zero crossings).
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An operation was invoked with arguments it is not defined for.
    #[error("usage error: {0}")]
    Usage(String),

    /// One or more `--verify` invariant checks failed.
    #[error("self-check failure:\n{0}")]
    SelfCheck(String),

    /// A filesystem operation failed on a specific path.
    #[error("{path}: {source}")]
    FileAccess {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl QmemError {
    /// Process exit code for the CLI: 1 config/usage, 2 numerical, 3 failed self-check.
    pub fn exit_code(&self) -> i32 {
        match self {
            QmemError::Numerical { .. } | QmemError::Consistency { .. } => 2,
            QmemError::SelfCheck(_) => 3,
            _ => 1,
        }
    }
}
