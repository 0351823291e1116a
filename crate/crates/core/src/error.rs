use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("density is singular at abscissa {0}")]
    SingularAbscissa(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e}, clip tolerance {clip:e})")]
    CovarianceNotPsd { min_eigenvalue: f64, clip: f64 },

    #[error("eigensolver did not converge (worst residual {worst_residual:e})")]
    EigDidNotConverge { worst_residual: f64 },

    #[error("spectral window [{lo}, {hi}) contains no eigenvalues")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("root bracket [{lo}, {hi}] does not contain a sign change")]
    RootBracket { lo: f64, hi: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidParameter(msg.into())
}
