use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The Schur complement of the Fisher information is too ill-conditioned to invert.
    #[error("singular sensing geometry (condition number {0:e})")]
    SingularGeometry(f64),

    /// The Cauchy-Schwarz gap in the closed-form CRB denominator closed.
    #[error("degenerate beam: {0}")]
    DegenerateBeam(String),

    #[error("convex subproblem infeasible")]
    Infeasible,

    #[error("conic solver failed: {0}")]
    Solver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
