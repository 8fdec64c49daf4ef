use thiserror::Error;

/// Errors raised by the solvers, checks and I/O helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver diverged at t = {t}: {reason}")]
    Divergence { t: f64, reason: String },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// Graph extraction found more than one crossing below the cap.
    #[error("curve is not a graph over {} node(s), first at x = {first_x}", nodes.len())]
    Multivalued { nodes: Vec<usize>, first_x: f64 },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
