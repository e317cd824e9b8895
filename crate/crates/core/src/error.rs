use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate mass matrix (det = {det:e})")]
    DegenerateMass { det: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {samples} samples for {clusters} clusters")]
    InsufficientData { samples: usize, clusters: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("run diverged at step {step} (t = {time} s): |qdot| = {speed:e}")]
    Diverged { step: usize, time: f64, speed: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
