use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {index:?} out of range 1..={modes}")]
    IndexOutOfRange { index: Vec<usize>, modes: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("certificate unavailable: {0}")]
    CertificateUnavailable(String),

    #[error("degenerate certificate: R = {radius} exceeds R* = 0, entering time undefined")]
    DegenerateCertificate { radius: f64 },

    #[error("instability at t = {t}: state norm {norm:e} exceeds divergence guard")]
    Instability { t: f64, norm: f64 },

    #[error("decomposition drift {drift:e} at t = {t} exceeds consistency tolerance")]
    Consistency { t: f64, drift: f64 },

    #[error("insufficient data: need at least {needed} usable points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("semidistance to an empty set is undefined")]
    EmptySet,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
