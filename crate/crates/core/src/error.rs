use thiserror::Error;

/// Errors produced by the KP toolkit.
#[derive(Debug, Error)]
pub enum KpError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// An operation was evaluated where a symbol is singular (usually ξ = 0).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical blow-up at t = {t}: {detail}")]
    BlowUp { t: f64, detail: String },

    #[error("incompatible rescaling: {0}")]
    Incompatible(String),

    #[error("initial data norm {norm:e} exceeds smallness threshold {threshold:e}")]
    DataTooLarge { norm: f64, threshold: f64 },

    #[error("resolution too coarse: {0}")]
    TooCoarse(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown report schema: {0}")]
    UnknownSchema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KpError>;
