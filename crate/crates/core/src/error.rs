//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HeeError>;

#[derive(Debug, Error)]
pub enum HeeError {
    /// A natural parameter left the supported range (|η| ≤ 50). Reported at
    /// the first place the violation is attributable to θ.
    #[error("natural parameter out of range at layer {layer}, unit {unit}: eta = {eta}")]
    EtaOutOfRange { layer: usize, unit: usize, eta: f64 },

    /// A quadrature integrand overflowed or produced a non-finite value.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// A chain state became non-finite; usually means dt is too large.
    #[error("non-finite state at step {step} ({what}); reduce dt")]
    NonFiniteState { step: u64, what: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Held-out diagnostic energy blew past the divergence guard.
    #[error("training diverged: held-out energy {current:.4} exceeded guard {threshold:.4} (initial {initial:.4})")]
    Diverged { initial: f64, current: f64, threshold: f64 },

    #[error("Hessian is numerically singular")]
    SingularHessian,

    #[error("bad IDX magic: expected {expected:#010x}, got {got:#010x}")]
    BadMagic { expected: u32, got: u32 },

    #[error("truncated IDX file: {0}")]
    TruncatedFile(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
