//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Frequency grid construction or validation failed.
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    /// Two responses were combined that do not share the same grid.
    #[error("frequency grids differ: {0}")]
    GridMismatch(String),

    /// Two responses were combined across dq/pn domains.
    #[error("domain mismatch: expected {expected}, got {got}")]
    DomainMismatch { expected: String, got: String },

    /// A local-frame model was used where a global one is required (or the
    /// reverse). Mixing frames silently is the bug this crate exists to
    /// prevent, so it is always a hard error.
    #[error("reference frame mismatch: {0}")]
    FrameMismatch(String),

    /// Response kinds are incompatible for the requested operation.
    #[error("kind mismatch: {0}")]
    KindMismatch(String),

    /// A matrix was numerically singular at some grid point.
    #[error("singular matrix at {freq_hz} Hz (|det| = {det_mag:.3e})")]
    Singular { freq_hz: f64, det_mag: f64 },

    /// A computed value was NaN or infinite.
    #[error("non-finite value at {freq_hz} Hz in {context}")]
    NonFinite { freq_hz: f64, context: String },

    /// Angle or other scalar input failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Network configuration was syntactically or semantically invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Network graph is disconnected, non-radial, or otherwise unusable.
    #[error("topology error: {0}")]
    Topology(String),

    /// The fundamental-frequency flow iteration failed.
    #[error("flow solve failed: {0}")]
    Flow(String),

    /// Time-domain simulation failed or measured data was unusable.
    #[error("simulation error: {0}")]
    Sim(String),

    /// CSV payload could not be parsed.
    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
