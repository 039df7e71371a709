//! Frequency-domain impedance toolkit for multi-converter power networks.
//!
//! The crate builds small-signal terminal impedance models of grid-connected
//! voltage-source converters, expresses every model against one network-wide
//! reference frame, reduces the network to source/load equivalents by series
//! and parallel circuit rules, and judges stability with the generalized
//! Nyquist criterion. A built-in time-domain simulator measures the same
//! impedances by perturbation injection so every analytic result can be
//! cross-checked against an independent oracle.
//!
//! Module map:
//!
//! * [`freqresp`] — 2×2 complex matrix responses sampled on a shared
//!   frequency grid, plus the CSV exchange format.
//! * [`frames`] — rotation between local and global reference frames in the
//!   two-axis (dq) and mirrored-sequence (pn) representations, and the
//!   mirror-frequency-decoupling test.
//! * [`converter`] — analytic small-signal impedance of the current-controlled
//!   converter with a synchronous-reference-frame PLL.
//! * [`network`] — topology/config ingestion, fundamental-frequency flow
//!   solve, and radial series/parallel aggregation.
//! * [`simkit`] — fixed-step time-domain simulator with single-bin DFT
//!   extraction of measured impedance matrices.
//! * [`stability`] — minor loop gain, eigenloci, and the Nyquist verdict.

pub mod compare;
pub mod converter;
pub mod error;
pub mod frames;
pub mod freqresp;
pub mod network;
pub mod simkit;
pub mod stability;

pub use error::CoreError;
pub use freqresp::{Domain, Frame, FrequencyGrid, FrequencyResponse, Kind, Mat2};

/// Shorthand used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Result alias over [`CoreError`].
pub type Result<T> = std::result::Result<T, CoreError>;
