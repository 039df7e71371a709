//! 2×2 complex matrix algebra over shared frequency grids.
//!
//! Everything downstream (frame rotation, network aggregation, Nyquist
//! analysis) is pointwise matrix arithmetic on [`FrequencyResponse`] values.
//! Binary operations demand an exactly equal grid, domain, and frame; there
//! is deliberately no implicit interpolation or frame coercion.

mod grid;
mod io;
mod matrix;
mod response;

pub use grid::FrequencyGrid;
pub use io::{read_csv, read_csv_file, write_csv, write_csv_file};
pub use matrix::Mat2;
pub use response::{eval_rl_branch, Domain, Frame, FrequencyResponse, Kind};

/// Determinant magnitude below which a matrix is treated as singular.
///
/// Far below any physical impedance scale in the bundled case studies
/// (the per-unit base there is a few ohms), so a trip means a genuine
/// degeneracy rather than a small value.
pub const SINGULARITY_THRESHOLD: f64 = 1e-30;
