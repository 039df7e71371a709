//! Sampled 2×2 responses and the circuit-rule operations on them.

use std::fmt;

use num_complex::Complex64;

use super::{FrequencyGrid, Mat2, SINGULARITY_THRESHOLD};
use crate::error::CoreError;
use crate::Result;

/// Two-axis representation the matrix lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Rotating direct/quadrature axes.
    Dq,
    /// Mirrored-sequence pair obtained from dq by a fixed similarity
    /// transform (see `frames`).
    Pn,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Dq => write!(f, "dq"),
            Domain::Pn => write!(f, "pn"),
        }
    }
}

/// Reference frame the matrix is expressed in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    /// Aligned with the named component's own terminal voltage.
    Local(String),
    /// Aligned with the network-wide reference node.
    Global,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Local(id) => write!(f, "local:{id}"),
            Frame::Global => write!(f, "global"),
        }
    }
}

/// What the matrix maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Voltage per current.
    Impedance,
    /// Current per voltage.
    Admittance,
    /// Dimensionless product, e.g. source impedance times load admittance.
    LoopGain,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Impedance => write!(f, "impedance"),
            Kind::Admittance => write!(f, "admittance"),
            Kind::LoopGain => write!(f, "loopgain"),
        }
    }
}

/// One 2×2 complex matrix per grid point, tagged with domain, frame, and kind.
///
/// Binary operations require an identical grid (bitwise), domain, and frame;
/// any mismatch is an error rather than a silent cast.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    grid: FrequencyGrid,
    values: Vec<Mat2>,
    domain: Domain,
    frame: Frame,
    kind: Kind,
}

impl FrequencyResponse {
    pub fn new(
        grid: FrequencyGrid,
        values: Vec<Mat2>,
        domain: Domain,
        frame: Frame,
        kind: Kind,
    ) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(CoreError::InvalidGrid(format!(
                "{} grid points but {} matrix samples",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            domain,
            frame,
            kind,
        })
    }

    /// Builds a response by evaluating `f` at every grid frequency.
    pub fn from_fn(
        grid: FrequencyGrid,
        domain: Domain,
        frame: Frame,
        kind: Kind,
        mut f: impl FnMut(f64) -> Mat2,
    ) -> Self {
        let values = grid.iter().map(&mut f).collect();
        Self {
            grid,
            values,
            domain,
            frame,
            kind,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Mat2] {
        &self.values
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// Iterates `(frequency, matrix)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &Mat2)> + '_ {
        self.grid.iter().zip(self.values.iter())
    }

    /// Same data under a different frame tag. Used by the alignment step when
    /// a model is provably frame-invariant; numeric content is untouched.
    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    /// Pointwise map preserving all tags.
    pub fn map(&self, mut f: impl FnMut(Mat2) -> Mat2) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|m| f(*m)).collect(),
            domain: self.domain,
            frame: self.frame.clone(),
            kind: self.kind,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(CoreError::GridMismatch(format!(
                "{} points vs {} points (grids must be identical)",
                self.grid.len(),
                other.grid.len()
            )));
        }
        if self.domain != other.domain {
            return Err(CoreError::DomainMismatch {
                expected: self.domain.to_string(),
                got: other.domain.to_string(),
            });
        }
        if self.frame != other.frame {
            return Err(CoreError::FrameMismatch(format!(
                "{} vs {}",
                self.frame, other.frame
            )));
        }
        Ok(())
    }

    /// Series connection: pointwise sum. Both operands must be impedances.
    pub fn series(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.kind != Kind::Impedance || other.kind != Kind::Impedance {
            return Err(CoreError::KindMismatch(format!(
                "series requires impedances, got {} and {}",
                self.kind, other.kind
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| *a + *b)
            .collect();
        Self::new(
            self.grid.clone(),
            values,
            self.domain,
            self.frame.clone(),
            Kind::Impedance,
        )
    }

    /// Parallel connection: pointwise `(a⁻¹ + b⁻¹)⁻¹`.
    pub fn parallel(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.kind != Kind::Impedance || other.kind != Kind::Impedance {
            return Err(CoreError::KindMismatch(format!(
                "parallel requires impedances, got {} and {}",
                self.kind, other.kind
            )));
        }
        let mut values = Vec::with_capacity(self.values.len());
        for ((f, a), b) in self.iter().zip(&other.values) {
            let ia = invert_at(a, f)?;
            let ib = invert_at(b, f)?;
            values.push(invert_at(&(ia + ib), f)?);
        }
        Self::new(
            self.grid.clone(),
            values,
            self.domain,
            self.frame.clone(),
            Kind::Impedance,
        )
    }

    /// Pointwise inverse. Kind toggles impedance ↔ admittance.
    pub fn invert(&self) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len());
        for (f, m) in self.iter() {
            values.push(invert_at(m, f)?);
        }
        let kind = match self.kind {
            Kind::Impedance => Kind::Admittance,
            Kind::Admittance => Kind::Impedance,
            Kind::LoopGain => Kind::LoopGain,
        };
        Self::new(
            self.grid.clone(),
            values,
            self.domain,
            self.frame.clone(),
            kind,
        )
    }

    /// Pointwise matrix product `self · other`.
    ///
    /// An impedance times an admittance (either order) yields a loop gain;
    /// like kinds compose to the same kind; any other mix is a loop gain.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let kind = match (self.kind, other.kind) {
            (a, b) if a == b => a,
            _ => Kind::LoopGain,
        };
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| *a * *b)
            .collect();
        Self::new(
            self.grid.clone(),
            values,
            self.domain,
            self.frame.clone(),
            kind,
        )
    }
}

fn invert_at(m: &Mat2, freq_hz: f64) -> Result<Mat2> {
    m.try_inverse(SINGULARITY_THRESHOLD)
        .ok_or(CoreError::Singular {
            freq_hz,
            det_mag: m.det().norm(),
        })
}

/// Impedance of a series R-L branch in the rotating two-axis frame.
///
/// At each grid frequency `f` (with `s = j2πf` and `ω₁` the fundamental in
/// rad/s) the matrix is `[[R + sL, −ω₁L], [ω₁L, R + sL]]`. Passive branches
/// carry no frame dependence, so the result is tagged global.
pub fn eval_rl_branch(r: f64, l: f64, omega1: f64, grid: &FrequencyGrid) -> Result<FrequencyResponse> {
    if r < 0.0 || l < 0.0 || (r == 0.0 && l == 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "rl branch requires R ≥ 0, L ≥ 0, not both zero (R = {r}, L = {l})"
        )));
    }
    Ok(FrequencyResponse::from_fn(
        grid.clone(),
        Domain::Dq,
        Frame::Global,
        Kind::Impedance,
        |f| {
            let s = Complex64::new(0.0, 2.0 * std::f64::consts::PI * f);
            let zs = Complex64::new(r, 0.0) + s * l;
            Mat2::new(
                zs,
                Complex64::new(0.0, 0.0) - omega1 * l,
                Complex64::new(omega1 * l, 0.0),
                zs,
            )
        },
    ))
}
