//! Reference-frame rotation and the mirrored-sequence transform.
//!
//! A component's impedance matrix is natively expressed with its d-axis on
//! its own terminal voltage (a *local* frame). System-level analysis needs
//! every matrix expressed against one network-wide angle origin (the
//! *global* frame). The two are related by a similarity transform with a
//! rotation matrix, evaluated here for both the dq and pn representations.
//!
//! Mirror-frequency-decoupled (MFD) matrices — dq-symmetric, equivalently
//! pn-diagonal — commute with every rotation, so alignment can relabel them
//! without touching the numbers. [`align_to_global`] implements that
//! shortcut.

use num_complex::Complex64;
use std::ops::Neg;

use crate::error::CoreError;
use crate::freqresp::{Domain, Frame, FrequencyResponse, Mat2};
use crate::Result;

/// Default relative MFD tolerance for analytically generated models.
pub const MFD_TOL_ANALYTIC: f64 = 1e-6;

/// Default relative MFD tolerance for sweep-measured data, which carries a
/// noise floor several orders above analytic rounding.
pub const MFD_TOL_MEASURED: f64 = 1e-2;

/// Angle between a component's local reference frame and the global frame,
/// in radians, normalized to (−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceAngle {
    theta: f64,
}

impl ReferenceAngle {
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "reference angle must be finite, got {radians}"
            )));
        }
        Ok(Self {
            theta: normalize_angle(radians),
        })
    }

    pub fn from_degrees(degrees: f64) -> Result<Self> {
        Self::new(degrees.to_radians())
    }

    pub fn zero() -> Self {
        Self { theta: 0.0 }
    }

    pub fn radians(&self) -> f64 {
        self.theta
    }

    pub fn degrees(&self) -> f64 {
        self.theta.to_degrees()
    }
}

impl Neg for ReferenceAngle {
    type Output = ReferenceAngle;
    fn neg(self) -> ReferenceAngle {
        ReferenceAngle {
            theta: normalize_angle(-self.theta),
        }
    }
}

fn normalize_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut t = theta.rem_euclid(two_pi);
    if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}

/// Rotation matrix for dq-domain alignment:
/// `[[cos θ, sin θ], [−sin θ, cos θ]]`.
pub fn dq_rotation(theta: ReferenceAngle) -> Mat2 {
    let (s, c) = theta.radians().sin_cos();
    Mat2::from_real(c, s, -s, c)
}

/// Rotation matrix for pn-domain alignment: `diag(e^{jθ}, e^{−jθ})`.
pub fn pn_rotation(theta: ReferenceAngle) -> Mat2 {
    let e = Complex64::from_polar(1.0, theta.radians());
    Mat2::diag(e, e.conj())
}

/// Change-of-basis matrix taking a dq matrix to its pn representation.
///
/// The normalization and row signs are fixed so that
/// `pn_rotation(θ) == dq_pn_basis() · dq_rotation(θ) · dq_pn_basis_inv()`
/// holds exactly for every θ; golden files depend on this specific choice.
pub fn dq_pn_basis() -> Mat2 {
    let half = Complex64::new(0.5, 0.0);
    let mjh = Complex64::new(0.0, -0.5);
    Mat2::new(half, mjh, half, -mjh)
}

/// Inverse of [`dq_pn_basis`]: `[[1, 1], [j, −j]]`.
pub fn dq_pn_basis_inv() -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    let j = Complex64::new(0.0, 1.0);
    Mat2::new(one, one, j, -j)
}

fn require_local(resp: &FrequencyResponse, op: &str) -> Result<()> {
    match resp.frame() {
        Frame::Local(_) => Ok(()),
        Frame::Global => Err(CoreError::FrameMismatch(format!(
            "{op} requires a local-frame model; input is already global \
             (rotating twice is almost certainly a bug)"
        ))),
    }
}

fn require_domain(resp: &FrequencyResponse, want: Domain, op: &str) -> Result<()> {
    if resp.domain() != want {
        return Err(CoreError::DomainMismatch {
            expected: want.to_string(),
            got: format!("{} (in {op})", resp.domain()),
        });
    }
    Ok(())
}

/// Rotates a local dq-domain response into the global frame:
/// pointwise `T(θ) · Z · T(θ)⁻¹` with `T` from [`dq_rotation`].
///
/// A zero angle is a true no-op on the numbers (only the frame tag changes),
/// which keeps no-load pipelines bit-identical to unrotated ones.
pub fn rotate_dq(resp: &FrequencyResponse, theta: ReferenceAngle) -> Result<FrequencyResponse> {
    require_domain(resp, Domain::Dq, "rotate_dq")?;
    require_local(resp, "rotate_dq")?;
    if theta.radians() == 0.0 {
        return Ok(resp.clone().with_frame(Frame::Global));
    }
    let t = dq_rotation(theta);
    let t_inv = dq_rotation(-theta);
    Ok(resp.map(|m| t * m * t_inv).with_frame(Frame::Global))
}

/// Rotates a local pn-domain response into the global frame.
///
/// Only the off-diagonal angles move: entry 12 picks up `e^{j2θ}`, entry 21
/// `e^{−j2θ}`. The diagonal entries are copied, not recomputed, so they stay
/// bit-identical by construction.
pub fn rotate_pn(resp: &FrequencyResponse, theta: ReferenceAngle) -> Result<FrequencyResponse> {
    require_domain(resp, Domain::Pn, "rotate_pn")?;
    require_local(resp, "rotate_pn")?;
    if theta.radians() == 0.0 {
        return Ok(resp.clone().with_frame(Frame::Global));
    }
    let twist = Complex64::from_polar(1.0, 2.0 * theta.radians());
    Ok(resp
        .map(|m| Mat2::new(m.m11, m.m12 * twist, m.m21 * twist.conj(), m.m22))
        .with_frame(Frame::Global))
}

/// Similarity transform from dq to pn: pointwise `A · Z · A⁻¹` with `A` from
/// [`dq_pn_basis`]. Frame and kind carry over unchanged.
pub fn dq_to_pn(resp: &FrequencyResponse) -> Result<FrequencyResponse> {
    require_domain(resp, Domain::Dq, "dq_to_pn")?;
    let a = dq_pn_basis();
    let a_inv = dq_pn_basis_inv();
    let mapped = resp.map(|m| a * m * a_inv);
    FrequencyResponse::new(
        mapped.grid().clone(),
        mapped.values().to_vec(),
        Domain::Pn,
        mapped.frame().clone(),
        mapped.kind(),
    )
}

/// Inverse of [`dq_to_pn`].
pub fn pn_to_dq(resp: &FrequencyResponse) -> Result<FrequencyResponse> {
    require_domain(resp, Domain::Pn, "pn_to_dq")?;
    let a = dq_pn_basis();
    let a_inv = dq_pn_basis_inv();
    let mapped = resp.map(|m| a_inv * m * a);
    FrequencyResponse::new(
        mapped.grid().clone(),
        mapped.values().to_vec(),
        Domain::Dq,
        mapped.frame().clone(),
        mapped.kind(),
    )
}

/// Tests whether a response is mirror-frequency decoupled.
///
/// Per grid point, against `tol` times the local Frobenius norm:
/// in dq, `|Z_dd − Z_qq|` and `|Z_dq + Z_qd|` must vanish; in pn, both
/// off-diagonal magnitudes must vanish. Such matrices commute with every
/// rotation, so they are invariant to the choice of reference frame.
pub fn is_mfd(resp: &FrequencyResponse, tol: f64) -> bool {
    resp.values().iter().all(|m| {
        let scale = tol * m.frobenius_norm();
        match resp.domain() {
            Domain::Dq => (m.m11 - m.m22).norm() <= scale && (m.m12 + m.m21).norm() <= scale,
            Domain::Pn => m.m12.norm() <= scale && m.m21.norm() <= scale,
        }
    })
}

/// Expresses a local-frame model in the global frame.
///
/// MFD models are relabeled without numeric change; everything else is
/// dispatched to the rotation matching its domain. A zero angle is likewise
/// a pure relabel.
pub fn align_to_global(
    resp: &FrequencyResponse,
    theta: ReferenceAngle,
    tol_mfd: f64,
) -> Result<FrequencyResponse> {
    require_local(resp, "align_to_global")?;
    if theta.radians() == 0.0 || is_mfd(resp, tol_mfd) {
        return Ok(resp.clone().with_frame(Frame::Global));
    }
    match resp.domain() {
        Domain::Dq => rotate_dq(resp, theta),
        Domain::Pn => rotate_pn(resp, theta),
    }
}
