//! Small-signal terminal impedance of a current-controlled, PLL-synchronized
//! grid-tied converter.
//!
//! The modeled power stage is a two-level averaged bridge behind a single
//! converter inductance. The control structure, all in the converter's own
//! PLL frame:
//!
//! * current PI `H_c(s) = k_p + k_i/s` (gains in p.u./A, scaled by `V_dc/2`
//!   to volts per ampere at the modulator),
//! * decoupling feed-forward `±ω₁L_conv` on the measured currents,
//! * terminal-voltage feed-forward through the measurement filter `G_v`,
//! * first-order measurement filters `G_i = G_v = 1/(1 + τs)` applied to the
//!   PLL-frame signals,
//! * synchronous-reference-frame PLL: PI on the filtered q-axis voltage
//!   driving the frame angle,
//! * optional computation delay as a second-order Padé approximant.
//!
//! # Linearization
//!
//! Small-signal quantities live in the steady local frame (d-axis on the
//! unperturbed terminal voltage, magnitude `V₀`, steady current
//! `Ī = (I_d, I_q)`). With `J = [[0,−1],[1,0]]` (the 90° operator), the
//! blocks are
//!
//! ```text
//! plant:       Δe − Δv = Z_L Δi,          Z_L = sL·I + ω₁L·J
//! PLL frame:   Δv_pll = Δv − J V̄ Δδ,      Δi_pll = Δi − J Ī Δδ
//! PLL:         Δδ = G_pll(s) Δv_q,        G_pll = H_pll G_v / (s + V₀ H_pll G_v)
//! controller:  Δu = G_v Δv_pll·(ff) + (ω₁L J − K_pi I) G_i Δi_pll
//! modulation:  Δe = G_del (Δu + J ū Δδ),  ū = V̄ + ω₁L J Ī
//! ```
//!
//! Eliminating Δδ, Δu, Δe gives `N(s) Δv = M(s) Δi` with
//!
//! ```text
//! M = (sL + G_del G_i K_pi)·I + ω₁L(1 − G_del G_i)·J
//! N = (G_del G_v − 1)·I + G_del G_pll · W e_qᵀ
//! W = (1 − G_v) J V̄ + ω₁L (G_i − 1) Ī + K_pi G_i J Ī
//! ```
//!
//! and the terminal impedance in the load convention (current positive into
//! the converter) is `Z = −N⁻¹ M`. With the PLL path removed, `N` collapses
//! to a scalar multiple of the identity and `M` is of the form `aI + bJ`, so
//! the model is mirror-frequency decoupled; the rank-one `W e_qᵀ` term is
//! exactly the PLL's mirror-frequency coupling.

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::CoreError;
use crate::frames::ReferenceAngle;
use crate::freqresp::{Domain, Frame, FrequencyGrid, FrequencyResponse, Kind, Mat2};
use crate::Result;

/// Controller and power-stage constants of one converter.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverterParams {
    /// Current PI proportional gain, p.u./A.
    pub kp: f64,
    /// Current PI integral gain, p.u./(A·s).
    pub ki: f64,
    /// PLL PI proportional gain, rad/(V·s).
    pub kp_pll: f64,
    /// PLL PI integral gain, rad/(V·s²).
    pub ki_pll: f64,
    /// DC-link voltage, V.
    pub vdc: f64,
    /// Converter inductance, H.
    pub l_conv: f64,
    /// Measurement filter time constant for both G_i and G_v, s.
    pub filter_tau: f64,
    /// Fundamental frequency, Hz.
    pub f_n: f64,
    /// Computation delay, s. Zero disables the delay block.
    #[serde(default)]
    pub delay_td: f64,
}

impl ConverterParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("kp", self.kp),
            ("ki", self.ki),
            ("kp_pll", self.kp_pll),
            ("ki_pll", self.ki_pll),
            ("filter_tau", self.filter_tau),
            ("delay_td", self.delay_td),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(CoreError::InvalidParameter(format!(
                    "converter parameter {name} must be finite and ≥ 0, got {v}"
                )));
            }
        }
        let positive = [
            ("vdc", self.vdc),
            ("l_conv", self.l_conv),
            ("f_n", self.f_n),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(CoreError::InvalidParameter(format!(
                    "converter parameter {name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Fundamental angular frequency, rad/s.
    pub fn omega1(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f_n
    }

    /// Current PI gains referred to the modulator output, V/A and V/(A·s).
    pub fn kp_volts(&self) -> f64 {
        self.kp * self.vdc / 2.0
    }

    pub fn ki_volts(&self) -> f64 {
        self.ki * self.vdc / 2.0
    }
}

/// Steady-state operating point of one converter.
///
/// Set-points are in the converter's own PLL-aligned frame; the terminal
/// voltage phasor is in the global frame and fixes the frame angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// d-axis current set-point, A.
    pub i_d: f64,
    /// q-axis current set-point, A.
    pub i_q: f64,
    /// Terminal fundamental voltage phasor (global frame), V.
    pub v_t: Complex64,
    /// Frame angle, equal to `arg(v_t)` by construction.
    pub theta: ReferenceAngle,
}

impl OperatingPoint {
    /// Builds an operating point; `theta` is derived from the phasor so the
    /// two can never disagree.
    pub fn new(i_d: f64, i_q: f64, v_t: Complex64) -> Result<Self> {
        if !(i_d.is_finite() && i_q.is_finite() && v_t.re.is_finite() && v_t.im.is_finite()) {
            return Err(CoreError::InvalidParameter(
                "operating point must be finite".into(),
            ));
        }
        if v_t.norm() == 0.0 {
            return Err(CoreError::InvalidParameter(
                "terminal voltage magnitude must be nonzero".into(),
            ));
        }
        Ok(Self {
            i_d,
            i_q,
            v_t,
            theta: ReferenceAngle::new(v_t.arg())?,
        })
    }

    /// Terminal voltage magnitude `V₀`, V.
    pub fn v_mag(&self) -> f64 {
        self.v_t.norm()
    }
}

/// Scalar transfer-function blocks evaluated at one frequency.
struct Blocks {
    /// Current PI in volts per ampere, `(k_p + k_i/s)·V_dc/2`.
    k_pi: Complex64,
    /// Measurement filters, `1/(1 + τs)`.
    g_f: Complex64,
    /// Closed-loop PLL response, rad per volt of q-axis voltage.
    g_pll: Complex64,
    /// Delay block, 1 when `delay_td == 0`.
    g_del: Complex64,
}

fn blocks_at(p: &ConverterParams, v0: f64, s: Complex64) -> Blocks {
    let k_pi = Complex64::new(p.kp_volts(), 0.0) + p.ki_volts() / s;
    let g_f = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) + p.filter_tau * s);
    let h_pll = Complex64::new(p.kp_pll, 0.0) + p.ki_pll / s;
    let g_pll = if p.kp_pll == 0.0 && p.ki_pll == 0.0 {
        Complex64::ZERO
    } else {
        h_pll * g_f / (s + v0 * h_pll * g_f)
    };
    Blocks {
        k_pi,
        g_f,
        g_pll,
        g_del: pade2_delay(p.delay_td, s),
    }
}

/// Second-order Padé approximant of `e^{−sT}`; exact unity for `T = 0`.
fn pade2_delay(t_d: f64, s: Complex64) -> Complex64 {
    if t_d == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let st = s * t_d;
    let st2 = st * st;
    let one = Complex64::new(1.0, 0.0);
    (one - st * 0.5 + st2 / 12.0) / (one + st * 0.5 + st2 / 12.0)
}

/// Closed-loop PLL small-signal response Δθ_pll per Δv_q, rad/V:
/// `H_pll(s)·G_v(s) / (s + V₀·H_pll(s)·G_v(s))`.
///
/// At DC the magnitude tends to `1/V₀` — the PLL fully absorbs a static
/// q-axis offset into its angle.
pub fn pll_small_signal(
    p: &ConverterParams,
    op: &OperatingPoint,
    grid: &FrequencyGrid,
) -> Result<Vec<Complex64>> {
    p.validate()?;
    let v0 = op.v_mag();
    Ok(grid
        .iter()
        .map(|f| {
            let s = Complex64::new(0.0, 2.0 * std::f64::consts::PI * f);
            blocks_at(p, v0, s).g_pll
        })
        .collect())
}

/// Local-frame dq terminal impedance of the converter at an operating point.
///
/// The returned response maps small-signal terminal voltage to small-signal
/// terminal current drawn *into* the converter (load convention). The frame
/// tag is local: two converters with identical parameters and set-points have
/// identical models regardless of where they sit in the network; the node
/// angle enters only later, at the alignment step.
pub fn linearize_converter(
    p: &ConverterParams,
    op: &OperatingPoint,
    grid: &FrequencyGrid,
) -> Result<FrequencyResponse> {
    p.validate()?;
    let v0 = op.v_mag();
    let w1 = p.omega1();
    let l = p.l_conv;

    let mut values = Vec::with_capacity(grid.len());
    for f in grid.iter() {
        let s = Complex64::new(0.0, 2.0 * std::f64::consts::PI * f);
        let b = blocks_at(p, v0, s);
        let one = Complex64::new(1.0, 0.0);

        // M = (sL + G_del·G_i·K_pi)·I + ω₁L(1 − G_del·G_i)·J
        let m_diag = s * l + b.g_del * b.g_f * b.k_pi;
        let m_cross = w1 * l * (one - b.g_del * b.g_f);
        let m = Mat2::new(m_diag, -m_cross, m_cross, m_diag);

        // W = (1 − G_v)·J·V̄ + ω₁L(G_i − 1)·Ī + K_pi·G_i·J·Ī
        // with V̄ = (V₀, 0), Ī = (I_d, I_q), J·V̄ = (0, V₀), J·Ī = (−I_q, I_d).
        let w_d = w1 * l * (b.g_f - one) * op.i_d - b.k_pi * b.g_f * op.i_q;
        let w_q = (one - b.g_f) * v0 + w1 * l * (b.g_f - one) * op.i_q + b.k_pi * b.g_f * op.i_d;

        // N = (G_del·G_v − 1)·I + G_del·G_pll·W·e_qᵀ
        let n_diag = b.g_del * b.g_f - one;
        let pll_gain = b.g_del * b.g_pll;
        let n = Mat2::new(
            n_diag,
            pll_gain * w_d,
            Complex64::ZERO,
            n_diag + pll_gain * w_q,
        );

        let n_inv = n
            .try_inverse(crate::freqresp::SINGULARITY_THRESHOLD)
            .ok_or(CoreError::Singular {
                freq_hz: f,
                det_mag: n.det().norm(),
            })?;
        let z = -(n_inv * m);
        if !z.is_finite() {
            return Err(CoreError::NonFinite {
                freq_hz: f,
                context: "converter impedance".into(),
            });
        }
        values.push(z);
    }

    FrequencyResponse::new(
        grid.clone(),
        values,
        Domain::Dq,
        Frame::Local("terminal".into()),
        Kind::Impedance,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames;
    use std::f64::consts::PI;

    /// Case-study converter constants used across the test suite.
    pub(crate) fn test_params() -> ConverterParams {
        ConverterParams {
            kp: 6.43e-4,
            ki: 0.161,
            kp_pll: 0.00758,
            ki_pll: 0.152,
            vdc: 1127.0,
            l_conv: 6.93e-3,
            filter_tau: 5e-4,
            f_n: 50.0,
            delay_td: 0.0,
        }
    }

    fn test_op() -> OperatingPoint {
        // Phase voltage of a 6.6 kV line-to-line system, small angle.
        let v = Complex64::from_polar(6600.0 / 3f64.sqrt(), 0.97f64.to_radians());
        OperatingPoint::new(100.0, 33.0, v).unwrap()
    }

    fn grid() -> FrequencyGrid {
        FrequencyGrid::log_spaced(1.0, 1000.0, 21).unwrap()
    }

    #[test]
    fn operating_point_theta_tracks_phasor() {
        let op = test_op();
        assert!((op.theta.radians() - op.v_t.arg()).abs() < 1e-12);
        assert!(OperatingPoint::new(1.0, 0.0, Complex64::ZERO).is_err());
    }

    #[test]
    fn frozen_pll_model_is_mfd() {
        let mut p = test_params();
        p.kp_pll = 0.0;
        p.ki_pll = 0.0;
        let z = linearize_converter(&p, &test_op(), &grid()).unwrap();
        assert!(frames::is_mfd(&z, 1e-9));
    }

    #[test]
    fn active_pll_model_is_mirror_frequency_coupled() {
        let z = linearize_converter(&test_params(), &test_op(), &grid()).unwrap();
        assert!(!frames::is_mfd(&z, frames::MFD_TOL_ANALYTIC));
    }

    #[test]
    fn high_frequency_asymptote_is_the_inductor() {
        // Above the control bandwidth the converter inductance dominates:
        // |Z| → ωL within 5%.
        let p = test_params();
        let g = FrequencyGrid::log_spaced(1000.0, 5000.0, 5).unwrap();
        let z = linearize_converter(&p, &test_op(), &g).unwrap();
        for (f, m) in z.iter() {
            let w = 2.0 * PI * f;
            let expect = (w * w + p.omega1() * p.omega1()).sqrt() * p.l_conv;
            let got = (m.m11.norm_sqr() + m.m21.norm_sqr()).sqrt();
            assert!(
                (got / expect - 1.0).abs() < 0.05,
                "at {f} Hz |Z| = {got}, inductor = {expect}"
            );
        }
    }

    #[test]
    fn local_model_ignores_node_angle() {
        // Same set-points, different terminal angles: identical local models.
        let p = test_params();
        let v1 = Complex64::from_polar(3810.5, 0.0);
        let v2 = Complex64::from_polar(3810.5, 0.6);
        let z1 = linearize_converter(&p, &OperatingPoint::new(80.0, 20.0, v1).unwrap(), &grid())
            .unwrap();
        let z2 = linearize_converter(&p, &OperatingPoint::new(80.0, 20.0, v2).unwrap(), &grid())
            .unwrap();
        assert_eq!(z1.values(), z2.values());
    }

    #[test]
    fn low_frequency_q_axis_acts_as_negative_resistance() {
        // Classic PLL signature: well inside the PLL bandwidth the q-axis
        // self-impedance approaches −V₀/I_d.
        let p = test_params();
        let op = test_op();
        let g = FrequencyGrid::new(vec![0.01, 0.02]).unwrap();
        let z = linearize_converter(&p, &op, &g).unwrap();
        let zqq = z.values()[0].m22;
        let expect = -op.v_mag() / op.i_d;
        assert!(
            (zqq.re / expect - 1.0).abs() < 0.05 && zqq.im.abs() < 0.2 * expect.abs(),
            "Z_qq = {zqq}, expected ≈ {expect}"
        );
    }

    #[test]
    fn pll_response_dead_when_gains_zero() {
        let mut p = test_params();
        p.kp_pll = 0.0;
        p.ki_pll = 0.0;
        for g in pll_small_signal(&p, &test_op(), &grid()).unwrap() {
            assert_eq!(g, Complex64::ZERO);
        }
    }

    #[test]
    fn pll_dc_gain_is_inverse_voltage() {
        let p = test_params();
        let op = test_op();
        let g = FrequencyGrid::new(vec![0.01, 0.02]).unwrap();
        let resp = pll_small_signal(&p, &op, &g).unwrap();
        let expect = 1.0 / op.v_mag();
        assert!(
            (resp[0].norm() / expect - 1.0).abs() < 1e-3,
            "PLL DC magnitude {} vs 1/V₀ = {expect}",
            resp[0].norm()
        );
    }

    #[test]
    fn delay_block_is_unity_at_dc_and_lags() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(pade2_delay(0.0, Complex64::new(0.0, 100.0)), one);
        let s = Complex64::new(0.0, 2.0 * PI * 50.0);
        let g = pade2_delay(1e-4, s);
        assert!((g.norm() - 1.0).abs() < 1e-9, "Padé is all-pass");
        let expect_phase = -2.0 * PI * 50.0 * 1e-4;
        assert!((g.arg() - expect_phase).abs() < 1e-4);
    }

    #[test]
    fn parameter_validation() {
        let mut p = test_params();
        p.l_conv = 0.0;
        assert!(p.validate().is_err());
        let mut p = test_params();
        p.ki = -1.0;
        assert!(p.validate().is_err());
    }
}
