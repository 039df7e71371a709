//! Perturbation-injection frequency sweep.
//!
//! Per grid frequency, two independent runs inject a small series voltage at
//! the interface — once on the d axis, once on the q axis. After settling,
//! the perturbation-frequency component of interface voltage and current is
//! extracted by single-bin DFT over an exact integer number of samples and
//! cycles (the frequency is snapped to the sample raster so the window is
//! leakage-free by construction). The two response pairs then solve
//! `[Δv¹ Δv²] = Z · [Δi¹ Δi²]` for the 2×2 impedance.
//!
//! Each point carries diagnostics: disagreement between two consecutive
//! measurement windows (settling check) and the conditioning of the
//! injection pair.

use num_complex::Complex64;
use rayon::prelude::*;

use super::dynamics::{Dynamics, Injection, SimConfig, Simulator};
use crate::error::CoreError;
use crate::freqresp::{Domain, Frame, FrequencyGrid, FrequencyResponse, Kind, Mat2};
use crate::Result;

/// Measured impedance with per-frequency quality diagnostics.
#[derive(Debug, Clone)]
pub struct MeasuredImpedance {
    /// The measured response (dq domain; the injection node's frame is the
    /// global frame by construction).
    pub response: FrequencyResponse,
    pub diagnostics: Vec<PointDiagnostics>,
}

#[derive(Debug, Clone, Copy)]
pub struct PointDiagnostics {
    pub freq_hz: f64,
    /// Frequency actually measured after snapping to the sample raster.
    pub snapped_freq_hz: f64,
    /// Worst relative window-to-window disagreement across channels.
    pub drift: f64,
    /// Condition number of the 2×2 injected-current matrix.
    pub condition: f64,
}

/// Log-spaced grid that keeps clear of the fundamental.
///
/// Points within 1 Hz of `f_n` are moved to `f_n ± 1` so the perturbation
/// bin never sits on top of it.
pub fn sweep_safe_grid(f_min: f64, f_max: f64, n: usize, f_n: f64) -> Result<FrequencyGrid> {
    let base = FrequencyGrid::log_spaced(f_min, f_max, n)?;
    let nudged: Vec<f64> = base
        .iter()
        .map(|f| {
            if (f - f_n).abs() < 1.0 {
                if f <= f_n {
                    f_n - 1.0
                } else {
                    f_n + 1.0
                }
            } else {
                f
            }
        })
        .collect();
    FrequencyGrid::new(nudged)
}

/// Runs the full sweep. Frequencies are measured one at a time (no
/// multitone); distinct points run in parallel.
pub fn sweep_impedance(
    dynamics: &Dynamics,
    cfg: &SimConfig,
    grid: &FrequencyGrid,
) -> Result<MeasuredImpedance> {
    cfg.validate()?;
    if let Some(node) = &cfg.injection_node {
        if node != dynamics.interface_name() {
            return Err(CoreError::Sim(format!(
                "series injection is only supported at the interface `{}`, not `{node}`",
                dynamics.interface_name()
            )));
        }
    }
    let f_max = grid.points()[grid.len() - 1];
    let dt_required = 1.0 / (20.0 * f_max);
    if cfg.dt > dt_required {
        return Err(CoreError::Sim(format!(
            "dt = {} undersamples the top frequency {f_max} Hz; need dt ≤ {dt_required:.3e} \
             (20 steps per period)",
            cfg.dt
        )));
    }

    let points: Vec<(Mat2, PointDiagnostics)> = grid
        .points()
        .par_iter()
        .map(|&f| measure_one(dynamics, cfg, f))
        .collect::<Result<Vec<_>>>()?;

    let values: Vec<Mat2> = points.iter().map(|(m, _)| *m).collect();
    let diagnostics: Vec<PointDiagnostics> = points.iter().map(|(_, d)| *d).collect();
    let response = FrequencyResponse::new(
        grid.clone(),
        values,
        Domain::Dq,
        Frame::Global,
        Kind::Impedance,
    )?;
    Ok(MeasuredImpedance {
        response,
        diagnostics,
    })
}

/// Measured response transformed to the pn domain.
pub fn measure_pn(measured: &MeasuredImpedance) -> Result<FrequencyResponse> {
    crate::frames::dq_to_pn(&measured.response)
}

/// One frequency point: two injection runs and the 2×2 solve.
fn measure_one(dynamics: &Dynamics, cfg: &SimConfig, f: f64) -> Result<(Mat2, PointDiagnostics)> {
    // Snap the frequency so one measurement window is an exact number of
    // samples covering an exact number of cycles.
    let window_samples = (cfg.n_cycles_measure as f64 / (f * cfg.dt)).round() as usize;
    if window_samples < 20 * cfg.n_cycles_measure {
        return Err(CoreError::Sim(format!(
            "window for {f} Hz has {window_samples} samples; dt too coarse"
        )));
    }
    let f_snapped = cfg.n_cycles_measure as f64 / (window_samples as f64 * cfg.dt);
    let amp = cfg.amp_rel * dynamics.v_phase;

    let run = |axis: usize| -> Result<([Complex64; 4], f64)> {
        let inj = Injection::Series {
            axis,
            amp,
            freq_hz: f_snapped,
        };
        let mut sim = Simulator::new(dynamics, cfg.dt, cfg.integrator, inj);
        let settle_steps = (cfg.t_settle / cfg.dt).ceil() as usize;
        for k in 0..settle_steps {
            sim.step();
            if k % 2000 == 0 && !sim.state_inf_norm().is_finite() {
                return Err(CoreError::Sim(format!(
                    "simulation diverged during settling at {f_snapped} Hz"
                )));
            }
        }

        let steady = dynamics.steady_interface();
        let w = 2.0 * std::f64::consts::PI * f_snapped;
        // Two consecutive windows; the second is the result, the first only
        // feeds the drift diagnostic.
        let mut windows = [[Complex64::ZERO; 4]; 2];
        for window in windows.iter_mut() {
            let mut acc = [Complex64::ZERO; 4];
            for _ in 0..window_samples {
                let s = sim.step();
                let phasor = Complex64::from_polar(1.0, -w * s.t);
                acc[0] += (s.v_d - steady[0]) * phasor;
                acc[1] += (s.v_q - steady[1]) * phasor;
                acc[2] += (s.i_d - steady[2]) * phasor;
                acc[3] += (s.i_q - steady[3]) * phasor;
            }
            if !sim.state_inf_norm().is_finite() {
                return Err(CoreError::Sim(format!(
                    "simulation diverged while measuring {f_snapped} Hz"
                )));
            }
            let scale = 2.0 / window_samples as f64;
            for (dst, a) in window.iter_mut().zip(acc) {
                *dst = a * scale;
            }
        }

        // Settling check: the two windows must agree.
        let norm: f64 = windows[1].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let drift = windows[0]
            .iter()
            .zip(&windows[1])
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max)
            / norm.max(f64::MIN_POSITIVE);
        if drift > cfg.drift_tol {
            return Err(CoreError::Sim(format!(
                "transient not settled at {f_snapped} Hz: window drift {drift:.2e} \
                 exceeds {:.2e}; increase t_settle",
                cfg.drift_tol
            )));
        }
        Ok((windows[1], drift))
    };

    let (rd, drift_d) = run(0)?;
    let (rq, drift_q) = run(1)?;

    // Columns are the two runs: V = Z·I.
    let v = Mat2::new(rd[0], rq[0], rd[1], rq[1]);
    let i = Mat2::new(rd[2], rq[2], rd[3], rq[3]);
    let condition = cond2(&i);
    if !(condition < 1e6) {
        return Err(CoreError::Sim(format!(
            "injection pair is numerically dependent at {f_snapped} Hz (cond = {condition:.2e})"
        )));
    }
    let i_inv = i.try_inverse(f64::MIN_POSITIVE).ok_or_else(|| {
        CoreError::Sim(format!("zero injected current at {f_snapped} Hz"))
    })?;
    let z = v * i_inv;

    Ok((
        z,
        PointDiagnostics {
            freq_hz: f,
            snapped_freq_hz: f_snapped,
            drift: drift_d.max(drift_q),
            condition,
        },
    ))
}

/// Condition number (2-norm) of a 2×2 complex matrix via the singular values
/// of `AᴴA`.
fn cond2(a: &Mat2) -> f64 {
    // Entries of AᴴA (Hermitian, 2×2).
    let h11 = a.m11.norm_sqr() + a.m21.norm_sqr();
    let h22 = a.m12.norm_sqr() + a.m22.norm_sqr();
    let h12 = a.m11.conj() * a.m12 + a.m21.conj() * a.m22;
    let tr = h11 + h22;
    let det = (h11 * h22 - h12.norm_sqr()).max(0.0);
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let smax = (tr / 2.0 + disc).max(0.0).sqrt();
    let smin = (tr / 2.0 - disc).max(0.0).sqrt();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}
