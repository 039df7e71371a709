//! Element-wise magnitude/phase comparison of two responses.
//!
//! Used wherever an analytic model is judged against a measured one. The
//! comparison is per element and per frequency: magnitude as a ratio,
//! phase as a wrapped difference. Elements that are negligible in *both*
//! responses (below `floor_rel` times the larger Frobenius norm at that
//! frequency) are skipped — the ratio of two numbers at the noise floor
//! carries no information.

use crate::error::CoreError;
use crate::freqresp::FrequencyResponse;
use crate::Result;

/// Worst single element/frequency deviation.
#[derive(Debug, Clone, Copy)]
pub struct WorstCase {
    pub freq_hz: f64,
    /// Element label: 11, 12, 21 or 22.
    pub element: u8,
    pub value: f64,
}

/// Comparison outcome.
#[derive(Debug, Clone)]
pub struct CompareReport {
    /// Largest `||a|/|b| − 1|` over all compared entries.
    pub worst_mag: WorstCase,
    /// Largest wrapped phase difference, degrees.
    pub worst_phase: WorstCase,
    /// Entries skipped as mutually negligible.
    pub skipped: usize,
    /// Entries compared.
    pub compared: usize,
    pub tol_mag: f64,
    pub tol_phase_deg: f64,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.worst_mag.value <= self.tol_mag && self.worst_phase.value <= self.tol_phase_deg
    }

    pub fn to_report_text(&self) -> String {
        format!(
            "within_tolerance: {}\n\
             worst_mag_rel_err: {}\n\
             worst_mag_at_hz: {}\n\
             worst_mag_element: {}\n\
             worst_phase_err_deg: {}\n\
             worst_phase_at_hz: {}\n\
             worst_phase_element: {}\n\
             tol_mag_rel: {}\n\
             tol_phase_deg: {}\n\
             entries_compared: {}\n\
             entries_skipped_below_floor: {}\n",
            self.passed(),
            self.worst_mag.value,
            self.worst_mag.freq_hz,
            self.worst_mag.element,
            self.worst_phase.value,
            self.worst_phase.freq_hz,
            self.worst_phase.element,
            self.tol_mag,
            self.tol_phase_deg,
            self.compared,
            self.skipped,
        )
    }
}

/// Default relative floor below which an element is treated as absent.
pub const DEFAULT_COMPARE_FLOOR: f64 = 1e-3;

/// Compares `a` against reference `b` element-wise.
pub fn compare_responses(
    a: &FrequencyResponse,
    b: &FrequencyResponse,
    tol_mag: f64,
    tol_phase_deg: f64,
    floor_rel: f64,
) -> Result<CompareReport> {
    if a.grid() != b.grid() {
        return Err(CoreError::GridMismatch(
            "compared responses must share the grid".into(),
        ));
    }
    if a.domain() != b.domain() {
        return Err(CoreError::DomainMismatch {
            expected: b.domain().to_string(),
            got: a.domain().to_string(),
        });
    }

    let mut worst_mag = WorstCase {
        freq_hz: 0.0,
        element: 0,
        value: 0.0,
    };
    let mut worst_phase = worst_mag;
    let mut skipped = 0usize;
    let mut compared = 0usize;

    for ((f, ma), mb) in a.iter().zip(b.values()) {
        let scale = ma.frobenius_norm().max(mb.frobenius_norm());
        let floor = floor_rel * scale;
        let entries = [
            (11u8, ma.m11, mb.m11),
            (12u8, ma.m12, mb.m12),
            (21u8, ma.m21, mb.m21),
            (22u8, ma.m22, mb.m22),
        ];
        for (label, x, y) in entries {
            if x.norm() < floor && y.norm() < floor {
                skipped += 1;
                continue;
            }
            compared += 1;
            let mag_err = if y.norm() > 0.0 {
                (x.norm() / y.norm() - 1.0).abs()
            } else {
                f64::INFINITY
            };
            if mag_err > worst_mag.value {
                worst_mag = WorstCase {
                    freq_hz: f,
                    element: label,
                    value: mag_err,
                };
            }
            let dphi = wrap_deg((x.arg() - y.arg()).to_degrees()).abs();
            if dphi > worst_phase.value {
                worst_phase = WorstCase {
                    freq_hz: f,
                    element: label,
                    value: dphi,
                };
            }
        }
    }

    Ok(CompareReport {
        worst_mag,
        worst_phase,
        skipped,
        compared,
        tol_mag,
        tol_phase_deg,
    })
}

fn wrap_deg(d: f64) -> f64 {
    let mut w = d.rem_euclid(360.0);
    if w > 180.0 {
        w -= 360.0;
    }
    w
}
