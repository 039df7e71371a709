//! Generalized Nyquist criterion on source/load impedance equivalents.
//!
//! The minor loop gain is `L = Z_source · Z_load⁻¹` at the interface, both in
//! the global frame (the frame guard here is the module's core job: mixing a
//! local and a global model silently is exactly the mistake the rest of the
//! crate exists to prevent).
//!
//! Encirclements of −1 are counted through `det(I + L)`: the winding of that
//! scalar around the origin equals the summed winding of the eigenloci around
//! −1, and it sidesteps eigenvalue-branch pairing ambiguities entirely. The
//! positive-frequency samples are closed by conjugate reflection, which is
//! valid because dq-domain loop gains of real time-domain systems satisfy
//! `L(−jω) = conj(L(jω))`. Eigenloci are still computed (continuity-ordered)
//! for margins and plotting.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::freqresp::{Frame, FrequencyResponse, Kind, Mat2};
use crate::Result;

/// Stability verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    /// The grid is too coarse to trust the winding count.
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Stable => write!(f, "stable"),
            Verdict::Unstable => write!(f, "unstable"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Two continuity-ordered eigenvalue tracks over the grid.
#[derive(Debug, Clone)]
pub struct Eigenloci {
    pub freqs: Vec<f64>,
    pub locus1: Vec<Complex64>,
    pub locus2: Vec<Complex64>,
}

/// Nearest approach of the loci to −1.
#[derive(Debug, Clone, Copy)]
pub struct Margin {
    pub min_distance: f64,
    pub freq_hz: f64,
}

/// Full analysis output.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub verdict: Verdict,
    /// Net counterclockwise encirclements of −1 over the closed contour.
    pub encirclements: i64,
    pub rhp_poles_open_loop: usize,
    pub margin: Margin,
    pub loci: Eigenloci,
    /// Set when the verdict is inconclusive.
    pub inconclusive_reason: Option<String>,
}

impl StabilityReport {
    /// Machine-parseable `key: value` rendering.
    pub fn to_report_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict: {}", self.verdict);
        let _ = writeln!(s, "encirclements_ccw: {}", self.encirclements);
        let _ = writeln!(s, "rhp_poles_open_loop: {}", self.rhp_poles_open_loop);
        let _ = writeln!(
            s,
            "note: open-loop right-half-plane pole count defaults to 0; \
             override it if either subsystem is unstable on its own"
        );
        let _ = writeln!(s, "loop_gain_convention: z_source * y_load");
        let _ = writeln!(s, "min_distance_to_minus_one: {}", self.margin.min_distance);
        let _ = writeln!(s, "freq_at_min_distance_hz: {}", self.margin.freq_hz);
        let _ = writeln!(s, "grid_points: {}", self.loci.freqs.len());
        if let Some(reason) = &self.inconclusive_reason {
            let _ = writeln!(s, "inconclusive_reason: {reason}");
        }
        s
    }

    /// Nyquist CSV: `freq_hz,re_l1,im_l1,re_l2,im_l2`.
    pub fn to_nyquist_csv(&self) -> String {
        let mut s = String::from("freq_hz,re_l1,im_l1,re_l2,im_l2\n");
        for (i, f) in self.loci.freqs.iter().enumerate() {
            let (l1, l2) = (self.loci.locus1[i], self.loci.locus2[i]);
            let _ = writeln!(s, "{},{},{},{},{}", f, l1.re, l1.im, l2.re, l2.im);
        }
        s
    }
}

/// Minor loop gain `L = Z_source · Z_load⁻¹`, pointwise.
pub fn minor_loop_gain(
    z_source: &FrequencyResponse,
    z_load: &FrequencyResponse,
) -> Result<FrequencyResponse> {
    for (name, z) in [("source", z_source), ("load", z_load)] {
        if z.frame() != &Frame::Global {
            return Err(CoreError::FrameMismatch(format!(
                "{name} equivalent must be in the global frame, got {}",
                z.frame()
            )));
        }
        if z.kind() != Kind::Impedance {
            return Err(CoreError::KindMismatch(format!(
                "{name} equivalent must be an impedance, got {}",
                z.kind()
            )));
        }
    }
    let y_load = z_load.invert()?;
    z_source.matmul(&y_load)
}

/// Pointwise eigenvalues, paired across neighbouring frequencies by minimal
/// total displacement (exact for two points).
pub fn eigenloci(loop_gain: &FrequencyResponse) -> Eigenloci {
    let freqs: Vec<f64> = loop_gain.grid().iter().collect();
    let mut locus1 = Vec::with_capacity(freqs.len());
    let mut locus2 = Vec::with_capacity(freqs.len());
    for m in loop_gain.values() {
        let (a, b) = m.eigenvalues();
        if let (Some(&p1), Some(&p2)) = (locus1.last(), locus2.last()) {
            let keep = dist(a, p1) + dist(b, p2);
            let swap = dist(b, p1) + dist(a, p2);
            if swap < keep {
                locus1.push(b);
                locus2.push(a);
                continue;
            }
        }
        locus1.push(a);
        locus2.push(b);
    }
    Eigenloci {
        freqs,
        locus1,
        locus2,
    }
}

fn dist(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm()
}

/// Applies the Nyquist criterion to a loop gain sampled on positive
/// frequencies.
///
/// Stable iff the net counterclockwise encirclements of −1 equal
/// `rhp_poles_open_loop`. Undersampling (any angular step of the winding
/// integrand exceeding π/2) yields `Inconclusive` instead of a verdict.
pub fn gnc_verdict(loop_gain: &FrequencyResponse, rhp_poles_open_loop: usize) -> StabilityReport {
    let loci = eigenloci(loop_gain);

    // det(I + L) over positive frequencies…
    let pos: Vec<Complex64> = loop_gain
        .values()
        .iter()
        .map(|m| (Mat2::identity() + *m).det())
        .collect();
    // …closed by conjugate reflection (negative frequencies traversed from
    // −ω_max to −ω_min, then jumping to +ω_min: the contour runs
    // ω: −ω_max → −ω_min → +ω_min → +ω_max → close).
    let mut contour: Vec<Complex64> = pos.iter().rev().map(|c| c.conj()).collect();
    contour.extend(pos.iter().copied());

    let mut winding = 0.0f64;
    let mut max_step = 0.0f64;
    for k in 0..contour.len() {
        let a = contour[k];
        let b = contour[(k + 1) % contour.len()];
        // Angle swept around the origin of det(I+L), i.e. around −1 for the
        // loci product.
        let step = (b / a).arg();
        if !step.is_finite() {
            max_step = f64::INFINITY;
            break;
        }
        winding += step;
        max_step = max_step.max(step.abs());
    }
    let encirclements = (winding / (2.0 * std::f64::consts::PI)).round() as i64;

    let margin = margin_of(&loci);

    let (verdict, reason) = if max_step > std::f64::consts::FRAC_PI_2 {
        (
            Verdict::Inconclusive,
            Some(format!(
                "winding integrand stepped {max_step:.3} rad between samples (> π/2); \
                 refine the grid"
            )),
        )
    } else if encirclements == rhp_poles_open_loop as i64 {
        (Verdict::Stable, None)
    } else {
        (Verdict::Unstable, None)
    };

    StabilityReport {
        verdict,
        encirclements,
        rhp_poles_open_loop,
        margin,
        loci,
        inconclusive_reason: reason,
    }
}

fn margin_of(loci: &Eigenloci) -> Margin {
    let minus_one = Complex64::new(-1.0, 0.0);
    let mut best = (f64::INFINITY, loci.freqs.first().copied().unwrap_or(0.0));
    for (i, &f) in loci.freqs.iter().enumerate() {
        for l in [loci.locus1[i], loci.locus2[i]] {
            let d = (l - minus_one).norm();
            if d < best.0 {
                best = (d, f);
            }
        }
    }
    Margin {
        min_distance: best.0,
        freq_hz: best.1,
    }
}
