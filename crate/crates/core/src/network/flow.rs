//! Fundamental-frequency phasor flow.
//!
//! Solves the linear nodal network driven by the Thevenin source and the
//! converter current injections. Each converter injects `(I_d + jI_q)`
//! expressed in its own terminal-voltage-aligned frame (its PLL locks the
//! local d-axis onto the terminal voltage), so the global injection is
//! `(I_d + jI_q)·e^{jθ}` with θ the node's voltage angle — which is itself
//! part of the solution. A Gauss-style fixed point handles the mild
//! nonlinearity: assume angles, solve the linear network, recompute angles,
//! repeat until the largest angle change drops below tolerance.
//!
//! Phasors are phase quantities (line-to-neutral); the dq components used by
//! the simulator are numerically equal to these phasors, so a converged flow
//! is an exact equilibrium of the time-domain model.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::model::{AttachmentKind, NetworkModel};
use crate::converter::OperatingPoint;
use crate::error::CoreError;
use crate::frames::ReferenceAngle;
use crate::Result;

/// Converged fundamental-frequency solution.
///
/// Voltages and angles are re-referenced so the chosen reference node sits
/// at exactly zero angle.
#[derive(Debug, Clone)]
pub struct FlowSolution {
    node_names: Vec<String>,
    voltages: Vec<Complex64>,
    thetas: Vec<f64>,
    converter_ops: Vec<(String, OperatingPoint)>,
    /// Thevenin internal voltage phasor in the re-referenced frame, V.
    pub source_voltage: Complex64,
    /// Fixed-point iterations used.
    pub iterations: usize,
    /// Infinity-norm KCL residual at the final angles, A.
    pub residual: f64,
}

impl FlowSolution {
    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn voltages(&self) -> &[Complex64] {
        &self.voltages
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn voltage(&self, node: &str) -> Result<Complex64> {
        Ok(self.voltages[self.index(node)?])
    }

    /// Node voltage angle relative to the reference node, radians.
    pub fn theta(&self, node: &str) -> Result<f64> {
        Ok(self.thetas[self.index(node)?])
    }

    pub fn reference_angle(&self, node: &str) -> Result<ReferenceAngle> {
        ReferenceAngle::new(self.theta(node)?)
    }

    /// Operating points of the converter attachments, in declaration order,
    /// keyed by node name.
    pub fn converter_operating_points(&self) -> &[(String, OperatingPoint)] {
        &self.converter_ops
    }

    fn index(&self, node: &str) -> Result<usize> {
        self.node_names
            .iter()
            .position(|n| n == node)
            .ok_or_else(|| CoreError::Topology(format!("unknown node `{node}`")))
    }
}

/// Solves the fundamental flow by fixed-point iteration on the injection
/// angles.
pub fn fundamental_flow(net: &NetworkModel, tol: f64, max_iter: usize) -> Result<FlowSolution> {
    net.validate()?;
    if !(tol > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "flow tolerance must be > 0, got {tol}"
        )));
    }

    let n = net.nodes.len();
    let w1 = net.base.omega1();
    let j = Complex64::new(0.0, 1.0);

    // Constant nodal admittance matrix: branches, passive shunts, and the
    // Norton equivalent of the Thevenin source.
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for b in &net.branches {
        let yb = Complex64::new(1.0, 0.0) / (Complex64::new(b.r, 0.0) + j * (w1 * b.l));
        let (f, t) = (net.node_index(&b.from)?, net.node_index(&b.to)?);
        y[(f, f)] += yb;
        y[(t, t)] += yb;
        y[(f, t)] -= yb;
        y[(t, f)] -= yb;
    }
    for a in &net.attachments {
        if let AttachmentKind::ShuntRl { r, l } = &a.kind {
            let ya = Complex64::new(1.0, 0.0) / (Complex64::new(*r, 0.0) + j * (w1 * *l));
            let ni = net.node_index(&a.node)?;
            y[(ni, ni)] += ya;
        }
    }
    let th_idx = net.node_index(&net.thevenin.node)?;
    let z_th = Complex64::new(net.thevenin.r, 0.0) + j * (w1 * net.thevenin.l);
    let y_th = Complex64::new(1.0, 0.0) / z_th;
    y[(th_idx, th_idx)] += y_th;
    let i_norton = Complex64::new(net.thevenin.v_phase(), 0.0) * y_th;

    let lu = y.clone().lu();

    // Converter injections: (node index, set-points).
    let converters: Vec<(usize, f64, f64)> = net
        .attachments
        .iter()
        .filter_map(|a| match &a.kind {
            AttachmentKind::Converter { i_d, i_q, .. } => {
                Some((net.node_index(&a.node).unwrap(), *i_d, *i_q))
            }
            AttachmentKind::ShuntRl { .. } => None,
        })
        .collect();

    let rhs_for = |thetas: &[f64]| {
        let mut rhs = DVector::<Complex64>::zeros(n);
        rhs[th_idx] += i_norton;
        for &(ni, i_d, i_q) in &converters {
            rhs[ni] += Complex64::new(i_d, i_q) * Complex64::from_polar(1.0, thetas[ni]);
        }
        rhs
    };

    let mut thetas = vec![0.0f64; n];
    let mut voltages = DVector::<Complex64>::zeros(n);
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        let rhs = rhs_for(&thetas);
        let v = lu
            .solve(&rhs)
            .ok_or_else(|| CoreError::Flow("singular nodal matrix".into()))?;
        let mut delta = 0.0f64;
        for i in 0..n {
            let new_theta = if v[i].norm() > 0.0 { v[i].arg() } else { 0.0 };
            delta = delta.max(wrap_angle(new_theta - thetas[i]).abs());
            thetas[i] = new_theta;
        }
        voltages = v;
        if delta < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CoreError::Flow(format!(
            "angle fixed point did not converge in {max_iter} iterations (tol {tol})"
        )));
    }

    // KCL residual with the final angles.
    let rhs = rhs_for(&thetas);
    let residual = (&y * &voltages - &rhs)
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);

    // Re-reference so the chosen node sits at exactly zero angle.
    let ref_idx = net.node_index(&net.reference_node)?;
    let theta_ref = thetas[ref_idx];
    let spin = Complex64::from_polar(1.0, -theta_ref);
    let voltages: Vec<Complex64> = voltages.iter().map(|v| v * spin).collect();
    let mut thetas: Vec<f64> = thetas
        .iter()
        .map(|&t| wrap_angle(t - theta_ref))
        .collect();
    thetas[ref_idx] = 0.0;

    let mut converter_ops = Vec::new();
    for a in &net.attachments {
        if let AttachmentKind::Converter { i_d, i_q, .. } = &a.kind {
            let ni = net.node_index(&a.node)?;
            // Rebuild the phasor from magnitude and the re-referenced angle
            // so OperatingPoint::theta is bit-consistent with `thetas`.
            let v_t = Complex64::from_polar(voltages[ni].norm(), thetas[ni]);
            converter_ops.push((a.node.clone(), OperatingPoint::new(*i_d, *i_q, v_t)?));
        }
    }

    Ok(FlowSolution {
        node_names: net.nodes.clone(),
        voltages,
        thetas,
        converter_ops,
        source_voltage: Complex64::new(net.thevenin.v_phase(), 0.0) * spin,
        iterations,
        residual,
    })
}

fn wrap_angle(t: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = t.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}
