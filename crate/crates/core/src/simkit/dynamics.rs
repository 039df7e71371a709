//! Continuous-time model of the full network in the global rotating frame.
//!
//! Every inductive element (branch, Thevenin source branch, shunt, converter
//! inductance) contributes its current as state. Node voltages are algebraic:
//! because all element currents enter nodes through inductances, Kirchhoff's
//! current law differentiates to a linear system `A·v = b(x)` with a constant
//! 1/L-weighted Laplacian `A`, which is factorized once. The solved voltages
//! make the current-sum at every node an exact invariant of the integration.
//!
//! Converters run their control in their own PLL frame, fed by rotating the
//! global-frame terminal quantities through the PLL angle state. This is what
//! makes the sweep an independent check of the frame-rotation algebra: the
//! simulator never uses the rotation-matrix alignment itself.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::CoreError;
use crate::network::{AttachmentKind, FlowSolution, NetworkModel};
use crate::Result;

/// Fixed-step integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Classic fourth-order Runge-Kutta.
    Rk4,
    /// Implicit trapezoidal rule, solved by fixed-point iteration.
    Trapezoidal,
}

/// Sweep protocol parameters.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Fixed time step, s.
    pub dt: f64,
    /// Settling time discarded before measurement windows, s.
    pub t_settle: f64,
    /// Integer number of perturbation cycles per measurement window.
    pub n_cycles_measure: usize,
    /// Perturbation amplitude relative to the source phase voltage.
    pub amp_rel: f64,
    /// Node where the series perturbation is injected. `None` means the
    /// Thevenin node; anything else is currently rejected.
    pub injection_node: Option<String>,
    pub integrator: Integrator,
    /// Maximum relative disagreement between two consecutive measurement
    /// windows before a point is declared unsettled.
    pub drift_tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-5,
            t_settle: 0.6,
            n_cycles_measure: 2,
            amp_rel: 0.01,
            injection_node: None,
            integrator: Integrator::Rk4,
            drift_tol: 2e-3,
        }
    }
}

impl SimConfig {
    /// Validates static fields; the dt-vs-grid check happens in the sweep,
    /// which knows the highest frequency.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(CoreError::Sim(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.amp_rel > 0.0 && self.amp_rel <= 0.1) {
            return Err(CoreError::Sim(format!(
                "amp_rel must lie in (0, 0.1], got {}",
                self.amp_rel
            )));
        }
        if self.n_cycles_measure == 0 {
            return Err(CoreError::Sim("n_cycles_measure must be ≥ 1".into()));
        }
        if !(self.t_settle >= 0.0) {
            return Err(CoreError::Sim("t_settle must be ≥ 0".into()));
        }
        if !(self.drift_tol > 0.0) {
            return Err(CoreError::Sim("drift_tol must be > 0".into()));
        }
        Ok(())
    }
}

/// External disturbance applied in series with the source branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Injection {
    None,
    /// `amp·cos(2πft)` on the chosen axis (0 = d, 1 = q).
    Series { axis: usize, amp: f64, freq_hz: f64 },
    /// Constant d-axis offset for `duration` seconds, then zero.
    Impulse { amp: f64, duration: f64 },
}

impl Injection {
    fn voltage(&self, t: f64) -> (f64, f64) {
        match *self {
            Injection::None => (0.0, 0.0),
            Injection::Series { axis, amp, freq_hz } => {
                let v = amp * (2.0 * std::f64::consts::PI * freq_hz * t).cos();
                if axis == 0 {
                    (v, 0.0)
                } else {
                    (0.0, v)
                }
            }
            Injection::Impulse { amp, duration } => {
                if t < duration {
                    (amp, 0.0)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }
}

struct ElemBranch {
    from: usize,
    to: usize,
    r: f64,
    l: f64,
    off: usize,
}

struct ElemThevenin {
    node: usize,
    r: f64,
    l: f64,
    v_src: (f64, f64),
    off: usize,
}

struct ElemShunt {
    node: usize,
    r: f64,
    l: f64,
    off: usize,
}

struct ElemConverter {
    node: usize,
    l: f64,
    /// Current PI gains referred to volts.
    kp_v: f64,
    ki_v: f64,
    kp_pll: f64,
    ki_pll: f64,
    tau: f64,
    delay_td: f64,
    i_ref: (f64, f64),
    off: usize,
    /// Decoupling feed-forward constant ω₁·L.
    omega1_l: f64,
}

impl ElemConverter {
    fn state_len(&self) -> usize {
        if self.delay_td > 0.0 {
            14
        } else {
            10
        }
    }

    /// Controller output after the modulation rotation (and before any
    /// delay): the physical bridge voltage demand in the global frame.
    fn bridge_demand(&self, x: &[f64]) -> (f64, f64) {
        let o = self.off;
        let i_f = (x[o + 6], x[o + 7]);
        let xi = (x[o + 8], x[o + 9]);
        let v_f = (x[o + 4], x[o + 5]);
        let w1l = self.omega1_l;
        // u = v_f + ω₁L·J·i_f + ξ + k_p(i_ref − i_f), all in the PLL frame.
        let u = (
            v_f.0 - w1l * i_f.1 + xi.0 + self.kp_v * (self.i_ref.0 - i_f.0),
            v_f.1 + w1l * i_f.0 + xi.1 + self.kp_v * (self.i_ref.1 - i_f.1),
        );
        let delta = x[o + 2];
        rotate(u, delta)
    }

    fn bridge_voltage(&self, x: &[f64]) -> (f64, f64) {
        let e = self.bridge_demand(x);
        if self.delay_td > 0.0 {
            let o = self.off + 10;
            let gain = 12.0 / self.delay_td;
            (e.0 - gain * x[o + 1], e.1 - gain * x[o + 3])
        } else {
            e
        }
    }
}

/// Rotation of a two-axis vector by +δ.
fn rotate(u: (f64, f64), delta: f64) -> (f64, f64) {
    let (s, c) = delta.sin_cos();
    (u.0 * c - u.1 * s, u.0 * s + u.1 * c)
}

/// Rotation by −δ (into the PLL frame).
fn derotate(u: (f64, f64), delta: f64) -> (f64, f64) {
    let (s, c) = delta.sin_cos();
    (u.0 * c + u.1 * s, -u.0 * s + u.1 * c)
}

/// Assembled network dynamics with a precomputed steady state.
pub struct Dynamics {
    node_names: Vec<String>,
    interface: usize,
    omega1: f64,
    branches: Vec<ElemBranch>,
    thevenin: ElemThevenin,
    shunts: Vec<ElemShunt>,
    converters: Vec<ElemConverter>,
    state_len: usize,
    node_lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    steady: Vec<f64>,
    steady_interface: [f64; 4],
    /// Source phase voltage magnitude (sets perturbation amplitudes).
    pub v_phase: f64,
}

/// Reusable buffers for one simulation instance.
pub struct Scratch {
    rhs_d: DVector<f64>,
    rhs_q: DVector<f64>,
}

/// Builds the state model from a converged flow.
///
/// The initial condition is the flow solution itself, with controller
/// integrators and PLL angles set from closed-form steady values, so the
/// unperturbed simulation holds still.
pub fn build_dynamics(net: &NetworkModel, flow: &FlowSolution) -> Result<Dynamics> {
    net.validate()?;
    let n = net.nodes.len();
    let w1 = net.base.omega1();

    let mut off = 0usize;
    let mut branches = Vec::with_capacity(net.branches.len());
    for b in &net.branches {
        if b.l <= 0.0 {
            return Err(CoreError::Topology(format!(
                "time-domain model requires L > 0 on every branch ({}–{})",
                b.from, b.to
            )));
        }
        branches.push(ElemBranch {
            from: net.node_index(&b.from)?,
            to: net.node_index(&b.to)?,
            r: b.r,
            l: b.l,
            off,
        });
        off += 2;
    }

    if net.thevenin.l <= 0.0 {
        return Err(CoreError::Topology(
            "time-domain model requires L > 0 on the thevenin branch".into(),
        ));
    }
    let thevenin = ElemThevenin {
        node: net.node_index(&net.thevenin.node)?,
        r: net.thevenin.r,
        l: net.thevenin.l,
        v_src: (flow.source_voltage.re, flow.source_voltage.im),
        off,
    };
    off += 2;

    let mut shunts = Vec::new();
    let mut converters = Vec::new();
    for a in &net.attachments {
        let node = net.node_index(&a.node)?;
        match &a.kind {
            AttachmentKind::ShuntRl { r, l } => {
                if *l <= 0.0 {
                    return Err(CoreError::Topology(format!(
                        "time-domain model requires L > 0 on the shunt at `{}`",
                        a.node
                    )));
                }
                shunts.push(ElemShunt {
                    node,
                    r: *r,
                    l: *l,
                    off,
                });
                off += 2;
            }
            AttachmentKind::Converter { params, i_d, i_q } => {
                let c = ElemConverter {
                    node,
                    l: params.l_conv,
                    kp_v: params.kp_volts(),
                    ki_v: params.ki_volts(),
                    kp_pll: params.kp_pll,
                    ki_pll: params.ki_pll,
                    tau: params.filter_tau,
                    delay_td: params.delay_td,
                    i_ref: (*i_d, *i_q),
                    off,
                    omega1_l: w1 * params.l_conv,
                };
                off += c.state_len();
                converters.push(c);
            }
        }
    }
    let state_len = off;

    // 1/L-weighted Laplacian over the node voltages.
    let mut a = DMatrix::<f64>::zeros(n, n);
    for b in &branches {
        let g = 1.0 / b.l;
        a[(b.from, b.from)] += g;
        a[(b.to, b.to)] += g;
        a[(b.from, b.to)] -= g;
        a[(b.to, b.from)] -= g;
    }
    a[(thevenin.node, thevenin.node)] += 1.0 / thevenin.l;
    for s in &shunts {
        a[(s.node, s.node)] += 1.0 / s.l;
    }
    for c in &converters {
        a[(c.node, c.node)] += 1.0 / c.l;
    }
    let node_lu = a.lu();

    // Steady state from the flow phasors.
    let phasor = |c: Complex64| (c.re, c.im);
    let z_of = |r: f64, l: f64| Complex64::new(r, w1 * l);
    let mut steady = vec![0.0; state_len];
    let v_at = |idx: usize| flow.voltages()[idx];
    for b in &branches {
        let i = (v_at(b.from) - v_at(b.to)) / z_of(b.r, b.l);
        steady[b.off] = i.re;
        steady[b.off + 1] = i.im;
    }
    let i_th = (flow.source_voltage - v_at(thevenin.node)) / z_of(thevenin.r, thevenin.l);
    steady[thevenin.off] = i_th.re;
    steady[thevenin.off + 1] = i_th.im;
    for s in &shunts {
        let i = v_at(s.node) / z_of(s.r, s.l);
        steady[s.off] = i.re;
        steady[s.off + 1] = i.im;
    }
    for c in &converters {
        let v = v_at(c.node);
        let delta = v.arg();
        let i = Complex64::new(c.i_ref.0, c.i_ref.1) * Complex64::from_polar(1.0, delta);
        let o = c.off;
        steady[o] = i.re;
        steady[o + 1] = i.im;
        steady[o + 2] = delta;
        steady[o + 3] = 0.0; // PLL integrator: zero frequency offset
        let v_pll = derotate(phasor(v), delta);
        steady[o + 4] = v_pll.0;
        steady[o + 5] = v_pll.1;
        steady[o + 6] = c.i_ref.0;
        steady[o + 7] = c.i_ref.1;
        steady[o + 8] = 0.0; // current PI integrator: feed-forward covers it
        steady[o + 9] = 0.0;
        if c.delay_td > 0.0 {
            // Padé pass-through state for a constant input.
            let e = c.bridge_demand(&steady);
            let t2_12 = c.delay_td * c.delay_td / 12.0;
            steady[o + 10] = e.0 * t2_12;
            steady[o + 11] = 0.0;
            steady[o + 12] = e.1 * t2_12;
            steady[o + 13] = 0.0;
        }
    }

    let v_int = v_at(net.node_index(&net.thevenin.node)?);
    let steady_interface = [v_int.re, v_int.im, i_th.re, i_th.im];

    Ok(Dynamics {
        node_names: net.nodes.clone(),
        interface: net.node_index(&net.thevenin.node)?,
        omega1: w1,
        branches,
        thevenin,
        shunts,
        converters,
        state_len,
        node_lu,
        steady,
        steady_interface,
        v_phase: net.thevenin.v_phase(),
    })
}

impl Dynamics {
    pub fn state_len(&self) -> usize {
        self.state_len
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    /// Node the Thevenin branch lands on — the source/load interface.
    pub fn interface_name(&self) -> &str {
        &self.node_names[self.interface]
    }

    pub fn steady_state(&self) -> &[f64] {
        &self.steady
    }

    /// Steady interface values `(v_d, v_q, i_d, i_q)` used to strip the
    /// operating point from measured samples.
    pub fn steady_interface(&self) -> [f64; 4] {
        self.steady_interface
    }

    pub fn new_scratch(&self) -> Scratch {
        let n = self.node_names.len();
        Scratch {
            rhs_d: DVector::zeros(n),
            rhs_q: DVector::zeros(n),
        }
    }

    /// Evaluates the state derivative. On return `scratch.rhs_d/q` hold the
    /// solved node voltages.
    pub fn derivative(
        &self,
        t: f64,
        x: &[f64],
        dx: &mut [f64],
        inj: &Injection,
        scratch: &mut Scratch,
    ) {
        let w1 = self.omega1;
        scratch.rhs_d.fill(0.0);
        scratch.rhs_q.fill(0.0);

        // Element current-derivative constants (everything but the node
        // voltages), accumulated with KCL signs into the rhs.
        for b in &self.branches {
            let i = (x[b.off], x[b.off + 1]);
            // d/dt i = (v_from − v_to − R·i − ω₁L·J·i)/L
            let cd = (-b.r * i.0 + w1 * b.l * i.1) / b.l;
            let cq = (-b.r * i.1 - w1 * b.l * i.0) / b.l;
            scratch.rhs_d[b.to] += cd;
            scratch.rhs_q[b.to] += cq;
            scratch.rhs_d[b.from] -= cd;
            scratch.rhs_q[b.from] -= cq;
        }
        {
            let th = &self.thevenin;
            let i = (x[th.off], x[th.off + 1]);
            let (inj_d, inj_q) = inj.voltage(t);
            let cd = (th.v_src.0 + inj_d - th.r * i.0 + w1 * th.l * i.1) / th.l;
            let cq = (th.v_src.1 + inj_q - th.r * i.1 - w1 * th.l * i.0) / th.l;
            scratch.rhs_d[th.node] += cd;
            scratch.rhs_q[th.node] += cq;
        }
        for s in &self.shunts {
            let i = (x[s.off], x[s.off + 1]);
            let cd = (-s.r * i.0 + w1 * s.l * i.1) / s.l;
            let cq = (-s.r * i.1 - w1 * s.l * i.0) / s.l;
            // Shunt current leaves the node.
            scratch.rhs_d[s.node] -= cd;
            scratch.rhs_q[s.node] -= cq;
        }
        for c in &self.converters {
            let i = (x[c.off], x[c.off + 1]);
            let e = c.bridge_voltage(x);
            let cd = (e.0 + w1 * c.l * i.1) / c.l;
            let cq = (e.1 - w1 * c.l * i.0) / c.l;
            scratch.rhs_d[c.node] += cd;
            scratch.rhs_q[c.node] += cq;
        }

        // Node voltages from the differentiated KCL.
        let ok = self.node_lu.solve_mut(&mut scratch.rhs_d);
        let ok2 = self.node_lu.solve_mut(&mut scratch.rhs_q);
        debug_assert!(ok && ok2, "constant node matrix became singular");
        let v_d = &scratch.rhs_d;
        let v_q = &scratch.rhs_q;

        for b in &self.branches {
            let i = (x[b.off], x[b.off + 1]);
            dx[b.off] = (v_d[b.from] - v_d[b.to] - b.r * i.0 + w1 * b.l * i.1) / b.l;
            dx[b.off + 1] = (v_q[b.from] - v_q[b.to] - b.r * i.1 - w1 * b.l * i.0) / b.l;
        }
        {
            let th = &self.thevenin;
            let i = (x[th.off], x[th.off + 1]);
            let (inj_d, inj_q) = inj.voltage(t);
            dx[th.off] =
                (th.v_src.0 + inj_d - v_d[th.node] - th.r * i.0 + w1 * th.l * i.1) / th.l;
            dx[th.off + 1] =
                (th.v_src.1 + inj_q - v_q[th.node] - th.r * i.1 - w1 * th.l * i.0) / th.l;
        }
        for s in &self.shunts {
            let i = (x[s.off], x[s.off + 1]);
            dx[s.off] = (v_d[s.node] - s.r * i.0 + w1 * s.l * i.1) / s.l;
            dx[s.off + 1] = (v_q[s.node] - s.r * i.1 - w1 * s.l * i.0) / s.l;
        }
        for c in &self.converters {
            let o = c.off;
            let i = (x[o], x[o + 1]);
            let delta = x[o + 2];
            let e = c.bridge_voltage(x);
            dx[o] = (e.0 - v_d[c.node] + w1 * c.l * i.1) / c.l;
            dx[o + 1] = (e.1 - v_q[c.node] - w1 * c.l * i.0) / c.l;

            // Measurements rotated into the PLL frame, then filtered.
            let v_pll = derotate((v_d[c.node], v_q[c.node]), delta);
            let i_pll = derotate(i, delta);
            dx[o + 4] = (v_pll.0 - x[o + 4]) / c.tau;
            dx[o + 5] = (v_pll.1 - x[o + 5]) / c.tau;
            dx[o + 6] = (i_pll.0 - x[o + 6]) / c.tau;
            dx[o + 7] = (i_pll.1 - x[o + 7]) / c.tau;

            // PLL: PI on the filtered q-axis voltage drives the angle.
            dx[o + 2] = c.kp_pll * x[o + 5] + x[o + 3];
            dx[o + 3] = c.ki_pll * x[o + 5];

            // Current PI integrators.
            dx[o + 8] = c.ki_v * (c.i_ref.0 - x[o + 6]);
            dx[o + 9] = c.ki_v * (c.i_ref.1 - x[o + 7]);

            if c.delay_td > 0.0 {
                let u = c.bridge_demand(x);
                let a1 = 12.0 / (c.delay_td * c.delay_td);
                let a2 = 6.0 / c.delay_td;
                dx[o + 10] = x[o + 11];
                dx[o + 11] = -a1 * x[o + 10] - a2 * x[o + 11] + u.0;
                dx[o + 12] = x[o + 13];
                dx[o + 13] = -a1 * x[o + 12] - a2 * x[o + 13] + u.1;
            }
        }
    }
}

/// Interface quantities at one sample instant.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceSample {
    pub t: f64,
    pub v_d: f64,
    pub v_q: f64,
    pub i_d: f64,
    pub i_q: f64,
}

/// Single-owner stepping state over shared [`Dynamics`].
pub struct Simulator<'a> {
    dynamics: &'a Dynamics,
    pub state: Vec<f64>,
    pub t: f64,
    dt: f64,
    integrator: Integrator,
    injection: Injection,
    scratch: Scratch,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl<'a> Simulator<'a> {
    pub fn new(dynamics: &'a Dynamics, dt: f64, integrator: Integrator, injection: Injection) -> Self {
        let n = dynamics.state_len();
        Self {
            dynamics,
            state: dynamics.steady_state().to_vec(),
            t: 0.0,
            dt,
            integrator,
            injection,
            scratch: dynamics.new_scratch(),
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            stage: vec![0.0; n],
        }
    }

    /// Advances one step and returns the interface sample at the *pre-step*
    /// time (the first stage evaluation provides it at no extra cost).
    pub fn step(&mut self) -> InterfaceSample {
        let dt = self.dt;
        let n = self.state.len();
        let d = self.dynamics;
        let inj = self.injection;

        d.derivative(self.t, &self.state, &mut self.k1, &inj, &mut self.scratch);
        let sample = InterfaceSample {
            t: self.t,
            v_d: self.scratch.rhs_d[d.interface],
            v_q: self.scratch.rhs_q[d.interface],
            i_d: self.state[d.thevenin.off],
            i_q: self.state[d.thevenin.off + 1],
        };

        match self.integrator {
            Integrator::Rk4 => {
                for i in 0..n {
                    self.stage[i] = self.state[i] + 0.5 * dt * self.k1[i];
                }
                d.derivative(self.t + 0.5 * dt, &self.stage, &mut self.k2, &inj, &mut self.scratch);
                for i in 0..n {
                    self.stage[i] = self.state[i] + 0.5 * dt * self.k2[i];
                }
                d.derivative(self.t + 0.5 * dt, &self.stage, &mut self.k3, &inj, &mut self.scratch);
                for i in 0..n {
                    self.stage[i] = self.state[i] + dt * self.k3[i];
                }
                d.derivative(self.t + dt, &self.stage, &mut self.k4, &inj, &mut self.scratch);
                for i in 0..n {
                    self.state[i] +=
                        dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
                }
            }
            Integrator::Trapezoidal => {
                // Predictor: explicit Euler; correct by fixed-point on the
                // trapezoidal update. The dynamics are mildly stiff at most,
                // so a handful of sweeps converges to rounding.
                for i in 0..n {
                    self.stage[i] = self.state[i] + dt * self.k1[i];
                }
                for _ in 0..4 {
                    d.derivative(self.t + dt, &self.stage, &mut self.k2, &inj, &mut self.scratch);
                    for i in 0..n {
                        self.stage[i] =
                            self.state[i] + 0.5 * dt * (self.k1[i] + self.k2[i]);
                    }
                }
                self.state.copy_from_slice(&self.stage);
            }
        }
        self.t += dt;
        sample
    }

    /// Largest `|state|` entry, for blow-up detection.
    pub fn state_inf_norm(&self) -> f64 {
        self.state.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Outcome of a boundedness run.
#[derive(Debug, Clone)]
pub struct BoundednessReport {
    pub bounded: bool,
    /// Peak deviation from the steady state, relative to its norm.
    pub peak_deviation: f64,
    /// Deviation at the end of the horizon, same scale.
    pub final_deviation: f64,
}

impl Dynamics {
    /// Runs unperturbed (plus optional impulse) and classifies boundedness.
    ///
    /// Divergence is declared when any state leaves a generous envelope
    /// around the steady state or stops being finite.
    pub fn simulate_boundedness(
        &self,
        t_end: f64,
        dt: f64,
        impulse: Option<Injection>,
    ) -> BoundednessReport {
        let inj = impulse.unwrap_or(Injection::None);
        let mut sim = Simulator::new(self, dt, Integrator::Rk4, inj);
        let scale = self
            .steady
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        let steps = (t_end / dt).ceil() as usize;
        let mut peak = 0.0f64;
        for k in 0..steps {
            sim.step();
            if k % 200 == 0 || k + 1 == steps {
                let dev = sim
                    .state
                    .iter()
                    .zip(&self.steady)
                    .fold(0.0f64, |m, (x, s)| m.max((x - s).abs()))
                    / scale;
                if !dev.is_finite() || dev > 1e4 {
                    return BoundednessReport {
                        bounded: false,
                        peak_deviation: f64::INFINITY,
                        final_deviation: f64::INFINITY,
                    };
                }
                peak = peak.max(dev);
            }
        }
        let final_dev = sim
            .state
            .iter()
            .zip(&self.steady)
            .fold(0.0f64, |m, (x, s)| m.max((x - s).abs()))
            / scale;
        BoundednessReport {
            bounded: final_dev.is_finite() && peak < 1e4,
            peak_deviation: peak,
            final_deviation: final_dev,
        }
    }

    /// Maximum relative state drift of the unperturbed model over `t_end`.
    pub fn equilibrium_drift(&self, t_end: f64, dt: f64) -> f64 {
        let mut sim = Simulator::new(self, dt, Integrator::Rk4, Injection::None);
        let steps = (t_end / dt).ceil() as usize;
        for _ in 0..steps {
            sim.step();
        }
        let scale = self
            .steady
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        sim.state
            .iter()
            .zip(&self.steady)
            .fold(0.0f64, |m, (x, s)| m.max((x - s).abs()))
            / scale
    }
}
