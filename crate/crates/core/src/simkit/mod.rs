//! Time-domain simulator and perturbation-injection impedance sweep.

mod dynamics;
mod sweep;

pub use dynamics::{
    build_dynamics, BoundednessReport, Dynamics, Injection, InterfaceSample, Integrator,
    SimConfig, Simulator,
};
pub use sweep::{measure_pn, sweep_impedance, sweep_safe_grid, MeasuredImpedance, PointDiagnostics};
