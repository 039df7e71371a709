//! Independent oracle for the closed-loop PLL response: a dedicated
//! time-domain simulation of just the PLL (its own integrator, angle state,
//! and measurement filter), exercised with a sinusoidal q-axis voltage and
//! read out by single-bin DFT. This oracle shares no code with either the
//! analytic block evaluation or the network simulator.

use num_complex::Complex64;
use zshift_core::converter::{pll_small_signal, ConverterParams, OperatingPoint};
use zshift_core::freqresp::FrequencyGrid;

fn params() -> ConverterParams {
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

/// Simulates the stand-alone PLL driven by `v = (V₀, A·cos(2πft))` in the
/// steady frame and returns the angle response phasor per volt.
fn simulate_pll_response(p: &ConverterParams, v0: f64, amp: f64, f: f64) -> Complex64 {
    let dt = 2e-5;
    // Snap to an integer-sample window, as any leakage-free single-bin DFT
    // must.
    let n_window = (2.0 / (f * dt)).round() as usize;
    let f = 2.0 / (n_window as f64 * dt);
    let w = 2.0 * std::f64::consts::PI * f;

    // States: PLL angle, PI integrator, filtered voltage (PLL frame).
    let mut delta = 0.0f64;
    let mut xi = 0.0f64;
    let mut vf = [v0, 0.0f64];

    let deriv = |t: f64, x: &[f64; 4]| -> [f64; 4] {
        let (delta, xi, vf_d, vf_q) = (x[0], x[1], x[2], x[3]);
        let v = [v0, amp * (w * t).cos()];
        let (s, c) = delta.sin_cos();
        let v_pll = [v[0] * c + v[1] * s, -v[0] * s + v[1] * c];
        [
            p.kp_pll * vf_q + xi,
            p.ki_pll * vf_q,
            (v_pll[0] - vf_d) / p.filter_tau,
            (v_pll[1] - vf_q) / p.filter_tau,
        ]
    };

    let settle_steps = (4.0 / dt).ceil() as usize;
    let total = settle_steps + n_window;
    let mut acc = Complex64::ZERO;
    let mut t = 0.0f64;
    for k in 0..total {
        if k >= settle_steps {
            acc += delta * Complex64::from_polar(1.0, -w * t);
        }
        // RK4 on the four states.
        let x = [delta, xi, vf[0], vf[1]];
        let k1 = deriv(t, &x);
        let mid1 = std::array::from_fn(|i| x[i] + 0.5 * dt * k1[i]);
        let k2 = deriv(t + 0.5 * dt, &mid1);
        let mid2 = std::array::from_fn(|i| x[i] + 0.5 * dt * k2[i]);
        let k3 = deriv(t + 0.5 * dt, &mid2);
        let end = std::array::from_fn(|i| x[i] + dt * k3[i]);
        let k4 = deriv(t + dt, &end);
        delta += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        xi += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        vf[0] += dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
        vf[1] += dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);
        t += dt;
    }
    acc * 2.0 / n_window as f64 / amp
}

#[test]
fn analytic_pll_block_matches_standalone_simulation() {
    let p = params();
    let v0 = 6600.0 / 3f64.sqrt();
    let op = OperatingPoint::new(100.0, 33.0, Complex64::new(v0, 0.0)).unwrap();

    let freqs = [0.5, 2.0, 5.0, 12.0, 30.0];
    let grid = FrequencyGrid::new(freqs.to_vec()).unwrap();
    let analytic = pll_small_signal(&p, &op, &grid).unwrap();

    for (i, &f) in freqs.iter().enumerate() {
        let measured = simulate_pll_response(&p, v0, 0.01 * v0, f);
        let err = (measured - analytic[i]).norm() / analytic[i].norm();
        assert!(
            err < 0.02,
            "at {f} Hz: measured {measured}, analytic {}, err {err:.3e}",
            analytic[i]
        );
    }
}
