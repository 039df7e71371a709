// Scans PLL gain scaling on a weakened source to find where the Nyquist
// verdict and the time-domain boundedness flip.

use std::collections::BTreeMap;

use zshift_core::converter::linearize_converter;
use zshift_core::frames::MFD_TOL_ANALYTIC;
use zshift_core::network::{aggregate, fundamental_flow, parse_network, AttachmentKind, Side};
use zshift_core::simkit::{build_dynamics, sweep_safe_grid, Injection};
use zshift_core::stability::{gnc_verdict, minor_loop_gain};

fn main() {
    let base = std::fs::read_to_string("configs/case_study.toml").unwrap();
    for z_th in [0.02, 0.5] {
        for gamma in [1.0, 5.0, 10.0, 20.0, 40.0, 80.0] {
            let text = base
                .replace("z_pu = 0.02", &format!("z_pu = {z_th}"))
                .replace("kp_pll = 0.00758", &format!("kp_pll = {}", 0.00758 * gamma))
                .replace("ki_pll = 0.152", &format!("ki_pll = {}", 0.152 * gamma));
            let net = parse_network(&text).unwrap();
            let flow = match fundamental_flow(&net, 1e-10, 200) {
                Ok(f) => f,
                Err(e) => {
                    println!("z_th={z_th} gamma={gamma}: flow failed: {e}");
                    continue;
                }
            };
            let grid = sweep_safe_grid(1.0, 2000.0, 161, 50.0).unwrap();
            let mut models = BTreeMap::new();
            for a in &net.attachments {
                if let AttachmentKind::Converter { params, .. } = &a.kind {
                    let op = flow
                        .converter_operating_points()
                        .iter()
                        .find(|(n, _)| *n == a.node)
                        .map(|(_, op)| *op)
                        .unwrap();
                    models.insert(a.node.clone(), linearize_converter(params, &op, &grid).unwrap());
                }
            }
            let z_load = aggregate(&net, &flow, &models, &grid, Side::LoadSeenFromRef, MFD_TOL_ANALYTIC).unwrap();
            let z_src = aggregate(&net, &flow, &models, &grid, Side::SourceSeenFromRef, MFD_TOL_ANALYTIC).unwrap();
            let l = minor_loop_gain(&z_src, &z_load).unwrap();
            let report = gnc_verdict(&l, 0);

            let dynamics = build_dynamics(&net, &flow).unwrap();
            let bounded = dynamics.simulate_boundedness(
                5.0,
                1e-5,
                Some(Injection::Impulse { amp: 0.1 * dynamics.v_phase, duration: 1e-3 }),
            );
            println!(
                "z_th={z_th:<5} gamma={gamma:<5} verdict={:<12} enc={:+} margin={:.4} @ {:.1} Hz   bounded={} peak_dev={:.3e} final_dev={:.3e}",
                report.verdict.to_string(),
                report.encirclements,
                report.margin.min_distance,
                report.margin.freq_hz,
                bounded.bounded,
                bounded.peak_deviation,
                bounded.final_deviation,
            );
        }
    }
}
