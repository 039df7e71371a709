//! TOML network configuration.
//!
//! ```toml
//! reference_node = "interface"
//!
//! [base]
//! s_base_va = 10e6
//! v_base_v = 6600.0
//! f_n_hz = 50.0
//! # z_base_ohm = 4.356   # optional; checked against v²/s when given
//!
//! [thevenin]
//! node = "interface"
//! v_th_v = 6600.0
//! z_pu = 0.02
//! x_over_r = 10.0        # or r_ohm / l_h
//!
//! [[branch]]
//! from = "interface"
//! to = "n1"
//! z_pu = 0.15
//! x_over_r = 10.0
//!
//! [[converter]]
//! node = "n1"
//! i_d_a = 100.0
//! i_q_a = 33.0
//! [converter.params]
//! kp = 6.43e-4
//! ki = 0.161
//! kp_pll = 0.00758
//! ki_pll = 0.152
//! vdc = 1127.0
//! l_conv = 6.93e-3
//! filter_tau = 5e-4
//! delay_td = 0.0
//!
//! [[shunt]]
//! node = "n2"
//! r_ohm = 40.0
//! l_h = 0.4
//! ```
//!
//! Branch, thevenin, and shunt impedances accept either explicit ohm/henry
//! values (`r_ohm`, `l_h`) or a per-unit magnitude with X/R ratio (`z_pu`,
//! `x_over_r`) converted through the impedance base. Converter parameter
//! keys carry no unit suffix; their units are fixed by the controller
//! definition. Unknown keys anywhere are errors.

use serde::Deserialize;

use super::model::{Attachment, AttachmentKind, Base, Branch, NetworkModel, Thevenin};
use crate::converter::ConverterParams;
use crate::error::CoreError;
use crate::Result;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    reference_node: String,
    base: RawBase,
    thevenin: RawThevenin,
    #[serde(default, rename = "branch")]
    branches: Vec<RawBranch>,
    #[serde(default, rename = "converter")]
    converters: Vec<RawConverter>,
    #[serde(default, rename = "shunt")]
    shunts: Vec<RawShunt>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBase {
    s_base_va: f64,
    v_base_v: f64,
    f_n_hz: f64,
    z_base_ohm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThevenin {
    node: String,
    v_th_v: f64,
    #[serde(flatten)]
    imp: RawImpedance,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBranch {
    from: String,
    to: String,
    #[serde(flatten)]
    imp: RawImpedance,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShunt {
    node: String,
    #[serde(flatten)]
    imp: RawImpedance,
}

/// Either ohmic values or per-unit magnitude + X/R.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImpedance {
    r_ohm: Option<f64>,
    l_h: Option<f64>,
    z_pu: Option<f64>,
    x_over_r: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConverter {
    node: String,
    i_d_a: f64,
    i_q_a: f64,
    params: RawConverterParams,
}

/// Converter parameter block; `f_n` comes from `[base]`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConverterParams {
    kp: f64,
    ki: f64,
    kp_pll: f64,
    ki_pll: f64,
    vdc: f64,
    l_conv: f64,
    filter_tau: f64,
    #[serde(default)]
    delay_td: f64,
}

impl RawImpedance {
    /// Resolves to (R, L) in Ω/H, where `context` names the element for
    /// diagnostics.
    fn resolve(&self, z_base: f64, omega1: f64, context: &str) -> Result<(f64, f64)> {
        match (self.r_ohm, self.l_h, self.z_pu, self.x_over_r) {
            (Some(r), Some(l), None, None) => Ok((r, l)),
            (None, None, Some(z_pu), Some(x_over_r)) => {
                if z_pu <= 0.0 || x_over_r < 0.0 {
                    return Err(CoreError::Config(format!(
                        "{context}: z_pu must be > 0 and x_over_r ≥ 0"
                    )));
                }
                let z_mag = z_pu * z_base;
                let r = z_mag / (1.0 + x_over_r * x_over_r).sqrt();
                let x = r * x_over_r;
                Ok((r, x / omega1))
            }
            _ => Err(CoreError::Config(format!(
                "{context}: give either r_ohm + l_h or z_pu + x_over_r"
            ))),
        }
    }
}

/// Parses and validates a network configuration document.
pub fn parse_network(text: &str) -> Result<NetworkModel> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| CoreError::Config(e.to_string()))?;

    let b = &raw.base;
    if b.s_base_va <= 0.0 || b.v_base_v <= 0.0 || b.f_n_hz <= 0.0 {
        return Err(CoreError::Config(
            "[base] entries must all be positive".into(),
        ));
    }
    let z_base = b.v_base_v * b.v_base_v / b.s_base_va;
    if let Some(given) = b.z_base_ohm {
        if (given - z_base).abs() > 1e-9 * z_base {
            return Err(CoreError::Config(format!(
                "z_base_ohm = {given} inconsistent with v_base²/s_base = {z_base}"
            )));
        }
    }
    let base = Base {
        s_base: b.s_base_va,
        v_base: b.v_base_v,
        z_base,
        f_n: b.f_n_hz,
    };
    let omega1 = base.omega1();

    if raw.thevenin.v_th_v <= 0.0 {
        return Err(CoreError::Config("thevenin v_th_v must be > 0".into()));
    }
    let (r_th, l_th) = raw.thevenin.imp.resolve(z_base, omega1, "thevenin")?;
    let thevenin = Thevenin {
        node: raw.thevenin.node.clone(),
        v_th: raw.thevenin.v_th_v,
        r: r_th,
        l: l_th,
    };

    // Node set is implied by the elements; order of first mention is kept.
    let mut nodes: Vec<String> = Vec::new();
    let mut note = |name: &str| {
        if !nodes.iter().any(|n| n == name) {
            nodes.push(name.to_string());
        }
    };
    note(&raw.thevenin.node);
    for br in &raw.branches {
        note(&br.from);
        note(&br.to);
    }
    for cv in &raw.converters {
        note(&cv.node);
    }
    for sh in &raw.shunts {
        note(&sh.node);
    }
    note(&raw.reference_node);

    let mut branches = Vec::with_capacity(raw.branches.len());
    for br in &raw.branches {
        let label = format!("branch {}–{}", br.from, br.to);
        let (r, l) = br.imp.resolve(z_base, omega1, &label)?;
        branches.push(Branch {
            from: br.from.clone(),
            to: br.to.clone(),
            r,
            l,
        });
    }

    let mut attachments = Vec::new();
    for cv in &raw.converters {
        let p = &cv.params;
        attachments.push(Attachment {
            node: cv.node.clone(),
            kind: AttachmentKind::Converter {
                params: ConverterParams {
                    kp: p.kp,
                    ki: p.ki,
                    kp_pll: p.kp_pll,
                    ki_pll: p.ki_pll,
                    vdc: p.vdc,
                    l_conv: p.l_conv,
                    filter_tau: p.filter_tau,
                    f_n: base.f_n,
                    delay_td: p.delay_td,
                },
                i_d: cv.i_d_a,
                i_q: cv.i_q_a,
            },
        });
    }
    for sh in &raw.shunts {
        let label = format!("shunt at {}", sh.node);
        let (r, l) = sh.imp.resolve(z_base, omega1, &label)?;
        attachments.push(Attachment {
            node: sh.node.clone(),
            kind: AttachmentKind::ShuntRl { r, l },
        });
    }

    let model = NetworkModel {
        nodes,
        reference_node: raw.reference_node,
        thevenin,
        branches,
        attachments,
        base,
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
reference_node = "a"

[base]
s_base_va = 10e6
v_base_v = 6600.0
f_n_hz = 50.0

[thevenin]
node = "a"
v_th_v = 6600.0
z_pu = 0.02
x_over_r = 10.0

[[branch]]
from = "a"
to = "b"
z_pu = 0.05
x_over_r = 10.0

[[shunt]]
node = "b"
r_ohm = 50.0
l_h = 0.1
"#;

    #[test]
    fn minimal_two_node_config() {
        let net = parse_network(MINIMAL).unwrap();
        assert_eq!(net.nodes, vec!["a".to_string(), "b".to_string()]);
        assert_eq!(net.branches.len(), 1);
        assert_eq!(net.attachments.len(), 1);
        net.radial_tree().unwrap();
    }

    #[test]
    fn per_unit_conversion_matches_hand_calculation() {
        // |Z| = z_pu · z_base, X/R = 10 ⇒ R = |Z|/√101, X = 10R.
        let net = parse_network(MINIMAL).unwrap();
        let b = &net.branches[0];
        let z_mag = 0.05 * net.base.z_base;
        let r_expect = z_mag / 101f64.sqrt();
        let x_expect = 10.0 * r_expect;
        assert!((b.r / r_expect - 1.0).abs() < 1e-12);
        assert!((b.l * net.base.omega1() / x_expect - 1.0).abs() < 1e-12);

        // Worked numbers for a 4.36 Ω base: 0.05 pu with X/R = 10 resolves
        // to R ≈ 0.0217 Ω and X ≈ 0.217 Ω.
        let text = MINIMAL.replace("s_base_va = 10e6", "s_base_va = 9990825.688073395");
        let net = parse_network(&text).unwrap();
        assert!((net.base.z_base - 4.36).abs() < 1e-9);
        let b = &net.branches[0];
        assert!((b.r - 0.0217).abs() / 0.0217 < 1e-3);
        assert!((b.l * net.base.omega1() - 0.217).abs() / 0.217 < 1e-3);
    }

    #[test]
    fn unknown_key_is_named() {
        let bad = MINIMAL.replace("z_pu = 0.05", "z_pu = 0.05\nbogus_key = 1.0");
        match parse_network(&bad) {
            Err(CoreError::Config(msg)) => {
                assert!(msg.contains("bogus_key"), "message was: {msg}")
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn disconnected_graph_rejected() {
        let bad = MINIMAL.replace(
            "[[shunt]]\nnode = \"b\"",
            "[[shunt]]\nnode = \"zz\"",
        );
        assert!(matches!(parse_network(&bad), Err(CoreError::Topology(_))));
    }

    #[test]
    fn impedance_needs_exactly_one_representation() {
        let bad = MINIMAL.replace("z_pu = 0.05\nx_over_r = 10.0", "z_pu = 0.05");
        assert!(matches!(parse_network(&bad), Err(CoreError::Config(_))));
    }

    #[test]
    fn inconsistent_z_base_rejected() {
        let bad = MINIMAL.replace("f_n_hz = 50.0", "f_n_hz = 50.0\nz_base_ohm = 5.0");
        assert!(matches!(parse_network(&bad), Err(CoreError::Config(_))));
    }
}
