//! Reduction of the radial network to source/load impedance equivalents.
//!
//! Every local converter model is first expressed in the global frame (the
//! MFD shortcut relabels passive-like models untouched), branch impedances
//! are evaluated in place, and the tree is folded leaf-to-root with series
//! and parallel rules. The fold happens at the source/load interface — the
//! node the Thevenin branch lands on; the reference-node choice only sets
//! the angle origin, through the flow solution's re-referenced angles.

use std::collections::BTreeMap;

use super::flow::FlowSolution;
use super::model::{AttachmentKind, NetworkModel};
use crate::error::CoreError;
use crate::frames::{align_to_global, dq_to_pn, ReferenceAngle};
use crate::freqresp::{eval_rl_branch, Domain, Frame, FrequencyGrid, FrequencyResponse, Kind};
use crate::Result;

/// Which equivalent to compute, both seen from the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Everything downstream of the interface, folded to one matrix.
    LoadSeenFromRef,
    /// The Thevenin source branch.
    SourceSeenFromRef,
}

/// Rotation angle that expresses a local model in the global frame.
///
/// A node whose voltage leads the reference by θ hosts a local frame rotated
/// by +θ; writing its matrix in reference coordinates therefore conjugates by
/// the inverse rotation, which is the rotation evaluated at −θ. The
/// time-domain sweep in `simkit` pins this sign: aligning with +θ makes the
/// analytic aggregate and the measured impedance disagree far beyond
/// tolerance for any mirror-frequency-coupled model.
pub fn alignment_angle(theta_node: ReferenceAngle) -> ReferenceAngle {
    -theta_node
}

/// Folds the network into a global-frame impedance equivalent.
///
/// `models` holds one local-frame model per converter attachment, keyed by
/// node name, all in the same domain. Passive branches and shunts are
/// evaluated internally on `grid` and transformed to that domain.
pub fn aggregate(
    net: &NetworkModel,
    flow: &FlowSolution,
    models: &BTreeMap<String, FrequencyResponse>,
    grid: &FrequencyGrid,
    side: Side,
    tol_mfd: f64,
) -> Result<FrequencyResponse> {
    net.validate()?;
    let w1 = net.base.omega1();

    // Domain is dictated by the converter models; an all-passive network
    // aggregates in dq.
    let domain = models
        .values()
        .next()
        .map(|m| m.domain())
        .unwrap_or(Domain::Dq);
    for (node, m) in models {
        if m.domain() != domain {
            return Err(CoreError::DomainMismatch {
                expected: domain.to_string(),
                got: format!("{} (model at `{node}`)", m.domain()),
            });
        }
        if !matches!(m.frame(), Frame::Local(_)) {
            return Err(CoreError::FrameMismatch(format!(
                "model at `{node}` must be local-frame, got {}",
                m.frame()
            )));
        }
        if m.kind() != Kind::Impedance {
            return Err(CoreError::KindMismatch(format!(
                "model at `{node}` must be an impedance, got {}",
                m.kind()
            )));
        }
    }

    let passive = |r: f64, l: f64| -> Result<FrequencyResponse> {
        let z = eval_rl_branch(r, l, w1, grid)?;
        match domain {
            Domain::Dq => Ok(z),
            Domain::Pn => dq_to_pn(&z),
        }
    };

    if side == Side::SourceSeenFromRef {
        return passive(net.thevenin.r, net.thevenin.l);
    }

    // One impedance per node from its shunt attachments.
    let mut at_node: Vec<Vec<FrequencyResponse>> = vec![Vec::new(); net.nodes.len()];
    for a in &net.attachments {
        let ni = net.node_index(&a.node)?;
        let z = match &a.kind {
            AttachmentKind::Converter { .. } => {
                let model = models.get(&a.node).ok_or_else(|| {
                    CoreError::Config(format!("no impedance model supplied for converter at `{}`", a.node))
                })?;
                let theta = flow.reference_angle(&a.node)?;
                align_to_global(model, alignment_angle(theta), tol_mfd)?
            }
            AttachmentKind::ShuntRl { r, l } => passive(*r, *l)?,
        };
        at_node[ni].push(z);
    }

    let children = net.radial_tree()?;
    let root = net.node_index(&net.thevenin.node)?;
    let folded = fold(net, &children, &at_node, &passive, root)?;
    folded.ok_or_else(|| {
        CoreError::Topology("load side is an open circuit: no attachments downstream".into())
    })
}

/// Recursively folds the subtree under `node`; `None` means open circuit.
fn fold(
    net: &NetworkModel,
    children: &[Vec<(usize, usize)>],
    at_node: &[Vec<FrequencyResponse>],
    passive: &dyn Fn(f64, f64) -> Result<FrequencyResponse>,
    node: usize,
) -> Result<Option<FrequencyResponse>> {
    let mut parts: Vec<FrequencyResponse> = at_node[node].to_vec();
    for &(child, branch_idx) in &children[node] {
        if let Some(sub) = fold(net, children, at_node, passive, child)? {
            let b = &net.branches[branch_idx];
            let z_branch = passive(b.r, b.l)?;
            parts.push(z_branch.series(&sub)?);
        }
        // Dead-end branches carry no current and drop out of the equivalent.
    }
    let mut iter = parts.into_iter();
    let Some(first) = iter.next() else {
        return Ok(None);
    };
    let mut acc = first;
    for z in iter {
        acc = acc.parallel(&z)?;
    }
    Ok(Some(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{self, rotate_dq};
    use crate::network::{fundamental_flow, parse_network};

    const SINGLE: &str = r#"
reference_node = "interface"

[base]
s_base_va = 10e6
v_base_v = 6600.0
f_n_hz = 50.0

[thevenin]
node = "interface"
v_th_v = 6600.0
z_pu = 0.02
x_over_r = 10.0

[[branch]]
from = "interface"
to = "n1"
z_pu = 0.15
x_over_r = 10.0

[[converter]]
node = "n1"
i_d_a = 100.0
i_q_a = 33.0
[converter.params]
kp = 6.43e-4
ki = 0.161
kp_pll = 0.00758
ki_pll = 0.152
vdc = 1127.0
l_conv = 6.93e-3
filter_tau = 5e-4
"#;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::log_spaced(1.0, 1000.0, 9).unwrap()
    }

    fn converter_model(net: &NetworkModel, flow: &FlowSolution, node: &str) -> FrequencyResponse {
        let Some(AttachmentKind::Converter { params, .. }) = net
            .attachments
            .iter()
            .find(|a| a.node == node)
            .map(|a| &a.kind)
        else {
            panic!("no converter at {node}");
        };
        let op = flow
            .converter_operating_points()
            .iter()
            .find(|(n, _)| n == node)
            .map(|(_, op)| *op)
            .unwrap();
        crate::converter::linearize_converter(params, &op, &grid()).unwrap()
    }

    #[test]
    fn degenerate_tree_is_branch_plus_rotated_converter() {
        let net = parse_network(SINGLE).unwrap();
        let flow = fundamental_flow(&net, 1e-10, 50).unwrap();
        let model = converter_model(&net, &flow, "n1");
        let mut models = BTreeMap::new();
        models.insert("n1".to_string(), model.clone());

        let agg = aggregate(
            &net,
            &flow,
            &models,
            &grid(),
            Side::LoadSeenFromRef,
            frames::MFD_TOL_ANALYTIC,
        )
        .unwrap();

        let b = &net.branches[0];
        let z_branch = eval_rl_branch(b.r, b.l, net.base.omega1(), &grid()).unwrap();
        let theta = flow.reference_angle("n1").unwrap();
        let z_conv = rotate_dq(&model, alignment_angle(theta)).unwrap();
        let expect = z_branch.series(&z_conv).unwrap();
        for (a, e) in agg.values().iter().zip(expect.values()) {
            assert!((*a - *e).frobenius_norm() < 1e-12 * e.frobenius_norm());
        }
        assert_eq!(agg.frame(), &Frame::Global);
    }

    #[test]
    fn mfd_stub_aggregate_ignores_flow_angles() {
        // Replace the converter by a passive stub model: the aggregate must
        // be identical whether angles come from the flow or are forced to 0,
        // bit-for-bit (the MFD shortcut never rotates).
        let net = parse_network(SINGLE).unwrap();
        let flow = fundamental_flow(&net, 1e-10, 50).unwrap();
        assert!(flow.theta("n1").unwrap().abs() > 1e-4);

        let stub = eval_rl_branch(5.0, 0.02, net.base.omega1(), &grid())
            .unwrap()
            .with_frame(Frame::Local("n1".into()));
        let mut models = BTreeMap::new();
        models.insert("n1".to_string(), stub);

        let with_flow = aggregate(
            &net,
            &flow,
            &models,
            &grid(),
            Side::LoadSeenFromRef,
            frames::MFD_TOL_ANALYTIC,
        )
        .unwrap();

        let no_load = parse_network(
            &SINGLE
                .replace("i_d_a = 100.0", "i_d_a = 0.0")
                .replace("i_q_a = 33.0", "i_q_a = 0.0"),
        )
        .unwrap();
        let flow0 = fundamental_flow(&no_load, 1e-10, 50).unwrap();
        let with_zero = aggregate(
            &no_load,
            &flow0,
            &models,
            &grid(),
            Side::LoadSeenFromRef,
            frames::MFD_TOL_ANALYTIC,
        )
        .unwrap();
        assert_eq!(with_flow.values(), with_zero.values());
    }

    #[test]
    fn source_side_is_the_thevenin_branch() {
        let net = parse_network(SINGLE).unwrap();
        let flow = fundamental_flow(&net, 1e-10, 50).unwrap();
        let src = aggregate(
            &net,
            &flow,
            &BTreeMap::new(),
            &grid(),
            Side::SourceSeenFromRef,
            frames::MFD_TOL_ANALYTIC,
        )
        .unwrap();
        let expect = eval_rl_branch(net.thevenin.r, net.thevenin.l, net.base.omega1(), &grid())
            .unwrap();
        assert_eq!(src.values(), expect.values());
    }

    #[test]
    fn missing_converter_model_is_an_error() {
        let net = parse_network(SINGLE).unwrap();
        let flow = fundamental_flow(&net, 1e-10, 50).unwrap();
        let err = aggregate(
            &net,
            &flow,
            &BTreeMap::new(),
            &grid(),
            Side::LoadSeenFromRef,
            frames::MFD_TOL_ANALYTIC,
        );
        assert!(matches!(err, Err(CoreError::Config(_))));
    }

    #[test]
    fn pn_domain_aggregation_matches_transformed_dq() {
        // Aggregating pn models equals transforming the dq aggregate, since
        // the basis change commutes with sums and inverses.
        let net = parse_network(SINGLE).unwrap();
        let flow = fundamental_flow(&net, 1e-10, 50).unwrap();
        let model = converter_model(&net, &flow, "n1");
        let mut dq_models = BTreeMap::new();
        dq_models.insert("n1".to_string(), model.clone());
        let mut pn_models = BTreeMap::new();
        pn_models.insert("n1".to_string(), dq_to_pn(&model).unwrap());

        let agg_dq = aggregate(
            &net,
            &flow,
            &dq_models,
            &grid(),
            Side::LoadSeenFromRef,
            frames::MFD_TOL_ANALYTIC,
        )
        .unwrap();
        let agg_pn = aggregate(
            &net,
            &flow,
            &pn_models,
            &grid(),
            Side::LoadSeenFromRef,
            frames::MFD_TOL_ANALYTIC,
        )
        .unwrap();
        let expect = dq_to_pn(&agg_dq).unwrap();
        for (a, e) in agg_pn.values().iter().zip(expect.values()) {
            assert!((*a - *e).frobenius_norm() < 1e-10 * e.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn cycle_is_rejected() {
        let cyclic = format!(
            "{SINGLE}\n[[branch]]\nfrom = \"n1\"\nto = \"interface\"\nz_pu = 0.1\nx_over_r = 10.0\n"
        );
        let net = parse_network(&cyclic).unwrap();
        let flow = fundamental_flow(&net, 1e-10, 50).unwrap();
        let stub = eval_rl_branch(5.0, 0.02, net.base.omega1(), &grid())
            .unwrap()
            .with_frame(Frame::Local("n1".into()));
        let mut models = BTreeMap::new();
        models.insert("n1".to_string(), stub);
        let err = aggregate(
            &net,
            &flow,
            &models,
            &grid(),
            Side::LoadSeenFromRef,
            frames::MFD_TOL_ANALYTIC,
        );
        assert!(matches!(err, Err(CoreError::Topology(_))));
    }
}
