//! Validated in-memory network description.

use std::collections::{BTreeMap, BTreeSet};

use crate::converter::ConverterParams;
use crate::error::CoreError;
use crate::Result;

/// Per-unit and fundamental bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Base {
    /// Apparent power base, VA.
    pub s_base: f64,
    /// Voltage base, line-to-line RMS V.
    pub v_base: f64,
    /// Impedance base, Ω. Always `v_base²/s_base`.
    pub z_base: f64,
    /// Fundamental frequency, Hz.
    pub f_n: f64,
}

impl Base {
    pub fn omega1(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f_n
    }
}

/// Series R-L branch between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: String,
    pub to: String,
    /// Resistance, Ω.
    pub r: f64,
    /// Inductance, H.
    pub l: f64,
}

/// Upstream grid equivalent: ideal source behind a series R-L.
#[derive(Debug, Clone, PartialEq)]
pub struct Thevenin {
    /// Node the source branch connects to (the source/load interface).
    pub node: String,
    /// Source voltage, line-to-line RMS V.
    pub v_th: f64,
    /// Series resistance, Ω.
    pub r: f64,
    /// Series inductance, H.
    pub l: f64,
}

impl Thevenin {
    /// Phase voltage magnitude used by the phasor network, V.
    pub fn v_phase(&self) -> f64 {
        self.v_th / 3f64.sqrt()
    }
}

/// Something hanging off a node as a shunt element.
#[derive(Debug, Clone, PartialEq)]
pub enum AttachmentKind {
    /// Converter with current set-points in its own PLL frame, A.
    Converter {
        params: ConverterParams,
        i_d: f64,
        i_q: f64,
    },
    /// Passive shunt R-L to ground (mirror-frequency decoupled by nature).
    ShuntRl { r: f64, l: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attachment {
    pub node: String,
    pub kind: AttachmentKind,
}

impl Attachment {
    pub fn is_converter(&self) -> bool {
        matches!(self.kind, AttachmentKind::Converter { .. })
    }
}

/// Validated network: connected graph of R-L branches with one Thevenin
/// source and shunt attachments, plus the choice of global reference node.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub nodes: Vec<String>,
    pub reference_node: String,
    pub thevenin: Thevenin,
    pub branches: Vec<Branch>,
    pub attachments: Vec<Attachment>,
    pub base: Base,
}

impl NetworkModel {
    /// Index of a node in `nodes`, which is the ordering every solver uses.
    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CoreError::Topology(format!("unknown node `{name}`")))
    }

    /// Validates graph structure and cross-references.
    pub fn validate(&self) -> Result<()> {
        let set: BTreeSet<&str> = self.nodes.iter().map(|s| s.as_str()).collect();
        if set.len() != self.nodes.len() {
            return Err(CoreError::Topology("duplicate node names".into()));
        }
        if !set.contains(self.reference_node.as_str()) {
            return Err(CoreError::Topology(format!(
                "reference node `{}` is not a declared node",
                self.reference_node
            )));
        }
        if !set.contains(self.thevenin.node.as_str()) {
            return Err(CoreError::Topology(format!(
                "thevenin node `{}` is not a declared node",
                self.thevenin.node
            )));
        }
        for b in &self.branches {
            for end in [&b.from, &b.to] {
                if !set.contains(end.as_str()) {
                    return Err(CoreError::Topology(format!(
                        "branch endpoint `{end}` is not a declared node"
                    )));
                }
            }
            if b.from == b.to {
                return Err(CoreError::Topology(format!(
                    "branch from `{}` to itself",
                    b.from
                )));
            }
            if b.r < 0.0 || b.l < 0.0 || (b.r == 0.0 && b.l == 0.0) {
                return Err(CoreError::Topology(format!(
                    "branch {}–{} needs R ≥ 0, L ≥ 0, not both zero",
                    b.from, b.to
                )));
            }
        }
        for a in &self.attachments {
            if !set.contains(a.node.as_str()) {
                return Err(CoreError::Topology(format!(
                    "attachment references unknown node `{}`",
                    a.node
                )));
            }
            match &a.kind {
                AttachmentKind::Converter { params, i_d, i_q } => {
                    params.validate()?;
                    if !(i_d.is_finite() && i_q.is_finite()) {
                        return Err(CoreError::Topology(format!(
                            "converter at `{}` has non-finite set-points",
                            a.node
                        )));
                    }
                    if (params.f_n - self.base.f_n).abs() > 1e-9 * self.base.f_n {
                        return Err(CoreError::Topology(format!(
                            "converter at `{}` uses f_n = {} but the network base is {}",
                            a.node, params.f_n, self.base.f_n
                        )));
                    }
                }
                AttachmentKind::ShuntRl { r, l } => {
                    if *r < 0.0 || *l < 0.0 || (*r == 0.0 && *l == 0.0) {
                        return Err(CoreError::Topology(format!(
                            "shunt at `{}` needs R ≥ 0, L ≥ 0, not both zero",
                            a.node
                        )));
                    }
                }
            }
        }
        self.check_connected()?;
        Ok(())
    }

    fn check_connected(&self) -> Result<()> {
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for b in &self.branches {
            adj.entry(b.from.as_str()).or_default().push(b.to.as_str());
            adj.entry(b.to.as_str()).or_default().push(b.from.as_str());
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.thevenin.node.as_str()];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            if let Some(next) = adj.get(n) {
                stack.extend(next.iter().copied());
            }
        }
        for n in &self.nodes {
            if !seen.contains(n.as_str()) {
                return Err(CoreError::Topology(format!(
                    "node `{n}` is not reachable from the source"
                )));
            }
        }
        Ok(())
    }

    /// Spanning-tree walk from the interface; errors on any cycle.
    ///
    /// Returns children per node index: `(child, branch index)`.
    pub fn radial_tree(&self) -> Result<Vec<Vec<(usize, usize)>>> {
        let root = self.node_index(&self.thevenin.node)?;
        let n = self.nodes.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (bi, b) in self.branches.iter().enumerate() {
            let f = self.node_index(&b.from)?;
            let t = self.node_index(&b.to)?;
            adj[f].push((t, bi));
            adj[t].push((f, bi));
        }
        let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        let mut stack = vec![(root, usize::MAX)];
        seen[root] = true;
        while let Some((node, via)) = stack.pop() {
            for &(next, bi) in &adj[node] {
                if bi == via {
                    continue;
                }
                if seen[next] {
                    return Err(CoreError::Topology(format!(
                        "network is not radial: cycle through `{}`",
                        self.nodes[next]
                    )));
                }
                seen[next] = true;
                children[node].push((next, bi));
                stack.push((next, bi));
            }
        }
        Ok(children)
    }
}
