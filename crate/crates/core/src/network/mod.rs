//! Network topology, fundamental-frequency flow, and impedance aggregation.

mod aggregate;
mod config;
mod flow;
mod model;

pub use aggregate::{aggregate, alignment_angle, Side};
pub use config::parse_network;
pub use flow::{fundamental_flow, FlowSolution};
pub use model::{Attachment, AttachmentKind, Base, Branch, NetworkModel, Thevenin};
