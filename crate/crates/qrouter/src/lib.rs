//! Deterministic simulator of a teleportation-based quantum router network.
//!
//! A single state-vector register ([`qsim`]) backs every node in the network.
//! Qubits move between nodes by teleportation ([`teleport`]) over Bell pairs
//! handed out by an entangled-pair manager ([`epm`]). Forward messages carry
//! the classical measurement results hop by hop along routes chosen from
//! per-node forwarding tables ([`routing`]). The [`node`] module ties those
//! pieces together and emits the wire-format trace; [`netsim`] drives whole
//! scenarios through a deterministic event loop, and [`cli`] exposes the
//! simulator as a command-line tool over JSON topology files.

pub mod cli;
pub mod epm;
pub mod netsim;
pub mod node;
pub mod qsim;
pub mod routing;
pub mod teleport;
pub mod topology;
pub mod trace;

pub use epm::{Epm, EprId};
pub use node::{ForwardMessage, Network, TeleportResult};
pub use qsim::{QuantumRegister, QubitId};
pub use routing::{ForwardingTable, NodeId, Topology};
pub use teleport::BsmResult;
