//! Entangled-pair management: one logical service with global visibility
//! hands out Bell pairs between node pairs and tracks their lifecycle.
//!
//! Pair ids are dense and never reused: after `k` creations the ids are
//! exactly `0..k`. A pair is `Available` from creation until `take_epr`
//! consumes it, and consumption happens exactly once.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::qsim::{QsimError, QuantumRegister, QubitId};
use crate::routing::NodeId;
use crate::teleport;

/// Identifier of one Bell pair, dense from 0 per manager.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EprId(pub u64);

impl fmt::Display for EprId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprStatus {
    Available,
    Consumed,
}

/// Bookkeeping for one Bell pair: which nodes hold which half.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EprRecord {
    pub id: EprId,
    pub node_a: NodeId,
    pub node_b: NodeId,
    pub qubit_a: QubitId,
    pub qubit_b: QubitId,
    pub status: EprStatus,
}

impl EprRecord {
    /// True when the pair links exactly the two given nodes, in either order.
    pub fn connects(&self, x: &NodeId, y: &NodeId) -> bool {
        (self.node_a == *x && self.node_b == *y) || (self.node_a == *y && self.node_b == *x)
    }

    pub fn half_held_by(&self, node: &NodeId) -> Option<QubitId> {
        if self.node_a == *node {
            Some(self.qubit_a)
        } else if self.node_b == *node {
            Some(self.qubit_b)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EpmError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("a pair needs two distinct nodes, got {0} twice")]
    SameNode(NodeId),
    #[error("unknown entangled pair id {0}")]
    UnknownEprId(EprId),
    #[error("node {node} holds no half of pair {id}")]
    NotAnEndpoint { id: EprId, node: NodeId },
    #[error(transparent)]
    Register(#[from] QsimError),
}

type Result<T> = std::result::Result<T, EpmError>;

/// The pair manager. It allocates the underlying qubits in the shared
/// register but leaves node-side ownership bookkeeping to the caller.
#[derive(Debug, Clone)]
pub struct Epm {
    nodes: BTreeSet<NodeId>,
    records: Vec<EprRecord>,
}

impl Epm {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        Self {
            nodes: nodes.into_iter().collect(),
            records: Vec::new(),
        }
    }

    /// Creates a fresh Bell pair between two distinct nodes; `qubit_a` is
    /// held by `node_a` and `qubit_b` by `node_b`.
    pub fn create_epr(
        &mut self,
        reg: &mut QuantumRegister,
        node_a: &NodeId,
        node_b: &NodeId,
    ) -> Result<EprId> {
        self.check_node(node_a)?;
        self.check_node(node_b)?;
        if node_a == node_b {
            return Err(EpmError::SameNode(node_a.clone()));
        }
        let (qubit_a, qubit_b) = teleport::make_bell_pair(reg)?;
        let id = EprId(self.records.len() as u64);
        self.records.push(EprRecord {
            id,
            node_a: node_a.clone(),
            node_b: node_b.clone(),
            qubit_a,
            qubit_b,
            status: EprStatus::Available,
        });
        Ok(id)
    }

    /// Hands out a pair between `local` and `peer`: the lowest-id available
    /// one, or a freshly created pair if none is in stock. Returns the pair
    /// id and the half held by `local`; the pair is consumed.
    pub fn take_epr(
        &mut self,
        reg: &mut QuantumRegister,
        local: &NodeId,
        peer: &NodeId,
    ) -> Result<(EprId, QubitId)> {
        self.check_node(local)?;
        self.check_node(peer)?;
        if local == peer {
            return Err(EpmError::SameNode(local.clone()));
        }
        let id = match self
            .records
            .iter()
            .find(|r| r.status == EprStatus::Available && r.connects(local, peer))
        {
            Some(record) => record.id,
            None => self.create_epr(reg, local, peer)?,
        };
        let record = &mut self.records[id.0 as usize];
        record.status = EprStatus::Consumed;
        Ok((id, record.half_held_by(local).unwrap()))
    }

    /// The half of pair `id` held by `holder`.
    pub fn lookup_remote_half(&self, id: EprId, holder: &NodeId) -> Result<QubitId> {
        let record = self.record(id)?;
        record
            .half_held_by(holder)
            .ok_or_else(|| EpmError::NotAnEndpoint { id, node: holder.clone() })
    }

    pub fn record(&self, id: EprId) -> Result<&EprRecord> {
        self.records
            .get(id.0 as usize)
            .ok_or(EpmError::UnknownEprId(id))
    }

    pub fn records(&self) -> &[EprRecord] {
        &self.records
    }

    pub fn pair_count(&self) -> usize {
        self.records.len()
    }

    fn check_node(&self, node: &NodeId) -> Result<()> {
        if self.nodes.contains(node) {
            Ok(())
        } else {
            Err(EpmError::UnknownNode(node.clone()))
        }
    }
}
