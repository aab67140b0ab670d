//! LEACH probabilistic head rotation.
//!
//! A node that has not served as head in the current epoch elects itself
//! with probability `T = p / (1 - p * (r mod 1/p))`; nodes that already
//! served wait for the next epoch.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{assign_members, ClusterPlan, NodeId, NodeState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeachParams {
    pub head_probability: f64,
    /// Rounds per rotation epoch; `round(1 / head_probability)` when absent.
    pub epoch_length: Option<usize>,
}

impl Default for LeachParams {
    fn default() -> Self {
        Self {
            head_probability: 0.05,
            epoch_length: None,
        }
    }
}

impl LeachParams {
    pub fn epoch(&self) -> usize {
        self.epoch_length
            .unwrap_or_else(|| (1.0 / self.head_probability).round() as usize)
            .max(1)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.head_probability > 0.0 && self.head_probability < 1.0) {
            out.push(format!(
                "algorithms.leach.head_probability: must be in (0, 1), got {}",
                self.head_probability
            ));
        }
        if self.epoch_length == Some(0) {
            out.push("algorithms.leach.epoch_length: must be at least 1".into());
        }
        out
    }
}

/// Which nodes have already served as head in the current epoch.
#[derive(Debug, Clone, Default)]
pub struct LeachRotation {
    served: BTreeSet<NodeId>,
}

impl LeachRotation {
    pub fn has_served(&self, id: NodeId) -> bool {
        self.served.contains(&id)
    }
}

/// Election threshold for an eligible node in round `round_index` (0-based).
pub fn leach_threshold(p: f64, round_index: usize, epoch: usize) -> f64 {
    let denom = 1.0 - p * (round_index % epoch) as f64;
    if denom <= 0.0 {
        1.0
    } else {
        (p / denom).min(1.0)
    }
}

/// Elects this round's heads. One uniform draw per eligible alive node, in id
/// order. When nobody is elected a single head is forced, chosen uniformly
/// among eligible nodes (or all alive nodes if none is eligible).
pub fn leach_select<R: Rng + ?Sized>(
    nodes: &[NodeState],
    round_index: usize,
    params: &LeachParams,
    rng: &mut R,
    rotation: &mut LeachRotation,
) -> Result<ClusterPlan> {
    let epoch = params.epoch();
    if round_index % epoch == 0 {
        rotation.served.clear();
    }
    let mut alive: Vec<&NodeState> = nodes.iter().filter(|n| n.alive).collect();
    if alive.is_empty() {
        return Err(Error::NoAliveNodes);
    }
    alive.sort_by_key(|n| n.id);
    let eligible: Vec<NodeId> = alive
        .iter()
        .filter(|n| !rotation.served.contains(&n.id))
        .map(|n| n.id)
        .collect();

    let t = leach_threshold(params.head_probability, round_index, epoch);
    let mut heads: Vec<NodeId> = eligible
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < t)
        .collect();
    if heads.is_empty() {
        let pool: Vec<NodeId> = if eligible.is_empty() {
            alive.iter().map(|n| n.id).collect()
        } else {
            eligible
        };
        heads.push(pool[rng.random_range(0..pool.len())]);
    }
    rotation.served.extend(heads.iter().copied());
    assign_members(nodes, &heads)
}
