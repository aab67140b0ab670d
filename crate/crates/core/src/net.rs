//! Sensor-field data model: node geometry, cluster assignment and the
//! intra-cluster distance objective shared by every clusterer.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::RadioConstants;
use crate::error::{Error, Result};

pub type NodeId = usize;

/// A point on the field, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn distance(&self, other: &Position) -> f64 {
        euclidean_distance(*self, *other)
    }

    #[inline]
    pub(crate) fn distance_sq_to(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.x;
        let dy = y - self.y;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    pub pos: Position,
    /// Residual energy in joules. A node that dies mid-round keeps its
    /// (possibly negative) balance so the energy ledger stays exact.
    pub energy: f64,
    pub alive: bool,
}

impl NodeState {
    pub fn new(id: NodeId, pos: Position, energy: f64) -> Self {
        Self {
            id,
            pos,
            energy,
            alive: energy > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub field_width: f64,
    pub field_height: f64,
    pub base_station: Position,
    pub nodes_count: usize,
    pub packet_bits: u64,
    pub initial_energy: f64,
    pub radio: RadioConstants,
    pub cluster_fraction: f64,
    pub max_rounds: usize,
}

/// Initial per-node battery charge, in joules.
///
/// With the default radio and a 4000-bit packet, 0.5 J outlasts the
/// 100-round cap for every clusterer. 0.07 J puts the swarm clusterers'
/// last node death near round 80, in line with the reference lifetimes.
pub const DEFAULT_INITIAL_ENERGY: f64 = 0.07;

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            field_width: 100.0,
            field_height: 100.0,
            base_station: Position::new(50.0, 175.0),
            nodes_count: 100,
            packet_bits: 4000,
            initial_energy: DEFAULT_INITIAL_ENERGY,
            radio: RadioConstants::default(),
            cluster_fraction: 0.05,
            max_rounds: 100,
        }
    }
}

impl NetworkConfig {
    /// Every violated invariant, as `field: reason` strings.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.field_width.is_finite() && self.field_width > 0.0) {
            out.push(format!("network.field_width: must be a positive finite number, got {}", self.field_width));
        }
        if !(self.field_height.is_finite() && self.field_height > 0.0) {
            out.push(format!("network.field_height: must be a positive finite number, got {}", self.field_height));
        }
        if !self.base_station.is_finite() {
            out.push("network.base_station: coordinates must be finite".to_string());
        }
        if self.nodes_count < 1 {
            out.push("network.nodes_count: must be at least 1".to_string());
        }
        if self.packet_bits < 1 {
            out.push("network.packet_bits: must be at least 1".to_string());
        }
        if !(self.initial_energy.is_finite() && self.initial_energy > 0.0) {
            out.push(format!("network.initial_energy: must be > 0, got {}", self.initial_energy));
        }
        if !(self.cluster_fraction > 0.0 && self.cluster_fraction <= 1.0) {
            out.push(format!("network.cluster_fraction: must be in (0, 1], got {}", self.cluster_fraction));
        }
        out.extend(self.radio.violations());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    /// Lower and upper corner of the field.
    pub fn field_bounds(&self) -> (Position, Position) {
        (
            Position::new(0.0, 0.0),
            Position::new(self.field_width, self.field_height),
        )
    }

    /// Uniform i.i.d. node placement over the field, full battery.
    pub fn deploy(&self, layout_seed: u64) -> Vec<NodeState> {
        let mut rng = ChaCha8Rng::seed_from_u64(layout_seed);
        (0..self.nodes_count)
            .map(|id| {
                let x = rng.random::<f64>() * self.field_width;
                let y = rng.random::<f64>() * self.field_height;
                NodeState::new(id, Position::new(x, y), self.initial_energy)
            })
            .collect()
    }
}

/// Heads for one round plus the member-to-head map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPlan {
    pub heads: Vec<NodeId>,
    pub membership: BTreeMap<NodeId, NodeId>,
}

impl ClusterPlan {
    pub fn head_count(&self) -> usize {
        self.heads.len()
    }

    pub fn members_of(&self, head: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.membership
            .iter()
            .filter(move |(_, &h)| h == head)
            .map(|(&m, _)| m)
    }

    /// Checks the plan against a node table: heads alive and distinct,
    /// every alive node covered exactly once, no dead node referenced.
    pub fn check_against(&self, nodes: &[NodeState]) -> Result<()> {
        if self.heads.is_empty() {
            return Err(Error::EmptyHeads);
        }
        let lookup = index_nodes(nodes);
        let mut seen = BTreeSet::new();
        for &h in &self.heads {
            let node = lookup.get(&h).ok_or(Error::UnknownNode(h))?;
            if !node.alive {
                return Err(Error::DeadHead(h));
            }
            if !seen.insert(h) {
                return Err(Error::DuplicateHead(h));
            }
        }
        for (&m, &h) in &self.membership {
            let node = lookup.get(&m).ok_or(Error::UnknownNode(m))?;
            if !node.alive {
                return Err(Error::invalid(format!("dead node {m} listed as a member")));
            }
            if seen.contains(&m) {
                return Err(Error::invalid(format!("head {m} also listed as a member")));
            }
            if !seen.contains(&h) {
                return Err(Error::invalid(format!("member {m} assigned to non-head {h}")));
            }
        }
        let alive = nodes.iter().filter(|n| n.alive).count();
        if alive != self.heads.len() + self.membership.len() {
            return Err(Error::invalid("plan does not cover every alive node"));
        }
        Ok(())
    }
}

fn index_nodes(nodes: &[NodeState]) -> BTreeMap<NodeId, &NodeState> {
    nodes.iter().map(|n| (n.id, n)).collect()
}

#[inline]
pub fn euclidean_distance(a: Position, b: Position) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    (dx * dx + dy * dy).sqrt()
}

/// Joins every alive non-head node to its nearest head. Equidistant heads
/// resolve to the lowest id. Dead nodes in `nodes` are ignored.
pub fn assign_members(nodes: &[NodeState], heads: &[NodeId]) -> Result<ClusterPlan> {
    if heads.is_empty() {
        return Err(Error::EmptyHeads);
    }
    let lookup = index_nodes(nodes);
    let mut seen = BTreeSet::new();
    for &h in heads {
        let node = lookup.get(&h).ok_or(Error::UnknownNode(h))?;
        if !node.alive {
            return Err(Error::DeadHead(h));
        }
        if !seen.insert(h) {
            return Err(Error::DuplicateHead(h));
        }
    }
    // `seen` iterates in ascending id order, so a strict comparison keeps the lowest id on ties.
    let head_positions: Vec<(NodeId, Position)> =
        seen.iter().map(|&h| (h, lookup[&h].pos)).collect();

    let mut membership = BTreeMap::new();
    for node in nodes.iter().filter(|n| n.alive && !seen.contains(&n.id)) {
        let mut best = head_positions[0].0;
        let mut best_d = f64::INFINITY;
        for &(h, p) in &head_positions {
            let d = euclidean_distance(node.pos, p);
            if d < best_d {
                best_d = d;
                best = h;
            }
        }
        membership.insert(node.id, best);
    }
    Ok(ClusterPlan {
        heads: heads.to_vec(),
        membership,
    })
}

/// Sum over alive nodes of the distance to the nearest head coordinate.
/// `heads` is the flat `(x1, y1, x2, y2, ...)` encoding.
pub fn fitness(heads: &[f64], nodes: &[NodeState]) -> Result<f64> {
    if heads.is_empty() || heads.len() % 2 != 0 {
        return Err(Error::OddDimension(heads.len()));
    }
    Ok(nodes
        .iter()
        .filter(|n| n.alive)
        .map(|n| nearest_head(heads, &n.pos).1)
        .sum())
}

/// Index and distance of the closest head in a flat head vector.
/// Lowest index wins ties.
#[inline]
pub(crate) fn nearest_head(heads: &[f64], p: &Position) -> (usize, f64) {
    let mut best = 0;
    let mut best_sq = f64::INFINITY;
    for (i, h) in heads.chunks_exact(2).enumerate() {
        let d = p.distance_sq_to(h[0], h[1]);
        if d < best_sq {
            best_sq = d;
            best = i;
        }
    }
    (best, best_sq.sqrt())
}

/// Intra-cluster distance over a fixed point set; the hot path used by the optimizers.
pub(crate) fn intra_cluster_distance(heads: &[f64], points: &[Position]) -> f64 {
    points.iter().map(|p| nearest_head(heads, p).1).sum()
}

/// Number of clusters for a given alive population: `max(1, round(fraction * alive))`,
/// rounding halves up, never more than `alive`.
pub fn cluster_count(alive_count: usize, fraction: f64) -> usize {
    if alive_count == 0 {
        return 0;
    }
    // The epsilon keeps products like 0.05 * 10 on the half-up side.
    let raw = (fraction * alive_count as f64 + 0.5 + 1e-9).floor() as usize;
    raw.clamp(1, alive_count)
}
