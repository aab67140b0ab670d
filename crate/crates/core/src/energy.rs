//! First-order radio model and per-round energy bookkeeping.
//!
//! A round has four phases:
//! 1. every alive node receives the cluster-setup broadcast,
//! 2. each member sends one packet to its head, which receives it,
//! 3. each head aggregates `members + 1` signals,
//! 4. each head sends one packet to the base station.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{euclidean_distance, ClusterPlan, NetworkConfig, NodeState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConstants {
    /// Electronics energy, J/bit.
    pub e_elec: f64,
    /// Free-space amplifier energy, J/bit/m².
    pub e_amp: f64,
    /// Aggregation energy, J/bit/signal.
    pub e_da: f64,
}

impl Default for RadioConstants {
    fn default() -> Self {
        Self {
            e_elec: 50e-9,
            e_amp: 100e-12,
            e_da: 5e-9,
        }
    }
}

impl RadioConstants {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [("e_elec", self.e_elec), ("e_amp", self.e_amp), ("e_da", self.e_da)] {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("energy.{name}: must be strictly positive, got {v}"));
            }
        }
        out
    }
}

/// Energy to transmit `bits` over `distance` meters.
pub fn tx_energy(bits: u64, distance: f64, rc: &RadioConstants) -> Result<f64> {
    if bits == 0 {
        return Err(Error::invalid("tx_energy: packet size must be positive"));
    }
    if !(distance >= 0.0) {
        return Err(Error::invalid(format!("tx_energy: negative distance {distance}")));
    }
    Ok(tx_unchecked(bits, distance, rc))
}

/// Energy to receive `bits`.
pub fn rx_energy(bits: u64, rc: &RadioConstants) -> Result<f64> {
    if bits == 0 {
        return Err(Error::invalid("rx_energy: packet size must be positive"));
    }
    Ok(rx_unchecked(bits, rc))
}

/// Energy a head spends fusing `signals` packets of `bits` each.
pub fn aggregation_energy(bits: u64, signals: u64, rc: &RadioConstants) -> Result<f64> {
    if bits == 0 || signals == 0 {
        return Err(Error::invalid(
            "aggregation_energy: bits and signals must both be positive",
        ));
    }
    Ok(agg_unchecked(bits, signals, rc))
}

#[inline]
fn tx_unchecked(bits: u64, distance: f64, rc: &RadioConstants) -> f64 {
    let k = bits as f64;
    rc.e_elec * k + rc.e_amp * k * distance * distance
}

#[inline]
fn rx_unchecked(bits: u64, rc: &RadioConstants) -> f64 {
    rc.e_elec * bits as f64
}

#[inline]
fn agg_unchecked(bits: u64, signals: u64, rc: &RadioConstants) -> f64 {
    rc.e_da * bits as f64 * signals as f64
}

/// Charges one communication round against `nodes` and returns the
/// per-node energy drawn (indexed like `nodes`; zero for nodes that were
/// already dead). Nodes at or below zero are marked dead only after all
/// four phases are charged.
pub fn apply_round(
    nodes: &mut [NodeState],
    plan: &ClusterPlan,
    cfg: &NetworkConfig,
) -> Result<Vec<f64>> {
    plan.check_against(nodes)?;
    let bits = cfg.packet_bits;
    let rc = &cfg.radio;
    let slot: std::collections::HashMap<usize, usize> =
        nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();

    let mut deltas = vec![0.0; nodes.len()];
    let rx = rx_unchecked(bits, rc);

    // Phase 1: setup broadcast.
    for (i, n) in nodes.iter().enumerate() {
        if n.alive {
            deltas[i] += rx;
        }
    }
    // Phase 2: member uplinks.
    let mut member_count = vec![0u64; nodes.len()];
    for (&m, &h) in &plan.membership {
        let (mi, hi) = (slot[&m], slot[&h]);
        let d = euclidean_distance(nodes[mi].pos, nodes[hi].pos);
        deltas[mi] += tx_unchecked(bits, d, rc);
        deltas[hi] += rx;
        member_count[hi] += 1;
    }
    // Phases 3 and 4: aggregation and station uplink.
    for &h in &plan.heads {
        let hi = slot[&h];
        deltas[hi] += agg_unchecked(bits, member_count[hi] + 1, rc);
        let d = euclidean_distance(nodes[hi].pos, cfg.base_station);
        deltas[hi] += tx_unchecked(bits, d, rc);
    }

    for (n, d) in nodes.iter_mut().zip(&deltas) {
        n.energy -= d;
    }
    for n in nodes.iter_mut() {
        if n.alive && n.energy <= 0.0 {
            n.alive = false;
        }
    }
    Ok(deltas)
}
