//! Glue shared by the continuous clusterers: the head-vector search space,
//! mapping continuous heads onto nodes, and the convergence detector.

use serde::{Deserialize, Serialize};

use crate::afsa::{run_standard_until, AfsaParams, Bounds, Bulletin};
use crate::error::{Error, Result};
use crate::net::{
    assign_members, cluster_count, intra_cluster_distance, ClusterPlan, NetworkConfig, NodeId,
    NodeState, Position,
};

/// What a clusterer hands back for one round.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub plan: ClusterPlan,
    /// Per head (in `plan.heads` order): whether the above-mean-energy
    /// candidate set was non-empty when it was snapped.
    pub guarded: Vec<bool>,
    /// Best continuous fitness after initialization and after every iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusterOutcome {
    pub(crate) fn trivial(nodes: &[NodeState]) -> Result<Self> {
        let alive: Vec<&NodeState> = nodes.iter().filter(|n| n.alive).collect();
        let only = alive.first().ok_or(Error::NoAliveNodes)?;
        let mean = mean_alive_energy(nodes);
        Ok(Self {
            plan: assign_members(nodes, &[only.id])?,
            guarded: vec![only.energy > mean],
            history: Vec::new(),
            iterations: 0,
            converged: true,
        })
    }
}

/// `n` copies of the field rectangle, one `(x, y)` pair per head.
pub fn head_space(cfg: &NetworkConfig, heads: usize) -> Result<Bounds> {
    let (lo, hi) = cfg.field_bounds();
    Bounds::new(
        std::iter::repeat([lo.x, lo.y]).take(heads).flatten().collect(),
        std::iter::repeat([hi.x, hi.y]).take(heads).flatten().collect(),
    )
}

pub(crate) fn alive_positions(nodes: &[NodeState]) -> Vec<Position> {
    nodes.iter().filter(|n| n.alive).map(|n| n.pos).collect()
}

pub fn mean_alive_energy(nodes: &[NodeState]) -> f64 {
    let (sum, count) = nodes
        .iter()
        .filter(|n| n.alive)
        .fold((0.0, 0usize), |(s, c), n| (s + n.energy, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Nearest alive node to `head` whose energy is strictly above
/// `mean_energy`; the nearest alive node at all when none qualifies.
/// Ties go to the lowest id.
pub fn snap_to_node(head: Position, nodes: &[NodeState], mean_energy: f64) -> Result<NodeId> {
    snap_excluding(head, nodes, mean_energy, &[]).map(|(id, _)| id)
}

fn snap_excluding(
    head: Position,
    nodes: &[NodeState],
    mean_energy: f64,
    taken: &[NodeId],
) -> Result<(NodeId, bool)> {
    let nearest = |guard: bool| {
        nodes
            .iter()
            .filter(|n| n.alive && !taken.contains(&n.id) && (!guard || n.energy > mean_energy))
            .map(|n| (n.pos.distance(&head), n.id))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    };
    if let Some(id) = nearest(true) {
        return Ok((id, true));
    }
    nearest(false).map(|id| (id, false)).ok_or(Error::NoAliveNodes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnappedHeads {
    pub heads: Vec<NodeId>,
    pub guarded: Vec<bool>,
}

/// Snaps every head of a flat head vector, in head order, never reusing a node.
pub fn snap_heads(flat: &[f64], nodes: &[NodeState]) -> Result<SnappedHeads> {
    if flat.is_empty() || flat.len() % 2 != 0 {
        return Err(Error::OddDimension(flat.len()));
    }
    let mean = mean_alive_energy(nodes);
    let mut heads = Vec::with_capacity(flat.len() / 2);
    let mut guarded = Vec::with_capacity(flat.len() / 2);
    for h in flat.chunks_exact(2) {
        let (id, g) = snap_excluding(Position::new(h[0], h[1]), nodes, mean, &heads)?;
        heads.push(id);
        guarded.push(g);
    }
    Ok(SnappedHeads { heads, guarded })
}

/// Stops a search once the snapped head set has stayed the same for
/// `window` consecutive iterations.
#[derive(Debug, Clone)]
pub struct ConvergenceDetector {
    window: usize,
    last: Option<Vec<NodeId>>,
    stable: usize,
}

impl ConvergenceDetector {
    pub fn new(window: usize) -> Self {
        Self {
            window,
            last: None,
            stable: 0,
        }
    }

    /// Feeds one iteration's head ids; returns `true` once converged.
    pub fn observe(&mut self, heads: &[NodeId]) -> bool {
        let mut ids = heads.to_vec();
        ids.sort_unstable();
        if self.last.as_ref() == Some(&ids) {
            self.stable += 1;
        } else {
            self.stable = 0;
            self.last = Some(ids);
        }
        self.window > 0 && self.stable >= self.window
    }

    pub fn stable_iterations(&self) -> usize {
        self.stable
    }
}

/// Final step shared by the continuous clusterers.
pub(crate) fn finish(
    best: &Bulletin,
    nodes: &[NodeState],
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
) -> Result<ClusterOutcome> {
    let snapped = snap_heads(&best.best_position, nodes)?;
    Ok(ClusterOutcome {
        plan: assign_members(nodes, &snapped.heads)?,
        guarded: snapped.guarded,
        history,
        iterations,
        converged,
    })
}

/// Standard AFSA wired up as a clusterer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StandardAfsaParams {
    pub population_multiplier: usize,
    pub visual: f64,
    pub step: f64,
    pub try_number: usize,
    pub crowd_factor: f64,
    pub max_iterations: usize,
    pub convergence_window: usize,
}

impl Default for StandardAfsaParams {
    fn default() -> Self {
        Self {
            population_multiplier: 10,
            visual: 20.0,
            step: 4.0,
            try_number: 5,
            crowd_factor: 0.75,
            max_iterations: 100,
            convergence_window: 20,
        }
    }
}

impl StandardAfsaParams {
    fn afsa(&self, heads: usize) -> AfsaParams {
        AfsaParams {
            population_size: self.population_multiplier * heads,
            visual: self.visual,
            step: self.step,
            try_number: self.try_number,
            crowd_factor: self.crowd_factor,
            max_iterations: self.max_iterations,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = self.afsa(1).violations("algorithms.standard_afsa");
        if self.population_multiplier < 1 {
            out.retain(|v| !v.contains("population_size"));
            out.push("algorithms.standard_afsa.population_multiplier: must be at least 1".into());
        }
        out
    }
}

pub fn standard_afsa_clusterer(
    nodes: &[NodeState],
    cfg: &NetworkConfig,
    params: &StandardAfsaParams,
    seed: u64,
) -> Result<ClusterOutcome> {
    let points = alive_positions(nodes);
    if points.is_empty() {
        return Err(Error::NoAliveNodes);
    }
    if points.len() == 1 {
        return ClusterOutcome::trivial(nodes);
    }
    let n = cluster_count(points.len(), cfg.cluster_fraction);
    let bounds = head_space(cfg, n)?;
    let mut detector = ConvergenceDetector::new(params.convergence_window);
    let mut converged = false;
    let run = run_standard_until(
        |x| intra_cluster_distance(x, &points),
        &bounds,
        &params.afsa(n),
        seed,
        |_, b| {
            // Snapping cannot fail here: there are at least n alive nodes.
            let ids = snap_heads(&b.best_position, nodes).map(|s| s.heads).unwrap_or_default();
            converged = detector.observe(&ids);
            converged
        },
    )?;
    finish(&run.bulletin, nodes, run.history, run.iterations, converged)
}
