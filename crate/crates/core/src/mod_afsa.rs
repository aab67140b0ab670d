//! Energy-aware clusterer built on a modified fish swarm.
//!
//! Differences from the standard swarm:
//! - each fish's visual is a fraction of its distance to the bulletin, and
//!   its step a fraction of that visual;
//! - swarm and follow accept any target that is at least as good, with no
//!   crowding test;
//! - with probability `p1` a fish jumps along the line through the bulletin,
//!   `x + (bulletin - x) * U[-1, 1]`;
//! - with probability `p2` one randomly chosen head is moved to the centroid
//!   of the nodes it currently owns.
//!
//! Continuous heads are snapped to distinct alive nodes, preferring nodes
//! with above-average residual energy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::afsa::{
    distance, follow_with, select_next, swarm_center, swarm_with, Bounds, Bulletin, Fish, MoveRules,
    Tracker,
};
use crate::clustering::{
    alive_positions, finish, head_space, snap_heads, ClusterOutcome, ConvergenceDetector,
};
use crate::error::{Error, Result};
use crate::net::{cluster_count, intra_cluster_distance, nearest_head, NetworkConfig, NodeState, Position};

pub use crate::clustering::snap_to_node;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModAfsaParams {
    /// Population is this many fish per cluster head.
    pub population_multiplier: usize,
    pub try_number: usize,
    /// Visual as a fraction of the distance to the bulletin.
    pub v_fraction: f64,
    /// Step as a fraction of visual.
    pub s_fraction: f64,
    /// Probability of a bulletin jump per fish per iteration.
    pub p1: f64,
    /// Probability of a head recenter per fish per iteration.
    pub p2: f64,
    pub convergence_window: usize,
    pub max_iterations: usize,
}

impl Default for ModAfsaParams {
    fn default() -> Self {
        Self {
            population_multiplier: 10,
            try_number: 5,
            v_fraction: 0.4,
            s_fraction: 0.5,
            p1: 0.3,
            p2: 0.3,
            convergence_window: 20,
            max_iterations: 100,
        }
    }
}

impl ModAfsaParams {
    pub fn violations(&self) -> Vec<String> {
        let p = "algorithms.modified_afsa";
        let mut out = Vec::new();
        if self.population_multiplier < 1 {
            out.push(format!("{p}.population_multiplier: must be at least 1"));
        }
        if self.try_number < 1 {
            out.push(format!("{p}.try_number: must be at least 1"));
        }
        for (name, v) in [("v_fraction", self.v_fraction), ("s_fraction", self.s_fraction)] {
            if !(v > 0.0 && v <= 1.0) {
                out.push(format!("{p}.{name}: must be in (0, 1], got {v}"));
            }
        }
        for (name, v) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&v) {
                out.push(format!("{p}.{name}: must be a probability in [0, 1], got {v}"));
            }
        }
        out
    }
}

/// Per-fish `(visual, step)` from its distance to the bulletin.
pub fn adaptive_visual_step(position: &[f64], bulletin: &Bulletin, params: &ModAfsaParams) -> (f64, f64) {
    let visual = params.v_fraction * distance(position, &bulletin.best_position);
    (visual, params.s_fraction * visual)
}

/// `x + (bulletin - x) * u`, clamped to `bounds`.
pub fn jump_toward(position: &[f64], bulletin: &[f64], u: f64, bounds: &Bounds) -> Vec<f64> {
    let mut next: Vec<f64> = position
        .iter()
        .zip(bulletin)
        .map(|(x, b)| x + (b - x) * u)
        .collect();
    bounds.clamp(&mut next);
    next
}

/// With probability `p1`, jump along the bulletin line with one
/// `u ~ U[-1, 1]`; otherwise `None`.
pub fn bulletin_jump<R: Rng + ?Sized>(
    position: &[f64],
    bulletin: &[f64],
    p1: f64,
    bounds: &Bounds,
    rng: &mut R,
) -> Option<Vec<f64>> {
    if rng.random::<f64>() < p1 {
        let u = rng.random_range(-1.0..=1.0);
        Some(jump_toward(position, bulletin, u, bounds))
    } else {
        None
    }
}

/// Moves head `index` to the centroid of the points closest to it.
/// Unchanged when it owns no points.
pub fn recenter_head(position: &[f64], points: &[Position], index: usize) -> Vec<f64> {
    let (mut sx, mut sy, mut count) = (0.0, 0.0, 0usize);
    for p in points {
        if nearest_head(position, p).0 == index {
            sx += p.x;
            sy += p.y;
            count += 1;
        }
    }
    let mut next = position.to_vec();
    if count > 0 {
        next[2 * index] = sx / count as f64;
        next[2 * index + 1] = sy / count as f64;
    }
    next
}

/// With probability `p2`, recenter one uniformly chosen head.
pub fn head_recenter<R: Rng + ?Sized>(
    position: &[f64],
    points: &[Position],
    p2: f64,
    rng: &mut R,
) -> Option<Vec<f64>> {
    if position.len() < 2 || rng.random::<f64>() >= p2 {
        return None;
    }
    let index = rng.random_range(0..position.len() / 2);
    Some(recenter_head(position, points, index))
}

/// Picks this round's cluster heads for the alive part of `nodes`.
///
/// Per iteration and per fish, in order: adaptive visual/step, swarm and
/// follow moves from the same position (skipped when the fish sits on the
/// bulletin), the bulletin jump gate, the recenter gate. The search stops
/// once the snapped bulletin heads have been stable for
/// `convergence_window` iterations, or after `max_iterations`.
pub fn run_clusterer(
    nodes: &[NodeState],
    cfg: &NetworkConfig,
    params: &ModAfsaParams,
    seed: u64,
) -> Result<ClusterOutcome> {
    let v = params.violations();
    if !v.is_empty() {
        return Err(Error::Config(v));
    }
    let points = alive_positions(nodes);
    if points.is_empty() {
        return Err(Error::NoAliveNodes);
    }
    if points.len() == 1 {
        return ClusterOutcome::trivial(nodes);
    }
    let heads = cluster_count(points.len(), cfg.cluster_fraction);
    let bounds = head_space(cfg, heads)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = Tracker::new(|x: &[f64]| intra_cluster_distance(x, &points));

    let mut school: Vec<Fish> = (0..params.population_multiplier * heads)
        .map(|_| {
            let position = bounds.sample(&mut rng);
            let fitness = tracker.eval(&position);
            Fish { position, fitness }
        })
        .collect();

    let mut history = vec![tracker.bulletin.best_fitness];
    let mut detector = ConvergenceDetector::new(params.convergence_window);
    let mut converged = detector.observe(&snap_heads(&tracker.bulletin.best_position, nodes)?.heads);
    let mut iterations = 0;

    while !converged && iterations < params.max_iterations {
        for i in 0..school.len() {
            let (visual, step) = adaptive_visual_step(&school[i].position, &tracker.bulletin, params);
            if step > 0.0 {
                let rules = MoveRules {
                    visual,
                    step,
                    try_number: params.try_number,
                    crowd_factor: None,
                };
                let mut eval = |x: &[f64]| tracker.eval(x);
                let position = swarm_center(&school)?;
                let fitness = eval(&position);
                let center = Fish { position, fitness };
                let swarm = swarm_with(&school[i], &school, &center, &rules, &bounds, &mut eval, &mut rng);
                let follow = follow_with(i, &school, &rules, &bounds, &mut eval, &mut rng);
                school[i] = select_next(follow, swarm);
            }

            if let Some(position) =
                bulletin_jump(&school[i].position, &tracker.bulletin.best_position, params.p1, &bounds, &mut rng)
            {
                let fitness = tracker.eval(&position);
                school[i] = Fish { position, fitness };
            }

            if let Some(position) = head_recenter(&school[i].position, &points, params.p2, &mut rng) {
                let fitness = tracker.eval(&position);
                school[i] = Fish { position, fitness };
            }
        }
        iterations += 1;
        history.push(tracker.bulletin.best_fitness);
        converged = detector.observe(&snap_heads(&tracker.bulletin.best_position, nodes)?.heads);
    }

    finish(&tracker.bulletin, nodes, history, iterations, converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{assign_members, fitness, NodeId};
    use std::collections::BTreeSet;

    fn bulletin_at(p: Vec<f64>) -> Bulletin {
        Bulletin { best_position: p, best_fitness: 0.0 }
    }

    #[test]
    fn adaptive_parameters_scale_with_distance() {
        let params = ModAfsaParams::default();
        let b = bulletin_at(vec![0.0, 0.0]);
        assert_eq!(adaptive_visual_step(&[0.0, 0.0], &b, &params), (0.0, 0.0));
        let (v, s) = adaptive_visual_step(&[6.0, 8.0], &b, &params);
        assert!((v - 4.0).abs() < 1e-12 && (s - 2.0).abs() < 1e-12);
        let (closer, _) = adaptive_visual_step(&[3.0, 4.0], &b, &params);
        assert!(closer < v);
    }

    #[test]
    fn jump_endpoints() {
        let bounds = Bounds::cube(2, -100.0, 100.0).unwrap();
        let x = [1.0, 2.0];
        let b = [5.0, -3.0];
        assert_eq!(jump_toward(&x, &b, 1.0, &bounds), b.to_vec());
        assert_eq!(jump_toward(&x, &b, 0.0, &bounds), x.to_vec());
        assert_eq!(jump_toward(&x, &b, -1.0, &bounds), vec![2.0 * 1.0 - 5.0, 2.0 * 2.0 + 3.0]);
    }

    #[test]
    fn jump_gate_respects_probability() {
        let bounds = Bounds::cube(2, 0.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| bulletin_jump(&[1.0, 1.0], &[2.0, 2.0], 0.0, &bounds, &mut rng).is_none()));
        assert!((0..100).all(|_| bulletin_jump(&[1.0, 1.0], &[2.0, 2.0], 1.0, &bounds, &mut rng).is_some()));
    }

    #[test]
    fn recenter_moves_head_to_owned_centroid() {
        let points = [Position::new(0.0, 0.0), Position::new(2.0, 0.0), Position::new(1.0, 3.0)];
        let moved = recenter_head(&[10.0, 10.0], &points, 0);
        assert_eq!(moved, vec![1.0, 1.0]);
        // Head 1 owns nothing.
        let heads = [1.0, 1.0, 90.0, 90.0];
        assert_eq!(recenter_head(&heads, &points, 1), heads.to_vec());
    }

    #[test]
    fn recenter_matches_partition_oracle() {
        let points = [
            Position::new(1.0, 1.0),
            Position::new(2.0, 5.0),
            Position::new(8.0, 9.0),
            Position::new(9.0, 7.0),
            Position::new(4.0, 4.0),
            Position::new(6.5, 6.0),
        ];
        let heads = [2.0, 2.0, 8.0, 8.0];
        for idx in 0..2 {
            let owned: Vec<&Position> = points
                .iter()
                .filter(|p| {
                    let d0 = ((p.x - heads[0]).powi(2) + (p.y - heads[1]).powi(2)).sqrt();
                    let d1 = ((p.x - heads[2]).powi(2) + (p.y - heads[3]).powi(2)).sqrt();
                    (if d0 <= d1 { 0 } else { 1 }) == idx
                })
                .collect();
            let cx = owned.iter().map(|p| p.x).sum::<f64>() / owned.len() as f64;
            let cy = owned.iter().map(|p| p.y).sum::<f64>() / owned.len() as f64;
            let got = recenter_head(&heads, &points, idx);
            assert!((got[2 * idx] - cx).abs() < 1e-12 && (got[2 * idx + 1] - cy).abs() < 1e-12);
            assert_eq!(got[2 * (1 - idx)], heads[2 * (1 - idx)]);
        }
    }

    #[test]
    fn lone_node_is_its_own_head() {
        let cfg = NetworkConfig::default();
        let mut nodes = cfg.deploy(2);
        for n in nodes.iter_mut().skip(1) {
            n.alive = false;
            n.energy = 0.0;
        }
        let out = run_clusterer(&nodes, &cfg, &ModAfsaParams::default(), 1).unwrap();
        assert_eq!(out.plan.heads, vec![0]);
        assert!(out.plan.membership.is_empty());
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn fresh_hundred_nodes_get_five_distinct_heads() {
        let cfg = NetworkConfig::default();
        let nodes = cfg.deploy(17);
        let out = run_clusterer(&nodes, &cfg, &ModAfsaParams::default(), 3).unwrap();
        let set: BTreeSet<NodeId> = out.plan.heads.iter().copied().collect();
        assert_eq!(set.len(), 5);
        out.plan.check_against(&nodes).unwrap();
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        let again = run_clusterer(&nodes, &cfg, &ModAfsaParams::default(), 3).unwrap();
        assert_eq!(out.plan, again.plan);
        assert_eq!(out.history, again.history);
    }

    #[test]
    fn frozen_search_stops_after_window() {
        // Two nodes, one head: every bulletin snaps to the same node set quickly,
        // so the detector must fire well before the iteration cap.
        let cfg = NetworkConfig { cluster_fraction: 0.05, ..NetworkConfig::default() };
        let nodes = vec![
            NodeState::new(0, Position::new(10.0, 10.0), 0.5),
            NodeState::new(1, Position::new(12.0, 10.0), 0.4),
        ];
        let params = ModAfsaParams { convergence_window: 5, max_iterations: 1000, ..Default::default() };
        let out = run_clusterer(&nodes, &cfg, &params, 4).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 5);
        assert_eq!(out.plan.heads, vec![0]);
    }

    #[test]
    fn beats_random_heads_on_small_networks() {
        // Five heads on thirty nodes, matching the random baseline below.
        let cfg = NetworkConfig { nodes_count: 30, cluster_fraction: 5.0 / 30.0, ..NetworkConfig::default() };
        let params = ModAfsaParams::default();
        let mut wins = 0;
        for seed in 0..50u64 {
            let nodes = cfg.deploy(1000 + seed);
            let out = run_clusterer(&nodes, &cfg, &params, seed).unwrap();
            let flat = |heads: &[usize]| -> Vec<f64> {
                heads.iter().flat_map(|&h| [nodes[h].pos.x, nodes[h].pos.y]).collect()
            };
            let ours = fitness(&flat(&out.plan.heads), &nodes).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut random: Vec<usize> = Vec::new();
            while random.len() < 5 {
                let c = rng.random_range(0..nodes.len());
                if !random.contains(&c) {
                    random.push(c);
                }
            }
            assign_members(&nodes, &random).unwrap();
            let baseline = fitness(&flat(&random), &nodes).unwrap();
            if ours <= baseline {
                wins += 1;
            }
        }
        assert!(wins >= 45, "only {wins}/50 wins over random heads");
    }
}
