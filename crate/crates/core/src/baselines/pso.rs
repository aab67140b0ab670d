//! Global-best (star topology) particle swarm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::afsa::{Bounds, Bulletin, Tracker};
use crate::clustering::{alive_positions, finish, head_space, snap_heads, ClusterOutcome, ConvergenceDetector};
use crate::error::{Error, Result};
use crate::net::{cluster_count, intra_cluster_distance, NetworkConfig, NodeState};

/// How the inertia weight is drawn each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InertiaRule {
    /// `w = 0.5 * (rand * 0.5)`, i.e. uniform on `[0, 0.25)`.
    #[default]
    Product,
    /// `w = 0.5 + rand * 0.5`, uniform on `[0.5, 1)`.
    Offset,
}

impl InertiaRule {
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        let r = rng.random::<f64>();
        match self {
            InertiaRule::Product => 0.5 * (r * 0.5),
            InertiaRule::Offset => 0.5 + r * 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    /// Swarm size per cluster head when used as a clusterer.
    pub population_multiplier: usize,
    pub c1: f64,
    pub c2: f64,
    pub inertia: InertiaRule,
    pub max_iterations: usize,
    pub convergence_window: usize,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            population_multiplier: 20,
            c1: 2.0,
            c2: 2.0,
            inertia: InertiaRule::Product,
            max_iterations: 100,
            convergence_window: 20,
        }
    }
}

impl PsoParams {
    pub fn violations(&self) -> Vec<String> {
        let p = "algorithms.pso";
        let mut out = Vec::new();
        if self.population_multiplier < 1 {
            out.push(format!("{p}.population_multiplier: must be at least 1"));
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2)] {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{p}.{name}: must be > 0, got {v}"));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct PsoRun {
    pub gbest: Bulletin,
    /// gbest fitness after initialization and after every iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Minimizes `objective` over `bounds` with `swarm_size` particles.
///
/// Velocities start at zero and are clamped per coordinate to the bound
/// width; positions are clamped to the box. `stop(iteration, gbest)` is
/// consulted after every iteration.
pub fn minimize_until<F, S>(
    objective: F,
    bounds: &Bounds,
    swarm_size: usize,
    params: &PsoParams,
    seed: u64,
    mut stop: S,
) -> Result<PsoRun>
where
    F: FnMut(&[f64]) -> f64,
    S: FnMut(usize, &Bulletin) -> bool,
{
    if swarm_size == 0 {
        return Err(Error::EmptyPopulation);
    }
    let v = params.violations();
    if !v.is_empty() {
        return Err(Error::Config(v));
    }
    let dim = bounds.dim();
    let vmax: Vec<f64> = bounds.upper().iter().zip(bounds.lower()).map(|(u, l)| u - l).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = Tracker::new(objective);

    let mut x: Vec<Vec<f64>> = (0..swarm_size).map(|_| bounds.sample(&mut rng)).collect();
    let mut vel = vec![vec![0.0; dim]; swarm_size];
    let mut pbest = x.clone();
    let mut pbest_f: Vec<f64> = x.iter().map(|p| tracker.eval(p)).collect();

    let mut history = vec![tracker.bulletin.best_fitness];
    let mut iterations = 0;
    while iterations < params.max_iterations {
        let w = params.inertia.draw(&mut rng);
        let g = tracker.bulletin.best_position.clone();
        for i in 0..swarm_size {
            for d in 0..dim {
                let r1 = rng.random::<f64>();
                let r2 = rng.random::<f64>();
                let v = w * vel[i][d]
                    + params.c1 * r1 * (pbest[i][d] - x[i][d])
                    + params.c2 * r2 * (g[d] - x[i][d]);
                vel[i][d] = v.clamp(-vmax[d], vmax[d]);
                x[i][d] += vel[i][d];
            }
            bounds.clamp(&mut x[i]);
            let f = tracker.eval(&x[i]);
            if f < pbest_f[i] {
                pbest_f[i] = f;
                pbest[i].copy_from_slice(&x[i]);
            }
        }
        iterations += 1;
        history.push(tracker.bulletin.best_fitness);
        if stop(iterations, &tracker.bulletin) {
            break;
        }
    }
    Ok(PsoRun {
        gbest: tracker.bulletin,
        history,
        iterations,
        evaluations: tracker.evaluations,
    })
}

pub fn minimize<F>(objective: F, bounds: &Bounds, swarm_size: usize, params: &PsoParams, seed: u64) -> Result<PsoRun>
where
    F: FnMut(&[f64]) -> f64,
{
    minimize_until(objective, bounds, swarm_size, params, seed, |_, _| false)
}

/// PSO over the head-coordinate space, with the same head count, snapping,
/// energy guard and convergence rule as the fish-swarm clusterers.
pub fn pso_clusterer(
    nodes: &[NodeState],
    cfg: &NetworkConfig,
    params: &PsoParams,
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
    let run = minimize_until(
        |x| intra_cluster_distance(x, &points),
        &bounds,
        params.population_multiplier * n,
        params,
        seed,
        |_, g| {
            let ids = snap_heads(&g.best_position, nodes).map(|s| s.heads).unwrap_or_default();
            converged = detector.observe(&ids);
            converged
        },
    )?;
    finish(&run.gbest, nodes, run.history, run.iterations, converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn inertia_rules_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let p = InertiaRule::Product.draw(&mut rng);
            assert!((0.0..0.25).contains(&p));
            let o = InertiaRule::Offset.draw(&mut rng);
            assert!((0.5..1.0).contains(&o));
        }
    }

    #[test]
    fn sphere_sanity_median() {
        let bounds = Bounds::cube(2, -10.0, 10.0).unwrap();
        let params = PsoParams { max_iterations: 200, ..Default::default() };
        let mut finals: Vec<f64> = (0..20)
            .map(|s| minimize(sphere, &bounds, 30, &params, s).unwrap().gbest.best_fitness)
            .collect();
        finals.sort_by(f64::total_cmp);
        let median = 0.5 * (finals[9] + finals[10]);
        assert!(median < 0.1, "median {median}");
    }

    #[test]
    fn gbest_is_minimum_of_every_evaluation() {
        let bounds = Bounds::cube(3, -5.0, 5.0).unwrap();
        let log = RefCell::new(Vec::new());
        let run = minimize(
            |x| {
                let f = sphere(x) + (3.0 * x[0]).sin();
                log.borrow_mut().push(f);
                f
            },
            &bounds,
            15,
            &PsoParams { max_iterations: 40, ..Default::default() },
            2,
        )
        .unwrap();
        let min = log.borrow().iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(run.gbest.best_fitness, min);
        assert_eq!(run.evaluations, log.borrow().len());
        assert!(run.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn clusterer_is_deterministic_and_valid() {
        let cfg = NetworkConfig::default();
        let nodes = cfg.deploy(4);
        let a = pso_clusterer(&nodes, &cfg, &PsoParams::default(), 12).unwrap();
        let b = pso_clusterer(&nodes, &cfg, &PsoParams::default(), 12).unwrap();
        assert_eq!(a.plan, b.plan);
        assert_eq!(a.plan.heads.len(), 5);
        a.plan.check_against(&nodes).unwrap();
    }
}
