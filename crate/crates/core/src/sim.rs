//! Round loop and the repeated-layout experiment.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{leach_select, pso_clusterer, LeachParams, LeachRotation, PsoParams};
use crate::clustering::{standard_afsa_clusterer, ClusterOutcome, StandardAfsaParams};
use crate::energy::apply_round;
use crate::error::{Error, Result};
use crate::mod_afsa::{run_clusterer, ModAfsaParams};
use crate::net::{ClusterPlan, NetworkConfig, NodeId, NodeState};

/// Offset between a repetition's layout seed and its algorithm seed.
pub const ALGORITHM_SEED_OFFSET: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    ModifiedAfsa,
    StandardAfsa,
    Pso,
    Leach,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::ModifiedAfsa,
        Algorithm::StandardAfsa,
        Algorithm::Pso,
        Algorithm::Leach,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ModifiedAfsa => "modified-afsa",
            Algorithm::StandardAfsa => "standard-afsa",
            Algorithm::Pso => "pso",
            Algorithm::Leach => "leach",
        }
    }

    /// Whether the head count follows the cluster-fraction rule.
    pub fn is_optimizer(self) -> bool {
        self != Algorithm::Leach
    }

    pub fn valid_names() -> String {
        Self::ALL.map(Algorithm::name).join(", ")
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::UnknownAlgorithm {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

/// Parses a comma-separated algorithm list such as `leach,pso`.
pub fn parse_algorithm_list(s: &str) -> Result<Vec<Algorithm>> {
    let mut out: Vec<Algorithm> = Vec::new();
    for part in s.split(',') {
        let a: Algorithm = part.parse()?;
        if out.contains(&a) {
            return Err(Error::invalid(format!("algorithm `{a}` listed twice")));
        }
        out.push(a);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmParams {
    pub modified_afsa: ModAfsaParams,
    pub standard_afsa: StandardAfsaParams,
    pub pso: PsoParams,
    pub leach: LeachParams,
}

impl AlgorithmParams {
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.modified_afsa.violations();
        out.extend(self.standard_afsa.violations());
        out.extend(self.pso.violations());
        out.extend(self.leach.violations());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub layout: u64,
    pub algorithm: u64,
}

impl RunSeeds {
    pub fn for_repetition(base_seed: u64, repetition: u64) -> Self {
        Self {
            layout: base_seed.wrapping_add(repetition),
            algorithm: base_seed
                .wrapping_add(ALGORITHM_SEED_OFFSET)
                .wrapping_add(repetition),
        }
    }

    pub fn single(seed: u64) -> Self {
        Self::for_repetition(seed, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: usize,
    /// Alive nodes after the round.
    pub alive_count: usize,
    /// Sum of all node balances after the round, including the deficit of
    /// nodes that died during it.
    pub total_energy: f64,
    /// Sum of non-negative balances after the round.
    pub residual_energy: f64,
    /// Energy drawn this round.
    pub energy_spent: f64,
    /// Intra-cluster distance of the chosen heads.
    pub plan_fitness: f64,
    pub head_ids: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub algorithm_seed: u64,
    pub fnd: Option<usize>,
    pub lnd: Option<usize>,
    pub initial_energy: f64,
    pub rounds: Vec<RoundMetrics>,
}

/// What an observer sees each round, before energy is charged.
#[derive(Debug)]
pub struct RoundAudit<'a> {
    pub round: usize,
    pub nodes_before: &'a [NodeState],
    pub plan: &'a ClusterPlan,
    /// Per head: whether the above-mean candidate set was non-empty at snap
    /// time. `None` for LEACH, which does not snap.
    pub guarded: Option<&'a [bool]>,
}

struct Planner<'a> {
    algorithm: Algorithm,
    params: &'a AlgorithmParams,
    rng: ChaCha8Rng,
    rotation: LeachRotation,
}

impl Planner<'_> {
    fn plan(&mut self, nodes: &[NodeState], cfg: &NetworkConfig, round_index: usize) -> Result<(ClusterPlan, Option<Vec<bool>>)> {
        let outcome = |o: ClusterOutcome| (o.plan, Some(o.guarded));
        Ok(match self.algorithm {
            Algorithm::ModifiedAfsa => {
                outcome(run_clusterer(nodes, cfg, &self.params.modified_afsa, self.rng.next_u64())?)
            }
            Algorithm::StandardAfsa => {
                outcome(standard_afsa_clusterer(nodes, cfg, &self.params.standard_afsa, self.rng.next_u64())?)
            }
            Algorithm::Pso => outcome(pso_clusterer(nodes, cfg, &self.params.pso, self.rng.next_u64())?),
            Algorithm::Leach => (
                leach_select(nodes, round_index, &self.params.leach, &mut self.rng, &mut self.rotation)?,
                None,
            ),
        })
    }
}

fn plan_fitness(nodes: &[NodeState], plan: &ClusterPlan) -> f64 {
    plan.membership
        .iter()
        .map(|(&m, &h)| nodes[m].pos.distance(&nodes[h].pos))
        .sum()
}

pub fn run_simulation(
    cfg: &NetworkConfig,
    algorithm: Algorithm,
    params: &AlgorithmParams,
    seeds: RunSeeds,
) -> Result<RunResult> {
    run_simulation_observed(cfg, algorithm, params, seeds, |_| {})
}

/// Runs rounds until every node is dead or `max_rounds` is reached.
/// Rounds are numbered from 1; `fnd`/`lnd` are the first rounds after which
/// some / all nodes are dead.
pub fn run_simulation_observed<O>(
    cfg: &NetworkConfig,
    algorithm: Algorithm,
    params: &AlgorithmParams,
    seeds: RunSeeds,
    mut observer: O,
) -> Result<RunResult>
where
    O: FnMut(&RoundAudit<'_>),
{
    cfg.validate()?;
    let v = params.violations();
    if !v.is_empty() {
        return Err(Error::Config(v));
    }
    let mut nodes = cfg.deploy(seeds.layout);
    let initial_energy: f64 = nodes.iter().map(|n| n.energy).sum();
    let mut planner = Planner {
        algorithm,
        params,
        rng: ChaCha8Rng::seed_from_u64(seeds.algorithm),
        rotation: LeachRotation::default(),
    };

    let mut rounds = Vec::with_capacity(cfg.max_rounds);
    let (mut fnd, mut lnd) = (None, None);
    for round in 1..=cfg.max_rounds {
        let (plan, guarded) = planner.plan(&nodes, cfg, round - 1)?;
        observer(&RoundAudit {
            round,
            nodes_before: &nodes,
            plan: &plan,
            guarded: guarded.as_deref(),
        });
        let fitness = plan_fitness(&nodes, &plan);
        let deltas = apply_round(&mut nodes, &plan, cfg)?;

        let alive_count = nodes.iter().filter(|n| n.alive).count();
        rounds.push(RoundMetrics {
            round,
            alive_count,
            total_energy: nodes.iter().map(|n| n.energy).sum(),
            residual_energy: nodes.iter().map(|n| n.energy.max(0.0)).sum(),
            energy_spent: deltas.iter().sum(),
            plan_fitness: fitness,
            head_ids: plan.heads,
        });
        if fnd.is_none() && alive_count < cfg.nodes_count {
            fnd = Some(round);
        }
        if alive_count == 0 {
            lnd = Some(round);
            break;
        }
    }
    Ok(RunResult {
        algorithm,
        seed: seeds.layout,
        algorithm_seed: seeds.algorithm,
        fnd,
        lnd,
        initial_energy,
        rounds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub network: NetworkConfig,
    pub params: AlgorithmParams,
    pub algorithms: Vec<Algorithm>,
    pub repetitions: usize,
    pub base_seed: u64,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    /// Runs in which at least one node died.
    pub fnd_runs: usize,
    pub fnd_mean: Option<f64>,
    pub fnd_std: Option<f64>,
    /// Runs in which every node died.
    pub lnd_runs: usize,
    pub lnd_mean: Option<f64>,
    pub lnd_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub repetitions: usize,
    pub rows: Vec<AlgorithmSummary>,
}

impl ExperimentSummary {
    pub fn row(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub summary: ExperimentSummary,
    /// Per algorithm: mean residual network energy at rounds `0..=max_rounds`.
    pub energy_curves: Vec<(Algorithm, Vec<f64>)>,
    /// Per algorithm, runs in repetition order.
    pub runs: Vec<(Algorithm, Vec<RunResult>)>,
}

/// Mean and population standard deviation.
pub fn mean_std(samples: &[f64]) -> Option<(f64, f64)> {
    if samples.is_empty() {
        return None;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

pub fn summarize(algorithm: Algorithm, runs: &[RunResult]) -> AlgorithmSummary {
    let fnd: Vec<f64> = runs.iter().filter_map(|r| r.fnd).map(|v| v as f64).collect();
    let lnd: Vec<f64> = runs.iter().filter_map(|r| r.lnd).map(|v| v as f64).collect();
    let f = mean_std(&fnd);
    let l = mean_std(&lnd);
    AlgorithmSummary {
        algorithm,
        fnd_runs: fnd.len(),
        fnd_mean: f.map(|s| s.0),
        fnd_std: f.map(|s| s.1),
        lnd_runs: lnd.len(),
        lnd_mean: l.map(|s| s.0),
        lnd_std: l.map(|s| s.1),
    }
}

/// Residual energy at rounds `0..=max_rounds`; a run that ended early holds
/// its last value.
pub fn residual_curve(run: &RunResult, max_rounds: usize) -> Vec<f64> {
    let mut curve = Vec::with_capacity(max_rounds + 1);
    curve.push(run.initial_energy);
    for r in 1..=max_rounds {
        let v = run
            .rounds
            .get(r - 1)
            .map(|m| m.residual_energy)
            .unwrap_or_else(|| *curve.last().unwrap());
        curve.push(v);
    }
    curve
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    run_experiment_observed(spec, &|_, _, _| {})
}

/// Repetition `r` uses layout seed `base_seed + r` for every algorithm, so
/// algorithms are compared on identical fields. Runs may execute in
/// parallel; results are keyed by repetition, not completion order.
pub fn run_experiment_observed<O>(spec: &ExperimentSpec, observer: &O) -> Result<ExperimentReport>
where
    O: Fn(Algorithm, usize, &RoundAudit<'_>) + Sync,
{
    if spec.repetitions < 1 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    if spec.algorithms.is_empty() {
        return Err(Error::invalid("no algorithms selected"));
    }
    spec.network.validate()?;

    let tasks: Vec<(Algorithm, usize)> = spec
        .algorithms
        .iter()
        .flat_map(|&a| (0..spec.repetitions).map(move |r| (a, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let results: Vec<RunResult> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(a, r)| {
                let seeds = RunSeeds::for_repetition(spec.base_seed, r as u64);
                run_simulation_observed(&spec.network, a, &spec.params, seeds, |audit| observer(a, r, audit))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut runs: Vec<(Algorithm, Vec<RunResult>)> =
        spec.algorithms.iter().map(|&a| (a, Vec::new())).collect();
    for ((a, _), result) in tasks.iter().zip(results) {
        runs.iter_mut().find(|(x, _)| x == a).unwrap().1.push(result);
    }

    let max_rounds = spec.network.max_rounds;
    let energy_curves = runs
        .iter()
        .map(|(a, rs)| {
            let mut mean = vec![0.0; max_rounds + 1];
            for run in rs {
                for (m, v) in mean.iter_mut().zip(residual_curve(run, max_rounds)) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= rs.len() as f64);
            (*a, mean)
        })
        .collect();
    let summary = ExperimentSummary {
        repetitions: spec.repetitions,
        rows: runs.iter().map(|(a, rs)| summarize(*a, rs)).collect(),
    };
    Ok(ExperimentReport {
        summary,
        energy_curves,
        runs,
    })
}
