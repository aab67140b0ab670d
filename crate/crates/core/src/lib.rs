//! Wireless sensor network lifetime simulator with swarm-optimized
//! cluster-head selection.
//!
//! Each round a clusterer picks cluster heads among the alive nodes, the
//! first-order radio model charges the round's traffic, and the simulator
//! records residual energy and node deaths until the last node dies.
//!
//! Clusterers: an energy-aware modified fish swarm ([`mod_afsa`]), the
//! standard fish swarm ([`afsa`], adapted in [`clustering`]), global-best
//! PSO and LEACH ([`baselines`]).

pub mod afsa;
pub mod baselines;
pub mod clustering;
pub mod config;
pub mod energy;
pub mod error;
pub mod mod_afsa;
pub mod net;
pub mod output;
pub mod sim;

pub use config::SimConfig;
pub use error::{Error, Result};
pub use net::{ClusterPlan, NetworkConfig, NodeId, NodeState, Position};
pub use sim::{
    run_experiment, run_simulation, Algorithm, AlgorithmParams, ExperimentSpec, ExperimentSummary,
    RoundMetrics, RunResult, RunSeeds,
};
