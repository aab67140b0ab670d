//! Mean FND/LND per algorithm at a given initial energy.
//!
//! `cargo run --release --example calibrate -- <joules> [reps]`

use std::time::Instant;

use wsn_afsa::{run_experiment, Algorithm, AlgorithmParams, ExperimentSpec, NetworkConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let energy: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let reps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let spec = ExperimentSpec {
        network: NetworkConfig { initial_energy: energy, ..Default::default() },
        params: AlgorithmParams::default(),
        algorithms: vec![Algorithm::ModifiedAfsa, Algorithm::Pso, Algorithm::Leach, Algorithm::StandardAfsa],
        repetitions: reps,
        base_seed: 1,
        jobs: 0,
    };
    let start = Instant::now();
    let report = run_experiment(&spec).expect("experiment runs");
    println!("initial_energy {energy} J, {reps} repetitions, {:.1}s", start.elapsed().as_secs_f64());
    for row in &report.summary.rows {
        println!(
            "{:<14} fnd {:?} ({}/{reps})  lnd {:?} ({}/{reps})",
            row.algorithm.name(),
            row.fnd_mean,
            row.fnd_runs,
            row.lnd_mean,
            row.lnd_runs
        );
    }
}
