use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use wsn_afsa::output::{
    write_energy_curve_csv, write_rounds_csv, write_summary_csv, ResultFile, RunManifest,
};
use wsn_afsa::sim::parse_algorithm_list;
use wsn_afsa::{run_experiment, run_simulation, Algorithm, Error, ExperimentSpec, RunSeeds, SimConfig};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "wsn-afsa", version, about = "Sensor network lifetime simulator with swarm-based clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one network until it dies or hits the round cap.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// One of modified-afsa, standard-afsa, pso, leach.
        #[arg(long)]
        algo: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeat paired runs for several algorithms and write summary tables.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated algorithm names.
        #[arg(long, default_value = "modified-afsa,standard-afsa,pso,leach")]
        algos: String,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a config file and print it with defaults filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// A failure plus the exit code it maps to.
struct Failure {
    code: u8,
    error: Error,
}

impl Failure {
    fn usage(error: Error) -> Self {
        Self { code: 2, error }
    }

    fn runtime(error: Error) -> Self {
        Self { code: 1, error }
    }
}

type CmdResult = Result<(), Failure>;

fn load_config(path: &Path) -> Result<SimConfig, Failure> {
    let cfg = SimConfig::load(path).map_err(Failure::usage)?;
    cfg.validate().map_err(Failure::usage)?;
    Ok(cfg)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |source| Failure::runtime(Error::Io { path: path.display().to_string(), source })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(io_err(&path))
}

fn write_text(dir: &Path, name: &str, text: &str) -> CmdResult {
    let path = dir.join(name);
    fs::write(&path, text).map_err(io_err(&path))
}

fn simulate(config: &Path, algo: &str, seed: u64, out: &Path) -> CmdResult {
    let algorithm: Algorithm = algo.parse().map_err(Failure::usage)?;
    let cfg = load_config(config)?;
    let started = Instant::now();
    let seeds = RunSeeds::single(seed);
    let result = run_simulation(&cfg.network_config(), algorithm, &cfg.algorithms, seeds)
        .map_err(Failure::runtime)?;
    let elapsed = started.elapsed().as_secs_f64();

    fs::create_dir_all(out).map_err(io_err(out))?;
    write_rounds_csv(create(out, "rounds.csv")?, &result.rounds).map_err(Failure::runtime)?;
    let file = ResultFile { manifest: "manifest.json".into(), result };
    let json = serde_json::to_string_pretty(&file).map_err(|e| Failure::runtime(e.into()))?;
    write_text(out, "result.json", &json)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "simulate".into(),
        config: cfg,
        algorithms: vec![algorithm],
        base_seed: seed,
        repetitions: 1,
        seeds: vec![seeds],
        outputs: vec!["rounds.csv".into(), "result.json".into()],
        wall_clock_seconds: elapsed,
    };
    write_text(out, "manifest.json", &manifest.to_json_pretty())?;
    println!("wrote rounds.csv, result.json and manifest.json to {}", out.display());
    Ok(())
}

fn experiment(config: &Path, algos: &str, reps: usize, seed: u64, jobs: usize, out: &Path) -> CmdResult {
    let algorithms = parse_algorithm_list(algos).map_err(Failure::usage)?;
    if reps == 0 {
        return Err(Failure::usage(Error::InvalidArgument("--reps must be at least 1".into())));
    }
    let cfg = load_config(config)?;
    let spec = ExperimentSpec {
        network: cfg.network_config(),
        params: cfg.algorithms.clone(),
        algorithms: algorithms.clone(),
        repetitions: reps,
        base_seed: seed,
        jobs,
    };
    let started = Instant::now();
    let report = run_experiment(&spec).map_err(Failure::runtime)?;
    let elapsed = started.elapsed().as_secs_f64();

    fs::create_dir_all(out).map_err(io_err(out))?;
    write_summary_csv(create(out, "summary.csv")?, &report.summary).map_err(Failure::runtime)?;
    write_energy_curve_csv(create(out, "energy_curve.csv")?, &report.energy_curves)
        .map_err(Failure::runtime)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "experiment".into(),
        config: cfg,
        algorithms,
        base_seed: seed,
        repetitions: reps,
        seeds: (0..reps as u64).map(|r| RunSeeds::for_repetition(seed, r)).collect(),
        outputs: vec!["summary.csv".into(), "energy_curve.csv".into()],
        wall_clock_seconds: elapsed,
    };
    write_text(out, "manifest.json", &manifest.to_json_pretty())?;
    for row in &report.summary.rows {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
        println!(
            "{:<14} FND {} ({})  LND {} ({})",
            row.algorithm.name(),
            show(row.fnd_mean),
            show(row.fnd_std),
            show(row.lnd_mean),
            show(row.lnd_std)
        );
    }
    Ok(())
}

fn validate(config: &Path) -> CmdResult {
    let cfg = SimConfig::load(config).map_err(Failure::usage)?;
    let violations = cfg.violations();
    println!("{}", cfg.to_json_pretty());
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::usage(Error::Config(violations)))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Simulate { config, algo, seed, out } => simulate(config, algo, *seed, out),
        Command::Experiment { config, algos, reps, seed, jobs, out } => {
            experiment(config, algos, *reps, *seed, *jobs, out)
        }
        Command::Validate { config } => validate(config),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            ExitCode::from(f.code)
        }
    }
}
