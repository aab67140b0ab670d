//! Result files: `rounds.csv`, `result.json`, `summary.csv`,
//! `energy_curve.csv` and `manifest.json`.
//!
//! Floats are written in Rust's shortest round-trip form, so parsing a
//! written value gives back the identical `f64`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::net::NodeId;
use crate::sim::{Algorithm, ExperimentSummary, RoundMetrics, RunResult, RunSeeds};

pub const ROUNDS_HEADER: [&str; 7] = [
    "round",
    "alive_count",
    "total_energy",
    "residual_energy",
    "energy_spent",
    "plan_fitness",
    "head_ids",
];

pub const SUMMARY_HEADER: [&str; 5] = ["algorithm", "fnd_mean", "fnd_std", "lnd_mean", "lnd_std"];

fn join_ids(ids: &[NodeId]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_rounds_csv<W: Write>(w: W, rounds: &[RoundMetrics]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ROUNDS_HEADER)?;
    for m in rounds {
        out.write_record([
            m.round.to_string(),
            m.alive_count.to_string(),
            m.total_energy.to_string(),
            m.residual_energy.to_string(),
            m.energy_spent.to_string(),
            m.plan_fitness.to_string(),
            join_ids(&m.head_ids),
        ])?;
    }
    out.flush().map_err(|source| Error::Io { path: "rounds.csv".into(), source })?;
    Ok(())
}

pub fn rounds_csv_bytes(rounds: &[RoundMetrics]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_rounds_csv(&mut buf, rounds)?;
    Ok(buf)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: u64) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| {
        Error::invalid(format!(
            "rounds.csv line {line}: bad value `{raw}` in column {}",
            ROUNDS_HEADER[idx]
        ))
    })
}

/// Parses a `rounds.csv` document.
pub fn read_rounds_csv<R: Read>(r: R) -> Result<Vec<RoundMetrics>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(ROUNDS_HEADER) {
        return Err(Error::invalid("rounds.csv: unexpected header"));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let ids = rec.get(6).unwrap_or("");
        let head_ids = if ids.is_empty() {
            Vec::new()
        } else {
            ids.split(';')
                .map(|s| s.parse::<NodeId>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::invalid(format!("rounds.csv line {line}: bad head_ids `{ids}`")))?
        };
        out.push(RoundMetrics {
            round: field(&rec, 0, line)?,
            alive_count: field(&rec, 1, line)?,
            total_energy: field(&rec, 2, line)?,
            residual_energy: field(&rec, 3, line)?,
            energy_spent: field(&rec, 4, line)?,
            plan_fitness: field(&rec, 5, line)?,
            head_ids,
        });
    }
    Ok(out)
}

pub fn write_summary_csv<W: Write>(w: W, summary: &ExperimentSummary) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for row in &summary.rows {
        out.write_record([
            row.algorithm.name().to_string(),
            opt(row.fnd_mean),
            opt(row.fnd_std),
            opt(row.lnd_mean),
            opt(row.lnd_std),
        ])?;
    }
    out.flush().map_err(|source| Error::Io { path: "summary.csv".into(), source })?;
    Ok(())
}

/// One row per round `0..=max_rounds`, one column per algorithm.
pub fn write_energy_curve_csv<W: Write>(w: W, curves: &[(Algorithm, Vec<f64>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["round".to_string()];
    header.extend(curves.iter().map(|(a, _)| a.name().to_string()));
    out.write_record(&header)?;
    let len = curves.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    for r in 0..len {
        let mut row = vec![r.to_string()];
        row.extend(curves.iter().map(|(_, c)| opt(c.get(r).copied())));
        out.write_record(&row)?;
    }
    out.flush().map_err(|source| Error::Io { path: "energy_curve.csv".into(), source })?;
    Ok(())
}

/// `result.json`: the run plus a pointer to the manifest that reproduces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub manifest: String,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: SimConfig,
    pub algorithms: Vec<Algorithm>,
    pub base_seed: u64,
    pub repetitions: usize,
    pub seeds: Vec<RunSeeds>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
