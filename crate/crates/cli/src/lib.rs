//! Command-line front end for `freeprod`: experiment configs, JSON records
//! with CSV sidecars, and the reproduction suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod record;
pub mod reproduce;

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use commands::Status;
use config::ExperimentConfig;
use error::CliResult;
use record::{CsvTable, ExperimentRecord, Provenance, Timing, RNG_DESCRIPTION};

/// Runs a validated config and wraps the payload in a record.
pub fn run_experiment(config: &ExperimentConfig) -> CliResult<(ExperimentRecord, Vec<CsvTable>, Status)> {
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let t0 = Instant::now();
    let out = commands::dispatch(config)?;
    let record = ExperimentRecord {
        tool: "freeprod".into(),
        version: freeprod::VERSION.into(),
        config: config.to_value(),
        results: out.results,
        status: serde_json::to_value(out.status)?.as_str().unwrap_or("ok").to_string(),
        timing: Timing { seconds: t0.elapsed().as_secs_f64(), started_unix },
        provenance: Provenance { seed: config.seed, seeds: config.seeds.clone(), rng: RNG_DESCRIPTION.into() },
    };
    Ok((record, out.tables, out.status))
}

/// Reads a config file, runs it and writes the outputs.
pub fn run_config_file(path: &Path, out: Option<&Path>) -> CliResult<Status> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| error::CliError::Io { path: path.display().to_string(), source })?;
    let config = ExperimentConfig::from_json_str(&text)?;
    let (record, tables, status) = run_experiment(&config)?;
    record::write_outputs(&record, &tables, out)?;
    Ok(status)
}
