//! Experiment records (JSON) and plot-ready CSV sidecars.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Description of how random streams were derived.
pub const RNG_DESCRIPTION: &str =
    "ChaCha8 per (seed, trial, factor); 256-bit key from a SplitMix64 chain over the mixed triple";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
    pub started_unix: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub rng: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub tool: String,
    pub version: String,
    pub config: Value,
    pub results: Value,
    pub status: String,
    pub timing: Timing,
    pub provenance: Provenance,
}

/// A CSV table: header plus string rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    /// Suffix used in the sidecar file name.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        CsvTable { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| io_err(path, e))?;
        Ok(())
    }

    pub fn read(name: &str, path: &Path) -> CliResult<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()?;
        Ok(CsvTable { name: name.into(), header, rows })
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

pub fn read_record(path: &Path) -> CliResult<ExperimentRecord> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes the record and its tables.
///
/// With `out = foo.json` the tables go to `foo.<name>.csv`. With
/// `out = foo.csv` the first table goes to `foo.csv`, the record to
/// `foo.json` and further tables to `foo.<name>.csv`. Without `out` the
/// record is printed to stdout and tables are not written.
pub fn write_outputs(record: &ExperimentRecord, tables: &[CsvTable], out: Option<&Path>) -> CliResult<Vec<PathBuf>> {
    let json = serde_json::to_string_pretty(record)?;
    let Some(out) = out else {
        let mut stdout = std::io::stdout().lock();
        writeln!(stdout, "{json}").map_err(|e| io_err(Path::new("<stdout>"), e))?;
        return Ok(Vec::new());
    };
    let stem = out.with_extension("");
    let sidecar = |name: &str| -> PathBuf {
        let mut s = stem.clone().into_os_string();
        s.push(format!(".{name}.csv"));
        PathBuf::from(s)
    };
    let mut written = Vec::new();
    let is_csv = out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let record_path = if is_csv { out.with_extension("json") } else { out.to_path_buf() };
    if let Some(parent) = record_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(&record_path, json + "\n").map_err(|e| io_err(&record_path, e))?;
    written.push(record_path);
    for (i, t) in tables.iter().enumerate() {
        let path = if is_csv && i == 0 { out.to_path_buf() } else { sidecar(&t.name) };
        t.write(&path)?;
        written.push(path);
    }
    Ok(written)
}
