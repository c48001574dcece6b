//! `freeprod` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use freeprod_cli::commands::Status;
use freeprod_cli::config::{parse_seeds, Experiment, ExperimentConfig};
use freeprod_cli::error::{CliError, CliResult};
use freeprod_cli::{record, run_config_file, run_experiment};

#[derive(Parser)]
#[command(name = "freeprod", version, about = "Random permutation representations of free products of finite groups")]
struct Cli {
    /// Base seed for random streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (.json record, or .csv for the first table plus a .json record).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Working precision in decimal digits.
    #[arg(long, global = true)]
    precision: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Free product, e.g. "C2*C3" or "S3*C2".
    #[arg(long)]
    group: Option<String>,
    /// Element as a word in factor letters, e.g. "a b".
    #[arg(long)]
    gamma: Option<String>,
    /// Generators, optionally weighted: "x,y,y2" or "x:1/3,y:1/3,y2:1/3".
    #[arg(long)]
    gens: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nmin: Option<usize>,
    #[arg(long)]
    nmax: Option<usize>,
    /// Comma-separated N values.
    #[arg(long, value_delimiter = ',')]
    nlist: Option<Vec<usize>>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    pmax: Option<usize>,
    /// Norm model: "c2c3" or "c2star<d>".
    #[arg(long)]
    model: Option<String>,
    /// Seeds: "a..b", "a,b,c" or a count k (seed..seed+k-1).
    #[arg(long)]
    seeds: Option<String>,
    /// Dense eigendecomposition with an eigenvalue dump.
    #[arg(long)]
    dense: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact homomorphism counts.
    Count(Common),
    /// Fractional-expansion fit of N^(-1/r) E[fix].
    Fit(Common),
    /// Saddle-point root r_n against its truncated expansion.
    Saddle(Common),
    /// Uniform random homomorphisms.
    Sample(Common),
    /// Schreier-graph spectra.
    Spectrum(Common),
    /// Exact random-walk channel masses and norm estimates.
    Walk(Common),
    /// Expected traces and expansion-structure verification.
    Trace(Common),
    /// Run a JSON experiment config.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
    /// Run the acceptance suite.
    ReproducePaper {
        /// Criterion ids to run (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<usize>>,
    },
}

#[derive(Subcommand)]
enum ExperimentAction {
    Run { config: PathBuf },
}

fn build(kind: Experiment, c: Common, cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.group = c.group;
    cfg.gamma = c.gamma;
    cfg.gens = c.gens;
    cfg.n = c.n;
    cfg.nmin = c.nmin;
    cfg.nmax = c.nmax;
    cfg.nlist = c.nlist;
    cfg.points = c.points;
    cfg.q = c.q;
    cfg.s = c.s;
    cfg.pmax = c.pmax;
    cfg.model = c.model;
    cfg.dense = c.dense;
    cfg.seed = cli.seed;
    cfg.precision = cli.precision;
    if let Some(s) = &c.seeds {
        cfg.seeds = parse_seeds(s, cli.seed).map_err(CliError::Usage)?;
    }
    // route through the schema check so flags and configs are validated alike
    Ok(ExperimentConfig::from_value(&cfg.to_value())?)
}

fn execute(cli: Cli) -> CliResult<Status> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let (kind, common) = match &cli.command {
        Command::Count(c) => (Experiment::Count, c.clone()),
        Command::Fit(c) => (Experiment::Fit, c.clone()),
        Command::Saddle(c) => (Experiment::Saddle, c.clone()),
        Command::Sample(c) => (Experiment::Sample, c.clone()),
        Command::Spectrum(c) => (Experiment::Spectrum, c.clone()),
        Command::Walk(c) => (Experiment::Walk, c.clone()),
        Command::Trace(c) => (Experiment::Trace, c.clone()),
        Command::Experiment { action: ExperimentAction::Run { config } } => {
            return run_config_file(config, cli.out.as_deref());
        }
        Command::ReproducePaper { criteria } => {
            let mut cfg = ExperimentConfig::new(Experiment::ReproducePaper);
            cfg.criteria = criteria.clone();
            cfg.seed = cli.seed;
            return finish(&cfg, &cli);
        }
    };
    let cfg = build(kind, common, &cli)?;
    finish(&cfg, &cli)
}

fn finish(cfg: &ExperimentConfig, cli: &Cli) -> CliResult<Status> {
    let (rec, tables, status) = run_experiment(cfg)?;
    // reproduce-paper already printed its table; keep stdout readable
    if cfg.experiment == Experiment::ReproducePaper && cli.out.is_none() {
        return Ok(status);
    }
    record::write_outputs(&rec, &tables, cli.out.as_deref())?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // exit code 2 is reserved for inconclusive verification
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
