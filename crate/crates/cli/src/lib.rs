//! `gridcut` command-line front end.
//!
//! Every subcommand resolves its settings (flags, then `--config`, then
//! defaults), runs the corresponding pipeline, and writes its primary output to
//! `--out` plus sidecars `<stem>.<suffix>` and a replayable
//! `<stem>.manifest.json` in the same directory. Passing a manifest back via
//! `--config` reruns the experiment.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::resolve;
use crate::output::{sha256_file, sidecar_path, to_json_bytes, write_atomic, Manifest, Outcome, SCHEMA_VERSION};

/// Failure classes, mapped to exit codes 2 and 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<gridcut_core::Error> for CliError {
    fn from(e: gridcut_core::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "gridcut", version, about = "MaxCut of power-grid graphs on simulated Rydberg atom arrays")]
pub struct Cli {
    /// Worker threads (falls back to GRIDCUT_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a MATPOWER case file to a graph.
    Parse(ParseArgs),
    /// Brute-force maximum cut of a graph.
    Oracle(GraphArgs),
    /// Pick the best register layout for a graph.
    Embed(EmbedArgs),
    /// Layout selection, pulse optimization and final evaluation.
    Adiabatic(AdiabaticArgs),
    /// Local-detuning (or ideal circuit) QAOA.
    Qaoa(QaoaArgs),
    /// Cycle-wise fidelity benchmark.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON settings file, or a manifest from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Primary output file; sidecars go next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ParseArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// MATPOWER `.m` file.
    #[arg(long)]
    pub case: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// Graph JSON file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// MATPOWER case file (instead of --graph).
    #[arg(long)]
    pub case: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EmbedFlags {
    /// Candidate layouts scored during register selection.
    #[arg(long)]
    pub registers: Option<usize>,
    /// Layout area per vertex, μm².
    #[arg(long)]
    pub area_per_vertex: Option<f64>,
    /// Force-directed relaxation iterations.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Initial step cap of the relaxation, μm.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Clique exponent of the Rydberg-aware variant.
    #[arg(long)]
    pub rho: Option<f64>,
    /// `rydberg` or `classic`.
    #[arg(long)]
    pub variant: Option<String>,
    /// Scale attraction by edge weight.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub weighted: Option<bool>,
    /// Base RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pulse duration, μs.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Integrator time step, μs.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct EmbedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub flags: EmbedFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct AdiabaticArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub embed: EmbedFlags,
    /// Optimizer steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Optimizer learning rate.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// `nadam` or `adam`.
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Time step of the final evaluation, μs.
    #[arg(long)]
    pub final_dt: Option<f64>,
    /// Measurement shots (0 = exact distribution).
    #[arg(long)]
    pub shots: Option<u64>,
    /// Knots per sampled pulse waveform.
    #[arg(long)]
    pub knots: Option<usize>,
    /// Readout error probability 0 → 1.
    #[arg(long)]
    pub p01: Option<f64>,
    /// Readout error probability 1 → 0.
    #[arg(long)]
    pub p10: Option<f64>,
    /// Initial peak Rabi amplitude, MHz.
    #[arg(long)]
    pub p0_mhz: Option<f64>,
    /// Initial pulse shape exponent.
    #[arg(long)]
    pub p1: Option<f64>,
    /// Initial detuning scale, MHz.
    #[arg(long)]
    pub p2_mhz: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct QaoaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Layout JSON file.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Generate a `square` or `honeycomb` lattice instance.
    #[arg(long)]
    pub lattice: Option<String>,
    /// Number of lattice sites.
    #[arg(long)]
    pub vertices: Option<usize>,
    /// Seed of the lattice growth.
    #[arg(long)]
    pub lattice_seed: Option<u64>,
    /// Rescale the layout so the closest pair sits at the lattice spacing.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub rescale: Option<bool>,
    /// QAOA layers p.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Independent optimizer starts.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Optimizer steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Optimizer learning rate.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// `nadam` or `adam`.
    #[arg(long)]
    pub algorithm: Option<String>,
    /// `adjoint` or `central_difference`.
    #[arg(long)]
    pub gradient: Option<String>,
    /// Steps without improvement before stopping.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Minimum cost improvement counted as progress.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Base RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run the ideal circuit model instead of the analog one.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub vanilla: Option<bool>,
    /// Preparation Rabi amplitude, MHz.
    #[arg(long)]
    pub omega_prep_mhz: Option<f64>,
    /// Mixer Rabi amplitude, MHz.
    #[arg(long)]
    pub omega_mixer_mhz: Option<f64>,
    /// Preparation laser phase, rad.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_prep: Option<f64>,
    /// Mixer laser phase, rad.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_mixer: Option<f64>,
    /// Nearest-neighbour spacing, μm.
    #[arg(long)]
    pub lattice_spacing: Option<f64>,
    /// Upper bound on every γ and β, μs.
    #[arg(long)]
    pub layer_cap: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Layout JSON file.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Schedule JSON file.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Number of benchmark cycles.
    #[arg(long)]
    pub cycles: Option<usize>,
    /// Duration of one cycle, μs.
    #[arg(long)]
    pub t_cycle: Option<f64>,
    /// Shots per cycle (0 = exact distribution).
    #[arg(long)]
    pub shots: Option<u64>,
    /// Shots of the reference distribution (0 = exact).
    #[arg(long)]
    pub reference_shots: Option<u64>,
    /// Base RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Readout error probability 0 → 1.
    #[arg(long)]
    pub p01: Option<f64>,
    /// Readout error probability 1 → 0.
    #[arg(long)]
    pub p10: Option<f64>,
    /// Continue each cycle from the previous state.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub incremental: Option<bool>,
    /// Integrator time step, μs.
    #[arg(long)]
    pub dt: Option<f64>,
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("GRIDCUT_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::Usage(format!("GRIDCUT_THREADS={v} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Usage("thread count must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

struct Resolved {
    name: &'static str,
    out: PathBuf,
    config: serde_json::Value,
    outcome: Outcome,
    inputs: Vec<PathBuf>,
}

fn dispatch(command: Command) -> Result<Resolved, CliError> {
    macro_rules! go {
        ($name:literal, $args:expr, $common:expr, $cfg:ty, $run:path $(, $extra:expr)*) => {{
            let cfg: $cfg = resolve($name, $common.config.as_deref(), &$args)?;
            let (outcome, inputs) = $run(&cfg $(, $extra)*)?;
            Resolved {
                name: $name,
                out: $common.out.clone(),
                config: serde_json::to_value(&cfg).expect("configs serialize"),
                outcome,
                inputs,
            }
        }};
    }
    Ok(match command {
        Command::Parse(a) => go!("parse", a, a.common, config::ParseConfig, commands::parse),
        Command::Oracle(a) => go!("oracle", a, a.common, config::OracleConfig, commands::oracle),
        Command::Embed(a) => go!("embed", a, a.graph.common, config::EmbedConfig, commands::embed),
        Command::Adiabatic(a) => go!("adiabatic", a, a.graph.common, config::AdiabaticConfig, commands::adiabatic, &a.graph.common.out),
        Command::Qaoa(a) => go!("qaoa", a, a.graph.common, config::QaoaConfig, commands::qaoa),
        Command::Bench(a) => go!("bench", a, a.graph.common, config::BenchConfig, commands::bench),
    })
}

/// Resolves, runs and writes one subcommand.
pub fn execute(command: Command) -> Result<(), CliError> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let r = dispatch(command)?;

    let mut inputs = std::collections::BTreeMap::new();
    for path in &r.inputs {
        inputs.insert(path.display().to_string(), sha256_file(path)?);
    }
    let mut outputs = vec![r.out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()];
    write_atomic(&r.out, &r.outcome.main)?;
    for (suffix, bytes) in &r.outcome.sidecars {
        let path = sidecar_path(&r.out, suffix);
        write_atomic(&path, bytes)?;
        outputs.push(path.file_name().unwrap().to_string_lossy().into_owned());
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: r.name.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: r.config,
        seeds: r.outcome.seeds,
        inputs,
        outputs,
        started_unix: started,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    };
    write_atomic(&sidecar_path(&r.out, "manifest.json"), &to_json_bytes(&manifest))?;
    Ok(())
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code: 0 ok, 1 runtime failure, 2 usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = configure_threads(cli.threads).and_then(|()| execute(cli.command));
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
