//! Library side of the `snt` binary: argument parsing, configuration and the
//! five pipeline commands.

pub mod commands;
pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use snt_core::engine::{BackendKind, EngineError};
use snt_core::experiment::ExperimentError;
use snt_core::resource::ResourceError;
use std::path::PathBuf;
use thiserror::Error;

pub use config::Config;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible run: {0}")]
    Infeasible(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            e if e.is_infeasible() => CliError::Infeasible(e.to_string()),
            ExperimentError::Invalid(m) => CliError::Config(m),
            // backend or encoding choices the request cannot satisfy
            e @ (ExperimentError::Engine(EngineError::TooManyQubits(..) | EngineError::NotClifford) | ExperimentError::Encoding(_)) => {
                CliError::Config(e.to_string())
            }
            e => CliError::Internal(e.to_string()),
        }
    }
}

impl From<ResourceError> for CliError {
    fn from(e: ResourceError) -> Self {
        match e {
            ResourceError::Unreachable { .. } => CliError::Infeasible(e.to_string()),
            ResourceError::Invalid { .. } | ResourceError::InsufficientSpan { .. } => CliError::Config(e.to_string()),
            e => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("i/o: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "snt", version, about = "Encoded Fermi-Hubbard simulations with SV, PEC and SNT error mitigation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: `output.dir` from the config, else `snt-out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 gives the bit-exact reference run.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// Write raw shot records next to the statistics.
    #[arg(long, global = true)]
    pub dump_shots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Clifford,
    Statevector,
}

impl From<BackendArg> for BackendKind {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Clifford => BackendKind::PauliFrameClifford,
            BackendArg::Statevector => BackendKind::DenseStatevector,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write the circuit IR.
    Build,
    /// Classify every noise-channel entry as PS, PP or undetectable.
    Classify,
    /// Simulate all configured protocols and write per-observable statistics.
    Simulate,
    /// Squared bias, cost and RMSE per protocol.
    Estimate,
    /// Optimal strategy grid plus max-Trotter and required-fidelity curves.
    PhaseDiagram,
}

/// Loads the configuration and applies command-line overrides.
pub fn effective_config(common: &CommonArgs) -> Result<Config, CliError> {
    let mut cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = common.seed {
        cfg.experiment.seed = s;
    }
    if let Some(t) = common.threads {
        cfg.experiment.threads = Some(t);
    }
    if let Some(b) = common.backend {
        cfg.experiment.backend = Some(b.into());
    }
    if common.dump_shots {
        cfg.output.dump_shots = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one command and returns the files it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = effective_config(&cli.common)?;
    let dir = cli.common.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("snt-out"));
    std::fs::create_dir_all(&dir)?;
    let out = output::OutputDir::new(dir, &cfg, cli.command);
    match cli.command {
        Command::Build => commands::build(&cfg, &out),
        Command::Classify => commands::classify(&cfg, &out),
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::Estimate => commands::estimate(&cfg, &out),
        Command::PhaseDiagram => commands::phase_diagram(&cfg, &out),
    }
}
