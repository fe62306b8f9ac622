//! Command-line front end for `wqed`: JSON run configurations in, CSV or
//! JSON tables out.
//!
//! Exit codes: 0 success, 2 configuration/schema error, 3 numerical
//! failure (no convergence, singular resolvent, overflow), 1 I/O error.

pub mod config;
pub mod output;
pub mod run;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use config::{Command, Format, RunConfig};

/// Failure classes, each with a stable exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Schema(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn schema(field: &str, reason: impl fmt::Display) -> Self {
        CliError::Schema(format!("`{field}`: {reason}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<wqed::Error> for CliError {
    fn from(e: wqed::Error) -> Self {
        use wqed::Error::*;
        match e {
            InvalidParameter { .. } | MissingFrequency | IndexOutOfRange { .. } | Unnormalized(_) | EmptyGrid => {
                CliError::Schema(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wqed", version, about = "Waveguide QED of ordered atomic arrays: spectra, correlations, lattices, protocols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Single-photon reflection/transmission spectra.
    Spectrum(RunArgs),
    /// Collective eigenmodes of a chain.
    Modes(RunArgs),
    /// Polariton dispersion relations.
    Dispersion(RunArgs),
    /// Second-order correlation functions.
    G2(RunArgs),
    /// Two-excitation eigenstates and their classification.
    Pairstates(RunArgs),
    /// Square-lattice metasurfaces.
    Lattice2d(RunArgs),
    /// Photon-scattering GHZ and state-transfer protocols.
    Protocol(RunArgs),
}

impl Sub {
    fn split(&self) -> (Command, &RunArgs) {
        match self {
            Sub::Spectrum(a) => (Command::Spectrum, a),
            Sub::Modes(a) => (Command::Modes, a),
            Sub::Dispersion(a) => (Command::Dispersion, a),
            Sub::G2(a) => (Command::G2, a),
            Sub::Pairstates(a) => (Command::Pairstates, a),
            Sub::Lattice2d(a) => (Command::Lattice2d, a),
            Sub::Protocol(a) => (Command::Protocol, a),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file ("-" for stdout); overrides the configuration.
    #[arg(long)]
    pub out: Option<String>,
    /// Output format; overrides the configuration.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed for stochastic runs; overrides the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Merge the file configuration with the subcommand and flag overrides.
pub fn resolve_config(command: Command, text: &str, args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut raw: Value = serde_json::from_str(text).map_err(|e| CliError::Schema(format!("config: {e}")))?;
    let obj = raw.as_object_mut().ok_or_else(|| CliError::schema("config", "must be a JSON object"))?;
    match obj.get("command") {
        None => {
            obj.insert("command".into(), Value::String(command.name().into()));
        }
        Some(Value::String(s)) if s == command.name() => {}
        Some(other) => {
            return Err(CliError::schema("command", format!("configuration is for {other}, but `{}` was invoked", command.name())));
        }
    }
    let mut cfg = RunConfig::from_json(&raw.to_string())?;
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    cfg.normalised()
}

/// Run one invocation; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match run_cli(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("wqed: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: &Cli) -> Result<(), CliError> {
    let (command, args) = cli.command.split();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::schema("--threads", "must be ≥ 1"));
        }
        // Ignore the error if a pool already exists (repeated in-process runs).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let text = fs::read_to_string(&args.config).map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let cfg = resolve_config(command, &text, args)?;
    let outcome = run::execute(&cfg)?;
    match cfg.output.path.as_deref() {
        None | Some("-") => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            outcome.table.write(&cfg, &mut lock)?;
            lock.flush()?;
        }
        Some(path) => {
            let mut buf = Vec::new();
            outcome.table.write(&cfg, &mut buf)?;
            fs::write(path, buf).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            for (suffix, doc) in &outcome.attachments {
                let side = format!("{path}.{suffix}");
                let body = serde_json::to_vec_pretty(doc).map_err(|e| CliError::Io(e.to_string()))?;
                fs::write(&side, body).map_err(|e| CliError::Io(format!("{side}: {e}")))?;
            }
        }
    }
    Ok(())
}
