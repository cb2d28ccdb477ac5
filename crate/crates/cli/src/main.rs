mod commands;
mod config;
mod error;
mod output;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_key_values, Command, RunConfig};
use error::{CliError, CliResult};
use output::Staged;

/// Quantum chemistry simulation toolkit.
#[derive(Parser)]
#[command(name = "chemsim", version, args_conflicts_with_subcommands = true)]
struct Cli {
    /// Re-run the configuration recorded in a result file.
    #[arg(long, value_name = "RESULT")]
    replay: Option<PathBuf>,
    /// Where to write the replayed result (stdout if absent).
    #[arg(long, requires = "replay")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Subcommand)]
enum Sub {
    /// Encode a Hamiltonian onto qubits, optionally tapering symmetries.
    Map {
        #[command(flatten)]
        common: Common,
        /// Also write the bare Pauli-sum JSON here.
        #[arg(long)]
        hamiltonian_output: Option<PathBuf>,
    },
    /// Exact eigenvalues of the qubit Hamiltonian.
    Spectrum(Common),
    /// Variational ground-state search.
    Vqe(Common),
    /// Time evolution with product formulas or truncated Taylor series.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Error-versus-steps table as CSV.
        #[arg(long)]
        series: Option<PathBuf>,
    },
    /// Quantum phase estimation of an energy.
    Qpe(Common),
    /// Quantum imaginary time evolution.
    Qite(Common),
    /// Error mitigation: zne, readout or postselect.
    Mitigate(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// FCIDUMP or Pauli-sum JSON file.
    #[arg(long, short)]
    input: Option<String>,
    /// Result file (stdout if absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// jw, parity, parity_reduced or bk.
    #[arg(long)]
    encoding: Option<String>,
    #[arg(long)]
    taper: bool,
    /// exact or shots.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    shots: Option<u64>,
    /// on or off.
    #[arg(long)]
    noise: Option<String>,
    /// Any other configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> CliResult<Vec<(String, String)>> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("input", self.input.clone());
        push("seed", self.seed.map(|s| s.to_string()));
        push("encoding", self.encoding.clone());
        push("taper", self.taper.then(|| "true".to_string()));
        push("mode", self.mode.clone());
        push("shots", self.shots.map(|s| s.to_string()));
        push("noise", self.noise.clone());
        for kv in &self.set {
            out.extend(parse_key_values(kv, "--set")?);
        }
        Ok(out)
    }
}

fn execute(cfg: &RunConfig, output: Option<PathBuf>, series: Option<PathBuf>, ham: Option<PathBuf>) -> CliResult<()> {
    let outcome = commands::run(cfg)?;
    let mut staged = Staged::default();
    if let (Some(path), Some(csv)) = (&series, &outcome.series_csv) {
        staged.add(Some(path), csv)?;
    }
    if let (Some(path), Some(text)) = (&ham, &outcome.hamiltonian_json) {
        staged.add(Some(path), text)?;
    }
    staged.add(output.as_deref(), &output::render(&output::envelope(cfg, outcome.result))?)?;
    staged.commit()
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(path) = cli.replay {
        let cfg = output::read_recorded(&path)?;
        return execute(&cfg, cli.output, None, None);
    }
    let Some(sub) = cli.command else {
        return Err(CliError::Input("no command given; see --help".into()));
    };
    let (command, common, series, ham) = match sub {
        Sub::Map { common, hamiltonian_output } => (Command::Map, common, None, hamiltonian_output),
        Sub::Spectrum(c) => (Command::Spectrum, c, None, None),
        Sub::Vqe(c) => (Command::Vqe, c, None, None),
        Sub::Evolve { common, series } => (Command::Evolve, common, series, None),
        Sub::Qpe(c) => (Command::Qpe, c, None, None),
        Sub::Qite(c) => (Command::Qite, c, None, None),
        Sub::Mitigate(c) => (Command::Mitigate, c, None, None),
    };
    let cfg = RunConfig::build(command, common.config.as_deref(), common.overrides()?)?;
    execute(&cfg, common.output, series, ham)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
