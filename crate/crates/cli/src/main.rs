//! `gapp`: run solver, relaxation, decoder and oracle experiments from flat
//! config files. Exit status 0 on success, 1 on bad input or a violated
//! guard, 2 when a run does not converge.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Outcome};
use config::{parse_overrides, Config, Schema};

#[derive(Debug, Parser)]
#[command(name = "gapp", version, about = "Generalized APP solvers, decoders and oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Discrete pairwise model: iterate to a fixed point, write beliefs.
    Solve(Common),
    /// 1D continuum relaxation to a stationary state.
    Schrodinger(Common),
    /// LDPC error-rate sweep.
    Ldpc(Common),
    /// Brute-force minimum or grid eigensolver.
    Oracle(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Further `--key value` overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

fn resolve(schema: &Schema, args: &Common) -> Result<Config, CliError> {
    let mut overrides = parse_overrides(&args.overrides)?;
    if let Some(out) = &args.out {
        overrides.push(("out".into(), out.display().to_string()));
    }
    if let Some(seed) = args.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    Ok(Config::resolve(schema, args.config.as_deref(), overrides)?)
}

type Runner = fn(&Config) -> Result<Outcome, CliError>;

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let (schema, args, f): (&Schema, &Common, Runner) = match &cli.command {
        Command::Solve(a) => (&commands::SOLVE, a, commands::solve),
        Command::Schrodinger(a) => (&commands::SCHRODINGER, a, commands::schrodinger),
        Command::Ldpc(a) => (&commands::LDPC, a, commands::ldpc),
        Command::Oracle(a) => (&commands::ORACLE, a, commands::oracle),
    };
    f(&resolve(schema, args)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Converged) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => {
            eprintln!("gapp: did not converge");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("gapp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
