//! Batch front-end: one subcommand per pipeline stage, a TOML or JSON config
//! in, JSON or CSV out.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::RunConfig;
use crate::error::{CliError, Exit};

#[derive(Parser)]
#[command(name = "eisenhart", version, about = "Eisenhart lift toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file (TOML or JSON).
    config: PathBuf,
    /// Override a config value, e.g. `--set potential.V=0.5*x^2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Seed for randomized sampling (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Conformal flatness and flatness of the lifted metric.
    Flatness(Common),
    /// Christoffel, Riemann, Ricci, scalar and Cotton components.
    Curvature(Common),
    /// Hill equation, patch, Phi and Omega.
    HillSolve(Common),
    /// Build a flattening map and emit its descriptor.
    MapBuild(Common),
    /// Check a flattening map against its defining relations.
    MapVerify(Common),
    /// Compare lifted geodesics with Newtonian trajectories.
    ClassicalSim(Common),
    /// Transport a free packet and compare with Crank-Nicolson.
    QuantumSim(Common),
    /// Action identity along a classical path.
    ActionCheck(Common),
}

type Runner = fn(&RunConfig, u64) -> Result<Outcome, CliError>;

fn load(common: &Common) -> Result<(RunConfig, u64), CliError> {
    let mut value = config::load_value(&common.config)?;
    for o in &common.overrides {
        config::apply_override(&mut value, o)?;
    }
    let cfg = config::from_value(value)?;
    let seed = common.seed.or(cfg.seed).unwrap_or(0);
    Ok((cfg, seed))
}

fn run(common: &Common, runner: Runner) -> Result<Exit, CliError> {
    let (cfg, seed) = load(common)?;
    let outcome = runner(&cfg, seed)?;
    match &cfg.output.path {
        Some(path) => std::fs::write(path, &outcome.body)
            .map_err(|e| CliError::Runtime(format!("cannot write {path}: {e}")))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.body.as_bytes()).map_err(CliError::runtime)?;
        }
    }
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (common, runner): (&Common, Runner) = match &cli.command {
        Command::Flatness(c) => (c, commands::cmd_flatness),
        Command::Curvature(c) => (c, commands::cmd_curvature),
        Command::HillSolve(c) => (c, commands::cmd_hill),
        Command::MapBuild(c) => (c, commands::cmd_map),
        Command::MapVerify(c) => (c, commands::cmd_map_verify),
        Command::ClassicalSim(c) => (c, commands::cmd_classical),
        Command::QuantumSim(c) => (c, commands::cmd_quantum),
        Command::ActionCheck(c) => (c, commands::cmd_action),
    };
    let exit = match run(common, runner) {
        Ok(exit) => exit,
        Err(e) => {
            println!("{}", e.to_json());
            eprintln!("error: {e}");
            e.exit()
        }
    };
    ExitCode::from(exit as u8)
}
