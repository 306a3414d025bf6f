use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use inertial_attitude::commands;
use inertial_attitude::config::RunConfig;

/// Velocity-free attitude stabilization from vector measurements.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tuning seed (overrides `tuning.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Integration step in seconds (overrides `sim.dt`).
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Final time in seconds (overrides `sim.t_final`).
    #[arg(long = "t-final", global = true)]
    t_final: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the closed loop; writes trajectory.csv and summary.json.
    Simulate { config: PathBuf },
    /// Equilibria, genericity check and linearized spectra; writes analysis.json.
    Analyze { config: PathBuf },
    /// Multi-start gain search; writes tune.json and best_trajectory.csv.
    Tune { config: PathBuf },
    /// Built-in golden-value checks.
    Validate,
}

fn load(cli: &Cli, path: &Path) -> inertial_attitude::Result<(RunConfig, PathBuf)> {
    let cfg = RunConfig::from_path(path)?.with_overrides(cli.dt, cli.t_final, cli.seed)?;
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    Ok((cfg, out))
}

fn run(cli: &Cli) -> inertial_attitude::Result<bool> {
    match &cli.command {
        Command::Simulate { config } => {
            let (cfg, out) = load(cli, config)?;
            let s = commands::simulate(&cfg, &out)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
        Command::Analyze { config } => {
            let (cfg, out) = load(cli, config)?;
            let r = commands::analyze(&cfg, &out)?;
            println!(
                "simple eigenvalues: {}, stable linearization Hurwitz: {}, hyperbolic saddles: {}; report in {}",
                r.gen.holds,
                r.stable_hurwitz,
                r.unstable_hyperbolic,
                out.join(commands::ANALYSIS_FILE).display()
            );
        }
        Command::Tune { config } => {
            let (cfg, out) = load(cli, config)?;
            let r = commands::tune(&cfg, &out)?;
            println!("best objective {} at kappa {:?}", r.best_objective, r.best_kappa);
        }
        Command::Validate => {
            let r = commands::validate(cli.out.as_deref())?;
            print!("{}", r.table());
            return Ok(r.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
