use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nvmo_cli::{cmd_bounds, cmd_graph, cmd_simulate, BoundsConfig, CliError, RunConfig};

/// Networked visual motion observer: simulation, bounds and graph analysis.
///
/// Verbosity is controlled by the NVMO_LOG environment variable
/// (error, warn, info, debug, trace; default warn).
#[derive(Parser)]
#[command(name = "nvmo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[command(allow_negative_numbers = true)]
enum Command {
    /// Run a scenario and write metrics.csv, summary.txt and optional plots.
    Simulate {
        scenario: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Seed for the image-noise generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write energy.svg and errors.svg.
        #[arg(long)]
        svg: bool,
        /// Override the integration step.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the simulated duration.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Report averaging (and tracking) performance levels for a scenario.
    Bounds {
        scenario: PathBuf,
        /// Slack of the averaging level.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Slack c in beta.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Check the communication graph and compute its constant W.
    Graph { scenario: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NVMO_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors are invalid input; help and version are not errors
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result: Result<(), CliError> = match cli.command {
        Command::Simulate {
            scenario,
            out,
            seed,
            svg,
            dt,
            horizon,
        } => {
            let cfg = RunConfig {
                scenario_path: scenario,
                output_dir: out,
                seed,
                emit_svg: svg,
                dt,
                horizon,
            };
            cmd_simulate(&cfg, &mut stdout).map(|_| ())
        }
        Command::Bounds { scenario, epsilon, c } => cmd_bounds(
            &BoundsConfig {
                scenario_path: scenario,
                epsilon,
                c,
            },
            &mut stdout,
        ),
        Command::Graph { scenario } => cmd_graph(&scenario, &mut stdout),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
