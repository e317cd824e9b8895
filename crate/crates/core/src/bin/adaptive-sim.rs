use std::path::PathBuf;
use std::process::ExitCode;

use adaptive_rbf::commands::{self, CliConfig, Overrides, Subcommand};
use adaptive_rbf::par;
use adaptive_rbf::simulator::Integrator;
use clap::{Args, Parser};

/// Simulate adaptive RBF-network control of a two-link arm.
#[derive(Parser, Debug)]
#[command(name = "adaptive-sim", version)]
enum Cli {
    /// Run the first controller of a scenario.
    Run(CommonArgs),
    /// Run every controller and write the comparison table.
    Compare(CommonArgs),
    /// Excitation (PE) analysis of each RBFNN node distribution.
    Pe(CommonArgs),
    /// Write node centers next to the trajectory samples.
    Nodes(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Simulated time in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Control and integration step in seconds.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// euler or rk4.
    #[arg(long)]
    integrator: Option<String>,
    /// Metrics window as A:B (seconds).
    #[arg(long)]
    window: Option<String>,
    /// Comma-separated controller labels to keep.
    #[arg(long, value_delimiter = ',')]
    controllers: Option<Vec<String>>,
}

fn config(cli: Cli) -> adaptive_rbf::Result<CliConfig> {
    let (subcommand, a) = match cli {
        Cli::Run(a) => (Subcommand::Run, a),
        Cli::Compare(a) => (Subcommand::Compare, a),
        Cli::Pe(a) => (Subcommand::Pe, a),
        Cli::Nodes(a) => (Subcommand::Nodes, a),
    };
    let overrides = Overrides {
        duration: a.duration,
        dt: a.dt,
        seed: a.seed,
        integrator: a.integrator.as_deref().map(str::parse::<Integrator>).transpose()?,
        window: a.window.as_deref().map(commands::parse_window).transpose()?,
        controllers: a.controllers,
    };
    Ok(CliConfig { subcommand, scenario: a.scenario, out: a.out, overrides })
}

fn threads_from_env() -> Option<usize> {
    let v = std::env::var("ADAPTIVE_SIM_THREADS").ok()?;
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            eprintln!("warning: ignoring ADAPTIVE_SIM_THREADS={v:?}");
            None
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    par::init_threads(threads_from_env());
    let result = config(cli).and_then(|cfg| commands::execute(&cfg));
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
