use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nucavity::commands::{self, RunContext};
use nucavity::output::resolve_out_dir;

/// Collective nuclear excitation in thin-film x-ray cavities: simulation,
/// spectra, cavity fitting and photon-budget optimization.
#[derive(Parser)]
#[command(name = "nucavity", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// RNG seed override for stochastic scenarios.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Output directory (default: $NUCAVITY_OUT, then ./out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Rayon worker threads (default: all cores).
    #[arg(long, global = true, value_name = "INT")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Drive the ensemble with Gaussian pulses and emit reflection spectra.
    Simulate,
    /// Average spectra over a stochastic pulse ensemble.
    Sase,
    /// Grid-search cavity layouts for the smallest photon budget.
    Optimize,
    /// Closed-form single-resonance interference spectra.
    Toy,
    /// Fit quantum-optical parameters to one cavity layout.
    FitCavity,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sase => "sase",
            Command::Optimize => "optimize",
            Command::Toy => "toy",
            Command::FitCavity => "fit-cavity",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let Some(config_path) = cli.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(2);
    };
    let ctx = RunContext {
        config_path,
        out_dir: resolve_out_dir(cli.out),
        seed: cli.seed,
    };
    match commands::run(cli.command.name(), &ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
