use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ilwbo::cli::{run, Command, RunOptions};

const EXIT_CODES: &str = "\
Exit codes:
  0  success (verify: every check passed)
  1  output could not be written
  2  configuration error (the message names the offending key)
  3  numerical failure (evolve: failing time recorded in the manifest)
  4  solitary iteration did not converge (trace still written)
  5  singular mode: the speed lies in the linear spectrum
  6  verify: at least one check failed";

/// Spectral solvers for the ILW and Benjamin-Ono internal-wave systems.
#[derive(Parser)]
#[command(version, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Evolve an initial state with the Fourier-Galerkin scheme and RK4.
    #[command(after_help = EXIT_CODES)]
    Evolve(Common),
    /// Compute a solitary wave by the (accelerated) Petviashvili iteration.
    #[command(after_help = EXIT_CODES)]
    Solitary(Common),
    /// Run verification experiments and check them against thresholds.
    #[command(after_help = EXIT_CODES)]
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (TOML if it ends in .toml, JSON otherwise).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    /// Worker threads for independent runs (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Evolve(c) => (Command::Evolve, c),
        Sub::Solitary(c) => (Command::Solitary, c),
        Sub::Verify(c) => (Command::Verify, c),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("--threads: {e}");
            return ExitCode::from(2);
        }
    }
    let opts = RunOptions {
        config: common.config,
        out: common.out,
        quiet: common.quiet,
    };
    ExitCode::from(run(command, &opts) as u8)
}
