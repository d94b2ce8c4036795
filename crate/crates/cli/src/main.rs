use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use influence::commands::{self, Method, Output};
use influence_core::baselines::OracleCaps;

/// Evaluate influence diagrams by reduction to Bayesian-network inference.
#[derive(Parser)]
#[command(name = "influence", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network file; prints one line per violation.
    Validate { path: PathBuf },
    /// Show the partition around the tail decision node.
    Decompose { path: PathBuf },
    /// Compute an optimal policy and its expected value.
    Evaluate {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "reduction")]
        method: Method,
        /// Write the full result document here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Derive every elimination order from one global min-fill order.
        #[arg(long)]
        order_conform: bool,
    },
    /// Run every method and compare values and operation counts.
    Compare {
        path: PathBuf,
        /// Include the exhaustive oracle.
        #[arg(long)]
        oracle: bool,
        /// Largest joint state space the oracle may enumerate.
        #[arg(long, default_value_t = 1_000_000)]
        oracle_cap: u128,
    },
    /// Print a random diagram from the test-suite generator.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use a higher edge probability.
        #[arg(long)]
        dense: bool,
    },
}

fn main() -> ExitCode {
    let out: Output = match Cli::parse().command {
        Command::Validate { path } => commands::validate(&path),
        Command::Decompose { path } => commands::decompose(&path),
        Command::Evaluate { path, method, out, order_conform } => {
            commands::evaluate(&path, method, out.as_deref(), order_conform)
        }
        Command::Compare { path, oracle, oracle_cap } => {
            commands::compare(&path, oracle, OracleCaps { joint: oracle_cap, ..OracleCaps::default() })
        }
        Command::Gen { seed, dense } => commands::generate(seed, dense),
    };
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
