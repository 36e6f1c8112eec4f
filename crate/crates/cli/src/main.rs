use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use concordance_cli::{run, Options, Query, Verb};

/// Concordance structure sets and inertia groups of connected sums.
#[derive(Parser)]
#[command(name = "concordance", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Append the derivation steps with citations.
    #[arg(long, global = true)]
    trace: bool,
    /// Knowledge-base document to use instead of the shipped one.
    #[arg(long, global = true, value_name = "PATH")]
    kb: Option<PathBuf>,
    /// Largest group order the extension oracle enumerates.
    #[arg(long, global = true, value_name = "N")]
    oracle_bound: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Concordance structure set C(M).
    Compute { expr: String },
    /// Concordance inertia group I_c(M).
    Inertia { expr: String },
    /// Homotopy inertia group I_h(M).
    HInertia { expr: String },
    /// The exact sequence 0 -> Theta_n / I_c(M) -> C(M) -> ker -> 0.
    Ses { expr: String },
    /// Whether C(M1) -> C(M1 # M2) is injective.
    Collapse { first: String, second: String },
    /// Drop highly connected summands.
    Simplify { expr: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, exprs) = match cli.command {
        Command::Compute { expr } => (Verb::Compute, vec![expr]),
        Command::Inertia { expr } => (Verb::Inertia, vec![expr]),
        Command::HInertia { expr } => (Verb::HInertia, vec![expr]),
        Command::Ses { expr } => (Verb::Ses, vec![expr]),
        Command::Collapse { first, second } => (Verb::Collapse, vec![first, second]),
        Command::Simplify { expr } => (Verb::Simplify, vec![expr]),
    };
    let query = Query {
        verb,
        exprs,
        options: Options {
            json: cli.json,
            trace: cli.trace,
            kb_path: cli.kb,
            oracle_bound: cli.oracle_bound,
        },
    };
    let out = run(&query);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.status as u8)
}
