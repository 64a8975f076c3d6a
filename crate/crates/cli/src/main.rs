//! `hawkes-lln`: scenario-driven batch runner for marked Hawkes process
//! experiments — simulation, resolvent calculus, moment formulas, long-run
//! average verification and ruin diagnostics.
//!
//! Every subcommand reads one JSON scenario file, writes its artifacts
//! atomically into the output directory and prints a one-line JSON summary
//! to standard output. Exit codes: 0 for a passing run, 1 when a verified
//! check fails its tolerance, 2 for usage or configuration problems.

mod output;
mod run;
mod scenario;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::run::{execute, Invocation};
use crate::scenario::CommandKind;

#[derive(Parser)]
#[command(
    name = "hawkes-lln",
    version,
    about = "Marked Hawkes process simulation and law-of-large-numbers verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON scenario file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replicate execution.
    #[arg(long, env = "HAWKES_LLN_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one event stream and write it out.
    Simulate(CommonArgs),
    /// Solve the resolvent equation on a grid.
    Resolvent(CommonArgs),
    /// Expected intensity and counts at given times.
    Moments(CommonArgs),
    /// Verify the long-run event count average.
    LlnCount(CommonArgs),
    /// Verify the long-run aggregate claim average.
    LlnCompound(CommonArgs),
    /// Verify the long-run mark-sum average.
    LlnDphi(CommonArgs),
    /// Verify the long-run risk-surplus drift.
    Ruin(CommonArgs),
    /// Evaluate the net-profit condition.
    Netprofit(CommonArgs),
}

impl Command {
    fn unpack(&self) -> (CommandKind, &CommonArgs) {
        match self {
            Command::Simulate(a) => (CommandKind::Simulate, a),
            Command::Resolvent(a) => (CommandKind::Resolvent, a),
            Command::Moments(a) => (CommandKind::Moments, a),
            Command::LlnCount(a) => (CommandKind::LlnCount, a),
            Command::LlnCompound(a) => (CommandKind::LlnCompound, a),
            Command::LlnDphi(a) => (CommandKind::LlnDphi, a),
            Command::Ruin(a) => (CommandKind::Ruin, a),
            Command::Netprofit(a) => (CommandKind::Netprofit, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.unpack();
    if let Some(threads) = args.threads {
        // Only the first initialization wins; later calls are harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let invocation = Invocation {
        command: kind,
        scenario_path: &args.scenario,
        out_dir: args.out.as_deref(),
        seed: args.seed,
    };
    match execute(&invocation) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
