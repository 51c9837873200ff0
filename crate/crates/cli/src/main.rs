//! `rap`: command-line front end for exact and simulated random assignment
//! problem values.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rap_core::Execution;

use commands::{CheckKind, Outcome, SimulateTarget};

#[derive(Debug, Parser)]
#[command(
    name = "rap",
    version,
    about = "Random assignment problems with zero patterns"
)]
struct Cli {
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, env = "RAP_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    /// Print human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact expected optimum by the cover formula.
    Value {
        /// Instance file, or `-` for stdin.
        instance: PathBuf,
    },
    /// Partial cover counts d_{i,j}.
    Profile { instance: PathBuf },
    /// Compare the cover formula with the symbolic oracle and, optionally,
    /// a Monte Carlo estimate.
    Verify {
        instance: PathBuf,
        /// Checks to run besides the cover formula.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [CheckKind::Oracle])]
        checks: Vec<CheckKind>,
        /// Oracle node budget.
        #[arg(long, default_value_t = rap_core::oracle::DEFAULT_NODE_BUDGET)]
        budget: u64,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Monte Carlo seed; required when `mc` is among the checks.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// 1 + 1/4 + ... + 1/k^2.
    Parisi { k: usize },
    /// Closed form for a zero-free k-assignment problem.
    Cs { k: usize, m: usize, n: usize },
    /// Probability that a zero-free row is used by the optimum.
    Rowprob { instance: PathBuf, row: usize },
    /// Probability that the smallest entry is used by the optimum.
    Minprob { k: usize, m: usize, n: usize },
    /// Monte Carlo estimate.
    Simulate {
        instance: PathBuf,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        /// `value`, `row:R`, `entry:R,C` or `min-entry`.
        #[arg(long, default_value = "value")]
        what: SimulateTarget,
        /// Write one CSV line per sample.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exact value by symbolic conditioning.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = rap_core::oracle::DEFAULT_NODE_BUDGET)]
        budget: u64,
        /// Write the branching trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Limit integral over the triangle x + y <= 1.
    Integral { alpha: f64, beta: f64 },
}

fn dispatch(command: Command, exec: Execution) -> anyhow::Result<Outcome> {
    match command {
        Command::Value { instance } => commands::value(&instance, exec),
        Command::Profile { instance } => commands::profile(&instance, exec),
        Command::Verify {
            instance,
            checks,
            budget,
            samples,
            seed,
        } => commands::verify(&instance, &checks, budget, samples, seed, exec),
        Command::Parisi { k } => commands::parisi(k),
        Command::Cs { k, m, n } => commands::cs(k, m, n),
        Command::Rowprob { instance, row } => commands::rowprob(&instance, row),
        Command::Minprob { k, m, n } => commands::minprob(k, m, n),
        Command::Simulate {
            instance,
            samples,
            seed,
            what,
            csv,
        } => commands::simulate(&instance, samples, seed, &what, csv.as_deref(), exec),
        Command::Oracle {
            instance,
            budget,
            trace,
        } => commands::oracle(&instance, budget, trace.as_deref(), exec),
        Command::Integral { alpha, beta } => commands::integral(alpha, beta),
    }
}

#[cfg(feature = "parallel")]
fn run_with_threads(threads: Option<u64>, command: Command) -> anyhow::Result<Outcome> {
    let exec = threads.map_or(Execution::Parallel, |t| Execution::from_threads(t as usize));
    match threads {
        Some(t) if t > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build()?
            .install(|| dispatch(command, exec)),
        _ => dispatch(command, exec),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads(_threads: Option<u64>, command: Command) -> anyhow::Result<Outcome> {
    dispatch(command, Execution::Sequential)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run_with_threads(cli.threads, cli.command) {
        Ok(outcome) => {
            let text = if cli.pretty {
                render::table(&outcome.result)
            } else {
                serde_json::to_string(&outcome.result).expect("results serialize")
            };
            println!("{text}");
            ExitCode::from(outcome.status)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
