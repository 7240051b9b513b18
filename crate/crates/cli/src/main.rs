//! `gsens`: check, run and test gradual sensitivity programs.
//!
//! Exit codes: 0 success, 1 type error (or a rejected test precondition),
//! 2 sensitivity violation (or a failed property), 3 other runtime error,
//! 4 parse error, 5 I/O or invalid argument.

mod diag;
mod metatheory;
mod privacy;
mod program;
mod repl;

use clap::{Parser, Subcommand, ValueEnum};
use gsens_core::eval::DEFAULT_STEP_BUDGET;
use gsens_dp::RatioConfig;
use gsens_harness::GgKind;

use diag::Exit;

/// Seed used when neither `--seed` nor `GSENS_SEED` is given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "gsens", version, about = "Gradual sensitivity typing")]
struct Cli {
    /// Random seed for `laplace` and the randomized tests.
    #[arg(long, global = true, env = "GSENS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Print one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck a program and print the type of each item.
    Check { file: String },
    /// Evaluate a program and print its last value.
    Run {
        file: String,
        /// Print every reduction step.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        step_budget: u64,
    },
    /// Randomized metatheory checks.
    #[command(subcommand)]
    Test(TestCommand),
    /// Differential privacy mechanisms.
    #[command(subcommand)]
    Dp(DpCommand),
    /// Interactive session.
    Repl {
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        step_budget: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Guarantee {
    Static,
    Dynamic,
    Both,
}

#[derive(Subcommand)]
enum TestCommand {
    /// Metric preservation of the last function in a file, or of every file in a directory.
    Mp {
        path: String,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        /// Input distance per resource, e.g. `2r + s`; default 1 each.
        #[arg(long)]
        delta: Option<String>,
        /// Claimed result sensitivity; default the declared one.
        #[arg(long)]
        sigma: Option<String>,
        /// Termination-sensitive: bounded claims only, and runs must agree on termination.
        #[arg(long)]
        ts: bool,
        #[arg(long)]
        step_budget: Option<u64>,
    },
    /// Gradual guarantees under random annotation widenings.
    Gg {
        path: String,
        #[arg(long, default_value_t = 1000)]
        widenings: usize,
        #[arg(long, value_enum, default_value_t = Guarantee::Both)]
        guarantee: Guarantee,
    },
    /// Associativity and monotonicity of consistent transitivity.
    Evidence {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum DpCommand {
    /// Gradual Laplace mechanism on one input.
    Glm {
        /// Query over the resource `db`, e.g. `fn (y: Number[db]) => y`.
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, allow_hyphen_values = true)]
        input: f64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// Gradual above-threshold over a list of queries.
    Gat {
        /// Repeat for each query, in order.
        #[arg(long = "query")]
        queries: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        threshold: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, allow_hyphen_values = true)]
        input: f64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// Histogram test of ε-differential privacy for GLM on two neighboring inputs.
    Verify {
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        db1: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        db2: f64,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long, default_value_t = 500)]
        min_bin: u64,
        #[arg(long, default_value_t = 0.15)]
        tau: f64,
    },
}

fn dispatch(cli: Cli) -> i32 {
    let seed = cli.seed;
    let outcome = match cli.command {
        Command::Check { file } => program::check(&file),
        Command::Run { file, trace, step_budget } => {
            let opts = program::RunOptions { seed, step_budget, trace, json: cli.json };
            program::run(&file, &opts)
        }
        Command::Test(TestCommand::Mp { path, pairs, delta, sigma, ts, step_budget }) => {
            let opts = metatheory::MpOptions {
                pairs,
                delta: delta.as_deref(),
                sigma: sigma.as_deref(),
                ts,
                seed,
                step_budget,
            };
            metatheory::mp(&path, &opts)
        }
        Command::Test(TestCommand::Gg { path, widenings, guarantee }) => {
            let kinds = match guarantee {
                Guarantee::Static => vec![GgKind::Static],
                Guarantee::Dynamic => vec![GgKind::Dynamic],
                Guarantee::Both => vec![GgKind::Static, GgKind::Dynamic],
            };
            metatheory::gg(&path, widenings, &kinds, seed)
        }
        Command::Test(TestCommand::Evidence { trials }) => metatheory::evidence(trials, seed),
        Command::Dp(DpCommand::Glm { query, eps, input, runs }) => privacy::glm(&query, eps, input, runs, seed),
        Command::Dp(DpCommand::Gat { queries, threshold, eps, input, runs }) => {
            privacy::gat(&queries, threshold, eps, input, runs, seed)
        }
        Command::Dp(DpCommand::Verify { query, eps, db1, db2, samples, bins, min_bin, tau }) => {
            let config = RatioConfig { samples, bins, min_bin, tau, seed };
            privacy::verify(&privacy::VerifyOptions { query: &query, eps, db1, db2, config })
        }
        Command::Repl { step_budget } => {
            return match repl::main(seed, step_budget) {
                Ok(()) => Exit::Ok as i32,
                Err(e) => {
                    eprintln!("{}", diag::Diagnostic::io("<stdin>", &e));
                    Exit::Io as i32
                }
            };
        }
    };
    outcome.emit(cli.json)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Io as i32 } else { Exit::Ok as i32 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(dispatch(cli));
}
