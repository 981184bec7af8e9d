use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ffp_core::app::{self, Command, ExitStatus, RunOptions};
use ffp_core::demo::{demo, Demo, DEMO_NAMES};
use ffp_core::problem::parse_problem;

/// Verifiable fixed-point solver for fuzzy metric spaces.
#[derive(Parser)]
#[command(name = "ffp", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the t-norm, the zeta function and the contraction condition.
    Verify(RunArgs),
    /// Verify, then run the solver and write a certificate.
    Solve(RunArgs),
    /// Like `solve`, with per-iteration G-Cauchy diagnostic columns.
    Trace(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem file.
    #[arg(required_unless_present = "demo", conflicts_with = "demo")]
    problem: Option<PathBuf>,
    /// Built-in problem instead of a file.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(DEMO_NAMES))]
    demo: Option<String>,
    /// Iterate even when verification finds a counterexample.
    #[arg(long)]
    skip_verify: bool,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Directory for report.txt, certificate.kv and trace.csv.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
    #[arg(long, value_name = "N")]
    max_iter: Option<usize>,
}

fn fail(status: ExitStatus, message: String) -> ExitCode {
    eprintln!("ffp: {message}");
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Solve(a) => (Command::Solve, a),
        Sub::Trace(a) => (Command::Trace, a),
    };

    let env_seed = match std::env::var("FFP_SEED") {
        Ok(s) => match s.trim().parse::<u64>() {
            Ok(seed) => Some(seed),
            Err(_) => return fail(ExitStatus::Failed, format!("FFP_SEED is not an unsigned integer: {s:?}")),
        },
        Err(_) => None,
    };

    let input = match (&args.demo, &args.problem) {
        (Some(name), _) => demo(name).expect("demo names are validated by clap"),
        (None, Some(path)) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(ExitStatus::Io, format!("cannot read {}: {e}", path.display())),
            };
            match parse_problem(&text) {
                Ok(spec) => Demo::Problem(spec),
                Err(e) => return fail(ExitStatus::Failed, format!("{}: {e}", path.display())),
            }
        }
        (None, None) => unreachable!("clap requires a problem or --demo"),
    };

    // solve and trace always leave their artifacts somewhere
    let output_dir = args
        .output
        .or_else(|| (command != Command::Verify).then(|| PathBuf::from(".")));
    let opts = RunOptions {
        skip_verify: args.skip_verify,
        seed: args.seed,
        env_seed,
        tol: args.tol,
        max_iter: args.max_iter,
        output_dir,
    };
    let outcome = app::run(command, &input, &opts);
    print!("{}", outcome.report);
    ExitCode::from(outcome.status.code() as u8)
}
