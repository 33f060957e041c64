//! `cpa`: composition, minimal weak-transition costs, quotients and
//! bisimulation checks for cost probabilistic automata.
//!
//! Exit codes: 0 success or relation holds, 1 relation fails or query
//! infeasible, 2 usage or input error, 3 internal or I/O error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cpa_core::bisim::{CostMode, RelationKind};

#[derive(Parser)]
#[command(name = "cpa", version, about = "Cost probabilistic automata toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a bisimulation relation between two automata.
    Check(CheckArgs),
    /// Parallel composition under a cost generator.
    Compose(ComposeArgs),
    /// Minimal cost of a weak transition.
    Mincost(MincostArgs),
    /// Coarsest weak probabilistic bisimulation partition.
    Quotient(QuotientArgs),
    /// Re-check a witness written by `check --witness`.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long = "rel", value_parser = parse_kind)]
    kind: RelationKind,
    #[arg(long = "cost", value_parser = parse_mode, default_value = "none")]
    mode: CostMode,
    /// With `--cost minor`, the cheaper side.
    a: PathBuf,
    b: PathBuf,
    #[arg(long)]
    json: bool,
    /// Writes the partition here and the cost relation to `<path>.cost`.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
pub struct ComposeArgs {
    /// `sum` or `scaled-sum:<rational>`.
    #[arg(long = "gen", default_value = "sum")]
    generator: String,
    a: PathBuf,
    b: PathBuf,
    /// Output model file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct MincostArgs {
    model: PathBuf,
    #[arg(long)]
    from: String,
    /// Visible action name, or `tau`.
    #[arg(long)]
    action: String,
    /// Challenger distribution, e.g. `s:1/2,t:1/2`.
    #[arg(long)]
    target: String,
    /// Relation file with `pair` or `class` lines.
    #[arg(long, conflicts_with = "rel_identity")]
    rel: Option<PathBuf>,
    /// Relate every state to itself only (the default).
    #[arg(long)]
    rel_identity: bool,
    /// Writes the scheduler realizing the minimum.
    #[arg(long)]
    scheduler: Option<PathBuf>,
    /// Writes the linear program.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct QuotientArgs {
    a: PathBuf,
    /// Optional second automaton; the quotient is taken on the union.
    b: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long = "rel", value_parser = parse_kind)]
    kind: RelationKind,
    #[arg(long = "cost", value_parser = parse_mode, default_value = "none")]
    mode: CostMode,
    a: PathBuf,
    b: PathBuf,
    /// Partition file; for `--cost minor` also reads `<path>.cost`.
    #[arg(long)]
    witness: PathBuf,
    /// Cost relation file, instead of `<witness>.cost`.
    #[arg(long)]
    cost_relation: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn parse_kind(s: &str) -> Result<RelationKind, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<CostMode, String> {
    s.parse()
}

/// Failure of a command, mapped to its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or input files.
    Input(String),
    /// I/O or internal errors.
    Internal(String),
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("CPA_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Failure::Input(format!("CPA_THREADS must be a number, found `{value}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Check(a) => commands::check(&a),
        Command::Compose(a) => commands::compose(&a),
        Command::Mincost(a) => commands::mincost(&a),
        Command::Quotient(a) => commands::quotient(&a),
        Command::Verify(a) => commands::verify(&a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
