//! Command-line surface for the shardplan toolkit: construct and optimize
//! assignment maps, compare them, and run the dealing pipeline end to end.
//!
//! Exit codes are a stable interface:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 1    | input error (files, JSON, shape)          |
//! | 2    | the optimization program is infeasible    |
//! | 3    | the solver's node budget was exhausted    |
//! | 4    | verification or reconstruction fell short |
//!
//! Every subcommand accepts `--json` for machine-readable output; rates are
//! always exact rationals, carried as numerator/denominator pairs in
//! machine output. The environment variable `SHARDPLAN_NODE_BUDGET`
//! overrides the solver's node budget for every optimizing command.

mod commands;
mod output;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use shardplan::crypto::DEFAULT_MODULUS;

/// Exit codes promised by the interface.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const INFEASIBLE: u8 = 2;
    pub const BUDGET: u8 = 3;
    pub const VERIFY: u8 = 4;
}

/// Name of the environment variable overriding the solver node budget.
pub const NODE_BUDGET_ENV: &str = "SHARDPLAN_NODE_BUDGET";

#[derive(Parser)]
#[command(
    name = "shardplan",
    version,
    about = "Design, optimize and run secret-sharing schemes over general access structures"
)]
struct Cli {
    /// Emit machine-readable JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the share-minimization program for a structure.
    Solve(SolveArgs),
    /// Run a named construction on a structure.
    Construct(ConstructArgs),
    /// Compare every applicable construction on one structure.
    Compare(CompareArgs),
    /// Split a secret file into one share bundle per participant.
    Split(SplitArgs),
    /// Combine share bundles back into the secret.
    Combine(CombineArgs),
    /// Check an assignment map against a structure.
    Verify(VerifyArgs),
    /// Classify each participant's share as significant, common or vacuous.
    Classify(ClassifyArgs),
    /// Decide whether a structure admits an all-rates-1 realization.
    IdealCheck(IdealCheckArgs),
}

/// Figure of merit for the optimizing commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    /// Minimize the average per-participant coding rate.
    Avg,
    /// Minimize the worst per-participant coding rate.
    Worst,
}

/// Middle-level discipline for ramp structures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Intermediate coalitions must hold exactly their ladder quota.
    Exact,
    /// Intermediate coalitions may leak less than their ladder quota.
    Relaxed,
}

/// Construction selector for `construct`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// One primitive per maximal forbidden set (perfect structures).
    Cumulative,
    /// The block-compressed cumulative variant (perfect structures).
    Modified,
    /// The multiset cover construction (ramp structures).
    RampCumulative,
    /// A stack of one perfect scheme per level (ramp structures).
    Construction2,
}

/// Per-level map strategy for the level-stack construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    /// Stack the cumulative map of every level.
    Cumulative,
    /// Optimize each level for average rate.
    IpAvg,
    /// Optimize each level for worst rate.
    IpWorst,
}

#[derive(clap::Args)]
pub(crate) struct SolveArgs {
    /// Structure document (JSON).
    pub(crate) structure: PathBuf,
    /// Figure of merit.
    #[arg(long, value_enum, default_value_t = Objective::Avg)]
    pub(crate) objective: Objective,
    /// Middle-level discipline; ignored for perfect structures.
    #[arg(long, value_enum, default_value_t = Mode::Relaxed)]
    pub(crate) mode: Mode,
    /// Write the solved map JSON here instead of printing it.
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub(crate) struct ConstructArgs {
    /// Structure document (JSON).
    pub(crate) structure: PathBuf,
    /// Which construction to run.
    #[arg(long, value_enum)]
    pub(crate) method: Method,
    /// Per-level strategy for `construction2`.
    #[arg(long, value_enum, default_value_t = Strategy::Cumulative)]
    pub(crate) strategy: Strategy,
    /// Write the resulting JSON here instead of printing it.
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub(crate) struct CompareArgs {
    /// Structure document (JSON).
    pub(crate) structure: PathBuf,
    /// Also write the comparison as CSV to this file.
    #[arg(long)]
    pub(crate) csv: Option<PathBuf>,
}

#[derive(clap::Args)]
pub(crate) struct SplitArgs {
    /// File whose bytes are the secret.
    pub(crate) secret: PathBuf,
    /// Assignment map document (JSON).
    pub(crate) map: PathBuf,
    /// Directory receiving one bundle file per participant.
    #[arg(long)]
    pub(crate) outdir: PathBuf,
    /// Deal deterministically from this seed; omit for fresh randomness.
    #[arg(long)]
    pub(crate) seed: Option<u64>,
    /// Prime modulus of the share field.
    #[arg(long, default_value_t = DEFAULT_MODULUS)]
    pub(crate) modulus: u64,
}

#[derive(clap::Args)]
pub(crate) struct CombineArgs {
    /// Bundle files presented by the coalition.
    #[arg(required = true)]
    pub(crate) bundles: Vec<PathBuf>,
    /// Assignment map the bundles were dealt under (JSON).
    #[arg(long)]
    pub(crate) map: PathBuf,
    /// Write the recovered secret here instead of stdout.
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub(crate) struct VerifyArgs {
    /// Assignment map document (JSON).
    pub(crate) map: PathBuf,
    /// Structure document (JSON).
    pub(crate) structure: PathBuf,
    /// Also instantiate the scheme over a small field and measure
    /// conditional entropy for every representative coalition.
    #[arg(long)]
    pub(crate) oracle: bool,
    /// Middle-level discipline for ramp structures.
    #[arg(long, value_enum, default_value_t = Mode::Relaxed)]
    pub(crate) mode: Mode,
    /// State-count ceiling for the oracle layer.
    #[arg(long, default_value_t = shardplan::crypto::DEFAULT_ORACLE_BUDGET)]
    pub(crate) oracle_budget: u128,
}

#[derive(clap::Args)]
pub(crate) struct ClassifyArgs {
    /// Structure document (JSON).
    pub(crate) structure: PathBuf,
}

#[derive(clap::Args)]
pub(crate) struct IdealCheckArgs {
    /// Structure document (JSON).
    pub(crate) structure: PathBuf,
}

/// Restores the default SIGPIPE disposition so that piping output into a
/// pager or `head` ends the process quietly instead of panicking.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes, not usage errors.
            let code = if err.use_stderr() { exit::INPUT } else { exit::SUCCESS };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.json;
    let result = match cli.command {
        Command::Solve(args) => commands::solve(&args, json),
        Command::Construct(args) => commands::construct(&args, json),
        Command::Compare(args) => commands::compare(&args, json),
        Command::Split(args) => commands::split(&args, json),
        Command::Combine(args) => commands::combine(&args, json),
        Command::Verify(args) => commands::verify(&args, json),
        Command::Classify(args) => commands::classify(&args, json),
        Command::IdealCheck(args) => commands::ideal_check(&args, json),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::INPUT)
        }
    }
}
