use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qot_core::protocol::DEFAULT_MAX_ROUNDS;
use qot_core::OtBit;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "qot", version, about = "Two-particle quantum oblivious transfer simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run protocol sessions and report Bob's statistics.
    Run(RunArgs),
    /// Run the full check battery; exit 1 if any check fails.
    Verify(VerifyArgs),
    /// Sweep fixed measurement angles and write a CSV table.
    Sweep(SweepArgs),
    /// Estimate one cheating strategy's success rate.
    Attack(AttackArgs),
    /// Compare against the single-particle protocol.
    CkCompare(CkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyKind {
    Honest,
    Fixed,
    Storage,
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    /// Receiver strategy.
    #[arg(long, value_enum, default_value = "honest")]
    pub strategy: StrategyKind,

    /// First measurement angle for `--strategy fixed` (radians, or e.g. `0.25pi`).
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub alpha: Option<f64>,

    /// Second measurement angle for `--strategy fixed`.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Alice's bit: +1 or -1 (1 and 0 are accepted as aliases).
    #[arg(long, default_value = "+1", value_parser = parse_lambda, allow_hyphen_values = true)]
    pub lambda: OtBit,

    #[arg(long, default_value_t = 1000)]
    pub trials: u64,

    /// Per-particle loss probability in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub loss: f64,

    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    pub max_rounds: u32,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(flatten)]
    pub strategy: StrategyArgs,

    /// Write every session's transcript to PATH (`-` or no value: stdout,
    /// in which case the summary goes to stderr).
    #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "-")]
    pub dump_transcript: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Replace the first particle's measurement rule by its complement in the enumeration.
    FlipFirstParticle,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Monte Carlo trials per check.
    #[arg(long, default_value_t = 200_000)]
    pub trials: u64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Negative control for the battery itself.
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "+1", value_parser = parse_lambda, allow_hyphen_values = true)]
    pub lambda: OtBit,

    /// Monte Carlo trials per grid cell.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Grid spacing over [0, pi] on both axes (default pi/16).
    #[arg(long, value_parser = parse_angle)]
    pub grid_step: Option<f64>,

    /// CSV destination; stdout when omitted (summary then goes to stderr).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long, default_value = "+1", value_parser = parse_lambda, allow_hyphen_values = true)]
    pub lambda: OtBit,

    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(flatten)]
    pub strategy: StrategyArgs,
}

#[derive(Debug, Args)]
pub struct CkArgs {
    /// Bob's measurement axis in the single-particle protocol.
    #[arg(long, default_value = "0.25pi", value_parser = parse_angle, allow_hyphen_values = true)]
    pub alpha: f64,

    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

pub fn parse_lambda(s: &str) -> Result<OtBit, String> {
    s.parse()
}

/// Radians, optionally with a `pi` multiplier suffix: `1.2`, `pi`, `0.25pi`, `-0.5pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.strip_suffix("pi") {
        Some("") => PI,
        Some("-") => -PI,
        Some(coefficient) => coefficient
            .parse::<f64>()
            .map(|c| c * PI)
            .map_err(|_| format!("invalid angle `{s}`"))?,
        None => s.parse::<f64>().map_err(|_| format!("invalid angle `{s}`"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("angle must be finite, got `{s}`"))
    }
}
