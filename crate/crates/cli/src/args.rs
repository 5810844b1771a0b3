use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provider {
    Exact,
    WangXia,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    St,
    Scx,
    Tnd,
    Tpd,
    Slnd,
    Slpd,
    Alnd,
    Alpd,
    Kn,
}

/// Stein-method error bounds for birth-death approximations.
#[derive(Debug, Parser, Serialize)]
#[command(name = "bdstein", version)]
pub struct Cli {
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Truncation tolerance for laws built from rate schedules and mixtures.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// JSON file with `model`, `target`, `rates`, `a` or `b` entries overriding the flags.
    #[arg(long, global = true)]
    pub spec_file: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, env = "BDSTEIN_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Evaluate a named bound.
    Bound(BoundArgs),
    /// The 2-runs comparison table.
    Table1,
    /// Exact total variation between a model and an approximating law.
    Tv(TvArgs),
    /// Stochastic order and dependence checks.
    Order(OrderArgs),
    /// Solve the Stein equation for an indicator test function.
    Stein(SteinArgs),
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    /// Registry name, such as tp-kruns or binomial-pbd.
    pub name: String,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Population size of the hypergeometric and birthday models.
    #[arg(long = "N")]
    pub big_n: Option<u64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub r: Option<u64>,
    /// Indicator probabilities, `0.1x100` or `0.1,0.2`.
    #[arg(long)]
    pub probs: Option<String>,
    /// Mixed-Poisson atoms `w@λ,w@λ`.
    #[arg(long)]
    pub atoms: Option<String>,
    /// Model for bounds that take an arbitrary law.
    #[arg(long)]
    pub model: Option<String>,
    /// Approximating rate schedule for first-order and s-order-matched.
    #[arg(long)]
    pub rates: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub s: u32,
    /// Moment-matching order of katz-pbd.
    #[arg(long, default_value_t = 2)]
    pub l: u32,
    #[arg(long, value_enum, default_value_t = Provider::WangXia)]
    pub provider: Provider,
}

#[derive(Debug, Args, Serialize)]
pub struct TvArgs {
    #[arg(long)]
    pub model: Option<String>,
    /// poisson[:λ], tp[:λ,σ²], pbd[:α,γ], geometric[:q], schedule:<rates> or model:<model>.
    #[arg(long, default_value = "poisson")]
    pub target: String,
    /// Monte Carlo samples for models beyond the enumeration budget (birthday against Poisson).
    #[arg(long)]
    pub mc: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct OrderArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    /// Preset pair `mirror:n`: `U` uniform on `0..n` against `n - U`, and `2U` against `n`.
    #[arg(long)]
    pub pair: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub s: u32,
    /// Model for dependence checks.
    #[arg(long)]
    pub model: Option<String>,
    /// Rate schedule for the Karlin-Novikoff check.
    #[arg(long)]
    pub rates: Option<String>,
    /// Random s-convex test functions to cross-check an scx verdict.
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SteinArgs {
    #[arg(long)]
    pub rates: Option<String>,
    /// Indicator set `{0}`, `{0,3}` or `{0..4}`.
    #[arg(long, default_value = "{0}")]
    pub set: String,
    /// Random indicator sets for the empirical norm search.
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Run only this criterion.
    #[arg(long)]
    pub criterion: Option<u8>,
    /// Include wall-clock seconds (output is then not reproducible byte for byte).
    #[arg(long)]
    pub timings: bool,
}
