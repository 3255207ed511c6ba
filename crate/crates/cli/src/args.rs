use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use samplan_core::{DistSpec, PlanKind, TieBreak};

#[derive(Debug, Parser)]
#[command(name = "samplan", version, about = "Design and analyze attribute acceptance-sampling plans")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "SAMPLAN_DEFAULT_FORMAT", default_value = "json")]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the smallest plan meeting both risk constraints.
    Design(DesignArgs),
    /// Evaluate the OC function of a plan.
    Oc(OcArgs),
    /// Simulate a stream of lots under the chained acceptance rule.
    Simulate(SimulateArgs),
    /// Regenerate a published table and diff it against the printed values.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Mchgsp,
    Gasip,
    Sasip,
}

impl From<KindArg> for PlanKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Mchgsp => PlanKind::Mchgsp,
            KindArg::Gasip => PlanKind::Gasip,
            KindArg::Sasip => PlanKind::Sasip,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieBreakArg {
    CThenI,
    IThenC,
}

impl From<TieBreakArg> for TieBreak {
    fn from(t: TieBreakArg) -> Self {
        match t {
            TieBreakArg::CThenI => TieBreak::CThenI,
            TieBreakArg::IThenC => TieBreak::IThenC,
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Largest group count searched (sample size for sasip).
    #[arg(long, default_value_t = 1000)]
    pub g_max: u32,
    /// Largest acceptance number searched.
    #[arg(long, default_value_t = 10)]
    pub c_max: u32,
    /// Largest chain length searched.
    #[arg(long, default_value_t = 10)]
    pub i_max: u32,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long, value_enum, default_value = "mchgsp")]
    pub kind: KindArg,
    /// Items per group; required for mchgsp and gasip, ignored for sasip.
    #[arg(long)]
    pub r: Option<u32>,
    /// Acceptable quality level (fraction nonconforming).
    #[arg(long, value_parser = parse_probability)]
    pub aql: f64,
    /// Limiting quality level (fraction nonconforming).
    #[arg(long, value_parser = parse_probability)]
    pub lql: f64,
    /// Producer's risk.
    #[arg(long, value_parser = parse_probability, default_value = "0.05")]
    pub alpha: f64,
    /// Consumer's risk.
    #[arg(long, value_parser = parse_probability, default_value = "0.10")]
    pub beta: f64,
    #[command(flatten)]
    pub bounds: BoundsArgs,
    #[arg(long, value_enum, default_value = "c-then-i")]
    pub tie_break: TieBreakArg,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub r: u32,
    #[arg(long)]
    pub g: u32,
    #[arg(long)]
    pub c: u32,
    #[arg(long, default_value_t = 1)]
    pub i: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| (self.start + k as f64 * self.step).min(self.stop))
            .collect()
    }
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("quality").required(true).args(["p", "grid", "dist"]))]
pub struct OcArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// A single fraction nonconforming.
    #[arg(long, value_parser = parse_probability)]
    pub p: Option<f64>,
    /// Grid of fractions nonconforming, `start:stop:step`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<Grid>,
    /// Lifetime distribution, e.g. `exponential:scale=10` or `weibull:shape=2,scale=10`.
    #[arg(long, requires = "time", value_parser = parse_dist)]
    pub dist: Option<DistSpec>,
    /// Truncation time of the life test (with --dist).
    #[arg(long, requires = "dist")]
    pub time: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// True fraction nonconforming of every lot.
    #[arg(long, value_parser = parse_probability)]
    pub p: f64,
    #[arg(long, default_value_t = 100_000)]
    pub lots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leading lots excluded from the estimate (default and minimum: i).
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Independent streams pooled into one estimate; stream k uses seed + k.
    #[arg(long, default_value_t = 1)]
    pub replications: u32,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Table number, 1 or 2.
    #[arg(long)]
    pub table: u32,
    /// Absolute tolerance on OC columns (table 1).
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub bounds: BoundsArgs,
}

/// Decimal probability in [0, 1]. Percent forms are rejected.
pub fn parse_probability(s: &str) -> Result<f64, String> {
    if s.contains('%') {
        return Err(format!("`{s}`: give probabilities as decimals in [0, 1], not percentages"));
    }
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(format!("`{s}` is outside [0, 1]"));
    }
    Ok(v)
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("`{s}`: expected start:stop:step"));
    };
    let start = parse_probability(start)?;
    let stop = parse_probability(stop)?;
    let step: f64 = step.trim().parse().map_err(|_| format!("step `{step}` is not a number"))?;
    if !(step.is_finite() && step > 0.0) {
        return Err("grid step must be positive".into());
    }
    if start > stop {
        return Err("grid start must not exceed stop".into());
    }
    Ok(Grid { start, stop, step })
}

pub fn parse_dist(s: &str) -> Result<DistSpec, String> {
    s.parse::<DistSpec>().map_err(|e| e.to_string())
}
