//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "spdecrit", version, about = "Criticality analysis and numerical checks for singular SPDEs")]
pub struct Cli {
    /// Config file of `key = value;` statements; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for every random draw (default: $SPDECRIT_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Table => "table",
            Format::Json => "json",
        })
    }
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand a specification and classify its criticality.
    Analyze(AnalyzeArgs),
    /// Run a numerical verification suite.
    Verify(VerifyArgs),
    /// Noise samplers.
    Noise {
        #[command(subcommand)]
        command: NoiseCommand,
    },
    /// Evaluate Tychonov's series and its truncation residual.
    Tychonov(TychonovArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub spec: PathBuf,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub dim: Option<i64>,
    /// Parameter override `name=value` (gamma, alpha, gamma1, n, d).
    #[arg(long = "param")]
    pub params: Vec<String>,
    /// Warn about white-in-time noise with Riesz transport.
    #[arg(long)]
    pub warn_white_in_time_riesz: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Uniqueness,
    Inequality,
    Steklov,
    Tychonov,
    Noise,
    Bony,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Uniqueness => "uniqueness",
            Suite::Inequality => "inequality",
            Suite::Steklov => "steklov",
            Suite::Tychonov => "tychonov",
            Suite::Noise => "noise",
            Suite::Bony => "bony",
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Odd damping power; for `inequality`, a single power instead of 3, 5, 7, 9.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Number of random series (steklov) or seeds (noise).
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub alpha: Option<u32>,
    #[arg(long)]
    pub terms: Option<usize>,
    /// `t0,t1,x0,x1`.
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum NoiseCommand {
    /// Sample the linear stochastic heat flow and write snapshots.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Print the fitted Hölder exponent of the final field.
    #[arg(long)]
    pub estimate: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TychonovArgs {
    #[arg(long)]
    pub alpha: Option<u32>,
    #[arg(long)]
    pub terms: Option<usize>,
    /// `t0,t1,x0,x1`.
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
