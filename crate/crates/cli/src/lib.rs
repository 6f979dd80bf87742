//! Command-line front end for `snowball-sbm`.
//!
//! Every subcommand is deterministic given `--seed`. Without it a seed is
//! drawn from the operating system and printed to stderr so the run can be
//! replayed.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use snowball_core::InitialDesign;

mod commands;

pub use commands::{
    cmd_estimate, cmd_generate, cmd_mle, cmd_profile, cmd_sample, cmd_simulate, MleReport,
};

/// Log filter variable read by the binary.
pub const LOG_ENV: &str = "SNOWBALL_SBM_LOG";

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "snowball-sbm",
    version,
    about = "Population size and block-model estimation from one-wave snowball samples"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a population graph from a block model.
    Generate(GenerateArgs),
    /// Draw a one-wave snowball sample from a graph and write its
    /// label-free form.
    Sample(SampleArgs),
    /// Run the Gibbs sampler on a sample.
    Estimate(EstimateArgs),
    /// Full-graph maximum-likelihood estimates.
    Mle(MleArgs),
    /// Repeated sampling and estimation on one population.
    Simulate(SimulateArgs),
    /// Observed and label-free log-likelihoods over a grid of N.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Block model parameters (JSON with G, lambda, beta).
    #[arg(long)]
    pub params: PathBuf,
    /// Population size.
    #[arg(short = 'n', long = "size")]
    pub size: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory receiving `edges.tsv` and `strata.csv`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge list, tab separated.
    #[arg(long)]
    pub edges: PathBuf,
    /// Node strata, `node_id,stratum`.
    #[arg(long)]
    pub strata: PathBuf,
    /// Number of strata; defaults to the largest one listed.
    #[arg(long = "strata-count", short = 'G')]
    pub strata_count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// `bernoulli:q`, `fixed:n0` or `degree:n0`.
    #[arg(long)]
    pub design: InitialDesign,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "sample.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct McmcArgs {
    #[arg(long = "chain-length", default_value_t = 1000)]
    pub chain_length: usize,
    /// Fraction of the chain discarded as burn-in.
    #[arg(long = "burn-in", default_value_t = 0.1)]
    pub burn_in: f64,
    /// Cap on N as a multiple of the final sample size.
    #[arg(long = "cap-multiplier", default_value_t = 100.0)]
    pub cap_multiplier: f64,
    /// Absolute cap on N; overrides the multiplier.
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub sample: PathBuf,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory receiving `trace.csv` and `summary.json`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write `profile.csv` at the posterior means over this grid of N.
    #[arg(long)]
    pub grid: Option<NGrid>,
}

#[derive(Debug, Args)]
pub struct MleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Directory receiving `mle.json`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Sample whose likelihood profile at the estimates goes to
    /// `profile.csv`.
    #[arg(long, requires = "grid")]
    pub profile: Option<PathBuf>,
    #[arg(long, requires = "profile")]
    pub grid: Option<NGrid>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Study configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed; overrides `master_seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long = "chain-length")]
    pub chain_length: Option<usize>,
    #[arg(long = "burn-in")]
    pub burn_in: Option<f64>,
    #[arg(long = "cap-multiplier")]
    pub cap_multiplier: Option<f64>,
    #[arg(long)]
    pub design: Option<InitialDesign>,
    /// Directory receiving `estimates.csv`, `summary.json` and histograms.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub sample: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub grid: NGrid,
    #[arg(long, default_value = "profile.csv")]
    pub out: PathBuf,
}

/// Grid of population sizes, `START`, `START:END` or `START:END:STEP`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NGrid {
    pub start: u64,
    pub end: u64,
    pub step: u64,
}

impl NGrid {
    pub fn values(&self) -> impl Iterator<Item = u64> {
        (self.start..=self.end).step_by(self.step as usize)
    }
}

impl FromStr for NGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad grid value `{t}`"))
        };
        let (start, end, step) = match parts.as_slice() {
            [a] => (num(a)?, num(a)?, 1),
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err(format!("grid `{s}` is not START[:END[:STEP]]")),
        };
        if step == 0 || end < start {
            return Err(format!("grid `{s}` is empty"));
        }
        Ok(NGrid { start, end, step })
    }
}

impl fmt::Display for NGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

/// Bad invocation detected by the front end itself.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Sample(a) => cmd_sample(&a),
        Command::Estimate(a) => cmd_estimate(&a),
        Command::Mle(a) => cmd_mle(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Profile(a) => cmd_profile(&a),
    }
}

/// 2 for invalid input, 3 for failures during the computation.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<snowball_core::Error>() {
            return if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            };
        }
        if cause.is::<UsageError>() {
            return EXIT_VALIDATION;
        }
    }
    EXIT_RUNTIME
}

pub(crate) fn require_file(path: &Path) -> Result<(), UsageError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(UsageError(format!(
            "input file {} not found",
            path.display()
        )))
    }
}

/// Returns `seed`, or draws one and reports it on stderr.
pub fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let drawn: u64 = rand::random();
        eprintln!("seed: {drawn}");
        drawn
    })
}
