//! Command-line arguments. Every command struct is also serialized into the
//! run manifest, so all defaults end up recorded.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "fracfact", version, about = "Exact conditional tests for two-level fractional factorial designs")]
pub struct Cli {
    /// Format of the report printed on standard output.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Write a run manifest (resolved arguments, input and output digests) to this file.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Poisson,
    Binomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticArg {
    /// Likelihood ratio (deviance).
    G2,
    /// Pearson chi-square.
    X2,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Print the design matrix, defining contrast subgroup, alias table and resolution.
    Design(DesignArgs),
    /// Build the covariate matrix of a model and check estimability.
    Model(ModelArgs),
    /// Compute or import a move set, optionally certifying small fibers.
    Basis(BasisArgs),
    /// Fit the null model and run the Markov chain test.
    Test(TestArgs),
    /// Enumerate the fiber of the observed data and compute the exact p-value.
    Enumerate(EnumerateArgs),
    /// Match the null model with a log-linear model of a contingency table.
    Correspond(CorrespondArgs),
    /// Re-run a manifest and check that inputs and outputs hash identically.
    Replay(ReplayArgs),
}

impl Command {
    /// Output files written by the command, for redirection on replay.
    pub fn output_paths_mut(&mut self) -> Vec<&mut PathBuf> {
        let opts: Vec<&mut Option<PathBuf>> = match self {
            Command::Design(_) | Command::Replay(_) => vec![],
            Command::Model(a) => vec![&mut a.export],
            Command::Basis(a) => vec![&mut a.output],
            Command::Test(a) => vec![&mut a.histogram, &mut a.fitted, &mut a.output],
            Command::Enumerate(a) => vec![&mut a.points, &mut a.output],
            Command::Correspond(a) => vec![&mut a.output],
        };
        opts.into_iter().filter_map(Option::as_mut).collect()
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Test(a) => Some(a.seed),
            _ => None,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct DesignArgs {
    /// Design file: "p q" then one generator per line, e.g. "E=ABC".
    #[arg(required_unless_present = "bundle")]
    pub file: Option<PathBuf>,

    /// Use the design of a shipped example instead of a file.
    #[arg(long, conflicts_with = "file")]
    pub bundle: Option<String>,

    /// Longest alias word shown in the alias table.
    #[arg(long, default_value_t = 4)]
    pub max_alias_len: usize,
}

/// Design and model, from files or from a shipped example.
#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct Inputs {
    /// Shipped example: wave_solder or windshield.
    #[arg(long)]
    pub bundle: Option<String>,

    /// Design file.
    #[arg(long, required_unless_present = "bundle")]
    pub design: Option<PathBuf>,

    /// Model file: slash-separated words, e.g. "AC/BD/E/F/G".
    #[arg(long, required_unless_present = "bundle")]
    pub model: Option<PathBuf>,

    /// Use the model terms as given instead of closing them hierarchically.
    #[arg(long)]
    pub no_closure: bool,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct Budgets {
    /// Largest fiber (or vector set) enumerated before giving up.
    #[arg(long, env = "FRACFACT_MAX_FIBER_POINTS", default_value_t = 2_000_000)]
    pub max_fiber_points: usize,

    /// Largest Graver set built by completion before giving up.
    #[arg(long, env = "FRACFACT_MAX_GRAVER", default_value_t = 100_000)]
    pub max_graver: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ModelArgs {
    #[command(flatten)]
    pub inputs: Inputs,

    /// Write the transposed covariate matrix in datafile layout.
    #[arg(long)]
    pub export: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[group(required = true, multiple = false)]
pub struct BasisSource {
    /// Compute the Graver basis by completion.
    #[arg(long)]
    pub compute: bool,

    /// Import a basis file ("count length" header then one move per line).
    #[arg(long)]
    pub import: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct BasisArgs {
    #[command(flatten)]
    pub source: BasisSource,

    /// Shipped example supplying design and model.
    #[arg(long, conflicts_with = "matrix")]
    pub bundle: Option<String>,

    #[arg(long, required_unless_present_any = ["bundle", "matrix"])]
    pub design: Option<PathBuf>,

    #[arg(long, required_unless_present_any = ["bundle", "matrix"])]
    pub model: Option<PathBuf>,

    /// Configuration matrix in datafile layout, instead of design and model.
    #[arg(long, conflicts_with_all = ["design", "model"])]
    pub matrix: Option<PathBuf>,

    #[arg(long)]
    pub no_closure: bool,

    /// Work with the Lawrence lifting (binomial data).
    #[arg(long)]
    pub lifted: bool,

    /// Write the move set to this basis file.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Check that the moves connect every fiber up to the given total.
    #[arg(long, requires = "total")]
    pub verify_connectivity: bool,

    /// Largest total checked by --verify-connectivity.
    #[arg(long, requires = "verify_connectivity")]
    pub total: Option<i64>,

    #[command(flatten)]
    pub budgets: Budgets,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct TestArgs {
    #[command(flatten)]
    pub inputs: Inputs,

    /// Data file: one count per run, or "successes denominator" per run.
    #[arg(long, required_unless_present = "bundle")]
    pub data: Option<PathBuf>,

    /// Response family; inferred from the data file when omitted.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,

    #[arg(long, value_enum, default_value_t = StatisticArg::G2)]
    pub statistic: StatisticArg,

    /// Basis file to import.
    #[arg(long, conflicts_with = "compute_basis")]
    pub basis: Option<PathBuf>,

    /// Compute the Graver basis instead of importing one.
    #[arg(long)]
    pub compute_basis: bool,

    #[arg(long, default_value_t = 100_000)]
    pub burn_in: u64,

    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 100)]
    pub batches: usize,

    /// Histogram bins over the observed range of the statistic.
    #[arg(long, default_value_t = 100)]
    pub bins: usize,

    /// Independent chains run in parallel; batch means are pooled.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,

    /// Write the histogram with chi-square overlay as CSV.
    #[arg(long)]
    pub histogram: Option<PathBuf>,

    /// Write observed and fitted values as CSV.
    #[arg(long)]
    pub fitted: Option<PathBuf>,

    /// Write the full report as JSON.
    #[arg(long)]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    pub budgets: Budgets,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub inputs: Inputs,

    #[arg(long, required_unless_present = "bundle")]
    pub data: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,

    #[arg(long, value_enum, default_value_t = StatisticArg::G2)]
    pub statistic: StatisticArg,

    /// Write every fiber point with its probability and statistic as CSV.
    #[arg(long)]
    pub points: Option<PathBuf>,

    /// Write the report as JSON.
    #[arg(long)]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    pub budgets: Budgets,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct CorrespondArgs {
    #[command(flatten)]
    pub inputs: Inputs,

    /// Use the Lawrence lifting (binomial data): the response becomes an extra axis.
    #[arg(long)]
    pub lifted: bool,

    /// Write the primitive moves of a decomposable match to this basis file.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub file: PathBuf,

    /// Directory for the replayed outputs (default: next to the manifest).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
