use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "coact", version, about = "Tests for mechanistic interaction between two causal factors")]
pub struct Cli {
    /// Print the report as JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deterministic response functions.
    #[command(subcommand)]
    Mech(MechCommand),
    /// Augmented DAGs with regime indicators.
    #[command(subcommand)]
    Adag(AdagCommand),
    /// Excess-risk test on a CSV dataset.
    Test(TestArgs),
    /// Draw a synthetic dataset from a scenario file.
    Simulate(SimulateArgs),
    /// Check positive excess risks against brute-force interference on random monotone scenarios.
    Soundness(SoundnessArgs),
}

#[derive(Debug, Subcommand)]
pub enum MechCommand {
    /// Interference in each direction, coaction, monotonicity.
    Classify { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum AdagCommand {
    /// Core conditions 2 to 4 for a role assignment.
    Check(AdagCheckArgs),
}

#[derive(Debug, Args)]
pub struct AdagCheckArgs {
    pub graph: PathBuf,
    #[arg(long = "A")]
    pub a: String,
    #[arg(long = "B")]
    pub b: String,
    #[arg(long = "Y")]
    pub y: String,
    /// Observed context, comma separated; empty for none.
    #[arg(long = "C", default_value = "")]
    pub c: String,
    /// Unobserved context, comma separated.
    #[arg(long = "U", default_value = "")]
    pub u: String,
    /// Accept core condition 1 (Y is a function of A, B, C, U).
    #[arg(long)]
    pub assert_functional: bool,
    /// Also list every subset of these nodes that works as C.
    #[arg(long)]
    pub pool: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Nonparam,
    Riskreg,
    Oddsreg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Assumption {
    Functional,
    Regime,
    Context,
    Factor,
    Monotone,
    Alpha,
    Beta,
    /// Core conditions 1 to 4.
    Core,
    All,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    pub data: PathBuf,
    /// Schema sidecar; defaults to `<data>.schema.json` next to the CSV.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub a_var: String,
    #[arg(long)]
    pub b_var: String,
    /// Upper block of A: `0.5` or `>0.5` for a threshold, `in:1,2` for a level set.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
    /// Row filter on original values, e.g. `A > 1 && C == 0`.
    #[arg(long)]
    pub stratum: Option<String>,
    /// Level map applied to A before blocking, e.g. `1:4,2:3`.
    #[arg(long)]
    pub recode_a: Option<String>,
    #[arg(long)]
    pub recode_b: Option<String>,
    #[arg(long, value_enum, default_value_t = Model::Nonparam)]
    pub model: Model,
    /// Regression formula over `alpha`, `beta` and data columns.
    #[arg(long)]
    pub formula: Option<String>,
    /// Trend covariate added to the regression.
    #[arg(long)]
    pub trend: Option<String>,
    /// Trend value at which the excess risk is evaluated.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Bootstrap resamples (at least 100).
    #[arg(long)]
    pub boot: Option<usize>,
    #[arg(long, env = "COACT_SEED")]
    pub seed: Option<u64>,
    /// Assumptions accepted without verification.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub assume: Vec<Assumption>,
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    #[arg(short, long)]
    pub n: usize,
    #[arg(long, env = "COACT_SEED")]
    pub seed: Option<u64>,
    /// CSV output; the schema goes to `<out>.schema.json` alongside.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Blocks {
    Top,
    Threshold,
}

#[derive(Debug, Args)]
pub struct SoundnessArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, env = "COACT_SEED")]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Blocks::Top)]
    pub blocks: Blocks,
    /// Only non-decreasing response functions.
    #[arg(long)]
    pub increasing_only: bool,
}
