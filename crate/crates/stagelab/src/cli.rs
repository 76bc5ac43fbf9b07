use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "stagelab", version, about = "Outcome rates of stage-network quantum experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the rate table of a preset or a `.sn` network.
    Run(RunArgs),
    /// Sweep one parameter and report which rates stay constant.
    Sweep(SweepArgs),
    /// Check semi-unitarity, POVM completeness and rate conservation.
    Validate(ValidateArgs),
    /// Which-path measure and its per-signature contributions.
    Whichpath(WhichpathArgs),
    /// Compare engine rates with the full-Hilbert-space oracle.
    OracleCheck(ModelArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Ds,
    Dcqe,
    Wheeler,
    Walborn,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Transfer {
    /// Deterministic two-source phase profile.
    Twoslit,
    /// Random semi-unitary columns drawn from `--seed`.
    Random,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    #[value(name = "NO_POLARIZERS", alias = "no-polarizers")]
    NoPolarizers,
    #[value(name = "CASE_I", alias = "case-i")]
    CaseI,
    #[value(name = "CASE_II", alias = "case-ii")]
    CaseII,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Which network to simulate.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Built-in experiment.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    pub experiment: Option<Experiment>,
    /// Network description file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Parameter override `name=expr` (repeatable).
    #[arg(long = "set", value_name = "NAME=EXPR")]
    pub set: Vec<String>,
    /// Screen sites for presets (the shared group for wheeler).
    #[arg(long, default_value_t = 16)]
    pub screen: usize,
    /// Seed for randomized transfer amplitudes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Transfer amplitudes used by presets.
    #[arg(long, value_enum, default_value_t = Transfer::Twoslit)]
    pub transfer: Transfer,
    /// Polarization setup for the walborn preset.
    #[arg(long, value_enum, default_value_t = Mode::CaseII)]
    pub mode: Mode,
    /// Revealing signature pattern for the which-path measure, detector
    /// labels joined by `&` (repeatable; replaces the preset default).
    #[arg(long, value_name = "LABELS")]
    pub reveal: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output path, `-` for standard output.
    #[arg(long, default_value = "-")]
    pub out: String,
    /// Output format; defaults to JSON for `-` and `.json` paths, CSV otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Report validation failures but compute rates anyway.
    #[arg(long)]
    pub warn_only: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output directory for CSV tables, a `.json` file, or `-`.
    #[command(flatten)]
    pub output: OutputArgs,
    /// Parameter to sweep.
    #[arg(long)]
    pub param: String,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 11)]
    pub points: usize,
    /// Parameter recomputed at each point, `name=expr` (repeatable).
    #[arg(long = "couple", value_name = "NAME=EXPR")]
    pub couple: Vec<String>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Exit 0 even when a check fails.
    #[arg(long)]
    pub warn_only: bool,
}

#[derive(Args, Debug)]
pub struct WhichpathArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
