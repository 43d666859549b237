use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twolevel::eval::ThetaGrid;
use twolevel::rule::Polarity;
use twolevel::twolevel::Algorithm;

#[derive(Debug, Parser)]
#[command(
    name = "twolevel",
    version,
    about = "Learn two-level Boolean rules (AND-of-ORs / OR-of-ANDs)"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the binary feature matrix of a CSV file.
    Binarize(BinarizeArgs),
    /// Fit a rule and save it.
    Train(TrainArgs),
    /// Apply a saved rule to a CSV file.
    Predict(PredictArgs),
    /// Stratified cross-validation with nested θ tuning.
    Cv(CvArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,

    /// JSON schema with column kinds and label; flags below override it.
    #[arg(long)]
    pub schema: Option<PathBuf>,

    /// Label column.
    #[arg(long)]
    pub label: Option<String>,

    /// Label value of the positive class.
    #[arg(long)]
    pub positive: Option<String>,

    /// Label value of the negative class (default: the only other value).
    #[arg(long)]
    pub negative: Option<String>,

    /// Columns to treat as continuous.
    #[arg(long, value_delimiter = ',')]
    pub continuous: Vec<String>,

    /// Columns to treat as 0/1 flags.
    #[arg(long, value_delimiter = ',')]
    pub binary: Vec<String>,

    /// Columns to treat as categorical.
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,

    /// Columns to skip.
    #[arg(long, value_delimiter = ',')]
    pub ignore: Vec<String>,

    /// Quantile thresholds per continuous column.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub thresholds: u32,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Bcd)]
    pub algorithm: AlgorithmArg,

    #[arg(long, value_enum, default_value_t = PolarityArg::Dnf)]
    pub polarity: PolarityArg,

    /// Maximum number of clauses.
    #[arg(long = "r", default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub clauses: u32,

    /// Sparsity weight; tuned by inner cross-validation when absent.
    #[arg(long, allow_negative_numbers = true, value_parser = parse_theta)]
    pub theta: Option<f64>,

    /// θ candidates: "lo:hi:Nlog", "lo:hi:Nlin" or a comma list.
    #[arg(long, default_value = "1e-4:50:10log", value_parser = parse_grid)]
    pub grid: ThetaGrid,

    /// Folds of the inner θ-tuning cross-validation.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(2..))]
    pub inner_k: u32,

    /// Iteration cap for BCD and AM.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_iters: u32,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BinarizeArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Output CSV of 0/1 features plus the label.
    #[arg(long)]
    pub output: PathBuf,

    /// Also write the feature provenance as JSON.
    #[arg(long)]
    pub provenance: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub learn: LearnArgs,

    /// Rule JSON output.
    #[arg(long)]
    pub output: PathBuf,

    /// Fit trace JSON output.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Rule JSON written by `train`.
    #[arg(long)]
    pub rule: PathBuf,

    /// Input CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,

    /// Predictions CSV (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub learn: LearnArgs,

    /// Outer folds.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: u32,

    /// Report JSON output.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Plain-text table output (always printed to stdout).
    #[arg(long)]
    pub table: Option<PathBuf>,

    /// Record wall-clock seconds per fold in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgorithmArg {
    Bcd,
    Am,
    Sc,
    Ocrl,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Bcd => Algorithm::Bcd,
            AlgorithmArg::Am => Algorithm::Am,
            AlgorithmArg::Sc => Algorithm::Sc,
            AlgorithmArg::Ocrl => Algorithm::Ocrl,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolarityArg {
    Cnf,
    Dnf,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Cnf => Polarity::Cnf,
            PolarityArg::Dnf => Polarity::Dnf,
        }
    }
}

fn parse_theta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("theta must be finite and non-negative, got {s}"))
    }
}

fn parse_grid(s: &str) -> Result<ThetaGrid, String> {
    s.parse::<ThetaGrid>().map_err(|e| e.to_string())
}
