//! Command-line front end: audit scorers for the metric axioms, classify
//! them, drive the recognition modes, emit/import triplet plans, and
//! summarize the bundled accuracy tables.
//!
//! Exit codes: 0 success, 1 violations found under --fail-on-violation,
//! 2 usage errors, 3 runtime errors (printed with their module error name).

mod commands;
mod config;
mod scorer_spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metric_audit::AuditError;

#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Runtime(AuditError),
    Other(anyhow::Error),
}

impl AppError {
    pub fn usage(msg: String) -> Self {
        AppError::Usage(msg)
    }
}

#[derive(Parser)]
#[command(
    name = "metric-audit",
    version,
    about = "Audit similarity/dissimilarity functions for the four metric axioms",
    long_about = "Builds score matrices from pluggable scorers, converts similarity scores to\n\
                  dissimilarities with the smaller-is-better transform, checks non-negativity,\n\
                  identity, symmetry and the triangle inequality, and classifies the function\n\
                  into the metric/pseudometric/quasimetric/semimetric taxonomy."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full audit: all four axiom checks plus violation curve and symmetry histogram
    Audit(AuditArgs),
    /// Audit without the curve/histogram payloads
    Classify(AuditArgs),
    /// Run one of the four recognition modes over a gallery and probes
    Recognize(RecognizeArgs),
    /// Emit or re-validate triplet plans as CSV for exact replays
    Plan(PlanArgs),
    /// Summarize the bundled (or a custom) accuracy table by metric status
    Meta(MetaArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScopeArg {
    Global,
    PerTriplet,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
pub struct AuditArgs {
    /// Dataset CSV (header: id,label,f0,...)
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Precomputed score-matrix CSV (first line: # polarity=...)
    #[arg(long)]
    pub matrix: Option<PathBuf>,

    /// Scorer name or JSON spec, e.g. euclidean or {"scorer":"mahalanobis","W":[[1,0],[0,1]]}
    #[arg(long)]
    pub scorer: Option<String>,

    /// Triangle plan: exhaustive | sample:M | iid:M | stratified:M | file:PATH
    #[arg(long, default_value = "exhaustive")]
    pub triplets: String,

    /// Stratum proportions, e.g. all_same=0.34,two_same=0.33,all_distinct=0.33
    #[arg(long)]
    pub strata: Option<String>,

    /// Seed for sampled plans (fallback: METRIC_AUDIT_SEED, then 0)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Absolute comparison slack
    #[arg(long, default_value_t = 1e-9)]
    pub abs_eps: f64,

    /// Relative comparison slack
    #[arg(long, default_value_t = 1e-9)]
    pub rel_eps: f64,

    /// Bin width of the symmetry-difference histogram
    #[arg(long, default_value_t = 0.01)]
    pub bin_width: f64,

    /// Anchor of the smaller-is-better transform for triangle checks
    #[arg(long, value_enum, default_value_t = ScopeArg::Global)]
    pub transform_scope: ScopeArg,

    /// Apply the transform even to dissimilarity scores
    #[arg(long)]
    pub force_transform: bool,

    /// Worker threads for matrix building and triangle checks (0 = automatic);
    /// never affects output bytes
    #[arg(long, default_value_t = 0)]
    pub workers: usize,

    /// Exit 1 when any axiom violation is found (CI gate)
    #[arg(long)]
    pub fail_on_violation: bool,

    /// Report path ('-' for stdout)
    #[arg(long, default_value = "-")]
    pub output: String,

    /// Also write the violation curve as 2-column CSV
    #[arg(long)]
    pub curve_csv: Option<PathBuf>,

    /// Also write the symmetry histogram as 2-column CSV
    #[arg(long)]
    pub histogram_csv: Option<PathBuf>,

    /// Write every violation record (uncapped) as CSV
    #[arg(long)]
    pub violations_csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct RecognizeArgs {
    /// Recognition mode: pair | verify | identify | search
    #[arg(long)]
    pub mode: String,

    /// Gallery dataset CSV (labels >= 1 define the classes)
    #[arg(long)]
    pub gallery: PathBuf,

    /// Probe dataset CSV (pair mode uses the first two rows as the pair)
    #[arg(long)]
    pub probe: PathBuf,

    /// Scorer name or JSON spec
    #[arg(long, default_value = "euclidean")]
    pub scorer: String,

    /// Number of ranked labels (search mode)
    #[arg(long, default_value_t = 1)]
    pub k: usize,

    /// Acceptance/rejection threshold tau (strict comparison)
    #[arg(long)]
    pub threshold: Option<f64>,

    /// Claimed class for verify mode (and the pair-model class)
    #[arg(long)]
    pub claimed_class: Option<u32>,

    /// Report path ('-' for stdout)
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Args)]
pub struct PlanArgs {
    /// Population size
    #[arg(long)]
    pub n: Option<usize>,

    /// Take n (and labels for stratified plans) from a dataset CSV
    #[arg(long)]
    pub labels_from: Option<PathBuf>,

    /// Plan spec: exhaustive | sample:M | iid:M | stratified:M
    #[arg(long, default_value = "exhaustive")]
    pub triplets: String,

    /// Stratum proportions for stratified plans
    #[arg(long)]
    pub strata: Option<String>,

    /// Seed for sampled plans (fallback: METRIC_AUDIT_SEED, then 0)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Validate and re-emit an existing plan CSV
    #[arg(long)]
    pub import: Option<PathBuf>,

    /// Plan CSV path ('-' for stdout)
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Args)]
pub struct MetaArgs {
    /// Which table: LFW | Caltech15 | Caltech30
    #[arg(long)]
    pub dataset: String,

    /// Results CSV (default: the bundled table for --dataset)
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,

    /// Output path ('-' for stdout)
    #[arg(long, default_value = "-")]
    pub output: String,
}

fn run(cli: Cli) -> Result<i32, AppError> {
    match &cli.command {
        Command::Audit(args) => commands::audit(args, false),
        Command::Classify(args) => commands::audit(args, true),
        Command::Recognize(args) => commands::recognize(args),
        Command::Plan(args) => commands::plan(args),
        Command::Meta(args) => commands::meta(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with code 2 on usage errors
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Runtime(err)) => {
            eprintln!("error[{}]: {err}", err.name());
            ExitCode::from(3)
        }
        Err(AppError::Other(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
    }
}
