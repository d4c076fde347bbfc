use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "genbound",
    version,
    about = "Generalization-error bounds for differentially private learning"
)]
pub struct Cli {
    /// Report information quantities in bits instead of nats (human and JSON output).
    #[arg(long, global = true)]
    pub bits: bool,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "GENBOUND_JOBS", value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Human,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one bound family, or all of them.
    Bound(BoundArgs),
    /// Evaluate bound families over an ε grid.
    Sweep(SweepArgs),
    /// Audit a mechanism table: privacy level, exact MI and leakage, bound slacks.
    Audit(AuditArgs),
    /// Build and export a representative-set grid.
    Grid(GridArgs),
    /// Run the verification battery.
    Verify(VerifyArgs),
    /// Monte Carlo generalization experiment.
    GenExp(GenExpArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long)]
    pub m: usize,
    /// Privacy level; `inf` is accepted.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    /// Family name (eq8, eq9, thm1, thm2, thm3, thm4, thm4_sharp, thm5, ml_baseline) or `all`.
    #[arg(long, default_value = "all")]
    pub family: String,
    /// Hypothesis count for the leakage baseline.
    #[arg(long)]
    pub w_size: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// fig1 = (n 1000, m 2); fig2 = (n 1e7, m 1e6).
    #[arg(long, conflicts_with_all = ["n", "m"])]
    pub preset: Option<String>,
    #[arg(long, requires = "m", value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    #[arg(long, requires = "n")]
    pub m: Option<usize>,
    /// `lo:hi:points`, log-spaced.
    #[arg(long)]
    pub eps_grid: Option<String>,
    /// Comma-separated family names (default: the seven figure families).
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub mechanism: PathBuf,
    /// `uniform` or a JSON file holding a probability array.
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub t: u64,
    /// full, simplex or typical.
    #[arg(long, default_value = "simplex")]
    pub variant: String,
    /// Source distribution for the typical grid: `uniform` or a JSON array file.
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, conflicts_with = "full")]
    pub quick: bool,
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra mechanism files checked against every oracle.
    #[arg(long)]
    pub mechanism: Vec<PathBuf>,
    /// Comparison slack; a negative value makes equality cases fail.
    #[arg(long, hide = true, allow_negative_numbers = true)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenExpArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long)]
    pub m: usize,
    /// constant, identity, rr or exp.
    #[arg(long)]
    pub mechanism_family: String,
    /// Stay probability for rr, target ε for exp.
    #[arg(long)]
    pub param: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.3)]
    pub eta: f64,
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
