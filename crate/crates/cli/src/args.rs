//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use curkit::norm::NormKind;
use curkit::sampling::Axis;
use curkit::MiddleKind;

use crate::experiment::{ExperimentId, SchemeName};

#[derive(Debug, Parser)]
#[command(name = "curkit", version, about = "CUR decompositions, perturbation bounds and rank estimation")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// spectral, frobenius or schatten:<p>.
    #[arg(long, global = true, default_value = "spectral", value_parser = parse_norm)]
    pub norm: NormKind,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write an SVG chart next to the output.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract C, U, R and report errors, ranks and the equivalence flags.
    Decompose(DecomposeArgs),
    /// Build a CUR approximation and report its error.
    Approx(ApproxArgs),
    /// Draw row or column indices.
    Sample(SampleArgs),
    /// Evaluate the perturbation bounds for a matrix and a noise draw.
    Bounds(BoundsArgs),
    /// Estimate the rank of a noisy matrix from a sampled block.
    Rankest(RankestArgs),
    /// Run a Monte-Carlo experiment.
    Experiment(ExperimentArgs),
    /// Generate a random low-rank matrix, optionally with noise.
    Gen(GenArgs),
}

/// Explicit index lists, or counts drawn from a sampling scheme.
#[derive(Debug, Clone, Args)]
pub struct Selection {
    /// Row indices, e.g. 0,4,7.
    #[arg(long, value_delimiter = ',')]
    pub rows: Option<Vec<usize>>,
    /// Column indices.
    #[arg(long, value_delimiter = ',')]
    pub cols: Option<Vec<usize>>,
    /// Number of rows and of columns to draw.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub row_count: Option<usize>,
    #[arg(long)]
    pub col_count: Option<usize>,
    /// uniform, length, leverage:<k> or mixed.
    #[arg(long, default_value = "length")]
    pub scheme: String,
    /// Drop repeated draws, keeping first occurrences.
    #[arg(long)]
    pub dedup: bool,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// MatrixMarket (.mtx) or CSV file.
    pub input: PathBuf,
    #[command(flatten)]
    pub selection: Selection,
    /// pinv, truncated:<k> or optimal.
    #[arg(long, default_value = "pinv", value_parser = parse_middle)]
    pub middle: MiddleKind,
    /// Relative tolerance for the equivalence residuals.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub selection: Selection,
    /// pinv, truncated:<k> or optimal.
    #[arg(long, default_value = "pinv", value_parser = parse_middle)]
    pub middle: MiddleKind,
    /// Enforce rank r on U; shorthand for --middle truncated:<r>.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Measure the error against this matrix instead of the input.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub input: PathBuf,
    #[arg(long, default_value = "rows", value_parser = parse_axis)]
    pub axis: Axis,
    /// uniform, length, leverage:<k> or mixed.
    #[arg(long, default_value = "length")]
    pub scheme: String,
    /// Number of draws.
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub dedup: bool,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// The noise-free matrix.
    pub input: PathBuf,
    /// Noise matrix file.
    #[arg(long, conflicts_with = "sigma")]
    pub noise: Option<PathBuf>,
    /// Entry standard deviation of generated Gaussian noise.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Target rank; defaults to the numerical rank of the input.
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub selection: Selection,
    /// all, prop-perturbation, prop-pb, thm-pb or thm-pb-refined.
    #[arg(long, default_value = "all")]
    pub bound: String,
}

#[derive(Debug, Args)]
pub struct RankestArgs {
    /// The noisy matrix.
    pub input: PathBuf,
    /// Noise standard deviation.
    #[arg(long)]
    pub sigma: f64,
    #[command(flatten)]
    pub selection: Selection,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// 1-6, rank-noise or rank-size.
    #[arg(value_parser = parse_experiment)]
    pub id: ExperimentId,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ds: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub rs: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme_name)]
    pub schemes: Option<Vec<SchemeName>>,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Noise level added to the output.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Read --sigma as the spectral norm of the noise instead of the entry
    /// standard deviation.
    #[arg(long)]
    pub spectral_noise: bool,
    /// Keep the raw Gaussian product instead of scaling to unit spectral norm.
    #[arg(long)]
    pub no_normalize: bool,
    /// Also write the noise matrix here.
    #[arg(long)]
    pub noise_out: Option<PathBuf>,
    /// Also write the noise-free matrix here.
    #[arg(long)]
    pub clean_out: Option<PathBuf>,
}

fn parse_norm(s: &str) -> Result<NormKind, String> {
    s.parse().map_err(|e: curkit::CurError| e.to_string())
}

fn parse_middle(s: &str) -> Result<MiddleKind, String> {
    s.parse().map_err(|e: curkit::CurError| e.to_string())
}

fn parse_experiment(s: &str) -> Result<ExperimentId, String> {
    s.parse().map_err(|e: curkit::CurError| e.to_string())
}

fn parse_scheme_name(s: &str) -> Result<SchemeName, String> {
    s.parse().map_err(|e: curkit::CurError| e.to_string())
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    match s.to_ascii_lowercase().as_str() {
        "rows" | "row" => Ok(Axis::Rows),
        "cols" | "columns" | "col" | "column" => Ok(Axis::Columns),
        _ => Err(format!("unknown axis '{s}' (expected rows or cols)")),
    }
}
