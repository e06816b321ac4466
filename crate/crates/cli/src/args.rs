use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ofbmkit", about = "Synthesis and Hurst-exponent estimation for mixed multivariate fBm")]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "OFBMKIT_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one sample path from the model.
    Synth(SynthArgs),
    /// Estimate the Hurst exponents of a multichannel series.
    Estimate(EstimateArgs),
    /// Monte-Carlo study of the three estimators.
    Mc(McArgs),
    /// Per-window estimates, with an optional two-group comparison.
    Sliding(SlidingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Bin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Cumulative sums of the increments.
    Mfbm,
    /// The increments themselves.
    Mfgn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weights {
    Uniform,
    ByCount,
}

impl From<Weights> for ofbmkit::WeightBalance {
    fn from(w: Weights) -> Self {
        match w {
            Weights::Uniform => Self::Uniform,
            Weights::ByCount => Self::ByCount,
        }
    }
}

/// Scaling range and wavelet options shared by the analysis commands.
#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Lowest octave; with --j2, overrides the automatic range.
    #[arg(long, requires = "j2")]
    pub j1: Option<usize>,
    /// Highest octave; with --j1, overrides the automatic range.
    #[arg(long, requires = "j1")]
    pub j2: Option<usize>,
    /// Growth exponent of the automatic range.
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,
    /// Reference length of the automatic range (octaves 6..9 at this length).
    #[arg(long, default_value_t = 1 << 13)]
    pub n0: usize,
    /// Wavelet filter: haar, db2, db3 or db4.
    #[arg(long, default_value = "db2")]
    pub filter: String,
    #[arg(long, value_enum, default_value_t = Weights::ByCount)]
    pub weights: Weights,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Model parameter file (JSON with H, var, rho, W).
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Kind::Mfbm)]
    pub kind: Kind,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Path file; defaults to path.csv or path.bin inside --out-dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV series, or a .bin path file with its .json sidecar.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub n_mc: usize,
    /// Realization r uses seed + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SlidingArgs {
    /// CSV series; an optional `label` column tags each sample.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub window: usize,
    #[arg(long)]
    pub hop: usize,
    /// Benjamini-Hochberg level for the group comparison.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}
