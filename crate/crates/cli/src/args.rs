use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "smsp", version, about = "Spline-partition shape modeling: fitting, prediction and experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Sample the yin-yang point set and write train/test CSVs.
    SimulateYinyang(SimulateArgs),
    /// Fit the SMC posterior to a point CSV or a PGM image.
    Fit(FitArgs),
    /// Predict labels with a fitted model.
    Predict(PredictArgs),
    /// Compare two binary PGM masks.
    Metrics(MetricsArgs),
    /// Extract boundaries and perimeters over a budget sweep.
    Shape(ShapeArgs),
    /// Run the cut-invariance uniformity experiment.
    Invariance(InvarianceArgs),
    /// Time fits over particle and worker counts.
    Timing(TimingArgs),
    /// Re-run a recorded command and compare output digests.
    Replay(ReplayArgs),
}

impl Cmd {
    pub fn name(&self) -> &'static str {
        match self {
            Cmd::SimulateYinyang(_) => "simulate-yinyang",
            Cmd::Fit(_) => "fit",
            Cmd::Predict(_) => "predict",
            Cmd::Metrics(_) => "metrics",
            Cmd::Shape(_) => "shape",
            Cmd::Invariance(_) => "invariance",
            Cmd::Timing(_) => "timing",
            Cmd::Replay(_) => "replay",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    /// Raw draws before rejection to the disk.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.6)]
    pub train_frac: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Where the training points come from.
#[derive(Args, Debug, Clone, Serialize)]
pub struct InputArgs {
    /// `x,y,label` CSV, or a PGM image (by extension).
    #[arg(long)]
    pub input: PathBuf,
    /// Nearest-neighbour shrink factor for images.
    #[arg(long, default_value_t = 1.0)]
    pub downscale: f64,
    /// Gray level at or above which a pixel is foreground.
    #[arg(long, default_value_t = smsp_core::data::DEFAULT_THRESHOLD)]
    pub threshold: u8,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = 100)]
    pub particles: usize,
    /// Process time budget; `inf` runs until every leaf is pure.
    #[arg(long, default_value = "inf")]
    pub budget: f64,
    /// Resample when ESS drops below this fraction of the particle count.
    #[arg(long, default_value_t = 0.5)]
    pub ess: f64,
    #[arg(long, env = "SMSP_WORKERS", default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `auto` (label frequencies / 1000) or a comma list, one per label.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    /// `mixed`, `1`, `2` or `3`.
    #[arg(long, default_value = "mixed")]
    pub order: String,
    /// Stop each particle after this many cuts.
    #[arg(long)]
    pub cuts: Option<usize>,
    #[arg(long, default_value_t = smsp_core::cutgen::DEFAULT_MAX_REJECTIONS)]
    pub max_rejections: usize,
    /// Fixed control box `a,b,c,d` relative to each subset's circle centre.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub abcd: Option<Vec<f64>>,
    #[arg(long, default_value = smsp_core::inference::DEFAULT_RESAMPLER)]
    pub resampler: String,
}

#[derive(Args, Debug, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = smsp_core::inference::DEFAULT_PREDICTION_RULE)]
    pub rule: String,
    /// `.pgm` writes a mask (image input only); anything else writes a CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct MetricsArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value_t = smsp_core::data::DEFAULT_THRESHOLD)]
    pub threshold: u8,
    /// JSON report; printed to stdout as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ShapeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, value_delimiter = ',', default_value = "10,50,100,200")]
    pub budgets: Vec<f64>,
    #[arg(long, default_value_t = smsp_core::shape::DEFAULT_K)]
    pub k: usize,
    /// Neighbour distance cap; defaults to the pixel diagonal for images.
    #[arg(long)]
    pub max_dist: Option<f64>,
    #[arg(long, default_value_t = smsp_core::shape::DEFAULT_POINTS_PER_CUT)]
    pub points_per_cut: usize,
    #[arg(long, default_value = "shape")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct InvarianceArgs {
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 5000)]
    pub curves: usize,
    /// Cells per side of the chi-square grid.
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `smsp`, `uniform` or `adversarial`.
    #[arg(long, default_value = "smsp")]
    pub arm: String,
    /// `parameter` or `abscissa`.
    #[arg(long, default_value = "parameter")]
    pub measure: String,
    #[arg(long, default_value = "invariance.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct TimingArgs {
    /// Raw yin-yang draws for the benchmark data set.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    pub particles: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub workers: Vec<usize>,
    /// Cuts per particle.
    #[arg(long, default_value_t = 20)]
    pub cuts: usize,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "timing.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
