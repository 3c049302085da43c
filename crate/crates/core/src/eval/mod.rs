//! Image quality measures, the invariance experiment and timing reports.

mod metrics;
mod timing;
mod uniformity;

pub use metrics::{metric_registry, metrics, Jaccard, Metric, MetricReport, Mse, PctCorrect, Psnr, Ssim};
pub use timing::{timing_report, write_timing_csv, TimingRow};
pub use uniformity::{
    chi_square_uniform, grid_counts, sample_arm, uniformity_experiment, Arm, PointMeasure, UniformityConfig, UniformityReport,
};
