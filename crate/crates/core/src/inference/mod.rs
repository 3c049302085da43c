//! Posterior inference: block likelihood, the particle sampler and prediction.

mod likelihood;
mod predict;
mod resample;
mod smc;

pub use likelihood::{log_beta, log_likelihood, log_marginal_block, weight_increment, Hyperparams, ABSENT_LABEL_ALPHA};
pub use predict::{
    accuracy, predict, predict_all, predict_all_named, prediction_rules, LeafMajority, PosteriorMean, Prediction,
    PredictionRule, DEFAULT_PREDICTION_RULE,
};
pub use resample::{effective_sample_size, resamplers, Multinomial, Resampler, Systematic, DEFAULT_RESAMPLER};
pub use smc::{smc_fit, smc_fit_with, Particle, Posterior, SMCConfig};
