use rayon::prelude::*;

use super::likelihood::Hyperparams;
use crate::error::{Result, SmspError};
use crate::geometry::Point;
use crate::model::FittedModel;
use crate::registry::Registry;

/// Turns a leaf's label counts into a label distribution.
pub trait PredictionRule: Send + Sync {
    fn leaf_distribution(&self, counts: &[u32], alpha: &Hyperparams, out: &mut [f64]);
}

/// Dirichlet posterior mean `(α_k + m_k) / (Σα + Σm)`.
pub struct PosteriorMean;

/// Empirical label frequencies of the leaf.
pub struct LeafMajority;

impl PredictionRule for PosteriorMean {
    fn leaf_distribution(&self, counts: &[u32], alpha: &Hyperparams, out: &mut [f64]) {
        let total = alpha.total() + counts.iter().map(|&c| c as f64).sum::<f64>();
        for ((o, &c), &a) in out.iter_mut().zip(counts).zip(&alpha.alpha) {
            *o = (a + c as f64) / total;
        }
    }
}

impl PredictionRule for LeafMajority {
    fn leaf_distribution(&self, counts: &[u32], alpha: &Hyperparams, out: &mut [f64]) {
        let m: u32 = counts.iter().sum();
        if m == 0 {
            return PosteriorMean.leaf_distribution(counts, alpha, out);
        }
        for (o, &c) in out.iter_mut().zip(counts) {
            *o = c as f64 / m as f64;
        }
    }
}

pub const DEFAULT_PREDICTION_RULE: &str = "posterior-mean";

pub fn prediction_rules() -> Registry<dyn PredictionRule> {
    let mut r: Registry<dyn PredictionRule> = Registry::new("prediction rule");
    r.register("posterior-mean", Box::new(PosteriorMean))
        .register("leaf-majority", Box::new(LeafMajority));
    r
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    /// One-based label.
    pub label: u32,
    pub probs: Vec<f64>,
}

/// Weight-averaged leaf distribution at `query`; ties go to the lowest label.
pub fn predict(model: &FittedModel, query: Point, rule: &dyn PredictionRule) -> Prediction {
    let k = model.n_labels;
    let mut probs = vec![0.0; k];
    let mut leaf = vec![0.0; k];
    for p in &model.particles {
        if p.weight == 0.0 {
            continue;
        }
        rule.leaf_distribution(&p.leaf_of(query).counts, &model.alpha, &mut leaf);
        for (acc, l) in probs.iter_mut().zip(&leaf) {
            *acc += p.weight * l;
        }
    }
    let mut best = 0;
    for (i, &v) in probs.iter().enumerate() {
        if v > probs[best] {
            best = i;
        }
    }
    Prediction {
        label: best as u32 + 1,
        probs,
    }
}

pub fn predict_all(model: &FittedModel, queries: &[Point], rule: &dyn PredictionRule) -> Vec<Prediction> {
    queries.par_iter().map(|&q| predict(model, q, rule)).collect()
}

/// Looks `rule` up in the default registry.
pub fn predict_all_named(model: &FittedModel, queries: &[Point], rule: &str) -> Result<Vec<Prediction>> {
    let rules = prediction_rules();
    Ok(predict_all(model, queries, rules.get(rule)?))
}

/// Fraction of `predicted` labels equal to `truth`, in `[0, 1]`.
pub fn accuracy(predicted: &[u32], truth: &[u32]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(SmspError::DimensionMismatch(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(SmspError::EmptyInput("accuracy of no predictions"));
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}
