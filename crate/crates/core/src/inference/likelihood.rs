//! Dirichlet-multinomial block likelihood of a partition.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::data::Dataset;
use crate::error::{Result, SmspError};
use crate::partition::PartitionState;

/// Dirichlet concentration, one entry per label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub alpha: Vec<f64>,
}

/// Concentration assigned to a label absent from the training data.
pub const ABSENT_LABEL_ALPHA: f64 = 1e-3;

impl Hyperparams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(SmspError::Config("alpha needs at least one entry".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(SmspError::Config(format!("alpha entries must be positive and finite, got {a}")));
        }
        Ok(Hyperparams { alpha })
    }

    /// `α_k = n_k / 1000` from the label histogram.
    pub fn from_counts(counts: &[u32]) -> Self {
        let alpha = counts
            .iter()
            .map(|&n| if n == 0 { ABSENT_LABEL_ALPHA } else { n as f64 / 1000.0 })
            .collect();
        Hyperparams { alpha }
    }

    pub fn auto(data: &Dataset) -> Self {
        Self::from_counts(&data.histogram())
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.alpha.iter().sum()
    }
}

/// `log B(x) = Σ log Γ(x_k) − log Γ(Σ x_k)`.
pub fn log_beta(x: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut acc = 0.0;
    for v in x {
        sum += v;
        acc += ln_gamma(v);
    }
    acc - ln_gamma(sum)
}

/// `log B(α + m) − log B(α)`; zero for an empty block.
pub fn log_marginal_block(m: &[u32], alpha: &Hyperparams) -> f64 {
    debug_assert_eq!(m.len(), alpha.len());
    if m.iter().all(|&c| c == 0) {
        return 0.0;
    }
    let mut out = 0.0;
    let mut total_m = 0.0;
    for (&c, &a) in m.iter().zip(&alpha.alpha) {
        if c > 0 {
            out += ln_gamma(a + c as f64) - ln_gamma(a);
        }
        total_m += c as f64;
    }
    let a0 = alpha.total();
    out - (ln_gamma(a0 + total_m) - ln_gamma(a0))
}

/// Sum of block terms over the leaves of `state`.
pub fn log_likelihood(state: &PartitionState, alpha: &Hyperparams) -> f64 {
    state.leaves.iter().map(|l| log_marginal_block(&l.counts, alpha)).sum()
}

/// Change in log-likelihood when leaf counts `old` are split into `left` and `right`.
pub fn weight_increment(old: &[u32], left: &[u32], right: &[u32], alpha: &Hyperparams) -> Result<f64> {
    let k = alpha.len();
    if old.len() != k || left.len() != k || right.len() != k {
        return Err(SmspError::CountMismatch(format!(
            "count vectors of lengths {}, {}, {} for {k} labels",
            old.len(),
            left.len(),
            right.len()
        )));
    }
    if old.iter().zip(left.iter().zip(right)).any(|(&o, (&l, &r))| o != l + r) {
        return Err(SmspError::CountMismatch(format!(
            "children {left:?} + {right:?} do not add up to parent {old:?}"
        )));
    }
    Ok(log_marginal_block(left, alpha) + log_marginal_block(right, alpha) - log_marginal_block(old, alpha))
}
