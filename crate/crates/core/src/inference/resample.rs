use rand::{Rng, RngCore};

use crate::registry::Registry;

/// Picks ancestor indices from normalized weights.
pub trait Resampler: Send + Sync {
    /// Returns `weights.len()` ancestor indices in nondecreasing order.
    fn resample(&self, weights: &[f64], rng: &mut dyn RngCore) -> Vec<usize>;
}

/// Independent categorical draws.
pub struct Multinomial;

/// One uniform offset, evenly spaced pointers.
pub struct Systematic;

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = f64::INFINITY;
    }
    cdf
}

// Sweeps sorted pointers in `[0, total)` through the cumulative weights.
fn sweep(cdf: &[f64], pointers: impl Iterator<Item = f64>) -> Vec<usize> {
    let mut out = Vec::with_capacity(cdf.len());
    let mut j = 0;
    for u in pointers {
        while cdf[j] <= u {
            j += 1;
        }
        out.push(j);
    }
    out
}

impl Resampler for Multinomial {
    fn resample(&self, weights: &[f64], rng: &mut dyn RngCore) -> Vec<usize> {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        // sorted uniforms from normalized exponential spacings
        let mut acc = 0.0;
        let spacings: Vec<f64> = (0..=n)
            .map(|_| {
                acc += -(1.0 - rng.random::<f64>()).ln();
                acc
            })
            .collect();
        let scale = total / acc;
        sweep(&cumulative(weights), spacings[..n].iter().map(|s| s * scale))
    }
}

impl Resampler for Systematic {
    fn resample(&self, weights: &[f64], rng: &mut dyn RngCore) -> Vec<usize> {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let u0: f64 = rng.random();
        let step = total / n as f64;
        sweep(&cumulative(weights), (0..n).map(|i| (i as f64 + u0) * step))
    }
}

pub const DEFAULT_RESAMPLER: &str = "multinomial";

pub fn resamplers() -> Registry<dyn Resampler> {
    let mut r: Registry<dyn Resampler> = Registry::new("resampler");
    r.register("multinomial", Box::new(Multinomial))
        .register("systematic", Box::new(Systematic));
    r
}

/// `1 / Σ w²` for normalized weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}
