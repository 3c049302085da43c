//! Sequential Monte Carlo over partition states.
//!
//! Each round: resample if the effective sample size has dropped below the
//! threshold, move every live particle through one transition of the prior,
//! then add the local likelihood ratio of that transition to its log-weight.

use rayon::prelude::*;

use super::likelihood::{weight_increment, Hyperparams};
use super::resample::{effective_sample_size, resamplers, Resampler, DEFAULT_RESAMPLER};
use crate::cutgen::CutGenConfig;
use crate::data::Dataset;
use crate::error::{Result, SmspError};
use crate::partition::{advance, init_partition, PartitionState, Transition};
use crate::rng::{particle_rng, resample_rng};

#[derive(Clone, Debug)]
pub struct SMCConfig {
    pub n_particles: usize,
    /// Process time budget; `f64::INFINITY` runs until every leaf pauses.
    pub budget: f64,
    pub ess_threshold: f64,
    pub n_workers: usize,
    pub seed: u64,
    /// Stop a particle once it holds this many cuts.
    pub max_cuts: Option<usize>,
    pub resampler: String,
}

impl Default for SMCConfig {
    fn default() -> Self {
        SMCConfig {
            n_particles: 100,
            budget: f64::INFINITY,
            ess_threshold: 0.5,
            n_workers: 1,
            seed: 0,
            max_cuts: None,
            resampler: DEFAULT_RESAMPLER.to_string(),
        }
    }
}

impl SMCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(SmspError::Config("need at least one particle".into()));
        }
        if !(self.budget >= 0.0) {
            return Err(SmspError::Config(format!("budget must be nonnegative, got {}", self.budget)));
        }
        if !(self.ess_threshold > 0.0 && self.ess_threshold <= 1.0) {
            return Err(SmspError::Config(format!(
                "ESS threshold must lie in (0, 1], got {}",
                self.ess_threshold
            )));
        }
        if self.n_workers == 0 {
            return Err(SmspError::Config("need at least one worker".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Particle {
    pub state: PartitionState,
    pub log_weight: f64,
    /// Budget spent, extinct, or cut limit reached.
    pub finished: bool,
}

/// Weighted particle approximation of the posterior over partitions.
#[derive(Clone, Debug)]
pub struct Posterior {
    pub particles: Vec<Particle>,
    pub alpha: Hyperparams,
    pub n_labels: usize,
    pub budget: f64,
    pub rounds: usize,
    pub resample_events: usize,
}

impl Posterior {
    /// Normalized weights.
    pub fn weights(&self) -> Vec<f64> {
        normalized(&self.particles)
    }

    pub fn ess(&self) -> f64 {
        effective_sample_size(&self.weights())
    }

    /// Index of the highest-weight particle; lowest index on ties.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.particles.iter().enumerate() {
            if p.log_weight > self.particles[best].log_weight {
                best = i;
            }
        }
        best
    }

    pub fn best(&self) -> &Particle {
        &self.particles[self.best_index()]
    }
}

fn normalized(particles: &[Particle]) -> Vec<f64> {
    let max = particles.iter().map(|p| p.log_weight).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = particles.iter().map(|p| (p.log_weight - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

// Shift log-weights so the largest is 0; keeps them finite over long runs.
fn recenter(particles: &mut [Particle]) {
    let max = particles.iter().map(|p| p.log_weight).fold(f64::NEG_INFINITY, f64::max);
    for p in particles {
        p.log_weight -= max;
    }
}

fn step(
    particle: &mut Particle,
    data: &Dataset,
    cfg: &SMCConfig,
    cutcfg: &CutGenConfig,
    alpha: &Hyperparams,
    round: u64,
    index: usize,
) -> Result<()> {
    if particle.finished {
        return Ok(());
    }
    let mut rng = particle_rng(cfg.seed, round, index);
    match advance(&mut particle.state, data, cfg.budget, cutcfg, &mut rng)? {
        Transition::Split {
            parent_counts,
            below_counts,
            above_counts,
            ..
        } => {
            particle.log_weight += weight_increment(&parent_counts, &below_counts, &above_counts, alpha)?;
            if cfg.max_cuts.is_some_and(|m| particle.state.n_cuts() >= m) {
                particle.finished = true;
            }
        }
        Transition::CutFailed { .. } => {}
        Transition::BudgetReached | Transition::Extinct => particle.finished = true,
    }
    Ok(())
}

/// Runs the sampler with the default resampler registry.
pub fn smc_fit(data: &Dataset, cfg: &SMCConfig, cutcfg: &CutGenConfig, alpha: &Hyperparams) -> Result<Posterior> {
    let registry = resamplers();
    smc_fit_with(data, cfg, cutcfg, alpha, registry.get(&cfg.resampler)?)
}

pub fn smc_fit_with(
    data: &Dataset,
    cfg: &SMCConfig,
    cutcfg: &CutGenConfig,
    alpha: &Hyperparams,
    resampler: &dyn Resampler,
) -> Result<Posterior> {
    cfg.validate()?;
    cutcfg.validate()?;
    if alpha.len() != data.n_labels() {
        return Err(SmspError::DimensionMismatch(format!(
            "{} alpha entries for {} labels",
            alpha.len(),
            data.n_labels()
        )));
    }
    let init = init_partition(data)?;
    let done_at_start = init.is_extinct() || cfg.budget == 0.0 || cfg.max_cuts == Some(0);
    let mut particles = vec![
        Particle {
            state: init,
            log_weight: 0.0,
            finished: done_at_start,
        };
        cfg.n_particles
    ];
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.n_workers)
        .build()
        .map_err(|e| SmspError::Config(format!("cannot start worker pool: {e}")))?;

    let m = cfg.n_particles as f64;
    let mut round = 0u64;
    let mut resample_events = 0;
    while particles.iter().any(|p| !p.finished) {
        let w = normalized(&particles);
        if effective_sample_size(&w) < cfg.ess_threshold * m {
            let ancestors = resampler.resample(&w, &mut resample_rng(cfg.seed, round));
            particles = ancestors
                .into_iter()
                .map(|a| Particle {
                    log_weight: 0.0,
                    ..particles[a].clone()
                })
                .collect();
            resample_events += 1;
            log::debug!("round {round}: resampled");
        }
        pool.install(|| {
            particles
                .par_iter_mut()
                .enumerate()
                .try_for_each(|(i, p)| step(p, data, cfg, cutcfg, alpha, round, i))
        })?;
        recenter(&mut particles);
        round += 1;
    }
    log::info!(
        "fit finished after {round} rounds, {resample_events} resampling events, ESS {:.1}",
        effective_sample_size(&normalized(&particles))
    );
    Ok(Posterior {
        particles,
        alpha: alpha.clone(),
        n_labels: data.n_labels(),
        budget: cfg.budget,
        rounds: round as usize,
        resample_events,
    })
}
