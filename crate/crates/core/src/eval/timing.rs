use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::cutgen::CutGenConfig;
use crate::data::Dataset;
use crate::error::Result;
use crate::inference::{smc_fit, Hyperparams, SMCConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingRow {
    pub particles: usize,
    pub workers: usize,
    pub rounds: usize,
    /// Median over the repeats.
    pub seconds: f64,
}

/// Wall time of a fixed-length fit for every (particles, workers) cell.
/// Each particle makes `cuts` cuts, so the work per particle is fixed.
pub fn timing_report(
    particle_counts: &[usize],
    worker_counts: &[usize],
    data: &Dataset,
    cuts: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<TimingRow>> {
    let alpha = Hyperparams::auto(data);
    let cutcfg = CutGenConfig::default();
    let mut rows = Vec::new();
    for &m in particle_counts {
        for &w in worker_counts {
            let cfg = SMCConfig {
                n_particles: m,
                n_workers: w,
                seed,
                max_cuts: Some(cuts),
                ..SMCConfig::default()
            };
            let mut times = Vec::with_capacity(repeats.max(1));
            let mut rounds = 0;
            for _ in 0..repeats.max(1) {
                let start = Instant::now();
                let post = smc_fit(data, &cfg, &cutcfg, &alpha)?;
                times.push(start.elapsed().as_secs_f64());
                rounds = post.rounds;
            }
            times.sort_by(f64::total_cmp);
            rows.push(TimingRow {
                particles: m,
                workers: w,
                rounds,
                seconds: times[times.len() / 2],
            });
        }
    }
    Ok(rows)
}

pub fn write_timing_csv<W: Write>(out: W, rows: &[TimingRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
