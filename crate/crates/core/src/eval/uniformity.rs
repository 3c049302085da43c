//! Invariance check: a point drawn from each random cut that crosses the unit
//! square should be uniform on the square.

use std::f64::consts::FRAC_1_SQRT_2;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::cutgen::{sample_cut_within, ControlBox, CutGenConfig};
use crate::error::{Result, SmspError};
use crate::geometry::{smallest_enclosing_circle, Point};
use crate::rng::child_seed;

/// Samples per side of the square; a cut crosses the square when it
/// separates these boundary samples.
const EDGE_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    /// One point per random cut, drawn by the configured measure.
    Smsp,
    /// Independent uniform draws; calibrates the test.
    Uniform,
    /// Half the mass crammed into the lower-left quadrant.
    Adversarial,
}

impl FromStr for Arm {
    type Err = SmspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smsp" => Ok(Arm::Smsp),
            "uniform" => Ok(Arm::Uniform),
            "adversarial" => Ok(Arm::Adversarial),
            _ => Err(SmspError::Config(format!("unknown arm `{s}` (smsp, uniform, adversarial)"))),
        }
    }
}

/// How the single point is picked from each accepted cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointMeasure {
    /// Uniform in the local abscissa between the end control points.
    Abscissa,
    /// Uniform in the curve parameter; crowds the curve ends for orders 2 and 3.
    Parameter,
}

impl FromStr for PointMeasure {
    type Err = SmspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abscissa" => Ok(PointMeasure::Abscissa),
            "parameter" => Ok(PointMeasure::Parameter),
            _ => Err(SmspError::Config(format!("unknown point measure `{s}` (abscissa, parameter)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct UniformityConfig {
    pub n_curves: usize,
    pub n_replicates: usize,
    pub grid: usize,
    pub seed: u64,
    pub arm: Arm,
    pub measure: PointMeasure,
    pub cutgen: CutGenConfig,
}

impl UniformityConfig {
    /// Control box of half-width √2/2 around the square's centre.
    pub fn new(n_curves: usize, n_replicates: usize, grid: usize, seed: u64, arm: Arm) -> Self {
        let h = FRAC_1_SQRT_2;
        UniformityConfig {
            n_curves,
            n_replicates,
            grid,
            seed,
            arm,
            measure: PointMeasure::Parameter,
            cutgen: CutGenConfig {
                control_box: Some(ControlBox { a: -h, b: h, c: -h, d: h }),
                ..CutGenConfig::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(SmspError::Config("grid must have at least 2 cells per side".into()));
        }
        if self.n_curves < 5 * self.grid * self.grid {
            return Err(SmspError::Config(format!(
                "{} curves is too few for a {g}x{g} chi-square test (need {})",
                self.n_curves,
                5 * self.grid * self.grid,
                g = self.grid
            )));
        }
        if self.n_replicates == 0 {
            return Err(SmspError::Config("need at least one replicate".into()));
        }
        self.cutgen.validate()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformityReport {
    pub arm: Arm,
    pub measure: PointMeasure,
    pub p_values: Vec<f64>,
    /// Fraction of replicates with p > 0.05.
    pub fraction_accepted: f64,
}

/// Pearson statistic and upper-tail p-value of `counts` against equal cell
/// probabilities.
pub fn chi_square_uniform(counts: &[u64]) -> Result<(f64, f64)> {
    if counts.len() < 2 {
        return Err(SmspError::Config("chi-square needs at least two cells".into()));
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(SmspError::EmptyInput("chi-square of an empty table"));
    }
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).expect("positive degrees of freedom");
    Ok((stat, dist.sf(stat)))
}

/// Counts of `points` on a `g × g` grid over the unit square; points outside are ignored.
pub fn grid_counts(points: &[Point], g: usize) -> Vec<u64> {
    let mut counts = vec![0u64; g * g];
    for p in points {
        if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) {
            continue;
        }
        let i = ((p.x * g as f64) as usize).min(g - 1);
        let j = ((p.y * g as f64) as usize).min(g - 1);
        counts[j * g + i] += 1;
    }
    counts
}

fn square_boundary() -> Vec<Point> {
    let n = EDGE_SAMPLES;
    (0..n)
        .flat_map(|i| {
            let t = i as f64 / n as f64;
            [Point::new(t, 0.0), Point::new(1.0, t), Point::new(1.0 - t, 1.0), Point::new(0.0, 1.0 - t)]
        })
        .collect()
}

/// One replicate's sample of points.
pub fn sample_arm(cfg: &UniformityConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Point>> {
    let n = cfg.n_curves;
    match cfg.arm {
        Arm::Uniform => Ok((0..n).map(|_| Point::new(rng.random(), rng.random())).collect()),
        Arm::Adversarial => Ok((0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 0.5 } else { 1.0 };
                Point::new(s * rng.random::<f64>(), s * rng.random::<f64>())
            })
            .collect()),
        Arm::Smsp => {
            let boundary = square_boundary();
            let circle = smallest_enclosing_circle(&boundary)?;
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let cut = sample_cut_within(&boundary, &circle, &cfg.cutgen, rng)?;
                let p = match cfg.measure {
                    PointMeasure::Parameter => cut.point_at(rng.random()),
                    PointMeasure::Abscissa => {
                        let (a, b) = (cut.curve().first().x, cut.curve().last().x);
                        cut.point_at_abscissa(rng.random_range(a..b))
                    }
                };
                if (0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y) {
                    out.push(p);
                }
            }
            Ok(out)
        }
    }
}

/// Runs every replicate (in parallel) and reports the acceptance fraction at level 0.05.
pub fn uniformity_experiment(cfg: &UniformityConfig) -> Result<UniformityReport> {
    cfg.validate()?;
    let p_values = (0..cfg.n_replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(cfg.seed, r as u64));
            let pts = sample_arm(cfg, &mut rng)?;
            Ok(chi_square_uniform(&grid_counts(&pts, cfg.grid))?.1)
        })
        .collect::<Result<Vec<f64>>>()?;
    let accepted = p_values.iter().filter(|&&p| p > 0.05).count();
    Ok(UniformityReport {
        arm: cfg.arm,
        measure: cfg.measure,
        fraction_accepted: accepted as f64 / p_values.len() as f64,
        p_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_matches_closed_forms() {
        // three cells, one off by d: df = 2 and p = exp(-x/2)
        for d in [1u64, 5, 20] {
            let counts = [100 + d, 100, 100 - d];
            let (stat, p) = chi_square_uniform(&counts).unwrap();
            let want = 2.0 * (d * d) as f64 / 100.0;
            assert!((stat - want).abs() < 1e-12);
            assert!((p - (-want / 2.0).exp()).abs() < 1e-12);
        }
        // two cells: df = 1 and p = erfc(sqrt(x/2)); erfc(√2) to 17 digits
        let (stat, p) = chi_square_uniform(&[60, 40]).unwrap();
        assert!((stat - 4.0).abs() < 1e-12);
        assert!((p - 0.045500263896358417).abs() < 1e-12, "{p}");
        let (stat, p) = chi_square_uniform(&[7, 7, 7, 7]).unwrap();
        assert_eq!((stat, p), (0.0, 1.0));
    }

    #[test]
    fn grid_counts_cover_the_edges() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(0.55, 0.05), Point::new(1.5, 0.5)];
        let c = grid_counts(&pts, 2);
        assert_eq!(c, vec![1, 1, 0, 1]);
    }

    #[test]
    fn too_few_curves_is_rejected() {
        assert!(uniformity_experiment(&UniformityConfig::new(499, 1, 10, 0, Arm::Uniform)).is_err());
    }

    #[test]
    fn arms_separate_on_a_small_run() {
        let run = |arm| uniformity_experiment(&UniformityConfig::new(2000, 20, 5, 9, arm)).unwrap();
        assert!(run(Arm::Uniform).fraction_accepted >= 0.8);
        assert_eq!(run(Arm::Adversarial).fraction_accepted, 0.0);
        let smsp = run(Arm::Smsp);
        assert_eq!(smsp.p_values.len(), 20);
    }

    #[test]
    fn boundary_sampling_detects_crossing_cuts() {
        let boundary = square_boundary();
        assert_eq!(boundary.len(), 4 * EDGE_SAMPLES);
        let c = smallest_enclosing_circle(&boundary).unwrap();
        assert!((c.radius - FRAC_1_SQRT_2).abs() < 1e-12);
    }
}
