use serde::{Serialize, Serializer};

use crate::data::ImageGrid;
use crate::error::{Result, SmspError};
use crate::registry::Registry;

/// A similarity or error score between two foreground masks.
pub trait Metric: Send + Sync {
    fn score(&self, pred: &[bool], truth: &[bool]) -> f64;
}

pub struct Mse;
pub struct Psnr;
pub struct Jaccard;
/// Single-window structural similarity, clamped to `[0, 1]`.
pub struct Ssim;
pub struct PctCorrect;

const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn mismatches(pred: &[bool], truth: &[bool]) -> usize {
    pred.iter().zip(truth).filter(|(a, b)| a != b).count()
}

impl Metric for Mse {
    fn score(&self, pred: &[bool], truth: &[bool]) -> f64 {
        mismatches(pred, truth) as f64 / truth.len() as f64
    }
}

impl Metric for Psnr {
    fn score(&self, pred: &[bool], truth: &[bool]) -> f64 {
        let mse = Mse.score(pred, truth);
        if mse == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (1.0 / mse).log10()
        }
    }
}

impl Metric for Jaccard {
    fn score(&self, pred: &[bool], truth: &[bool]) -> f64 {
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in pred.iter().zip(truth) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}

impl Metric for Ssim {
    fn score(&self, pred: &[bool], truth: &[bool]) -> f64 {
        let n = truth.len() as f64;
        let x: Vec<f64> = pred.iter().map(|&v| v as u8 as f64).collect();
        let y: Vec<f64> = truth.iter().map(|&v| v as u8 as f64).collect();
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
        for (a, b) in x.iter().zip(&y) {
            vx += (a - mx) * (a - mx);
            vy += (b - my) * (b - my);
            cxy += (a - mx) * (b - my);
        }
        let (vx, vy, cxy) = (vx / n, vy / n, cxy / n);
        let c1 = SSIM_K1 * SSIM_K1;
        let c2 = SSIM_K2 * SSIM_K2;
        let s = ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        s.clamp(0.0, 1.0)
    }
}

impl Metric for PctCorrect {
    fn score(&self, pred: &[bool], truth: &[bool]) -> f64 {
        100.0 * (1.0 - Mse.score(pred, truth))
    }
}

pub fn metric_registry() -> Registry<dyn Metric> {
    let mut r: Registry<dyn Metric> = Registry::new("metric");
    r.register("mse", Box::new(Mse))
        .register("psnr", Box::new(Psnr))
        .register("jsc", Box::new(Jaccard))
        .register("ssim", Box::new(Ssim))
        .register("pct_correct", Box::new(PctCorrect));
    r
}

fn ser_maybe_inf<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub mse: f64,
    /// `"inf"` in JSON when the masks agree exactly.
    #[serde(serialize_with = "ser_maybe_inf")]
    pub psnr: f64,
    pub jsc: f64,
    pub ssim: f64,
    pub pct_correct: f64,
}

impl MetricReport {
    /// Component-wise mean; PSNR stays infinite if any input is.
    pub fn mean(reports: &[MetricReport]) -> Option<MetricReport> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        let avg = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Some(MetricReport {
            mse: avg(|r| r.mse),
            psnr: avg(|r| r.psnr),
            jsc: avg(|r| r.jsc),
            ssim: avg(|r| r.ssim),
            pct_correct: avg(|r| r.pct_correct),
        })
    }
}

/// All five measures with foreground taken as label 1.
pub fn metrics(pred: &ImageGrid, truth: &ImageGrid) -> Result<MetricReport> {
    if pred.width != truth.width || pred.height != truth.height {
        return Err(SmspError::DimensionMismatch(format!(
            "prediction is {}x{}, truth is {}x{}",
            pred.width, pred.height, truth.width, truth.height
        )));
    }
    let p: Vec<bool> = pred.foreground().collect();
    let t: Vec<bool> = truth.foreground().collect();
    Ok(MetricReport {
        mse: Mse.score(&p, &t),
        psnr: Psnr.score(&p, &t),
        jsc: Jaccard.score(&p, &t),
        ssim: Ssim.score(&p, &t),
        pct_correct: PctCorrect.score(&p, &t),
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn grid(labels: Vec<u32>, w: usize) -> ImageGrid {
        let h = labels.len() / w;
        ImageGrid::new(w, h, labels).unwrap()
    }

    #[test]
    fn identical_grids() {
        let g = grid(vec![1, 2, 2, 1, 1, 2], 3);
        let r = metrics(&g, &g).unwrap();
        assert_eq!(
            (r.mse, r.psnr, r.jsc, r.ssim, r.pct_correct),
            (0.0, f64::INFINITY, 1.0, 1.0, 100.0)
        );
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"psnr\":\"inf\""));
    }

    #[test]
    fn complement_grids() {
        let g = grid(vec![1, 2, 2, 1, 1, 2], 3);
        let c = grid(g.labels.iter().map(|&l| 3 - l).collect(), 3);
        let r = metrics(&g, &c).unwrap();
        assert_eq!((r.mse, r.pct_correct, r.jsc), (1.0, 0.0, 0.0));
        assert_eq!(r.ssim, 0.0);
    }

    #[test]
    fn one_wrong_pixel_in_a_hundred() {
        let truth = grid((0..100).map(|i| if i % 3 == 0 { 1 } else { 2 }).collect(), 10);
        let mut labels = truth.labels.clone();
        labels[7] = 3 - labels[7];
        let r = metrics(&grid(labels, 10), &truth).unwrap();
        assert!((r.mse - 0.01).abs() < 1e-15);
        assert!((r.pct_correct - 99.0).abs() < 1e-12);
        assert!((r.psnr - 20.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let a = grid(vec![1, 2, 2, 1], 2);
        let b = grid(vec![1, 2, 2, 1], 4);
        assert!(matches!(metrics(&a, &b), Err(SmspError::DimensionMismatch(_))));
    }

    #[test]
    fn empty_foregrounds_are_identical() {
        let a = grid(vec![2; 9], 3);
        assert_eq!(metrics(&a, &a).unwrap().jsc, 1.0);
    }

    #[test]
    fn ssim_matches_hand_computation() {
        // x = (1,0,0,0), y = (1,1,0,0): μx=.25, μy=.5, σx²=.1875, σy²=.25, σxy=.125
        let (c1, c2) = (1e-4, 9e-4);
        let want = ((2.0 * 0.125 + c1) * (0.25 + c2)) / ((0.0625 + 0.25 + c1) * (0.4375 + c2));
        let got = Ssim.score(&[true, false, false, false], &[true, true, false, false]);
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn registry_names() {
        let reg = metric_registry();
        let names: Vec<&str> = reg.names().collect();
        assert_eq!(names, ["mse", "psnr", "jsc", "ssim", "pct_correct"]);
    }

    proptest! {
        #[test]
        fn bounds_and_symmetry(bits in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..200)) {
            let (p, t): (Vec<bool>, Vec<bool>) = bits.into_iter().unzip();
            prop_assert_eq!(Mse.score(&p, &t), Mse.score(&t, &p));
            prop_assert_eq!(PctCorrect.score(&p, &t), PctCorrect.score(&t, &p));
            let j = Jaccard.score(&p, &t);
            let s = Ssim.score(&p, &t);
            let c = PctCorrect.score(&p, &t);
            prop_assert!((0.0..=1.0).contains(&j));
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((0.0..=100.0).contains(&c));
            let mut rp = p.clone();
            let mut rt = t.clone();
            rp.reverse();
            rt.reverse();
            prop_assert_eq!(Mse.score(&rp, &rt), Mse.score(&p, &t));
            prop_assert_eq!(Jaccard.score(&rp, &rt), j);
        }
    }
}
