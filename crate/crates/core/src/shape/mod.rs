//! Boundary extraction from a fitted partition.
//!
//! Every cut is sampled along its curve parameter and clipped to the region
//! the cut actually divided (the part of the data domain that routes through
//! the cut's node). Pieces whose neighbourhood carries a single label on both
//! sides are interior and dropped; what remains traces the label boundary.

mod knn;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

pub use knn::GridIndex;

use crate::data::Dataset;
use crate::error::{Result, SmspError};
use crate::geometry::{ConvexPolygon, Point, Side};
use crate::partition::CutTree;

pub const DEFAULT_POINTS_PER_CUT: usize = 100;
pub const DEFAULT_K: usize = 10;

const CLIP_BISECTIONS: usize = 48;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundarySegment {
    pub polyline: Vec<Point>,
    pub source_cut: usize,
    pub interior: bool,
}

impl BoundarySegment {
    pub fn length(&self) -> f64 {
        self.polyline.windows(2).map(|w| w[0].distance(w[1])).fold(0.0, |a, l| a + l)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeResult {
    /// Retained (non-interior) segments.
    pub segments: Vec<BoundarySegment>,
    pub perimeter: f64,
    pub budget_used: f64,
}

impl ShapeResult {
    /// Perimeter divided by the budget; `None` for an unbounded or zero budget.
    pub fn normalized_perimeter(&self) -> Option<f64> {
        (self.budget_used.is_finite() && self.budget_used > 0.0).then(|| self.perimeter / self.budget_used)
    }
}

#[derive(Clone, Debug)]
pub struct ShapeConfig {
    pub points_per_cut: usize,
    pub k: usize,
    pub max_dist: f64,
}

impl ShapeConfig {
    pub fn new(max_dist: f64) -> Self {
        ShapeConfig {
            points_per_cut: DEFAULT_POINTS_PER_CUT,
            k: DEFAULT_K,
            max_dist,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_cut < 2 {
            return Err(SmspError::Config("need at least two samples per cut".into()));
        }
        if self.k == 0 {
            return Err(SmspError::Config("K must be at least 1".into()));
        }
        if !(self.max_dist > 0.0 && self.max_dist.is_finite()) {
            return Err(SmspError::Config(format!("max_dist must be positive, got {}", self.max_dist)));
        }
        Ok(())
    }
}

/// Sum of polyline lengths.
pub fn perimeter(segments: &[BoundarySegment]) -> f64 {
    segments.iter().map(BoundarySegment::length).fold(0.0, |a, l| a + l)
}

// Moves from a kept parameter toward a dropped one and returns the last kept
// point found.
fn refine_edge(kept: f64, dropped: f64, inside: &impl Fn(f64) -> bool) -> f64 {
    let (mut a, mut b) = (kept, dropped);
    for _ in 0..CLIP_BISECTIONS {
        let mid = 0.5 * (a + b);
        if inside(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}

fn push_distinct(line: &mut Vec<Point>, p: Point) {
    if line.last().is_none_or(|&q| q != p) {
        line.push(p);
    }
}

/// Samples every cut at `points_per_cut` parameter-uniform points and keeps
/// the runs that lie in `domain` and route through that cut. Run ends are
/// refined onto the clipping boundary.
pub fn discretize_cuts(tree: &CutTree, domain: &ConvexPolygon, points_per_cut: usize) -> Vec<BoundarySegment> {
    let n = points_per_cut.max(2);
    (0..tree.len())
        .into_par_iter()
        .flat_map_iter(|node| {
            let cut = &tree.nodes[node].cut;
            let inside = |s: f64| {
                let p = cut.point_at(s);
                domain.contains(p, 1e-12) && tree.reaches(node, p)
            };
            let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let keep: Vec<bool> = params.iter().map(|&s| inside(s)).collect();
            let mut out = Vec::new();
            let mut i = 0;
            while i < n {
                if !keep[i] {
                    i += 1;
                    continue;
                }
                let start = i;
                while i < n && keep[i] {
                    i += 1;
                }
                let end = i - 1;
                let mut line = Vec::with_capacity(end - start + 3);
                if start > 0 {
                    line.push(cut.point_at(refine_edge(params[start], params[start - 1], &inside)));
                }
                for &s in &params[start..=end] {
                    push_distinct(&mut line, cut.point_at(s));
                }
                if end + 1 < n {
                    push_distinct(&mut line, cut.point_at(refine_edge(params[end], params[end + 1], &inside)));
                }
                if line.len() >= 2 {
                    out.push(BoundarySegment {
                        polyline: line,
                        source_cut: node,
                        interior: false,
                    });
                }
            }
            out
        })
        .collect()
}

/// Whether the neighbourhood of `q` shows one label on both sides of the cut.
fn votes_interior(q: Point, tree: &CutTree, cut: usize, data: &Dataset, index: &GridIndex, k: usize, max_dist: f64) -> bool {
    let cut = &tree.nodes[cut].cut;
    let mut seen = [0usize; 2];
    let mut label = None;
    for (_, i) in index.within(q, max_dist) {
        let i = i as usize;
        let side = cut.side(data.point(i)).index();
        if seen[side] == k {
            if seen[Side::Below.index()] == k && seen[Side::Above.index()] == k {
                break;
            }
            continue;
        }
        seen[side] += 1;
        match label {
            None => label = Some(data.label(i)),
            Some(l) if l != data.label(i) => return false,
            _ => {}
        }
    }
    seen[0] > 0 && seen[1] > 0
}

/// Flags segments whose samples mostly see a single label within `max_dist`
/// on both sides of their source cut.
pub fn mark_interior(segments: &mut [BoundarySegment], tree: &CutTree, data: &Dataset, k: usize, max_dist: f64) {
    let index = GridIndex::new(data.points(), max_dist);
    segments.par_iter_mut().for_each(|seg| {
        let votes = seg
            .polyline
            .iter()
            .filter(|&&q| votes_interior(q, tree, seg.source_cut, data, &index, k, max_dist))
            .count();
        seg.interior = 2 * votes > seg.polyline.len();
    });
}

/// Discretizes, marks and keeps the non-interior boundary of `tree`.
pub fn extract_shape(tree: &CutTree, data: &Dataset, domain: &ConvexPolygon, cfg: &ShapeConfig, budget: f64) -> Result<ShapeResult> {
    cfg.validate()?;
    let mut segments = discretize_cuts(tree, domain, cfg.points_per_cut);
    mark_interior(&mut segments, tree, data, cfg.k, cfg.max_dist);
    segments.retain(|s| !s.interior);
    Ok(ShapeResult {
        perimeter: perimeter(&segments),
        segments,
        budget_used: budget,
    })
}

/// Writes `segment_id,point_index,x,y` rows.
pub fn write_boundary_csv<W: Write>(out: W, segments: &[BoundarySegment]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["segment_id", "point_index", "x", "y"])?;
    for (id, seg) in segments.iter().enumerate() {
        for (j, p) in seg.polyline.iter().enumerate() {
            w.write_record(&[id.to_string(), j.to_string(), p.x.to_string(), p.y.to_string()])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
