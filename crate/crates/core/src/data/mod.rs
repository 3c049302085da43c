//! Datasets: labeled points, the yin-yang simulator, binary images and
//! train/test splitting.

mod image;
mod split;
mod yinyang;

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use image::{default_max_dist, ingest_image, read_pgm, write_pgm, ImageGrid, Rect, DEFAULT_THRESHOLD};
pub use split::split;
pub use yinyang::{make_yinyang, yinyang_label};

use crate::error::{Result, SmspError};
use crate::geometry::Point;

/// A 2-D predictor with a categorical label in `1..=K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub v: Point,
    pub z: u32,
}

impl LabeledPoint {
    pub fn new(x: f64, y: f64, z: u32) -> Self {
        LabeledPoint { v: Point::new(x, y), z }
    }
}

/// Column-oriented view of a labeled point set used by the samplers.
/// Labels are stored zero-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    points: Vec<Point>,
    labels: Vec<u16>,
    n_labels: usize,
}

impl Dataset {
    /// `n_labels` defaults to the largest label present.
    pub fn new(data: &[LabeledPoint], n_labels: Option<usize>) -> Result<Self> {
        let max = data.iter().map(|d| d.z).max().unwrap_or(0) as usize;
        let k = n_labels.unwrap_or(max);
        if k == 0 || k > u16::MAX as usize {
            return Err(SmspError::Config(format!("number of labels must be in 1..=65535, got {k}")));
        }
        let mut points = Vec::with_capacity(data.len());
        let mut labels = Vec::with_capacity(data.len());
        for (i, d) in data.iter().enumerate() {
            if d.z == 0 || d.z as usize > k {
                return Err(SmspError::Config(format!("point {i} has label {} outside 1..={k}", d.z)));
            }
            if !d.v.is_finite() {
                return Err(SmspError::Config(format!("point {i} has non-finite coordinates")));
            }
            points.push(d.v);
            labels.push((d.z - 1) as u16);
        }
        Ok(Dataset {
            points,
            labels,
            n_labels: k,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    /// Zero-based label of item `i`.
    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().map(|&l| l as usize)
    }

    /// Per-label counts `n_k`.
    pub fn histogram(&self) -> Vec<u32> {
        let mut h = vec![0u32; self.n_labels];
        for &l in &self.labels {
            h[l as usize] += 1;
        }
        h
    }

    pub fn to_labeled(&self) -> Vec<LabeledPoint> {
        self.points
            .iter()
            .zip(&self.labels)
            .map(|(&v, &l)| LabeledPoint { v, z: l as u32 + 1 })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    x: f64,
    y: f64,
    label: u32,
}

/// Writes the `x,y,label` point CSV.
pub fn write_points_csv<W: Write>(out: W, data: &[LabeledPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for d in data {
        w.serialize(CsvRow {
            x: d.v.x,
            y: d.v.y,
            label: d.z,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_points_csv<R: Read>(input: R) -> Result<Vec<LabeledPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "y", "label"] {
        return Err(SmspError::Config(format!(
            "point CSV header must be `x,y,label`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize::<CsvRow>()
        .map(|row| {
            let row = row?;
            Ok(LabeledPoint::new(row.x, row.y, row.label))
        })
        .collect()
}

pub fn save_points_csv(path: &Path, data: &[LabeledPoint]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| SmspError::io(path, e))?;
    write_points_csv(std::io::BufWriter::new(f), data)
}

pub fn load_points_csv(path: &Path) -> Result<Vec<LabeledPoint>> {
    let f = std::fs::File::open(path).map_err(|e| SmspError::io(path, e))?;
    read_points_csv(std::io::BufReader::new(f))
}
