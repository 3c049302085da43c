use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LabeledPoint;
use crate::error::{Result, SmspError};
use crate::geometry::Point;

/// Foreground threshold on the 8-bit gray scale.
pub const DEFAULT_THRESHOLD: u8 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const CENTERED_UNIT: Rect = Rect {
        x0: -0.5,
        y0: -0.5,
        x1: 0.5,
        y1: 0.5,
    };

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

/// A labeled pixel grid (label 1 foreground, 2 background), row 0 at the top,
/// mapped onto `domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub domain: Rect,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width * height {
            return Err(SmspError::DimensionMismatch(format!(
                "{width}x{height} grid with {} labels",
                labels.len()
            )));
        }
        Ok(ImageGrid {
            width,
            height,
            labels,
            domain: Rect::CENTERED_UNIT,
        })
    }

    pub fn pixel_size(&self) -> (f64, f64) {
        (
            (self.domain.x1 - self.domain.x0) / self.width as f64,
            (self.domain.y1 - self.domain.y0) / self.height as f64,
        )
    }

    pub fn pixel_center(&self, row: usize, col: usize) -> Point {
        let (dx, dy) = self.pixel_size();
        Point::new(
            self.domain.x0 + (col as f64 + 0.5) * dx,
            self.domain.y1 - (row as f64 + 0.5) * dy,
        )
    }

    /// Pixel centres in row-major order.
    pub fn centers(&self) -> Vec<Point> {
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| (r, c)))
            .map(|(r, c)| self.pixel_center(r, c))
            .collect()
    }

    pub fn to_points(&self) -> Vec<LabeledPoint> {
        self.centers()
            .into_iter()
            .zip(&self.labels)
            .map(|(v, &z)| LabeledPoint { v, z })
            .collect()
    }

    /// Same grid geometry with new labels.
    pub fn with_labels(&self, labels: Vec<u32>) -> Result<Self> {
        let mut g = ImageGrid::new(self.width, self.height, labels)?;
        g.domain = self.domain;
        Ok(g)
    }

    pub fn foreground(&self) -> impl Iterator<Item = bool> + '_ {
        self.labels.iter().map(|&l| l == 1)
    }
}

/// Distance between diagonally adjacent pixel centres.
pub fn default_max_dist(grid: &ImageGrid) -> f64 {
    let (dx, dy) = grid.pixel_size();
    dx.hypot(dy)
}

/// A decoded gray-scale raster.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn fail<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(SmspError::Malformed {
            path: self.path.to_path_buf(),
            offset: self.pos,
            reason: reason.into(),
        })
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.fail(format!("expected {what}"));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        match text.parse::<u32>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.fail(format!("{what} out of range"))
            }
        }
    }
}

fn parse_pgm(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    let mut cur = Cursor { bytes, pos: 0, path };
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return cur.fail("not a PGM file (expected P2 or P5 magic)"),
    };
    cur.pos = 2;
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return cur.fail("zero image dimension");
    }
    if maxval == 0 || maxval > 65535 {
        return cur.fail(format!("maxval {maxval} outside 1..=65535"));
    }
    let n = width * height;
    let mut pixels = Vec::with_capacity(n);
    if binary {
        match cur.bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return cur.fail("expected whitespace before raster"),
        }
        let wide = maxval > 255;
        let need = n * if wide { 2 } else { 1 };
        if cur.bytes.len() - cur.pos < need {
            cur.pos = cur.bytes.len();
            return cur.fail(format!("raster truncated: need {need} bytes"));
        }
        let raster = &cur.bytes[cur.pos..cur.pos + need];
        if wide {
            pixels.extend(raster.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])));
        } else {
            pixels.extend(raster.iter().map(|&b| b as u16));
        }
        if let Some(i) = pixels.iter().position(|&v| v as u32 > maxval) {
            cur.pos += i * if wide { 2 } else { 1 };
            return cur.fail("pixel exceeds maxval");
        }
    } else {
        for _ in 0..n {
            cur.skip_space_and_comments();
            let start = cur.pos;
            let v = cur.number("pixel value")?;
            if v > maxval {
                cur.pos = start;
                return cur.fail("pixel exceeds maxval");
            }
            pixels.push(v as u16);
        }
    }
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| SmspError::io(path, e))?;
    parse_pgm(&bytes, path)
}

/// Writes a binary grid as 8-bit P5: foreground white, background black.
pub fn write_pgm<W: Write>(mut out: W, grid: &ImageGrid) -> std::io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", grid.width, grid.height)?;
    let raster: Vec<u8> = grid.labels.iter().map(|&l| if l == 1 { 255 } else { 0 }).collect();
    out.write_all(&raster)?;
    out.flush()
}

fn binarize(img: &GrayImage, downscale: f64, threshold: u8) -> Result<ImageGrid> {
    if !(downscale > 0.0 && downscale <= 1.0) {
        return Err(SmspError::Config(format!("downscale must be in (0, 1], got {downscale}")));
    }
    let w = ((img.width as f64 * downscale).round() as usize).max(1);
    let h = ((img.height as f64 * downscale).round() as usize).max(1);
    let cut = threshold as u32 * img.maxval as u32;
    let mut labels = Vec::with_capacity(w * h);
    for r in 0..h {
        let sr = (((r as f64 + 0.5) * img.height as f64 / h as f64) as usize).min(img.height - 1);
        for c in 0..w {
            let sc = (((c as f64 + 0.5) * img.width as f64 / w as f64) as usize).min(img.width - 1);
            let v = img.pixels[sr * img.width + sc] as u32;
            // compare v / maxval against threshold / 255 without rounding
            labels.push(if v * 255 >= cut { 1 } else { 2 });
        }
    }
    ImageGrid::new(w, h, labels)
}

/// Reads a PGM, optionally shrinks it by nearest-neighbour sampling,
/// thresholds it and emits one labeled point per pixel centre.
pub fn ingest_image(path: &Path, downscale: f64, threshold: u8) -> Result<(ImageGrid, Vec<LabeledPoint>)> {
    let img = read_pgm(path)?;
    let grid = binarize(&img, downscale, threshold)?;
    let points = grid.to_points();
    Ok((grid, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(bytes: &[u8]) -> Result<GrayImage> {
        parse_pgm(bytes, Path::new("mem.pgm"))
    }

    #[test]
    fn two_by_two_mapping() {
        let img = parse(b"P2\n# checker\n2 2\n255\n255 0\n0 255\n").unwrap();
        let grid = binarize(&img, 1.0, DEFAULT_THRESHOLD).unwrap();
        let pts = grid.to_points();
        let expect = [
            LabeledPoint::new(-0.25, 0.25, 1),
            LabeledPoint::new(0.25, 0.25, 2),
            LabeledPoint::new(-0.25, -0.25, 2),
            LabeledPoint::new(0.25, -0.25, 1),
        ];
        assert_eq!(pts, expect);
    }

    #[test]
    fn binary_and_wide_rasters() {
        let mut bytes = b"P5 3 1 255\n".to_vec();
        bytes.extend([0u8, 127, 128]);
        let img = parse(&bytes).unwrap();
        assert_eq!(img.pixels, vec![0, 127, 128]);
        let grid = binarize(&img, 1.0, 128).unwrap();
        assert_eq!(grid.labels, vec![2, 2, 1]);

        let mut bytes = b"P5 2 1 65535\n".to_vec();
        bytes.extend([0xff, 0xff, 0x10, 0x00]);
        let img = parse(&bytes).unwrap();
        assert_eq!(img.pixels, vec![65535, 4096]);
        assert_eq!(binarize(&img, 1.0, 128).unwrap().labels, vec![1, 2]);
    }

    #[test]
    fn malformed_reports_offset() {
        match parse(b"P3\n1 1\n255\n0") {
            Err(SmspError::Malformed { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("unexpected {other:?}"),
        }
        match parse(b"P2\n2 x\n") {
            Err(SmspError::Malformed { offset, reason, .. }) => {
                assert_eq!(offset, 5);
                assert!(reason.contains("height"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse(b"P5\n2 2\n255\n\x00\x00\x00") {
            Err(SmspError::Malformed { reason, .. }) => assert!(reason.contains("truncated")),
            other => panic!("unexpected {other:?}"),
        }
        match parse(b"P2\n1 1\n10\n11\n") {
            Err(SmspError::Malformed { offset, .. }) => assert_eq!(offset, 10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nearest_neighbour_downscale() {
        // 10x10 with the left half white
        let mut text = String::from("P2 10 10 255\n");
        for _ in 0..10 {
            for c in 0..10 {
                text.push_str(if c < 5 { "255 " } else { "0 " });
            }
            text.push('\n');
        }
        let img = parse(text.as_bytes()).unwrap();
        let grid = binarize(&img, 0.2, 128).unwrap();
        assert_eq!((grid.width, grid.height), (2, 2));
        assert_eq!(grid.labels, vec![1, 2, 1, 2]);
        assert!(binarize(&img, 0.0, 128).is_err());
        assert!(binarize(&img, 1.5, 128).is_err());
    }

    #[test]
    fn diagonal_spacing_is_default_distance() {
        let grid = ImageGrid::new(120, 92, vec![2; 120 * 92]).unwrap();
        let d = grid.pixel_center(0, 0).distance(grid.pixel_center(1, 1));
        let expect = (1.0f64 / (120.0 * 120.0) + 1.0 / (92.0 * 92.0)).sqrt();
        assert!((d - expect).abs() < 1e-15);
        assert!((default_max_dist(&grid) - expect).abs() < 1e-15);
        assert!(grid.to_points().iter().all(|p| grid.domain.contains(p.v)));
    }

    #[test]
    fn pgm_round_trip() {
        let labels: Vec<u32> = (0..35).map(|i| if (i * 7) % 3 == 0 { 1 } else { 2 }).collect();
        let grid = ImageGrid::new(7, 5, labels).unwrap();
        let mut buf = Vec::new();
        write_pgm(&mut buf, &grid).unwrap();
        let back = binarize(&parse(&buf).unwrap(), 1.0, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(back, grid);
    }
}
