//! Random cutting splines.
//!
//! A cut is proposed in a rotated frame centred on the subset: draw an angle,
//! an order, control points whose x-coordinates are pinned at the box edges
//! with sorted uniform interior values, and a vertical offset that keeps the
//! curve within reach of the subset. Proposals that leave every point on one
//! side are rejected and redrawn.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmspError};
use crate::geometry::{smallest_enclosing_circle, BezierCurve, Circle, Point, RotationFrame, Side, SIDE_TIE_TOL};

/// Number of parameter samples used to bracket the curve's height.
pub const OFFSET_GRID: usize = 256;

pub const DEFAULT_MAX_REJECTIONS: usize = 10_000;

/// One sampled cut: the subset is translated to `origin`, rotated by `frame`,
/// and split by `curve + offset` read as a function of the rotated x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CutRepr", into = "CutRepr")]
pub struct BezierCut {
    origin: Point,
    frame: RotationFrame,
    curve: BezierCurve,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
struct CutRepr {
    theta: f64,
    order: usize,
    controls: Vec<Point>,
    offset: f64,
    origin: Point,
}

impl TryFrom<CutRepr> for BezierCut {
    type Error = SmspError;

    fn try_from(r: CutRepr) -> Result<Self> {
        let curve = BezierCurve::new(&r.controls)?;
        if curve.order() != r.order {
            return Err(SmspError::InvalidCurve(format!(
                "order {} does not match {} control points",
                r.order,
                r.controls.len()
            )));
        }
        BezierCut::new(r.origin, RotationFrame::new(r.theta), curve, r.offset)
    }
}

impl From<BezierCut> for CutRepr {
    fn from(c: BezierCut) -> Self {
        CutRepr {
            theta: c.frame.theta(),
            order: c.curve.order(),
            controls: c.curve.controls().to_vec(),
            offset: c.offset,
            origin: c.origin,
        }
    }
}

impl BezierCut {
    pub fn new(origin: Point, frame: RotationFrame, curve: BezierCurve, offset: f64) -> Result<Self> {
        if !curve.is_monotone() {
            return Err(SmspError::InvalidCurve(
                "cut curve must have nondecreasing control x-coordinates".into(),
            ));
        }
        if !offset.is_finite() || !origin.is_finite() || !frame.theta().is_finite() {
            return Err(SmspError::InvalidCurve("non-finite cut parameters".into()));
        }
        Ok(BezierCut {
            origin,
            frame,
            curve,
            offset,
        })
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn frame(&self) -> &RotationFrame {
        &self.frame
    }

    pub fn curve(&self) -> &BezierCurve {
        &self.curve
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn to_local(&self, p: Point) -> Point {
        self.frame.forward(p - self.origin)
    }

    #[inline]
    pub fn to_world(&self, q: Point) -> Point {
        self.frame.inverse(q) + self.origin
    }

    #[inline]
    pub fn side(&self, p: Point) -> Side {
        let q = self.to_local(p);
        let h = q.y - self.offset;
        let (lo, hi) = self.curve.control_y_bounds();
        if h < lo {
            return Side::Below;
        }
        if h > hi + SIDE_TIE_TOL {
            return Side::Above;
        }
        let diff = q.y - (self.curve.y_at_x_unchecked(q.x) + self.offset);
        if diff >= SIDE_TIE_TOL {
            Side::Above
        } else {
            Side::Below
        }
    }

    /// The point at curve parameter `s`, in world coordinates.
    pub fn point_at(&self, s: f64) -> Point {
        let q = self.curve.eval(s);
        self.to_world(Point::new(q.x, q.y + self.offset))
    }

    /// The point of the cut above local abscissa `x`, in world coordinates.
    pub fn point_at_abscissa(&self, x: f64) -> Point {
        self.to_world(Point::new(x, self.curve.y_at_x_unchecked(x) + self.offset))
    }
}

/// Box `[a, b] × [c, d]` for control points, relative to the subset centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlBox {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl ControlBox {
    /// `±r` on both axes.
    pub fn centered(r: f64) -> Self {
        ControlBox {
            a: -r,
            b: r,
            c: -r,
            d: r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.c, self.d].iter().all(|v| v.is_finite());
        if !finite || !(self.a < self.b) || !(self.c < self.d) {
            return Err(SmspError::Config(format!(
                "control box needs a < b and c < d, got {self:?}"
            )));
        }
        Ok(())
    }
}

impl FromStr for ControlBox {
    type Err = SmspError;

    fn from_str(s: &str) -> Result<Self> {
        let vals: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| SmspError::Config(format!("bad a,b,c,d `{s}`: {e}")))?;
        let [a, b, c, d] = vals[..] else {
            return Err(SmspError::Config(format!("expected 4 values a,b,c,d, got `{s}`")));
        };
        let bx = ControlBox { a, b, c, d };
        bx.validate()?;
        Ok(bx)
    }
}

/// Which curve orders are proposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderChoice {
    /// Orders 1, 2 and 3 with equal probability.
    Mixed,
    Fixed(u8),
}

impl OrderChoice {
    pub fn weights(self) -> [f64; 3] {
        match self {
            OrderChoice::Mixed => [1.0 / 3.0; 3],
            OrderChoice::Fixed(n) => {
                let mut w = [0.0; 3];
                w[n as usize - 1] = 1.0;
                w
            }
        }
    }
}

impl FromStr for OrderChoice {
    type Err = SmspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixed" => Ok(OrderChoice::Mixed),
            "1" | "line" => Ok(OrderChoice::Fixed(1)),
            "2" => Ok(OrderChoice::Fixed(2)),
            "3" => Ok(OrderChoice::Fixed(3)),
            _ => Err(SmspError::Config(format!("order must be mixed, 1, 2 or 3, got `{s}`"))),
        }
    }
}

impl fmt::Display for OrderChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderChoice::Mixed => f.write_str("mixed"),
            OrderChoice::Fixed(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutGenConfig {
    /// Explicit control box; `None` uses `±r` around each subset's
    /// enclosing circle.
    pub control_box: Option<ControlBox>,
    pub order_weights: [f64; 3],
    pub max_rejections: usize,
}

impl Default for CutGenConfig {
    fn default() -> Self {
        CutGenConfig {
            control_box: None,
            order_weights: OrderChoice::Mixed.weights(),
            max_rejections: DEFAULT_MAX_REJECTIONS,
        }
    }
}

impl CutGenConfig {
    pub fn with_order(order: OrderChoice) -> Self {
        CutGenConfig {
            order_weights: order.weights(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bx) = &self.control_box {
            bx.validate()?;
        }
        let w = &self.order_weights;
        if w.iter().any(|&v| !(v >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(SmspError::Config(format!("order weights must be a distribution, got {w:?}")));
        }
        if self.max_rejections == 0 {
            return Err(SmspError::Config("max_rejections must be positive".into()));
        }
        Ok(())
    }

    fn box_for(&self, circle: &Circle) -> ControlBox {
        self.control_box.unwrap_or_else(|| ControlBox::centered(circle.radius))
    }

    fn sample_order<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in self.order_weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i + 1;
            }
        }
        // rounding in the cumulative sum: fall back to the last supported order
        self.order_weights.iter().rposition(|&w| w > 0.0).unwrap_or(2) + 1
    }
}

/// Control points of an order-`n` curve: x pinned to `a` and `b` at the ends
/// with sorted uniform interior values, every y uniform on `[c, d]`.
pub fn sample_control_points<R: Rng + ?Sized>(n: usize, bx: &ControlBox, rng: &mut R) -> BezierCurve {
    assert!((1..=3).contains(&n), "curve order {n} not in 1..=3");
    let mut xs = [0.0f64; 4];
    xs[0] = bx.a;
    xs[n] = bx.b;
    for x in xs.iter_mut().take(n).skip(1) {
        *x = rng.random_range(bx.a..bx.b);
    }
    xs[1..n].sort_by(f64::total_cmp);
    let mut pts = [Point::ORIGIN; 4];
    for (p, &x) in pts.iter_mut().zip(&xs).take(n + 1) {
        *p = Point::new(x, rng.random_range(bx.c..bx.d));
    }
    BezierCurve::new(&pts[..=n]).expect("sampled control points are valid")
}

/// Uniform offset on `[min y' − max g, max y' − min g]`, so that the shifted
/// curve's height range overlaps the subset's rotated height range.
pub fn sample_offset<R: Rng + ?Sized>(curve: &BezierCurve, rotated_y: (f64, f64), rng: &mut R) -> f64 {
    let (g_lo, g_hi) = curve.y_range_on_grid(OFFSET_GRID);
    let l1 = rotated_y.0 - g_hi;
    let l2 = rotated_y.1 - g_lo;
    if l2 > l1 {
        rng.random_range(l1..l2)
    } else {
        l1
    }
}

/// True iff the cut puts at least one point on each side.
pub fn cut_separates(cut: &BezierCut, points: &[Point]) -> bool {
    let mut seen = [false; 2];
    for &p in points {
        seen[cut.side(p).index()] = true;
        if seen[0] && seen[1] {
            return true;
        }
    }
    false
}

/// Rejection sampler for a cut that splits `points` into two nonempty parts.
pub fn sample_cut<R: Rng + ?Sized>(points: &[Point], cfg: &CutGenConfig, rng: &mut R) -> Result<BezierCut> {
    let circle = smallest_enclosing_circle(points)?;
    sample_cut_within(points, &circle, cfg, rng)
}

/// As [`sample_cut`], with the subset's enclosing circle already known.
pub fn sample_cut_within<R: Rng + ?Sized>(
    points: &[Point],
    circle: &Circle,
    cfg: &CutGenConfig,
    rng: &mut R,
) -> Result<BezierCut> {
    if points.len() < 2 {
        return Err(SmspError::CutFailure { attempts: 0 });
    }
    let bx = cfg.box_for(circle);
    if bx.validate().is_err() {
        // zero-radius subset: every point coincides, nothing can separate them
        return Err(SmspError::CutFailure { attempts: 0 });
    }
    for _ in 0..cfg.max_rejections {
        let frame = RotationFrame::new(rng.random_range(0.0..TAU));
        let order = cfg.sample_order(rng);
        let curve = sample_control_points(order, &bx, rng);
        let mut y_range = (f64::INFINITY, f64::NEG_INFINITY);
        for &p in points {
            let y = frame.forward(p - circle.center).y;
            y_range.0 = y_range.0.min(y);
            y_range.1 = y_range.1.max(y);
        }
        let offset = sample_offset(&curve, y_range, rng);
        let cut = BezierCut {
            origin: circle.center,
            frame,
            curve,
            offset,
        };
        if cut_separates(&cut, points) {
            return Ok(cut);
        }
    }
    Err(SmspError::CutFailure {
        attempts: cfg.max_rejections,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    use super::*;
    use crate::geometry::{bezier_y_at_x, side_of_cut};

    fn line_cut(frame: RotationFrame, y: f64) -> BezierCut {
        let curve = BezierCurve::new(&[Point::new(-10.0, y), Point::new(10.0, y)]).unwrap();
        BezierCut::new(Point::ORIGIN, frame, curve, 0.0).unwrap()
    }

    #[test]
    fn side_examples() {
        let cut = line_cut(RotationFrame::IDENTITY, 0.0);
        assert_eq!(side_of_cut(Point::new(0.0, 1.0), &cut), Side::Above);
        assert_eq!(side_of_cut(Point::new(0.0, -1.0), &cut), Side::Below);
        assert_eq!(side_of_cut(Point::new(3.0, 0.0), &cut), Side::Below, "ties go below");

        let quad = BezierCurve::new(&[Point::new(0.0, 0.0), Point::new(0.5, 1.0), Point::new(1.0, 0.0)]).unwrap();
        let height = bezier_y_at_x(&quad, 0.5).unwrap();
        assert!(height < 0.6);
        let cut = BezierCut::new(Point::ORIGIN, RotationFrame::IDENTITY, quad, 0.0).unwrap();
        assert_eq!(side_of_cut(Point::new(0.5, 0.6), &cut), Side::Above);
        assert_eq!(side_of_cut(Point::new(0.5, 0.4), &cut), Side::Below);
    }

    #[test]
    fn separation_examples() {
        let cut = line_cut(RotationFrame::IDENTITY, 0.0);
        assert!(cut_separates(&cut, &[Point::new(0.0, 1.0), Point::new(0.0, -1.0)]));
        assert!(!cut_separates(&cut, &[Point::new(0.0, 1.0), Point::new(1.0, 1.0)]));
    }

    #[test]
    fn rotation_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bx = ControlBox::centered(1.0);
        for _ in 0..1000 {
            let theta = rng.random_range(0.0..TAU);
            let curve = sample_control_points(rng.random_range(1..=3), &bx, &mut rng);
            let t = rng.random_range(-0.5..0.5);
            let rotated = BezierCut::new(Point::ORIGIN, RotationFrame::new(theta), curve.clone(), t).unwrap();
            let plain = BezierCut::new(Point::ORIGIN, RotationFrame::IDENTITY, curve, t).unwrap();
            let p = Point::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let q = RotationFrame::new(theta).forward(p);
            assert_eq!(rotated.side(p), plain.side(q));
        }
    }

    #[test]
    fn control_points_respect_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bx = ControlBox {
            a: -0.3,
            b: 0.9,
            c: 2.0,
            d: 2.5,
        };
        let line = sample_control_points(1, &bx, &mut rng);
        assert_eq!(line.controls().len(), 2);
        assert_eq!((line.first().x, line.last().x), (-0.3, 0.9));
        for n in 1..=3 {
            for _ in 0..2000 {
                let c = sample_control_points(n, &bx, &mut rng);
                assert_eq!(c.first().x, bx.a);
                assert_eq!(c.last().x, bx.b);
                assert!(c.is_monotone());
                for p in c.controls() {
                    assert!(p.x >= bx.a && p.x <= bx.b && p.y >= bx.c && p.y <= bx.d);
                }
            }
        }
    }

    #[test]
    fn interior_x_pooled_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let bx = ControlBox::centered(1.0);
        let bins = 20;
        let mut counts = vec![0usize; bins];
        for _ in 0..100_000 {
            let c = sample_control_points(3, &bx, &mut rng);
            for p in &c.controls()[1..3] {
                let k = (((p.x + 1.0) / 2.0) * bins as f64) as usize;
                counts[k.min(bins - 1)] += 1;
            }
        }
        let n: usize = counts.iter().sum();
        let e = n as f64 / bins as f64;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
        assert!(p > 0.01, "chi-square p = {p}");
    }

    #[test]
    fn offset_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let flat = BezierCurve::new(&[Point::new(-1.0, 0.0), Point::new(1.0, 0.0)]).unwrap();
        for _ in 0..1000 {
            let t = sample_offset(&flat, (-1.0, 1.0), &mut rng);
            assert!(t > -1.0 - 1e-15 && t < 1.0);
        }
        // g spans [0, 0.5]: l1 = 0.2 - 0.5, l2 = 0.8 - 0
        let arch = BezierCurve::new(&[Point::new(0.0, 0.0), Point::new(0.5, 1.0), Point::new(1.0, 0.0)]).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..20_000 {
            let t = sample_offset(&arch, (0.2, 0.8), &mut rng);
            assert!((-0.3 - 1e-12..0.8).contains(&t));
            assert!(0.0 + t < 0.8 && 0.5 + t > 0.2 - 1e-12);
            lo = lo.min(t);
            hi = hi.max(t);
        }
        assert!(lo < -0.29 && hi > 0.79);
    }

    #[test]
    fn two_points_always_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = [Point::new(-1.0, 0.0), Point::new(1.0, 0.0)];
        for _ in 0..500 {
            let cut = sample_cut(&pts, &CutGenConfig::default(), &mut rng).unwrap();
            assert_ne!(cut.side(pts[0]), cut.side(pts[1]));
        }
    }

    #[test]
    fn coincident_points_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = [Point::new(0.2, 0.2); 3];
        assert!(matches!(
            sample_cut(&pts, &CutGenConfig::default(), &mut rng),
            Err(SmspError::CutFailure { .. })
        ));
        assert!(matches!(
            sample_cut(&pts[..1], &CutGenConfig::default(), &mut rng),
            Err(SmspError::CutFailure { .. })
        ));
    }

    #[test]
    fn rejection_cap_is_reported() {
        // curve heights span ~1e9 while the data spans 0.02, so the offset
        // almost never lands between the two points
        let cfg = CutGenConfig {
            control_box: Some(ControlBox {
                a: -1.0,
                b: 1.0,
                c: -1e9,
                d: 1e9,
            }),
            max_rejections: 50,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts = [Point::new(-0.01, 0.0), Point::new(0.01, 0.0)];
        let err = sample_cut(&pts, &cfg, &mut rng).unwrap_err();
        assert!(matches!(err, SmspError::CutFailure { attempts: 50 }));
    }

    #[test]
    fn scale_equivariance_under_shared_stream() {
        let mut data_rng = ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<Point> = (0..60)
            .map(|_| Point::new(data_rng.random_range(-0.4..0.7), data_rng.random_range(-0.2..0.3)))
            .collect();
        let scaled: Vec<Point> = pts.iter().map(|&p| p * 2.0).collect();
        let cfg = CutGenConfig::default();
        for seed in 0..50 {
            let mut r1 = ChaCha8Rng::seed_from_u64(seed);
            let mut r2 = ChaCha8Rng::seed_from_u64(seed);
            let c1 = sample_cut(&pts, &cfg, &mut r1).unwrap();
            let c2 = sample_cut(&scaled, &cfg, &mut r2).unwrap();
            assert_eq!(c1.frame().theta(), c2.frame().theta());
            assert_eq!(c1.offset() * 2.0, c2.offset());
            let sides1: Vec<Side> = pts.iter().map(|&p| c1.side(p)).collect();
            let sides2: Vec<Side> = scaled.iter().map(|&p| c2.side(p)).collect();
            assert_eq!(sides1, sides2);
        }
    }

    #[test]
    fn order_parsing_and_weights() {
        assert_eq!("mixed".parse::<OrderChoice>().unwrap().weights(), [1.0 / 3.0; 3]);
        assert_eq!("3".parse::<OrderChoice>().unwrap().weights(), [0.0, 0.0, 1.0]);
        assert_eq!("line".parse::<OrderChoice>().unwrap(), OrderChoice::Fixed(1));
        assert!("4".parse::<OrderChoice>().is_err());
        let cfg = CutGenConfig::with_order(OrderChoice::Fixed(2));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| cfg.sample_order(&mut rng) == 2));
    }

    #[test]
    fn control_box_parsing() {
        let bx: ControlBox = "-0.5,0.5,-1,1".parse().unwrap();
        assert_eq!(bx, ControlBox { a: -0.5, b: 0.5, c: -1.0, d: 1.0 });
        assert!("1,0,0,1".parse::<ControlBox>().is_err());
        assert!("1,2,3".parse::<ControlBox>().is_err());
    }

    #[test]
    fn cut_json_shape() {
        let cut = line_cut(RotationFrame::new(0.5), 0.25);
        let v: serde_json::Value = serde_json::to_value(&cut).unwrap();
        for key in ["theta", "order", "controls", "offset", "origin"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: BezierCut = serde_json::from_value(v).unwrap();
        assert_eq!(back, cut);
    }
}
