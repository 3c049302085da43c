//! Planar geometry kernel: points, rotation frames, Bézier curves, convex
//! hulls and smallest enclosing circles.
//!
//! Everything here is a pure function of its inputs.

mod bezier;
mod circle;
mod hull;

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

pub use bezier::{bezier_eval, bezier_y_at_x, BezierCurve, INVERSION_TOL};
pub use circle::{smallest_enclosing_circle, Circle};
pub use hull::{convex_hull, ConvexPolygon};

use crate::cutgen::BezierCut;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn distance_sq(self, other: Point) -> f64 {
        let d = self - other;
        d.x * d.x + d.y * d.y
    }

    #[inline]
    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// `(1 - s) * self + s * other`, exact at both ends.
    #[inline]
    pub fn lerp(self, other: Point, s: f64) -> Point {
        let r = 1.0 - s;
        Point::new(r * self.x + s * other.x, r * self.y + s * other.y)
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Twice the signed area of triangle `(o, a, b)`; positive when counterclockwise.
#[inline]
pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// A rotation of the coordinate system by `theta`.
///
/// Sine and cosine are cached; only the angle is serialized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "FrameRepr", into = "FrameRepr")]
pub struct RotationFrame {
    theta: f64,
    cos: f64,
    sin: f64,
}

#[derive(Serialize, Deserialize)]
struct FrameRepr {
    theta: f64,
}

impl From<FrameRepr> for RotationFrame {
    fn from(r: FrameRepr) -> Self {
        RotationFrame::new(r.theta)
    }
}

impl From<RotationFrame> for FrameRepr {
    fn from(f: RotationFrame) -> Self {
        FrameRepr { theta: f.theta }
    }
}

impl RotationFrame {
    pub const IDENTITY: RotationFrame = RotationFrame {
        theta: 0.0,
        cos: 1.0,
        sin: 0.0,
    };

    pub fn new(theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        RotationFrame { theta, cos, sin }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn forward(&self, p: Point) -> Point {
        Point::new(p.x * self.cos - p.y * self.sin, p.x * self.sin + p.y * self.cos)
    }

    #[inline]
    pub fn inverse(&self, p: Point) -> Point {
        Point::new(p.x * self.cos + p.y * self.sin, -p.x * self.sin + p.y * self.cos)
    }
}

/// `(x cosθ − y sinθ, x sinθ + y cosθ)`.
#[inline]
pub fn rotate(p: Point, frame: &RotationFrame) -> Point {
    frame.forward(p)
}

#[inline]
pub fn inverse_rotate(p: Point, frame: &RotationFrame) -> Point {
    frame.inverse(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
}

impl Side {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Side::Below => 0,
            Side::Above => 1,
        }
    }

    #[inline]
    pub fn opposite(self) -> Side {
        match self {
            Side::Below => Side::Above,
            Side::Above => Side::Below,
        }
    }
}

/// Points closer than this to the curve count as below it.
pub const SIDE_TIE_TOL: f64 = 1e-12;

/// Which side of the (rotated, offset) cutting curve `p` lies on.
#[inline]
pub fn side_of_cut(p: Point, cut: &BezierCut) -> Side {
    cut.side(p)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn rotate_examples() {
        let p = rotate(Point::new(1.0, 0.0), &RotationFrame::new(0.0));
        assert_eq!(p, Point::new(1.0, 0.0));

        let p = rotate(Point::new(1.0, 0.0), &RotationFrame::new(FRAC_PI_2));
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-15);

        let p = rotate(Point::new(0.3, -0.4), &RotationFrame::new(PI));
        assert_abs_diff_eq!(p.x, -0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.4, epsilon = 1e-15);
    }

    #[test]
    fn frame_serializes_angle_only() {
        let f = RotationFrame::new(1.25);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"theta":1.25}"#);
        let back: RotationFrame = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    proptest! {
        #[test]
        fn rotation_round_trip(x in -10.0f64..10.0, y in -10.0f64..10.0, theta in 0.0..TAU) {
            let f = RotationFrame::new(theta);
            let p = Point::new(x, y);
            let q = rotate(p, &f);
            prop_assert!((q.norm() - p.norm()).abs() < 1e-12);
            let back = inverse_rotate(q, &f);
            prop_assert!((back.x - x).abs() < 1e-12 && (back.y - y).abs() < 1e-12);
        }
    }
}
