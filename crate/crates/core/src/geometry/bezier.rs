use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Result, SmspError};

/// Parameter-space tolerance of the monotone inversion.
pub const INVERSION_TOL: f64 = 1e-10;

/// A Bézier curve of order 1, 2 or 3.
///
/// The power-basis form of the x component is cached for fast inversion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr", into = "CurveRepr")]
pub struct BezierCurve {
    order: usize,
    controls: [Point; 4],
    x_poly: [f64; 4],
    monotone: bool,
    y_lo: f64,
    y_hi: f64,
}

#[derive(Serialize, Deserialize)]
struct CurveRepr {
    order: usize,
    controls: Vec<Point>,
}

impl TryFrom<CurveRepr> for BezierCurve {
    type Error = SmspError;

    fn try_from(r: CurveRepr) -> Result<Self> {
        let curve = BezierCurve::new(&r.controls)?;
        if curve.order != r.order {
            return Err(SmspError::InvalidCurve(format!(
                "order {} does not match {} control points",
                r.order,
                r.controls.len()
            )));
        }
        Ok(curve)
    }
}

impl From<BezierCurve> for CurveRepr {
    fn from(c: BezierCurve) -> Self {
        CurveRepr {
            order: c.order,
            controls: c.controls().to_vec(),
        }
    }
}

impl BezierCurve {
    pub fn new(controls: &[Point]) -> Result<Self> {
        if !(2..=4).contains(&controls.len()) {
            return Err(SmspError::InvalidCurve(format!(
                "expected 2 to 4 control points, got {}",
                controls.len()
            )));
        }
        if let Some(p) = controls.iter().find(|p| !p.is_finite()) {
            return Err(SmspError::InvalidCurve(format!("non-finite control point {p:?}")));
        }
        let order = controls.len() - 1;
        let mut cps = [Point::ORIGIN; 4];
        cps[..controls.len()].copy_from_slice(controls);

        let x: Vec<f64> = controls.iter().map(|p| p.x).collect();
        let x_poly = match order {
            1 => [x[0], x[1] - x[0], 0.0, 0.0],
            2 => [x[0], 2.0 * (x[1] - x[0]), x[0] - 2.0 * x[1] + x[2], 0.0],
            _ => [
                x[0],
                3.0 * (x[1] - x[0]),
                3.0 * (x[0] - 2.0 * x[1] + x[2]),
                x[3] - 3.0 * x[2] + 3.0 * x[1] - x[0],
            ],
        };
        let monotone = x.windows(2).all(|w| w[0] <= w[1]);
        let (y_lo, y_hi) = controls
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));

        Ok(BezierCurve {
            order,
            controls: cps,
            x_poly,
            monotone,
            y_lo,
            y_hi,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn controls(&self) -> &[Point] {
        &self.controls[..=self.order]
    }

    pub fn first(&self) -> Point {
        self.controls[0]
    }

    pub fn last(&self) -> Point {
        self.controls[self.order]
    }

    /// Whether the control x-coordinates are nondecreasing.
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// Bounds on the curve's y values from the control polygon.
    pub fn control_y_bounds(&self) -> (f64, f64) {
        (self.y_lo, self.y_hi)
    }

    /// Evaluates the curve by de Casteljau's algorithm.
    pub fn eval(&self, s: f64) -> Point {
        debug_assert!((0.0..=1.0).contains(&s), "curve parameter {s} outside [0, 1]");
        let mut pts = self.controls;
        for level in (1..=self.order).rev() {
            for i in 0..level {
                pts[i] = pts[i].lerp(pts[i + 1], s);
            }
        }
        pts[0]
    }

    fn eval_y(&self, s: f64) -> f64 {
        let mut ys = [0.0; 4];
        for (y, p) in ys.iter_mut().zip(&self.controls) {
            *y = p.y;
        }
        let r = 1.0 - s;
        for level in (1..=self.order).rev() {
            for i in 0..level {
                ys[i] = r * ys[i] + s * ys[i + 1];
            }
        }
        ys[0]
    }

    #[inline]
    fn x_at(&self, s: f64) -> f64 {
        let c = &self.x_poly;
        ((c[3] * s + c[2]) * s + c[1]) * s + c[0]
    }

    /// The curve read as a function of x, with constant extension past the
    /// end points. Caller guarantees monotone control x-coordinates.
    #[inline]
    pub(crate) fn y_at_x_unchecked(&self, x: f64) -> f64 {
        let first = self.controls[0];
        let last = self.controls[self.order];
        if x <= first.x {
            return first.y;
        }
        if x >= last.x {
            return last.y;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > INVERSION_TOL {
            let mid = 0.5 * (lo + hi);
            if self.x_at(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.eval_y(0.5 * (lo + hi))
    }

    /// Minimum and maximum of the curve's y component over a uniform grid of
    /// `samples` parameter values (end points included).
    pub fn y_range_on_grid(&self, samples: usize) -> (f64, f64) {
        let n = samples.max(2);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let y = self.eval_y(i as f64 / (n - 1) as f64);
            lo = lo.min(y);
            hi = hi.max(y);
        }
        (lo, hi)
    }
}

/// Bernstein-weighted combination of the control points at `s ∈ [0, 1]`.
pub fn bezier_eval(curve: &BezierCurve, s: f64) -> Point {
    curve.eval(s)
}

/// Solves `x(s) = x` by bisection and returns `y(s)`; outside the end points
/// the end-point heights are extended horizontally.
pub fn bezier_y_at_x(curve: &BezierCurve, x: f64) -> Result<f64> {
    if !curve.monotone {
        return Err(SmspError::InvalidCurve(
            "control x-coordinates are not nondecreasing".into(),
        ));
    }
    Ok(curve.y_at_x_unchecked(x))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn curve(pts: &[(f64, f64)]) -> BezierCurve {
        let v: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
        BezierCurve::new(&v).unwrap()
    }

    #[test]
    fn eval_examples() {
        let line = curve(&[(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(bezier_eval(&line, 0.5), Point::new(0.5, 0.5));

        // 0.25 P0 + 0.5 P1 + 0.25 P2
        let quad = curve(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]);
        let p = bezier_eval(&quad, 0.5);
        assert_abs_diff_eq!(p.x, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.5, epsilon = 1e-15);

        let cubic = curve(&[(0.1, 0.2), (0.3, -0.7), (0.35, 0.9), (1.3, 0.4)]);
        assert_eq!(bezier_eval(&cubic, 1.0), Point::new(1.3, 0.4));
        assert_eq!(bezier_eval(&cubic, 0.0), Point::new(0.1, 0.2));
    }

    #[test]
    fn inversion_examples() {
        let line = curve(&[(0.0, 0.0), (2.0, 2.0)]);
        assert_abs_diff_eq!(bezier_y_at_x(&line, 1.0).unwrap(), 1.0, epsilon = 1e-9);

        let quad = curve(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]);
        assert_abs_diff_eq!(bezier_y_at_x(&quad, 0.5).unwrap(), 0.5, epsilon = 1e-9);

        let flat = curve(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(bezier_y_at_x(&flat, 5.0).unwrap(), 0.0);
        let tilted = curve(&[(0.0, -1.0), (1.0, 3.0)]);
        assert_eq!(bezier_y_at_x(&tilted, -7.0).unwrap(), -1.0);
        assert_eq!(bezier_y_at_x(&tilted, 7.0).unwrap(), 3.0);
    }

    #[test]
    fn non_monotone_is_rejected() {
        let bad = curve(&[(0.0, 0.0), (1.0, 1.0), (0.5, 0.0)]);
        assert!(matches!(bezier_y_at_x(&bad, 0.2), Err(SmspError::InvalidCurve(_))));
    }

    #[test]
    fn control_count_is_checked() {
        assert!(BezierCurve::new(&[Point::ORIGIN]).is_err());
        assert!(BezierCurve::new(&[Point::ORIGIN; 5]).is_err());
        assert!(BezierCurve::new(&[Point::ORIGIN, Point::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn serde_validates_order() {
        let c = curve(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]);
        let json = serde_json::to_string(&c).unwrap();
        let back: BezierCurve = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        let wrong = json.replace("\"order\":2", "\"order\":3");
        assert!(serde_json::from_str::<BezierCurve>(&wrong).is_err());
    }

    #[test]
    fn grid_range_of_parabola() {
        let quad = curve(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]);
        let (lo, hi) = quad.y_range_on_grid(257);
        assert_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 0.5, epsilon = 1e-12);
    }

    fn monotone_curve() -> impl Strategy<Value = BezierCurve> {
        (1usize..=3, -2.0f64..0.0, 0.1f64..3.0)
            .prop_flat_map(|(order, a, width)| {
                (
                    Just(order),
                    Just(a),
                    Just(a + width),
                    proptest::collection::vec(0.0f64..1.0, order - 1),
                    proptest::collection::vec(-1.0f64..1.0, order + 1),
                )
            })
            .prop_map(|(_, a, b, mut us, ys)| {
                us.sort_by(f64::total_cmp);
                let mut xs = vec![a];
                xs.extend(us.iter().map(|u| a + u * (b - a)));
                xs.push(b);
                let pts: Vec<Point> = xs.into_iter().zip(ys).map(|(x, y)| Point::new(x, y)).collect();
                BezierCurve::new(&pts).unwrap()
            })
    }

    proptest! {
        #[test]
        fn inversion_round_trip(c in monotone_curve(), s in 0.0f64..=1.0) {
            let p = c.eval(s);
            let y = bezier_y_at_x(&c, p.x).unwrap();
            prop_assert!((y - p.y).abs() < 1e-8, "s={s} y={y} expected {}", p.y);
        }

        #[test]
        fn curve_stays_in_control_box(c in monotone_curve(), s in 0.0f64..=1.0) {
            let p = c.eval(s);
            let (lo, hi) = c.control_y_bounds();
            prop_assert!(p.y >= lo - 1e-12 && p.y <= hi + 1e-12);
            prop_assert!(p.x >= c.first().x - 1e-12 && p.x <= c.last().x + 1e-12);
        }
    }
}
