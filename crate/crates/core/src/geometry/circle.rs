use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Result, SmspError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: Point, eps: f64) -> bool {
        p.distance(self.center) <= self.radius + eps
    }

    fn from_pair(a: Point, b: Point) -> Circle {
        let center = a.midpoint(b);
        Circle {
            center,
            radius: center.distance(a).max(center.distance(b)),
        }
    }

    /// Circumcircle, or the widest pair circle when the three are collinear.
    fn from_triple(a: Point, b: Point, c: Point) -> Circle {
        let (bx, by) = (b.x - a.x, b.y - a.y);
        let (cx, cy) = (c.x - a.x, c.y - a.y);
        let d = 2.0 * (bx * cy - by * cx);
        let scale = (bx * bx + by * by).max(cx * cx + cy * cy);
        if d.abs() <= 1e-14 * scale {
            let pairs = [(a, b), (a, c), (b, c)];
            return pairs
                .iter()
                .map(|&(p, q)| Circle::from_pair(p, q))
                .max_by(|x, y| x.radius.total_cmp(&y.radius))
                .unwrap();
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        let center = Point::new(a.x + ux, a.y + uy);
        let radius = center.distance(a).max(center.distance(b)).max(center.distance(c));
        Circle { center, radius }
    }
}

// Slack on the "already covered" test; keeps the incremental method from
// chasing rounding noise on co-circular inputs.
#[inline]
fn covers(c: &Circle, p: Point) -> bool {
    p.distance(c.center) <= c.radius * (1.0 + 1e-13) + 1e-15
}

/// Minimal-radius circle covering `points`, by the randomized incremental
/// (Welzl) method. A fixed internal shuffle keeps the result a pure function
/// of the input.
pub fn smallest_enclosing_circle(points: &[Point]) -> Result<Circle> {
    if points.is_empty() {
        return Err(SmspError::EmptyInput("enclosing circle of no points"));
    }
    let mut pts = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c1c1e ^ pts.len() as u64);
    pts.shuffle(&mut rng);

    let mut c = Circle {
        center: pts[0],
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if covers(&c, pts[i]) {
            continue;
        }
        c = Circle {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if covers(&c, pts[j]) {
                continue;
            }
            c = Circle::from_pair(pts[i], pts[j]);
            for k in 0..j {
                if !covers(&c, pts[k]) {
                    c = Circle::from_triple(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    Ok(c)
}
