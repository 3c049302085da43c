use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LabeledPoint;

/// Label of a point of the unit disk under the yin-yang rules.
pub fn yinyang_label(x: f64, y: f64) -> u32 {
    let right = (x - 0.5).powi(2) + y * y;
    let left = (x + 0.5).powi(2) + y * y;
    let one = right < 0.1 * 0.1
        || (x > 0.0 && y < 0.0 && right > 0.25)
        || (x < 0.0 && y < 0.0 && left > 0.1 * 0.1)
        || (x < 0.0 && y > 0.0 && left < 0.25);
    if one {
        1
    } else {
        2
    }
}

/// Draws `n_raw` uniform points on `[-1, 1]²`, keeps those strictly inside
/// the unit circle and labels them.
pub fn make_yinyang(n_raw: usize, seed: u64) -> Vec<LabeledPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_raw * 4 / 5);
    for _ in 0..n_raw {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        if x * x + y * y >= 1.0 {
            continue;
        }
        out.push(LabeledPoint::new(x, y, yinyang_label(x, y)));
    }
    out
}
