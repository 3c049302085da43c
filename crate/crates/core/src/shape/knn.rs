use crate::geometry::Point;

/// Uniform bucket grid for fixed-radius neighbour queries.
pub struct GridIndex<'a> {
    points: &'a [Point],
    min: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> GridIndex<'a> {
    /// `cell` should be about the query radius.
    pub fn new(points: &'a [Point], cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        let (mut min, mut max) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points {
            min = Point::new(min.x.min(p.x), min.y.min(p.y));
            max = Point::new(max.x.max(p.x), max.y.max(p.y));
        }
        if points.is_empty() {
            min = Point::ORIGIN;
            max = Point::ORIGIN;
        }
        // cap the bucket count for tiny radii over a wide cloud
        let span = (max.x - min.x).max(max.y - min.y);
        let cell = cell.max(span / 2048.0);
        let nx = ((max.x - min.x) / cell) as usize + 1;
        let ny = ((max.y - min.y) / cell) as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        let mut index = GridIndex {
            points,
            min,
            cell,
            nx,
            ny,
            buckets: Vec::new(),
        };
        for (i, &p) in points.iter().enumerate() {
            let (cx, cy) = index.cell_of(p);
            buckets[cy * nx + cx].push(i as u32);
        }
        index.buckets = buckets;
        index
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let cx = ((p.x - self.min.x) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let cy = ((p.y - self.min.y) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (cx, cy)
    }

    /// Indices of points within `radius` of `q`, nearest first (index breaks ties).
    pub fn within(&self, q: Point, radius: f64) -> Vec<(f64, u32)> {
        let mut out = Vec::new();
        if self.points.is_empty() {
            return out;
        }
        let r2 = radius * radius;
        let lo = |v: f64, m: f64| (((v - radius - m) / self.cell).floor()).max(0.0);
        let x0 = lo(q.x, self.min.x) as usize;
        let y0 = lo(q.y, self.min.y) as usize;
        let x1 = (((q.x + radius - self.min.x) / self.cell).floor()).min((self.nx - 1) as f64);
        let y1 = (((q.y + radius - self.min.y) / self.cell).floor()).min((self.ny - 1) as f64);
        if x1 < 0.0 || y1 < 0.0 {
            return out;
        }
        for cy in y0..=y1 as usize {
            for cx in x0..=x1 as usize {
                for &i in &self.buckets[cy * self.nx + cx] {
                    let d2 = self.points[i as usize].distance_sq(q);
                    if d2 <= r2 {
                        out.push((d2, i));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }
}
