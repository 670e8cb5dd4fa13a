//! Uniform-grid spatial hash for pair and neighborhood queries.

use std::collections::HashMap;

pub type Point = [f64; 2];

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub struct SpatialGrid {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialGrid {
    /// Buckets `points` into square cells of side `cell` (must be positive
    /// and finite).
    pub fn new(points: &[Point], cell: f64) -> Self {
        debug_assert!(cell > 0.0 && cell.is_finite());
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (idx, p) in points.iter().enumerate() {
            cells.entry(Self::key(cell, *p)).or_default().push(idx);
        }
        Self { cell, cells }
    }

    fn key(cell: f64, p: Point) -> (i64, i64) {
        ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64)
    }

    /// Indices of points within `radius <= cell` of `p`, in ascending order.
    pub fn within(&self, points: &[Point], p: Point, radius: f64) -> Vec<usize> {
        debug_assert!(radius <= self.cell);
        let (cx, cy) = Self::key(self.cell, p);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy)) {
                    out.extend(bucket.iter().copied().filter(|&q| distance(points[q], p) <= radius));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Every pair `(a, b)` with `a < b` and distance at most `cell`, sorted.
    pub fn pairs(&self, points: &[Point]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (&(cx, cy), bucket) in &self.cells {
            for &a in bucket {
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        let Some(other) = self.cells.get(&(cx + dx, cy + dy)) else { continue };
                        for &b in other {
                            if a < b && distance(points[a], points[b]) <= self.cell {
                                out.push((a, b));
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// O(n^2) reference for [`SpatialGrid::pairs`].
pub fn pairs_exhaustive(points: &[Point], cutoff: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            if distance(points[a], points[b]) <= cutoff {
                out.push((a, b));
            }
        }
    }
    out
}
