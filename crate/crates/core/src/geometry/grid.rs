use super::{Rect, Vec2};

/// Uniform bucket grid over a fixed point set.
///
/// Buckets are stored in compressed form: `starts[b]..starts[b + 1]` is the
/// slice of `entries` holding the indices of the points in bucket `b`.
#[derive(Debug, Clone)]
pub struct GridIndex {
    bucket: f64,
    origin: Vec2,
    nx: usize,
    ny: usize,
    starts: Vec<u32>,
    entries: Vec<u32>,
    points: Vec<Vec2>,
}

const MAX_BUCKETS_PER_POINT: usize = 16;

impl GridIndex {
    /// Builds the index. `bucket` is grown if the bounding box would need
    /// more than a fixed multiple of the point count in buckets.
    pub fn new(points: &[Vec2], bucket: f64) -> Self {
        assert!(bucket > 0.0 && bucket.is_finite(), "bucket size must be positive");
        let mut bucket = bucket;
        let (origin, max) = if points.is_empty() {
            (Vec2::ZERO, Vec2::ZERO)
        } else {
            let r = super::bbox(points);
            (r.min, r.max)
        };
        let budget = MAX_BUCKETS_PER_POINT * points.len().max(1) + 64;
        let dims = |b: f64| {
            (
                ((max.x - origin.x) / b).floor() as usize + 1,
                ((max.y - origin.y) / b).floor() as usize + 1,
            )
        };
        let (mut nx, mut ny) = dims(bucket);
        while nx.saturating_mul(ny) > budget {
            bucket *= 2.0;
            (nx, ny) = dims(bucket);
        }
        let mut counts = vec![0u32; nx * ny + 1];
        let cell_of = |p: &Vec2| -> usize {
            let ix = (((p.x - origin.x) / bucket).floor() as usize).min(nx - 1);
            let iy = (((p.y - origin.y) / bucket).floor() as usize).min(ny - 1);
            iy * nx + ix
        };
        let cells: Vec<usize> = points.iter().map(cell_of).collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut entries = vec![0u32; points.len()];
        for (i, &c) in cells.iter().enumerate() {
            entries[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        GridIndex {
            bucket,
            origin,
            nx,
            ny,
            starts: counts,
            entries,
            points: points.to_vec(),
        }
    }

    pub fn bucket_size(&self) -> f64 {
        self.bucket
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Integer bucket coordinates of a point (unclamped).
    pub fn bucket_coords(&self, p: Vec2) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.bucket).floor() as i64,
            ((p.y - self.origin.y) / self.bucket).floor() as i64,
        )
    }

    fn bucket_slice(&self, ix: usize, iy: usize) -> &[u32] {
        let b = iy * self.nx + ix;
        &self.entries[self.starts[b] as usize..self.starts[b + 1] as usize]
    }

    /// Clamped bucket ranges covering the rectangle, or `None` if disjoint.
    fn bucket_range(&self, r: &Rect) -> Option<(usize, usize, usize, usize)> {
        if self.points.is_empty() {
            return None;
        }
        let (x0, y0) = self.bucket_coords(r.min);
        let (x1, y1) = self.bucket_coords(r.max);
        if x1 < 0 || y1 < 0 || x0 >= self.nx as i64 || y0 >= self.ny as i64 {
            return None;
        }
        let c = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;
        Some((c(x0, self.nx), c(x1, self.nx), c(y0, self.ny), c(y1, self.ny)))
    }

    /// Indices of all points in the closed rectangle, in ascending order.
    pub fn range(&self, r: &Rect) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some((x0, x1, y0, y1)) = self.bucket_range(r) {
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    for &i in self.bucket_slice(ix, iy) {
                        if r.contains(self.points[i as usize], 0.0) {
                            out.push(i as usize);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Number of points with `min.x <= x < max.x` and `min.y <= y < max.y`.
    pub fn count_half_open(&self, r: &Rect) -> usize {
        let Some((x0, x1, y0, y1)) = self.bucket_range(r) else {
            return 0;
        };
        let inside = |p: Vec2| p.x >= r.min.x && p.x < r.max.x && p.y >= r.min.y && p.y < r.max.y;
        let mut n = 0;
        for iy in y0..=y1 {
            let by0 = self.origin.y + iy as f64 * self.bucket;
            let full_y = by0 >= r.min.y && by0 + self.bucket < r.max.y;
            for ix in x0..=x1 {
                let bx0 = self.origin.x + ix as f64 * self.bucket;
                let full = full_y && bx0 >= r.min.x && bx0 + self.bucket < r.max.x;
                let slice = self.bucket_slice(ix, iy);
                if full {
                    n += slice.len();
                } else {
                    n += slice
                        .iter()
                        .filter(|&&i| inside(self.points[i as usize]))
                        .count();
                }
            }
        }
        n
    }

    /// Indices of points within `radius` of `p` (closed ball).
    pub fn within(&self, p: Vec2, radius: f64) -> Vec<usize> {
        let r = Rect::new(p - Vec2::new(radius, radius), p + Vec2::new(radius, radius));
        let mut out = Vec::new();
        if let Some((x0, x1, y0, y1)) = self.bucket_range(&r) {
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    for &i in self.bucket_slice(ix, iy) {
                        if self.points[i as usize].dist(p) <= radius {
                            out.push(i as usize);
                        }
                    }
                }
            }
        }
        out
    }

    /// Nearest indexed point to `p`, skipping index `skip`, with its distance.
    pub fn nearest_excluding(&self, p: Vec2, skip: Option<usize>) -> Option<(usize, f64)> {
        if self.points.len() <= skip.map_or(0, |_| 1) {
            return None;
        }
        let (cx, cy) = self.bucket_coords(p);
        let mut best: Option<(usize, f64)> = None;
        let max_ring = self.nx.max(self.ny) as i64 + cx.abs().max(cy.abs()) + 1;
        for ring in 0..=max_ring {
            // any point in ring k is at least (k - 1) * bucket away
            if let Some((_, d)) = best {
                if (ring - 1) as f64 * self.bucket > d {
                    break;
                }
            }
            for iy in (cy - ring)..=(cy + ring) {
                if iy < 0 || iy >= self.ny as i64 {
                    continue;
                }
                let on_edge_row = iy == cy - ring || iy == cy + ring;
                let step = if on_edge_row { 1 } else { (2 * ring).max(1) };
                let mut ix = cx - ring;
                while ix <= cx + ring {
                    if ix >= 0 && ix < self.nx as i64 {
                        for &i in self.bucket_slice(ix as usize, iy as usize) {
                            let i = i as usize;
                            if Some(i) == skip {
                                continue;
                            }
                            let d = self.points[i].dist(p);
                            if best.map_or(true, |(bi, bd)| d < bd || (d == bd && i < bi)) {
                                best = Some((i, d));
                            }
                        }
                    }
                    ix += step;
                }
            }
        }
        best
    }

    pub fn nearest(&self, p: Vec2) -> Option<(usize, f64)> {
        self.nearest_excluding(p, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Vec2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec2::new(rng.gen_range(0.0..50.0), rng.gen_range(-20.0..30.0)))
            .collect()
    }

    #[test]
    fn range_counts_match_linear_scan() {
        let pts = random_points(1000, 11);
        let idx = GridIndex::new(&pts, 3.7);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let x0 = rng.gen_range(-5.0..50.0);
            let y0 = rng.gen_range(-25.0..30.0);
            let r = Rect::new(
                Vec2::new(x0, y0),
                Vec2::new(x0 + rng.gen_range(0.0..30.0), y0 + rng.gen_range(0.0..30.0)),
            );
            let closed: Vec<usize> = (0..pts.len())
                .filter(|&i| r.contains(pts[i], 0.0))
                .collect();
            assert_eq!(idx.range(&r), closed);
            let half = pts
                .iter()
                .filter(|p| p.x >= r.min.x && p.x < r.max.x && p.y >= r.min.y && p.y < r.max.y)
                .count();
            assert_eq!(idx.count_half_open(&r), half);
        }
    }

    #[test]
    fn every_point_in_exactly_one_bucket() {
        let pts = random_points(500, 3);
        let idx = GridIndex::new(&pts, 2.0);
        let mut seen = vec![0; pts.len()];
        for &e in &idx.entries {
            seen[e as usize] += 1;
        }
        assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pts = random_points(400, 5);
        let idx = GridIndex::new(&pts, 1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let q = Vec2::new(rng.gen_range(-20.0..70.0), rng.gen_range(-40.0..50.0));
            let (bi, bd) = idx.nearest(q).unwrap();
            let brute = pts.iter().map(|p| p.dist(q)).fold(f64::INFINITY, f64::min);
            assert_eq!(bd, brute);
            assert_eq!(pts[bi].dist(q), brute);
        }
        for i in 0..50 {
            let (j, d) = idx.nearest_excluding(pts[i], Some(i)).unwrap();
            assert_ne!(i, j);
            let brute = (0..pts.len())
                .filter(|&k| k != i)
                .map(|k| pts[k].dist(pts[i]))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(d, brute);
        }
    }

    #[test]
    fn within_radius() {
        let pts = random_points(300, 8);
        let idx = GridIndex::new(&pts, 4.0);
        let q = Vec2::new(25.0, 5.0);
        let mut got = idx.within(q, 6.0);
        got.sort_unstable();
        let want: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].dist(q) <= 6.0).collect();
        assert_eq!(got, want);
    }
}
