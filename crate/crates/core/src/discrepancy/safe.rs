use crate::geometry::{
    bbox, contains_point, distance_to_boundary, segment_rect_distance, CubeUnion, Rect, Vec2,
    Window, COORD_TOL,
};
use crate::subst::Hierarchy;

/// Points of a polygon at distance at least `margin` from its boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct SafeRegion {
    polygon: Vec<Vec2>,
    margin: f64,
}

impl SafeRegion {
    pub fn new(polygon: Vec<Vec2>, margin: f64) -> Self {
        assert!(polygon.len() >= 3, "safe region needs a polygon");
        SafeRegion { polygon, margin }
    }

    /// Root support of a master supertile eroded by one level-0 tile diameter.
    pub fn of_hierarchy(h: &Hierarchy) -> Self {
        let margin = h.rule().max_diameter() * h.scale();
        SafeRegion::new(h.polygon(h.root_level(), 0), margin)
    }

    pub fn polygon(&self) -> &[Vec2] {
        &self.polygon
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        contains_point(&self.polygon, p, COORD_TOL)
            && distance_to_boundary(&self.polygon, p) >= self.margin - COORD_TOL
    }

    pub fn contains_rect(&self, r: &Rect) -> bool {
        if !r.corners().iter().all(|c| contains_point(&self.polygon, *c, COORD_TOL)) {
            return false;
        }
        let n = self.polygon.len();
        (0..n).all(|i| {
            segment_rect_distance(self.polygon[i], self.polygon[(i + 1) % n], r) >= self.margin - COORD_TOL
        })
    }

    pub fn contains_window(&self, w: &Window) -> bool {
        self.contains_rect(&w.rect())
    }

    pub fn contains_cells(&self, u: &CubeUnion) -> bool {
        match u.bounds() {
            None => true,
            Some(b) if self.contains_rect(&b) => true,
            Some(_) => u.cells().all(|(x, y)| {
                self.contains_rect(&Rect::new(
                    Vec2::new(x as f64, y as f64),
                    Vec2::new(x as f64 + 1.0, y as f64 + 1.0),
                ))
            }),
        }
    }

    /// Largest edge of an axis-aligned square centred at `c` inside the region.
    pub fn square_edge_at(&self, c: Vec2) -> f64 {
        if !self.contains_point(c) {
            return 0.0;
        }
        let b = bbox(&self.polygon);
        let (mut lo, mut hi) = (0.0, b.width().max(b.height()));
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.contains_window(&Window::centered(c, mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Approximately the largest square in the region: coarse grid search for
    /// the centre followed by local refinement. Returns the square.
    pub fn largest_square(&self) -> Option<Window> {
        let b = bbox(&self.polygon);
        let steps = 24;
        let mut best = (0.0, Vec2::ZERO);
        for a in 0..=steps {
            for k in 0..=steps {
                let c = b.min
                    + Vec2::new(
                        b.width() * a as f64 / steps as f64,
                        b.height() * k as f64 / steps as f64,
                    );
                let e = self.square_edge_at(c);
                if e > best.0 {
                    best = (e, c);
                }
            }
        }
        if best.0 == 0.0 {
            return None;
        }
        let mut step = b.width().max(b.height()) / steps as f64;
        while step > 1e-6 * b.width().max(b.height()) {
            let mut improved = false;
            for d in [
                Vec2::new(step, 0.0),
                Vec2::new(-step, 0.0),
                Vec2::new(0.0, step),
                Vec2::new(0.0, -step),
            ] {
                let c = best.1 + d;
                let e = self.square_edge_at(c);
                if e > best.0 {
                    best = (e, c);
                    improved = true;
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        Some(Window::centered(best.1, best.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_region() {
        let sq = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(10.0, 10.0),
            Vec2::new(0.0, 10.0),
        ];
        let s = SafeRegion::new(sq, 1.0);
        assert!(s.contains_rect(&Rect::new(Vec2::new(1.0, 1.0), Vec2::new(9.0, 9.0))));
        assert!(!s.contains_rect(&Rect::new(Vec2::new(0.5, 1.0), Vec2::new(9.0, 9.0))));
        let w = s.largest_square().unwrap();
        assert!((w.edge - 8.0).abs() < 1e-4, "{w:?}");
        let mut u = CubeUnion::block(2, 2, 3, 3);
        assert!(s.contains_cells(&u));
        u.insert((9, 9));
        assert!(!s.contains_cells(&u));
    }
}
