use super::{Rect, Vec2};
use serde::{Deserialize, Serialize};

/// Axis-aligned square `[x, x + edge] × [y, y + edge]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub corner: Vec2,
    pub edge: f64,
}

impl Window {
    pub fn new(corner: Vec2, edge: f64) -> Self {
        assert!(edge > 0.0, "window edge must be positive, got {edge}");
        Window { corner, edge }
    }

    /// Square of the given edge centred at `c`.
    pub fn centered(c: Vec2, edge: f64) -> Self {
        Window::new(c - Vec2::new(edge / 2.0, edge / 2.0), edge)
    }

    pub fn rect(&self) -> Rect {
        Rect::new(
            self.corner,
            self.corner + Vec2::new(self.edge, self.edge),
        )
    }

    pub fn center(&self) -> Vec2 {
        self.corner + Vec2::new(self.edge / 2.0, self.edge / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.edge * self.edge
    }

    /// Closed containment with slack `tol`.
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        self.rect().contains(p, tol)
    }

    /// Half-open containment `[x, x+edge) × [y, y+edge)`, the convention used
    /// for point counts so that adjacent squares partition the plane.
    pub fn contains_half_open(&self, p: Vec2) -> bool {
        p.x >= self.corner.x
            && p.x < self.corner.x + self.edge
            && p.y >= self.corner.y
            && p.y < self.corner.y + self.edge
    }

    /// Distance from `p` (inside) to the window boundary.
    pub fn depth(&self, p: Vec2) -> f64 {
        let r = self.rect();
        (p.x - r.min.x)
            .min(r.max.x - p.x)
            .min(p.y - r.min.y)
            .min(r.max.y - p.y)
    }
}
