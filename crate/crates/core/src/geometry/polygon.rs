use super::{Vec2, COORD_TOL};
use crate::error::{Error, Result};

/// Areas below this are treated as degenerate.
pub const MIN_AREA: f64 = 1e-12;

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn intersects(&self, o: &Rect, tol: f64) -> bool {
        self.min.x <= o.max.x + tol
            && o.min.x <= self.max.x + tol
            && self.min.y <= o.max.y + tol
            && o.min.y <= self.max.y + tol
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        p.x >= self.min.x - tol
            && p.x <= self.max.x + tol
            && p.y >= self.min.y - tol
            && p.y <= self.max.y + tol
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    pub fn expand(&self, by: f64) -> Rect {
        Rect::new(
            Vec2::new(self.min.x - by, self.min.y - by),
            Vec2::new(self.max.x + by, self.max.y + by),
        )
    }
}

pub fn bbox(poly: &[Vec2]) -> Rect {
    let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poly {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    Rect { min, max }
}

/// Shoelace area, positive for counterclockwise vertex order.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc
}

/// Signed shoelace area; rejects polygons with fewer than three vertices or
/// with area below `1e-12`.
pub fn polygon_area(poly: &[Vec2]) -> Result<f64> {
    if poly.len() < 3 {
        return Err(Error::MalformedPolygon(format!(
            "{} vertices, need at least 3",
            poly.len()
        )));
    }
    let a = signed_area(poly);
    if a.abs() < MIN_AREA {
        return Err(Error::DegeneratePolygon(a));
    }
    Ok(a)
}

/// Area centroid of a simple polygon.
pub fn centroid(poly: &[Vec2]) -> Vec2 {
    let n = poly.len();
    let mut a = 0.0;
    let mut c = Vec2::ZERO;
    // shift to the first vertex for accuracy far from the origin
    let o = poly[0];
    for i in 0..n {
        let p = poly[i] - o;
        let q = poly[(i + 1) % n] - o;
        let w = p.cross(q);
        a += w;
        c += (p + q) * w;
    }
    o + c * (1.0 / (3.0 * a))
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

pub fn distance_to_boundary(poly: &[Vec2], p: Vec2) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Even-odd containment; points within `tol` of the boundary count as inside.
pub fn contains_point(poly: &[Vec2], p: Vec2, tol: f64) -> bool {
    if distance_to_boundary(poly, p) <= tol {
        return true;
    }
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2, tol: f64) -> bool {
    point_segment_distance(p, a, b) <= tol
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2, tol: f64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    on_segment(c, d, a, tol)
        || on_segment(c, d, b, tol)
        || on_segment(a, b, c, tol)
        || on_segment(a, b, d, tol)
}

/// True when no two non-adjacent edges meet and no vertex is repeated.
pub fn is_simple(poly: &[Vec2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if poly[i].dist(poly[j]) <= COORD_TOL {
                return false;
            }
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d, COORD_TOL) {
                return false;
            }
        }
    }
    true
}

/// Ear-clipping triangulation of a simple counterclockwise polygon.
pub fn triangulate(poly: &[Vec2]) -> Vec<[Vec2; 3]> {
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    if signed_area(poly) < 0.0 {
        idx.reverse();
    }
    let mut out = Vec::with_capacity(poly.len().saturating_sub(2));
    let mut guard = 0;
    while idx.len() > 3 && guard < 10 * poly.len() * poly.len() {
        guard += 1;
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            if orient(a, b, c) <= MIN_AREA {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = poly[j];
                orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
            });
            if !blocked {
                out.push([a, b, c]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        out.push([poly[idx[0]], poly[idx[1]], poly[idx[2]]]);
    }
    out
}

/// Separating-axis test between a convex polygon and a rectangle.
/// `gap_tol` > 0 treats near-touching as intersecting; `gap_tol` < 0
/// demands an overlap of at least `-gap_tol` along every axis.
fn convex_rect_overlap(poly: &[Vec2], rect: &Rect, gap_tol: f64) -> bool {
    let axes_rect = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
    let corners = rect.corners();
    let n = poly.len();
    let check = |axis: Vec2| -> bool {
        let len = axis.norm();
        if len == 0.0 {
            return true;
        }
        let axis = axis * (1.0 / len);
        let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in poly {
            let t = p.dot(axis);
            pmin = pmin.min(t);
            pmax = pmax.max(t);
        }
        let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in &corners {
            let t = c.dot(axis);
            rmin = rmin.min(t);
            rmax = rmax.max(t);
        }
        pmin <= rmax + gap_tol && rmin <= pmax + gap_tol
    };
    for a in axes_rect {
        if !check(a) {
            return false;
        }
    }
    for i in 0..n {
        let e = poly[(i + 1) % n] - poly[i];
        if !check(Vec2::new(-e.y, e.x)) {
            return false;
        }
    }
    true
}

/// Closed intersection test between a simple polygon and a rectangle.
pub fn polygon_intersects_rect(poly: &[Vec2], rect: &Rect, tol: f64) -> bool {
    if !bbox(poly).intersects(rect, tol) {
        return false;
    }
    triangulate(poly)
        .iter()
        .any(|t| convex_rect_overlap(t, rect, tol))
}

/// True when the convex pieces of `poly` overlap the rectangle with positive area.
pub fn triangles_overlap_rect_interior(tris: &[[Vec2; 3]], rect: &Rect, tol: f64) -> bool {
    tris.iter().any(|t| convex_rect_overlap(t, rect, -tol))
}

/// Sutherland–Hodgman clip of `poly` against a rectangle. The area of the
/// result is the area of the intersection.
pub fn clip_to_rect(poly: &[Vec2], rect: &Rect) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = poly.to_vec();
    // (normal axis, sign, bound): keep points with sign*coord <= sign*bound
    let planes: [(bool, f64, f64); 4] = [
        (true, -1.0, rect.min.x),
        (true, 1.0, rect.max.x),
        (false, -1.0, rect.min.y),
        (false, 1.0, rect.max.y),
    ];
    for (is_x, sign, bound) in planes {
        if out.is_empty() {
            break;
        }
        let input = std::mem::take(&mut out);
        let coord = |p: &Vec2| if is_x { p.x } else { p.y };
        let inside = |p: &Vec2| sign * coord(p) <= sign * bound;
        let n = input.len();
        for i in 0..n {
            let cur = input[i];
            let prev = input[(i + n - 1) % n];
            let (ci, pi) = (inside(&cur), inside(&prev));
            if ci != pi {
                let t = (bound - coord(&prev)) / (coord(&cur) - coord(&prev));
                out.push(prev + (cur - prev) * t);
            }
            if ci {
                out.push(cur);
            }
        }
    }
    out
}

/// Euclidean distance between a segment and a closed rectangle (0 when they meet).
pub fn segment_rect_distance(a: Vec2, b: Vec2, rect: &Rect) -> f64 {
    if rect.contains(a, 0.0) || rect.contains(b, 0.0) {
        return 0.0;
    }
    let c = rect.corners();
    for i in 0..4 {
        if segments_intersect(a, b, c[i], c[(i + 1) % 4], 0.0) {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for i in 0..4 {
        best = best.min(point_segment_distance(c[i], a, b));
        best = best.min(point_segment_distance(a, c[i], c[(i + 1) % 4]));
        best = best.min(point_segment_distance(b, c[i], c[(i + 1) % 4]));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn unit_square_and_triangle_areas() {
        let sq = [v(0., 0.), v(1., 0.), v(1., 1.), v(0., 1.)];
        assert_eq!(polygon_area(&sq).unwrap(), 1.0);
        let tri = [v(0., 0.), v(1., 0.), v(0., 1.)];
        assert_eq!(polygon_area(&tri).unwrap(), 0.5);
        let cw: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(polygon_area(&cw).unwrap(), -1.0);
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let flat = [v(0., 0.), v(1., 0.), v(2., 0.)];
        assert!(matches!(
            polygon_area(&flat),
            Err(Error::DegeneratePolygon(_))
        ));
        assert!(matches!(
            polygon_area(&flat[..2]),
            Err(Error::MalformedPolygon(_))
        ));
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bow = [v(0., 0.), v(1., 1.), v(1., 0.), v(0., 1.)];
        assert!(!is_simple(&bow));
        let l = [
            v(0., 0.),
            v(2., 0.),
            v(2., 1.),
            v(1., 1.),
            v(1., 2.),
            v(0., 2.),
        ];
        assert!(is_simple(&l));
    }

    #[test]
    fn l_shape_centroid_and_triangulation() {
        let l = [
            v(0., 0.),
            v(2., 0.),
            v(2., 1.),
            v(1., 1.),
            v(1., 2.),
            v(0., 2.),
        ];
        let c = centroid(&l);
        assert!((c.x - 5.0 / 6.0).abs() < 1e-12 && (c.y - 5.0 / 6.0).abs() < 1e-12);
        let tris = triangulate(&l);
        assert_eq!(tris.len(), 4);
        let total: f64 = tris.iter().map(|t| signed_area(t)).sum();
        assert!((total - 3.0).abs() < 1e-12);
        assert!(contains_point(&l, c, 0.0));
        assert!(!contains_point(&l, v(1.5, 1.5), 0.0));
    }

    #[test]
    fn clip_triangle_to_square() {
        let tri = [v(0., 0.), v(2., 0.), v(0., 2.)];
        let r = Rect::new(v(0., 0.), v(1., 1.));
        let clipped = clip_to_rect(&tri, &r);
        assert!((signed_area(&clipped) - 1.0).abs() < 1e-12);
        let r2 = Rect::new(v(1., 1.), v(2., 2.));
        assert!(signed_area(&clip_to_rect(&tri, &r2)).abs() < 1e-12);
    }

    #[test]
    fn polygon_rect_intersection() {
        let tri = [v(0., 0.), v(2., 0.), v(0., 2.)];
        assert!(polygon_intersects_rect(
            &tri,
            &Rect::new(v(0.9, 0.9), v(3., 3.)),
            0.0
        ));
        assert!(!polygon_intersects_rect(
            &tri,
            &Rect::new(v(1.1, 1.1), v(3., 3.)),
            0.0
        ));
        // touching at a single point
        assert!(polygon_intersects_rect(
            &tri,
            &Rect::new(v(1., 1.), v(3., 3.)),
            1e-9
        ));
        let tris = triangulate(&tri);
        assert!(!triangles_overlap_rect_interior(
            &tris,
            &Rect::new(v(1., 1.), v(3., 3.)),
            1e-9
        ));
    }

    #[test]
    fn segment_rect_distances() {
        let r = Rect::new(v(0., 0.), v(1., 1.));
        assert_eq!(segment_rect_distance(v(-1., 0.5), v(2., 0.5), &r), 0.0);
        assert!((segment_rect_distance(v(2., -1.), v(2., 3.), &r) - 1.0).abs() < 1e-12);
        assert!((segment_rect_distance(v(2., 2.), v(3., 3.), &r) - 2f64.sqrt()).abs() < 1e-12);
    }
}
