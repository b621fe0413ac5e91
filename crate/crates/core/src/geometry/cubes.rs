use super::{point_segment_distance, segment_rect_distance, Rect, Vec2};
use crate::error::{Error, Result};
use crate::seeding::sub_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

/// Finite union of closed unit squares `[x, x+1] × [y, y+1]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CubeUnion {
    cells: BTreeSet<(i64, i64)>,
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

const NEIGHBORS: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

impl CubeUnion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cells<I: IntoIterator<Item = (i64, i64)>>(cells: I) -> Self {
        CubeUnion {
            cells: cells.into_iter().collect(),
        }
    }

    /// Axis-aligned block of `w × h` cells with lower-left cell `(x, y)`.
    pub fn block(x: i64, y: i64, w: i64, h: i64) -> Self {
        Self::from_cells((0..w).flat_map(move |i| (0..h).map(move |j| (x + i, y + j))))
    }

    pub fn insert(&mut self, cell: (i64, i64)) -> bool {
        self.cells.insert(cell)
    }

    pub fn contains(&self, cell: (i64, i64)) -> bool {
        self.cells.contains(&cell)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.cells.iter().copied()
    }

    /// Lebesgue measure: the cell count.
    pub fn area(&self) -> f64 {
        self.cells.len() as f64
    }

    pub fn translate(&self, dx: i64, dy: i64) -> CubeUnion {
        Self::from_cells(self.cells.iter().map(|&(x, y)| (x + dx, y + dy)))
    }

    /// Bounding rectangle of the union, `None` when empty.
    pub fn bounds(&self) -> Option<Rect> {
        let mut it = self.cells.iter();
        let &(x, y) = it.next()?;
        let (mut x0, mut x1, mut y0, mut y1) = (x, x, y, y);
        for &(x, y) in it {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        Some(Rect::new(
            Vec2::new(x0 as f64, y0 as f64),
            Vec2::new((x1 + 1) as f64, (y1 + 1) as f64),
        ))
    }

    /// Perimeter: the number of cell edges shared with a non-member cell.
    pub fn boundary_measure(&self) -> f64 {
        let mut edges = 0u64;
        for &(x, y) in &self.cells {
            for (dx, dy) in NEIGHBORS {
                if !self.cells.contains(&(x + dx, y + dy)) {
                    edges += 1;
                }
            }
        }
        edges as f64
    }

    /// Boundary edges of member cells as segments.
    fn boundary_segments_near(&self, cell: (i64, i64), reach: i64) -> Vec<(Vec2, Vec2)> {
        let mut segs = Vec::new();
        for i in (cell.0 - reach)..=(cell.0 + reach) {
            for j in (cell.1 - reach)..=(cell.1 + reach) {
                if !self.cells.contains(&(i, j)) {
                    continue;
                }
                let (x, y) = (i as f64, j as f64);
                if !self.cells.contains(&(i - 1, j)) {
                    segs.push((Vec2::new(x, y), Vec2::new(x, y + 1.0)));
                }
                if !self.cells.contains(&(i + 1, j)) {
                    segs.push((Vec2::new(x + 1.0, y), Vec2::new(x + 1.0, y + 1.0)));
                }
                if !self.cells.contains(&(i, j - 1)) {
                    segs.push((Vec2::new(x, y), Vec2::new(x + 1.0, y)));
                }
                if !self.cells.contains(&(i, j + 1)) {
                    segs.push((Vec2::new(x, y + 1.0), Vec2::new(x + 1.0, y + 1.0)));
                }
            }
        }
        segs
    }

    /// Estimates `μ({x ∈ U : d(x, ∂U) ≤ s})` by stratified sampling.
    ///
    /// Each cell is split into a `k × k` grid of strata (`k² ≈ samples_per_cell`)
    /// with one jittered sample per stratum. Cells with no boundary edge within
    /// reach contribute exactly zero.
    pub fn inner_layer_measure(
        &self,
        s: f64,
        samples_per_cell: usize,
        seed: u64,
    ) -> Result<LayerEstimate> {
        if !(s > 0.0) {
            return Err(Error::InvalidArgument(format!("layer width must be positive, got {s}")));
        }
        let k = ((samples_per_cell.max(1) as f64).sqrt().ceil() as usize).max(1);
        let n = k * k;
        let reach = s.floor() as i64 + 1;
        let cells: Vec<(i64, i64)> = self.cells.iter().copied().collect();
        let per_cell: Vec<(f64, f64, usize)> = cells
            .par_iter()
            .map(|&(cx, cy)| {
                let cell = Rect::new(
                    Vec2::new(cx as f64, cy as f64),
                    Vec2::new(cx as f64 + 1.0, cy as f64 + 1.0),
                );
                let segs: Vec<(Vec2, Vec2)> = self
                    .boundary_segments_near((cx, cy), reach)
                    .into_iter()
                    .filter(|&(u, v)| segment_rect_distance(u, v, &cell) <= s)
                    .collect();
                if segs.is_empty() {
                    return (0.0, 0.0, 0);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &[cx as u64, cy as u64]));
                let mut hits = 0usize;
                let h = 1.0 / k as f64;
                for a in 0..k {
                    for b in 0..k {
                        let p = Vec2::new(
                            cx as f64 + (a as f64 + rng.gen::<f64>()) * h,
                            cy as f64 + (b as f64 + rng.gen::<f64>()) * h,
                        );
                        if segs.iter().any(|&(u, v)| point_segment_distance(p, u, v) <= s) {
                            hits += 1;
                        }
                    }
                }
                let frac = hits as f64 / n as f64;
                (frac, frac * (1.0 - frac) / n as f64, n)
            })
            .collect();
        let value = per_cell.iter().map(|c| c.0).sum();
        let var: f64 = per_cell.iter().map(|c| c.1).sum();
        let samples = per_cell.iter().map(|c| c.2).sum();
        Ok(LayerEstimate {
            value,
            std_error: var.sqrt(),
            samples,
        })
    }

    /// One `x y` pair per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for &(x, y) in &self.cells {
            s.push_str(&format!("{x} {y}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<CubeUnion> {
        let mut u = CubeUnion::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty());
            let parse = |t: Option<&str>, col: usize| -> Result<i64> {
                let t = t.ok_or(Error::Syntax {
                    line: ln + 1,
                    column: col,
                    message: "expected two integers".into(),
                })?;
                t.parse().map_err(|_| Error::Syntax {
                    line: ln + 1,
                    column: col,
                    message: format!("not an integer: {t}"),
                })
            };
            let x = parse(it.next(), 1)?;
            let y = parse(it.next(), 2)?;
            if it.next().is_some() {
                return Err(Error::Syntax {
                    line: ln + 1,
                    column: 3,
                    message: "trailing tokens".into(),
                });
            }
            u.insert((x, y));
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perimeters() {
        assert_eq!(CubeUnion::block(0, 0, 1, 1).boundary_measure(), 4.0);
        assert_eq!(CubeUnion::block(0, 0, 2, 1).boundary_measure(), 6.0);
        assert_eq!(CubeUnion::block(0, 0, 2, 2).boundary_measure(), 8.0);
        // ring with a hole: outer 12 + inner 4
        let mut ring = CubeUnion::block(0, 0, 3, 3);
        ring.cells.remove(&(1, 1));
        assert_eq!(ring.boundary_measure(), 16.0);
    }

    #[test]
    fn layer_of_single_cell() {
        let u = CubeUnion::block(0, 0, 1, 1);
        let full = u.inner_layer_measure(0.5, 1024, 1).unwrap();
        assert_eq!(full.value, 1.0);
        // inner square of side 1 - 2s survives
        let q = u.inner_layer_measure(0.25, 1024, 1).unwrap();
        assert!((q.value - 0.75).abs() / 0.75 < 0.02, "{q:?}");
    }

    #[test]
    fn layer_of_block() {
        let u = CubeUnion::block(5, -3, 2, 2);
        let e = u.inner_layer_measure(0.5, 1024, 9).unwrap();
        assert!((e.value - 3.0).abs() / 3.0 < 0.02, "{e:?}");
        assert!(e.std_error < 0.03);
    }

    #[test]
    fn deep_cells_are_skipped() {
        let u = CubeUnion::block(0, 0, 20, 20);
        let e = u.inner_layer_measure(0.5, 64, 2).unwrap();
        // only the outer ring of cells (76 cells) is sampled
        assert_eq!(e.samples, 76 * 64);
        let exact = 400.0 - 19.0 * 19.0;
        assert!((e.value - exact).abs() / exact < 0.02);
    }

    #[test]
    fn seeded_estimates_are_reproducible() {
        let u = CubeUnion::from_cells([(0, 0), (1, 0), (1, 1), (3, 3)]);
        let a = u.inner_layer_measure(0.3, 256, 77).unwrap();
        let b = u.inner_layer_measure(0.3, 256, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let u = CubeUnion::from_cells([(0, 0), (-4, 7), (2, 1)]);
        assert_eq!(CubeUnion::from_text(&u.to_text()).unwrap(), u);
        assert!(matches!(
            CubeUnion::from_text("1 2\n3 x\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
    }
}
