use super::safe::SafeRegion;
use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::geometry::{CubeUnion, Vec2};
use crate::net::NetWindow;
use crate::seeding::sub_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashMap, HashSet};

/// Seeded Eden growth: starting from one cell, repeatedly add a uniformly
/// chosen empty neighbour of the current union.
pub fn random_polyomino(cells: usize, seed: u64) -> CubeUnion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members: HashSet<(i64, i64)> = HashSet::with_capacity(cells * 2);
    let mut frontier: Vec<(i64, i64)> = Vec::new();
    let mut in_frontier: HashSet<(i64, i64)> = HashSet::new();
    let mut add = |c: (i64, i64),
                   members: &mut HashSet<(i64, i64)>,
                   frontier: &mut Vec<(i64, i64)>| {
        members.insert(c);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let n = (c.0 + dx, c.1 + dy);
            if !members.contains(&n) && in_frontier.insert(n) {
                frontier.push(n);
            }
        }
    };
    add((0, 0), &mut members, &mut frontier);
    while members.len() < cells.max(1) {
        let k = rng.gen_range(0..frontier.len());
        let c = frontier.swap_remove(k);
        if members.contains(&c) {
            continue;
        }
        add(c, &mut members, &mut frontier);
    }
    CubeUnion::from_cells(members)
}

/// Point counts per unit cell `[x, x+1) × [y, y+1)`.
#[derive(Debug, Clone, Default)]
pub struct CellBins {
    bins: HashMap<(i64, i64), u32>,
}

impl CellBins {
    pub fn new(points: &[Vec2]) -> Self {
        let mut bins = HashMap::with_capacity(points.len());
        for p in points {
            *bins.entry((p.x.floor() as i64, p.y.floor() as i64)).or_insert(0) += 1;
        }
        CellBins { bins }
    }

    pub fn count(&self, u: &CubeUnion) -> u64 {
        u.cells().map(|c| self.bins.get(&c).copied().unwrap_or(0) as u64).sum()
    }
}

/// `|#(Y ∩ U) - α μ(U)| / μ(∂U)`.
pub fn laczkovich_ratio(
    u: &CubeUnion,
    bins: &CellBins,
    alpha: f64,
    safe: Option<&SafeRegion>,
) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::InvalidArgument("empty cube union".into()));
    }
    if let Some(s) = safe {
        if !s.contains_cells(u) {
            return Err(Error::OutsideSafeRegion);
        }
    }
    let count = bins.count(u) as f64;
    Ok((count - alpha * u.area()).abs() / u.boundary_measure())
}

/// Convenience wrapper binning the net on the fly.
pub fn laczkovich_ratio_for_net(
    u: &CubeUnion,
    net: &NetWindow,
    alpha: f64,
    safe: Option<&SafeRegion>,
) -> Result<f64> {
    laczkovich_ratio(u, &CellBins::new(net.points()), alpha, safe)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRatio {
    pub id: usize,
    pub cells: usize,
    pub perimeter: f64,
    pub count: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaczkovichReport {
    pub alpha: f64,
    pub scale: f64,
    pub windows: Vec<WindowRatio>,
    pub max_ratio: f64,
    /// Log-log slope of the per-bin maximum ratio against cell count.
    pub binned_max_slope: Option<f64>,
    /// Log-log slope over all windows with a positive ratio.
    pub raw_slope: Option<f64>,
}

/// Generates `count` polyomino windows with log-uniform sizes in
/// `[min_cells, max_cells]`, each placed inside `safe` around `center`.
pub fn polyomino_windows(
    count: usize,
    min_cells: usize,
    max_cells: usize,
    safe: &SafeRegion,
    center: Vec2,
    seed: u64,
) -> Result<Vec<CubeUnion>> {
    (0..count)
        .into_par_iter()
        .map(|id| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &[id as u64]));
            let (lo, hi) = ((min_cells as f64).ln(), (max_cells as f64).ln());
            let cells = rng.gen_range(lo..=hi).exp().round() as usize;
            let shape = random_polyomino(cells, sub_seed(seed, &[id as u64, 1]));
            let b = shape.bounds().expect("nonempty polyomino");
            let mid = (b.min + b.max) * 0.5;
            let base = (center.x - mid.x).round() as i64;
            let base_y = (center.y - mid.y).round() as i64;
            // random jitter first, falling back to the centred placement
            let jitter = (safe.margin() * 4.0).max(4.0) as i64;
            for _ in 0..16 {
                let dx = rng.gen_range(-jitter..=jitter);
                let dy = rng.gen_range(-jitter..=jitter);
                let u = shape.translate(base + dx, base_y + dy);
                if safe.contains_cells(&u) {
                    return Ok(u);
                }
            }
            let u = shape.translate(base, base_y);
            if safe.contains_cells(&u) {
                Ok(u)
            } else {
                Err(Error::OutsideSafeRegion)
            }
        })
        .collect()
}

/// Ratios for a family of windows plus the growth fits.
pub fn laczkovich_scan(
    windows: &[CubeUnion],
    net: &NetWindow,
    alpha: f64,
    safe: Option<&SafeRegion>,
) -> Result<LaczkovichReport> {
    let bins = CellBins::new(net.points());
    let rows: Vec<WindowRatio> = windows
        .par_iter()
        .enumerate()
        .map(|(id, u)| {
            let ratio = laczkovich_ratio(u, &bins, alpha, safe)?;
            Ok(WindowRatio {
                id,
                cells: u.len(),
                perimeter: u.boundary_measure(),
                count: bins.count(u),
                ratio,
            })
        })
        .collect::<Result<_>>()?;
    let max_ratio = rows.iter().map(|w| w.ratio).fold(0.0, f64::max);
    let xs: Vec<f64> = rows.iter().map(|w| w.cells as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|w| w.ratio).collect();
    let raw_slope = log_log_slope(&xs, &ys).map(|f| f.slope);
    let (bx, by) = binned_maxima(&xs, &ys, 8);
    let binned_max_slope = log_log_slope(&bx, &by).map(|f| f.slope);
    Ok(LaczkovichReport {
        alpha,
        scale: 1.0,
        windows: rows,
        max_ratio,
        binned_max_slope,
        raw_slope,
    })
}

/// Splits `x` into `bins` equal log-width bins and keeps `(geometric centre,
/// max y)` for each nonempty bin.
pub fn binned_maxima(xs: &[f64], ys: &[f64], bins: usize) -> (Vec<f64>, Vec<f64>) {
    let pos: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, _)| x > 0.0)
        .map(|(&x, &y)| (x.ln(), y))
        .collect();
    if pos.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let lo = pos.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pos.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / bins as f64).max(1e-12);
    let mut best = vec![None::<f64>; bins];
    for (lx, y) in pos {
        let b = (((lx - lo) / width) as usize).min(bins - 1);
        best[b] = Some(best[b].map_or(y, |v: f64| v.max(y)));
    }
    best.iter()
        .enumerate()
        .filter_map(|(b, v)| v.map(|y| ((lo + (b as f64 + 0.5) * width).exp(), y)))
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyomino_is_connected_with_requested_size() {
        let u = random_polyomino(500, 3);
        assert_eq!(u.len(), 500);
        let cells: Vec<_> = u.cells().collect();
        let mut seen = HashSet::from([cells[0]]);
        let mut stack = vec![cells[0]];
        while let Some((x, y)) = stack.pop() {
            for n in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                if u.contains(n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        assert_eq!(seen.len(), 500);
        assert_eq!(random_polyomino(500, 3), u);
    }

    #[test]
    fn lattice_control_is_zero() {
        let pts: Vec<Vec2> = (-50..50)
            .flat_map(|i| (-50..50).map(move |j| Vec2::new(i as f64 + 0.5, j as f64 + 0.5)))
            .collect();
        let bins = CellBins::new(&pts);
        for seed in 0..20 {
            let u = random_polyomino(10 + 40 * seed as usize, seed);
            assert_eq!(laczkovich_ratio(&u, &bins, 1.0, None).unwrap(), 0.0);
        }
    }

    #[test]
    fn empty_cell_gives_alpha_over_four() {
        let bins = CellBins::new(&[Vec2::new(10.5, 10.5)]);
        let u = CubeUnion::block(0, 0, 1, 1);
        assert_eq!(laczkovich_ratio(&u, &bins, 0.3, None).unwrap(), 0.3 / 4.0);
    }

    #[test]
    fn binning() {
        let (x, y) = binned_maxima(&[1.0, 2.0, 100.0, 110.0], &[0.1, 0.3, 0.2, 0.05], 2);
        assert_eq!(y, vec![0.3, 0.2]);
        assert_eq!(x.len(), 2);
    }
}
