use super::safe::SafeRegion;
use crate::error::{Error, Result};
use crate::fit::log_slope;
use crate::geometry::{bbox, Rect, Vec2, Window};
use crate::net::NetWindow;
use crate::seeding::sub_seed;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Default cap on the number of squares evaluated per scale.
pub const DEFAULT_MAX_SQUARES: usize = 100_000;

/// `max(αμ(B)/#, #/(αμ(B)))`.
pub fn e_ratio(count: u64, area: f64, alpha: f64) -> f64 {
    let expected = alpha * area;
    let c = count as f64;
    (expected / c).max(c / expected)
}

/// `e_α(B)` with an exact half-open count from the net's grid index.
pub fn e_alpha(b: &Window, net: &NetWindow, alpha: f64, safe: Option<&SafeRegion>) -> Result<f64> {
    if let Some(s) = safe {
        if !s.contains_window(b) {
            return Err(Error::OutsideSafeRegion);
        }
    }
    let count = net.count_half_open(&b.rect()) as u64;
    if count == 0 {
        return Err(Error::EmptySquare {
            x: b.corner.x.floor() as i64,
            y: b.corner.y.floor() as i64,
            edge: b.edge.round() as i64,
        });
    }
    Ok(e_ratio(count, b.area(), alpha))
}

/// Point counts of unit cells `[o + i, o + i + 1) × [o + j, o + j + 1)` with
/// 2-D prefix sums, giving O(1) half-open counts of squares whose corners lie
/// on the shifted integer lattice `o + ℤ²`.
#[derive(Debug, Clone)]
pub struct CellCounts {
    offset: Vec2,
    x0: i64,
    y0: i64,
    w: usize,
    h: usize,
    prefix: Vec<u64>,
}

impl CellCounts {
    pub fn new(points: &[Vec2], offset: Vec2) -> Self {
        if points.is_empty() {
            return CellCounts {
                offset,
                x0: 0,
                y0: 0,
                w: 0,
                h: 0,
                prefix: vec![0],
            };
        }
        let b = bbox(points);
        let x0 = (b.min.x - offset.x).floor() as i64;
        let y0 = (b.min.y - offset.y).floor() as i64;
        let w = ((b.max.x - offset.x).floor() as i64 - x0 + 1) as usize;
        let h = ((b.max.y - offset.y).floor() as i64 - y0 + 1) as usize;
        let mut prefix = vec![0u64; (w + 1) * (h + 1)];
        for p in points {
            let i = ((p.x - offset.x).floor() as i64 - x0) as usize;
            let j = ((p.y - offset.y).floor() as i64 - y0) as usize;
            prefix[(j + 1) * (w + 1) + i + 1] += 1;
        }
        for j in 1..=h {
            for i in 1..=w {
                let k = j * (w + 1) + i;
                prefix[k] += prefix[k - 1] + prefix[k - (w + 1)] - prefix[k - (w + 1) - 1];
            }
        }
        CellCounts {
            offset,
            x0,
            y0,
            w,
            h,
            prefix,
        }
    }

    pub fn offset(&self) -> Vec2 {
        self.offset
    }

    fn corner(&self, i: i64, j: i64) -> u64 {
        let ci = (i - self.x0).clamp(0, self.w as i64) as usize;
        let cj = (j - self.y0).clamp(0, self.h as i64) as usize;
        self.prefix[cj * (self.w + 1) + ci]
    }

    /// Points in `[o + x, o + x + wx) × [o + y, o + y + wy)`.
    pub fn count_rect(&self, x: i64, y: i64, wx: i64, wy: i64) -> u64 {
        let (x1, y1) = (x + wx, y + wy);
        self.corner(x1, y1) + self.corner(x, y) - self.corner(x, y1) - self.corner(x1, y)
    }

    pub fn count_square(&self, x: i64, y: i64, edge: i64) -> u64 {
        self.count_rect(x, y, edge, edge)
    }

    /// Count of one cell.
    pub fn cell(&self, x: i64, y: i64) -> u64 {
        self.count_rect(x, y, 1, 1)
    }
}

/// How squares of one edge length are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareSampler {
    pub max_squares: usize,
    pub seed: u64,
    /// Lattice shift `o`: square corners lie on `o + ℤ²`.
    pub offset: Vec2,
}

impl SquareSampler {
    pub fn new(seed: u64) -> Self {
        SquareSampler {
            max_squares: DEFAULT_MAX_SQUARES,
            seed,
            offset: Vec2::ZERO,
        }
    }
}

/// Sampled `E_α(2^j)`, a lower bound on the supremum over all squares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleStat {
    pub j: u32,
    pub edge: i64,
    pub admissible: usize,
    pub sampled: usize,
    pub empty: usize,
    pub max_e: f64,
    pub argmax: (i64, i64),
}

/// Lower-left corners (on `o + ℤ²`) of every square of edge `edge` inside `safe`.
pub fn admissible_corners(safe: &SafeRegion, edge: i64, offset: Vec2) -> Vec<(i64, i64)> {
    let b = bbox(safe.polygon());
    let xs = (b.min.x - offset.x).floor() as i64..=(b.max.x - offset.x).ceil() as i64 - edge;
    let ys: Vec<i64> =
        ((b.min.y - offset.y).floor() as i64..=(b.max.y - offset.y).ceil() as i64 - edge).collect();
    let xs: Vec<i64> = xs.collect();
    ys.par_iter()
        .flat_map_iter(|&y| {
            xs.iter().copied().filter_map(move |x| {
                let min = Vec2::new(x as f64, y as f64) + offset;
                let r = Rect::new(min, min + Vec2::new(edge as f64, edge as f64));
                safe.contains_rect(&r).then_some((x, y))
            })
        })
        .collect()
}

/// Sampled `E_α(2^j)` over integer-cornered squares in the safe region.
pub fn e_alpha_sup(
    j: u32,
    counts: &CellCounts,
    alpha: f64,
    safe: &SafeRegion,
    sampler: &SquareSampler,
) -> Result<ScaleStat> {
    let edge = 1i64 << j;
    let corners = admissible_corners(safe, edge, counts.offset());
    if corners.is_empty() {
        return Err(Error::WindowTooSmall(edge as f64));
    }
    let chosen: Vec<(i64, i64)> = if corners.len() <= sampler.max_squares {
        corners.clone()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(sampler.seed, &[j as u64]));
        let mut idx = sample(&mut rng, corners.len(), sampler.max_squares).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|k| corners[k]).collect()
    };
    let area = (edge * edge) as f64;
    let (max_e, argmax, empty) = chosen
        .par_iter()
        .map(|&(x, y)| {
            let c = counts.count_square(x, y, edge);
            if c == 0 {
                (1.0, (x, y), 1usize)
            } else {
                (e_ratio(c, area, alpha), (x, y), 0)
            }
        })
        .reduce(
            || (1.0, (i64::MIN, i64::MIN), 0),
            |a, b| {
                let best = if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { (b.0, b.1) } else { (a.0, a.1) };
                (best.0, best.1, a.2 + b.2)
            },
        );
    Ok(ScaleStat {
        j,
        edge,
        admissible: corners.len(),
        sampled: chosen.len(),
        empty,
        max_e,
        argmax,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentStat {
    pub offset: Vec2,
    pub max_e: Vec<f64>,
}

/// Burago–Kleiner statistics over a range of dyadic scales.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BkReport {
    pub alpha: f64,
    /// Factor applied to the master patch before counting.
    pub scale: f64,
    pub per_scale: Vec<ScaleStat>,
    /// First scale with no empty sampled square.
    pub j0: Option<u32>,
    /// `(J, Π_{j0 ≤ j ≤ J} E_α(2^j))`.
    pub product_partials: Vec<(u32, f64)>,
    /// `exp` of the fitted slope of `ln(E_α(2^j) - 1)` against `j`.
    pub omega_fit: Option<f64>,
    pub alignment: Vec<AlignmentStat>,
}

/// Evaluates `E_α(2^j)` for `j` in `js`, the partial products and the decay fit.
pub fn bk_scan(
    net: &NetWindow,
    alpha: f64,
    safe: &SafeRegion,
    js: std::ops::RangeInclusive<u32>,
    sampler: &SquareSampler,
) -> Result<BkReport> {
    let counts = CellCounts::new(net.points(), sampler.offset);
    let per_scale: Vec<ScaleStat> = js
        .clone()
        .map(|j| e_alpha_sup(j, &counts, alpha, safe, sampler))
        .collect::<Result<_>>()?;
    let j0 = per_scale.iter().find(|s| s.empty == 0).map(|s| s.j);
    let mut product_partials = Vec::new();
    if let Some(j0) = j0 {
        let mut p = 1.0;
        for s in per_scale.iter().filter(|s| s.j >= j0) {
            p *= s.max_e;
            product_partials.push((s.j, p));
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = per_scale
        .iter()
        .filter(|s| j0.is_some_and(|j0| s.j >= j0))
        .map(|s| (s.j as f64, s.max_e - 1.0))
        .unzip();
    let omega_fit = log_slope(&xs, &ys).map(|f| f.slope.exp());
    Ok(BkReport {
        alpha,
        scale: 1.0,
        per_scale,
        j0,
        product_partials,
        omega_fit,
        alignment: Vec::new(),
    })
}

/// `E_α(2^j)` for several lattice shifts, to expose alignment effects.
pub fn alignment_sweep(
    net: &NetWindow,
    alpha: f64,
    safe: &SafeRegion,
    js: std::ops::RangeInclusive<u32>,
    sampler: &SquareSampler,
    offsets: &[Vec2],
) -> Result<Vec<AlignmentStat>> {
    offsets
        .iter()
        .map(|&o| {
            let counts = CellCounts::new(net.points(), o);
            let s = SquareSampler { offset: o, ..*sampler };
            let max_e = js
                .clone()
                .map(|j| e_alpha_sup(j, &counts, alpha, safe, &s).map(|r| r.max_e))
                .collect::<Result<Vec<_>>>()?;
            Ok(AlignmentStat { offset: o, max_e })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn unit_lattice(n: i64) -> Vec<Vec2> {
        (0..n)
            .flat_map(|i| (0..n).map(move |j| Vec2::new(i as f64 + 0.5, j as f64 + 0.5)))
            .collect()
    }

    fn square(n: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(n, 0.0),
            Vec2::new(n, n),
            Vec2::new(0.0, n),
        ]
    }

    #[test]
    fn prefix_counts_match_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Vec2> = (0..2000)
            .map(|_| Vec2::new(rng.gen_range(-10.0..40.0), rng.gen_range(0.0..30.0)))
            .collect();
        let net = NetWindow::from_points(pts.clone()).unwrap();
        for off in [Vec2::ZERO, Vec2::new(0.25, 0.75)] {
            let c = CellCounts::new(&pts, off);
            for _ in 0..200 {
                let x = rng.gen_range(-15..45);
                let y = rng.gen_range(-5..35);
                let e = rng.gen_range(1..20);
                let min = Vec2::new(x as f64, y as f64) + off;
                let r = Rect::new(min, min + Vec2::new(e as f64, e as f64));
                assert_eq!(c.count_square(x, y, e), net.count_half_open(&r) as u64);
            }
        }
    }

    #[test]
    fn lattice_gives_one() {
        let net = NetWindow::from_points(unit_lattice(64)).unwrap();
        let safe = SafeRegion::new(square(64.0), 0.0);
        let b = Window::new(Vec2::new(3.0, 5.0), 16.0);
        assert_eq!(e_alpha(&b, &net, 1.0, Some(&safe)).unwrap(), 1.0);
        let r = bk_scan(&net, 1.0, &safe, 0..=5, &SquareSampler::new(1)).unwrap();
        assert!(r.per_scale.iter().all(|s| s.max_e == 1.0));
        assert_eq!(r.product_partials.last().unwrap().1, 1.0);
    }

    #[test]
    fn ratio_arithmetic() {
        assert_eq!(e_ratio(8, 4.0, 1.0), 2.0);
        assert_eq!(e_ratio(2, 4.0, 1.0), 2.0);
    }

    #[test]
    fn empty_and_outside() {
        let net = NetWindow::from_points(vec![Vec2::new(50.0, 50.0), Vec2::new(51.0, 50.0)]).unwrap();
        let b = Window::new(Vec2::new(0.0, 0.0), 4.0);
        assert!(matches!(e_alpha(&b, &net, 1.0, None), Err(Error::EmptySquare { .. })));
        let safe = SafeRegion::new(square(10.0), 1.0);
        assert!(matches!(
            e_alpha(&b, &net, 1.0, Some(&safe)),
            Err(Error::OutsideSafeRegion)
        ));
    }

    #[test]
    fn sampling_is_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec2> = (0..5000)
            .map(|_| Vec2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
            .collect();
        let counts = CellCounts::new(&pts, Vec2::ZERO);
        let safe = SafeRegion::new(square(100.0), 0.0);
        let s = SquareSampler { max_squares: 500, ..SquareSampler::new(3) };
        let a = e_alpha_sup(2, &counts, 0.5, &safe, &s).unwrap();
        let b = e_alpha_sup(2, &counts, 0.5, &safe, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sampled, 500);
        assert_eq!(a.admissible, 97 * 97);
    }
}
