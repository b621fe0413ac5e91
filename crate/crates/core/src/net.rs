//! Separated nets: one point per tile, with Delone parameters.

use crate::error::{Error, Result};
use crate::geometry::{bbox, contains_point, GridIndex, Rect, Vec2, Window, COORD_TOL};
use crate::subst::{Address, Patch};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub rule: String,
    /// 1-based root tile type.
    pub root_type: usize,
    pub root_level: u32,
}

/// Packing radius `r`, grid-sampled covering radius `R` and the sampling
/// resolution of the latter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeloneParams {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub grid_spacing: f64,
    pub samples: usize,
}

/// Region used for covering-radius sampling.
#[derive(Debug, Clone)]
enum Support {
    /// The tiles that produced the net.
    Tiles { polygons: Vec<Vec<Vec2>>, index: GridIndex, reach: f64 },
    /// Bounding square only (imported point sets).
    Bounds,
}

/// A finite piece of a separated net with a spatial index.
#[derive(Debug, Clone)]
pub struct NetWindow {
    points: Vec<Vec2>,
    /// 0-based tile type per point, absent for imported nets.
    tile_ids: Vec<Option<usize>>,
    addresses: Vec<Address>,
    window: Window,
    index: GridIndex,
    support: Support,
    pub provenance: Option<Provenance>,
}

fn bounding_window(points: &[Vec2]) -> Window {
    let r = bbox(points);
    let edge = r.width().max(r.height()).max(COORD_TOL);
    Window::new(r.min, edge)
}

fn bucket_for(points: &[Vec2], window: &Window) -> f64 {
    // about two points per bucket on average
    (window.area() / points.len().max(1) as f64 * 2.0).sqrt().max(COORD_TOL)
}

/// One point per tile, at the tile centroid.
pub fn extract_net(patch: &Patch) -> Result<NetWindow> {
    if patch.is_empty() {
        return Err(Error::EmptyPatch);
    }
    let points = patch.centroids();
    let polygons = patch.polygons();
    let reach = patch.max_tile_diameter();
    let window = bounding_window(&points);
    let index = GridIndex::new(&points, bucket_for(&points, &window));
    let support_index = GridIndex::new(&points, reach.max(COORD_TOL));
    Ok(NetWindow {
        tile_ids: patch.tiles().iter().map(|t| Some(t.tile)).collect(),
        addresses: patch.tiles().iter().map(|t| t.address.clone()).collect(),
        window,
        index,
        support: Support::Tiles {
            polygons,
            index: support_index,
            reach,
        },
        points,
        provenance: None,
    })
}

impl NetWindow {
    /// A net from bare points (e.g. imported CSV or a lattice).
    pub fn from_points(points: Vec<Vec2>) -> Result<NetWindow> {
        if points.is_empty() {
            return Err(Error::EmptyPatch);
        }
        let window = bounding_window(&points);
        let index = GridIndex::new(&points, bucket_for(&points, &window));
        Ok(NetWindow {
            tile_ids: vec![None; points.len()],
            addresses: vec![Address::new(); points.len()],
            window,
            index,
            support: Support::Bounds,
            points,
            provenance: None,
        })
    }

    /// Points with tile types and addresses, as read back from an export.
    pub fn from_parts(
        points: Vec<Vec2>,
        tile_ids: Vec<Option<usize>>,
        addresses: Vec<Address>,
    ) -> Result<NetWindow> {
        let mut net = Self::from_points(points)?;
        assert_eq!(tile_ids.len(), net.points.len());
        assert_eq!(addresses.len(), net.points.len());
        net.tile_ids = tile_ids;
        net.addresses = addresses;
        Ok(net)
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = Some(p);
        self
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

    pub fn tile_ids(&self) -> &[Option<usize>] {
        &self.tile_ids
    }

    pub fn addresses(&self) -> &[Address] {
        &self.addresses
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn index(&self) -> &GridIndex {
        &self.index
    }

    /// Points in `[x0, x1) × [y0, y1)`.
    pub fn count_half_open(&self, r: &Rect) -> usize {
        self.index.count_half_open(r)
    }

    /// Same net with every coordinate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> NetWindow {
        assert!(c > 0.0, "scale factor must be positive");
        let points: Vec<Vec2> = self.points.iter().map(|p| *p * c).collect();
        let window = Window::new(self.window.corner * c, self.window.edge * c);
        let index = GridIndex::new(&points, self.index.bucket_size() * c);
        let support = match &self.support {
            Support::Tiles { polygons, reach, .. } => Support::Tiles {
                polygons: polygons
                    .iter()
                    .map(|poly| poly.iter().map(|p| *p * c).collect())
                    .collect(),
                index: GridIndex::new(&points, reach * c),
                reach: reach * c,
            },
            Support::Bounds => Support::Bounds,
        };
        NetWindow {
            points,
            tile_ids: self.tile_ids.clone(),
            addresses: self.addresses.clone(),
            window,
            index,
            support,
            provenance: self.provenance.clone(),
        }
    }

    /// Half the minimum pairwise distance.
    pub fn packing_radius(&self) -> Result<f64> {
        if self.points.len() < 2 {
            return Err(Error::TooFewPoints(self.points.len()));
        }
        let d = (0..self.points.len())
            .into_par_iter()
            .map(|i| {
                self.index
                    .nearest_excluding(self.points[i], Some(i))
                    .map_or(f64::INFINITY, |(_, d)| d)
            })
            .reduce(|| f64::INFINITY, f64::min);
        Ok(d / 2.0)
    }

    fn in_support(&self, p: Vec2, margin: f64) -> bool {
        match &self.support {
            Support::Tiles {
                polygons,
                index,
                reach,
            } => {
                let r = Rect::new(p, p).expand(*reach);
                index
                    .range(&r)
                    .into_iter()
                    .any(|k| contains_point(&polygons[k], p, COORD_TOL))
            }
            Support::Bounds => self.window.depth(p) >= margin,
        }
    }

    /// `(R, r)`: `r` exact, `R` the largest distance from a grid sample to the
    /// nearest point, over samples in the interior region. For tile-derived
    /// nets the region is the union of the tiles; for bare point sets it is
    /// the bounding square eroded by the largest nearest-neighbour distance.
    pub fn delone_params(&self) -> Result<DeloneParams> {
        let r = self.packing_radius()?;
        let spacing = if r > 0.0 { r / 2.0 } else { self.window.edge / 512.0 };
        let margin = (0..self.points.len())
            .into_par_iter()
            .map(|i| {
                self.index
                    .nearest_excluding(self.points[i], Some(i))
                    .map_or(0.0, |(_, d)| d)
            })
            .reduce(|| 0.0, f64::max);
        let steps = (self.window.edge / spacing).ceil() as usize + 1;
        let (big_r, samples) = (0..steps)
            .into_par_iter()
            .map(|a| {
                let mut best = 0.0f64;
                let mut count = 0usize;
                for b in 0..steps {
                    let p = self.window.corner
                        + Vec2::new(a as f64 * spacing, b as f64 * spacing);
                    if !self.window.contains(p, COORD_TOL) || !self.in_support(p, margin) {
                        continue;
                    }
                    count += 1;
                    if let Some((_, d)) = self.index.nearest(p) {
                        best = best.max(d);
                    }
                }
                (best, count)
            })
            .reduce(|| (0.0, 0), |x, y| (x.0.max(y.0), x.1 + y.1));
        Ok(DeloneParams {
            r,
            big_r,
            grid_spacing: spacing,
            samples,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subst::{chair, penrose, supertile, Patch};
    use std::sync::Arc;

    fn lattice(n: i32) -> Vec<Vec2> {
        (0..=n)
            .flat_map(|i| (0..=n).map(move |j| Vec2::new(i as f64, j as f64)))
            .collect()
    }

    #[test]
    fn single_tile_net() {
        let rule = Arc::new(penrose());
        let p = Patch::single(rule.clone(), 0, 0).unwrap();
        let net = extract_net(&p).unwrap();
        assert_eq!(net.len(), 1);
        assert!(net.points()[0].dist(rule.tile(0).centroid) < 1e-15);
        assert!(matches!(net.delone_params(), Err(Error::TooFewPoints(1))));
    }

    #[test]
    fn net_sizes() {
        let p = Arc::new(penrose());
        assert_eq!(extract_net(&supertile(&p, 0, 5).unwrap()).unwrap().len(), 144);
        let c = Arc::new(chair());
        assert_eq!(extract_net(&supertile(&c, 0, 4).unwrap()).unwrap().len(), 256);
    }

    #[test]
    fn lattice_delone() {
        let net = NetWindow::from_points(lattice(100)).unwrap();
        let d = net.delone_params().unwrap();
        assert_eq!(d.r, 0.5);
        assert!((d.big_r - 0.5f64.sqrt()).abs() <= d.grid_spacing);
    }

    #[test]
    fn two_points() {
        let net = NetWindow::from_points(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)]).unwrap();
        assert_eq!(net.packing_radius().unwrap(), 0.5);
    }

    #[test]
    fn empty_patch() {
        assert!(matches!(NetWindow::from_points(vec![]), Err(Error::EmptyPatch)));
    }
}
