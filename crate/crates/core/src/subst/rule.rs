use super::isometry::Isometry;
use crate::error::{Error, Result};
use crate::geometry::{centroid, signed_area, triangulate, Vec2};
use serde::Serialize;

/// One basic tile `T_i`: a polygon at the level-0 scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasicTile {
    pub name: String,
    /// Counterclockwise vertices.
    pub polygon: Vec<Vec2>,
    pub area: f64,
    #[serde(skip)]
    pub centroid: Vec2,
    #[serde(skip)]
    pub triangles: Vec<[Vec2; 3]>,
    /// Longest distance between two vertices.
    pub diameter: f64,
}

impl BasicTile {
    /// Builds a tile, reorienting the polygon to counterclockwise order.
    pub fn new(name: impl Into<String>, polygon: Vec<Vec2>) -> Result<Self> {
        if polygon.len() < 3 {
            return Err(Error::MalformedPolygon(format!(
                "{} vertices, need at least 3",
                polygon.len()
            )));
        }
        let mut polygon = polygon;
        if signed_area(&polygon) < 0.0 {
            polygon.reverse();
        }
        let area = signed_area(&polygon);
        let diameter = polygon
            .iter()
            .flat_map(|a| polygon.iter().map(move |b| a.dist(*b)))
            .fold(0.0, f64::max);
        Ok(BasicTile {
            name: name.into(),
            centroid: if area > 0.0 { centroid(&polygon) } else { polygon[0] },
            triangles: triangulate(&polygon),
            polygon,
            area,
            diameter,
        })
    }

    /// Largest inscribed-circle radius proxy: `2 · area / perimeter`, exact
    /// for triangles and tangential polygons.
    pub fn inradius(&self) -> f64 {
        let n = self.polygon.len();
        let perim: f64 = (0..n)
            .map(|i| self.polygon[i].dist(self.polygon[(i + 1) % n]))
            .sum();
        2.0 * self.area / perim
    }
}

/// A scaled copy `ξ⁻¹ T_tile` placed inside its parent by `placement`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Child {
    pub tile: usize,
    pub placement: Isometry,
}

/// A substitution rule on basic tiles. Tile indices are 0-based here; rule
/// files and CSV exports use 1-based ids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubstitutionRule {
    name: String,
    q: u32,
    xi: f64,
    tiles: Vec<BasicTile>,
    children: Vec<Vec<Child>>,
}

impl SubstitutionRule {
    /// Structural checks only; geometric checks live in [`super::validate_rule`].
    pub fn new(
        name: impl Into<String>,
        q: u32,
        xi: f64,
        tiles: Vec<BasicTile>,
        children: Vec<Vec<Child>>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidRule(m));
        if tiles.is_empty() {
            return bad("a rule needs at least one tile".into());
        }
        if !(xi > 1.0) || !xi.is_finite() {
            return bad(format!("inflation constant must exceed 1, got {xi}"));
        }
        if q == 0 {
            return bad("base angle denominator q must be positive".into());
        }
        if children.len() != tiles.len() {
            return bad(format!(
                "{} tiles but {} child lists",
                tiles.len(),
                children.len()
            ));
        }
        for (j, list) in children.iter().enumerate() {
            if list.is_empty() {
                return bad(format!("tile {} has no children", j + 1));
            }
            if list.len() > u8::MAX as usize {
                return bad(format!("tile {} has more than 255 children", j + 1));
            }
            for c in list {
                if c.tile >= tiles.len() {
                    return bad(format!("tile {} has a child of unknown type {}", j + 1, c.tile + 1));
                }
                if c.placement.q != q {
                    return bad(format!("child of tile {} uses q = {}", j + 1, c.placement.q));
                }
            }
        }
        Ok(SubstitutionRule {
            name: name.into(),
            q,
            xi,
            tiles,
            children,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn n(&self) -> usize {
        self.tiles.len()
    }

    pub fn tiles(&self) -> &[BasicTile] {
        &self.tiles
    }

    pub fn tile(&self, i: usize) -> &BasicTile {
        &self.tiles[i]
    }

    pub fn children(&self, j: usize) -> &[Child] {
        &self.children[j]
    }

    pub fn areas(&self) -> Vec<f64> {
        self.tiles.iter().map(|t| t.area).collect()
    }

    pub fn max_diameter(&self) -> f64 {
        self.tiles.iter().map(|t| t.diameter).fold(0.0, f64::max)
    }

    pub fn min_inradius(&self) -> f64 {
        self.tiles
            .iter()
            .map(BasicTile::inradius)
            .fold(f64::INFINITY, f64::min)
    }

    /// Polygon of the child `k` of tile `j`, in the frame of `T_j`.
    pub fn child_polygon(&self, j: usize, k: usize) -> Vec<Vec2> {
        let c = &self.children[j][k];
        let s = 1.0 / self.xi;
        let mut poly: Vec<Vec2> = self.tiles[c.tile]
            .polygon
            .iter()
            .map(|p| c.placement.apply(*p * s))
            .collect();
        if c.placement.reflect() {
            poly.reverse();
        }
        poly
    }

    /// Same rule with a different inflation constant (used to probe
    /// consistency checks).
    pub fn with_xi(&self, xi: f64) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.q,
            xi,
            self.tiles.clone(),
            self.children.clone(),
        )
    }

    /// Same rule with the child `k` of tile `j` removed.
    pub fn without_child(&self, j: usize, k: usize) -> Result<Self> {
        let mut children = self.children.clone();
        children[j].remove(k);
        Self::new(
            format!("{}-minus-child", self.name),
            self.q,
            self.xi,
            self.tiles.clone(),
            children,
        )
    }

    /// Relabels tile `i` as `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        assert_eq!(perm.len(), n);
        let mut tiles = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for i in 0..n {
            tiles[perm[i]] = Some(self.tiles[i].clone());
            children[perm[i]] = self.children[i]
                .iter()
                .map(|c| Child {
                    tile: perm[c.tile],
                    placement: c.placement,
                })
                .collect();
        }
        Self::new(
            format!("{}-relabeled", self.name),
            self.q,
            self.xi,
            tiles.into_iter().map(Option::unwrap).collect(),
            children,
        )
    }
}
