use super::isometry::Isometry;
use super::rule::SubstitutionRule;
use crate::error::{Error, Result};
use crate::geometry::{
    contains_point, polygon_intersects_rect, GridIndex, Rect, Vec2, Window, COORD_TOL,
};
use rayon::prelude::*;
use smallvec::SmallVec;
use std::sync::Arc;

/// Child indices from the root of a master supertile down to a tile.
pub type Address = SmallVec<[u8; 24]>;

/// Default cap on the number of tiles a single generation call may produce.
pub const DEFAULT_CAPACITY: u128 = 100_000_000;

/// A tile of `τ_level`: the basic tile `tile` scaled by `ξ^level` and moved by
/// `placement`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedTile {
    pub tile: usize,
    pub placement: Isometry,
    pub level: i32,
    pub address: Address,
}

impl PlacedTile {
    /// Counterclockwise polygon of the tile, multiplied by `scale`.
    pub fn polygon(&self, rule: &SubstitutionRule, scale: f64) -> Vec<Vec2> {
        let f = rule.xi().powi(self.level);
        let mut poly: Vec<Vec2> = rule
            .tile(self.tile)
            .polygon
            .iter()
            .map(|p| self.placement.apply(*p * f) * scale)
            .collect();
        if self.placement.reflect() {
            poly.reverse();
        }
        poly
    }

    /// Convex pieces of the tile, multiplied by `scale`.
    pub fn triangles(&self, rule: &SubstitutionRule, scale: f64) -> Vec<[Vec2; 3]> {
        let f = rule.xi().powi(self.level);
        rule.tile(self.tile)
            .triangles
            .iter()
            .map(|t| t.map(|p| self.placement.apply(p * f) * scale))
            .collect()
    }

    pub fn centroid(&self, rule: &SubstitutionRule, scale: f64) -> Vec2 {
        let f = rule.xi().powi(self.level);
        self.placement.apply(rule.tile(self.tile).centroid * f) * scale
    }

    pub fn area(&self, rule: &SubstitutionRule, scale: f64) -> f64 {
        rule.tile(self.tile).area * (rule.xi().powi(self.level) * scale).powi(2)
    }

    /// The children of this tile, one level down, in child-index order.
    pub fn children<'a>(&'a self, rule: &'a SubstitutionRule) -> impl Iterator<Item = PlacedTile> + 'a {
        let f = rule.xi().powi(self.level);
        rule.children(self.tile).iter().enumerate().map(move |(k, c)| {
            let local = Isometry {
                translation: c.placement.translation * f,
                ..c.placement
            };
            let mut address = self.address.clone();
            address.push(k as u8);
            PlacedTile {
                tile: c.tile,
                placement: self.placement.compose(&local),
                level: self.level - 1,
                address,
            }
        })
    }
}

/// A finite set of placed tiles with pairwise disjoint interiors.
#[derive(Debug, Clone)]
pub struct Patch {
    rule: Arc<SubstitutionRule>,
    tiles: Vec<PlacedTile>,
    scale: f64,
}

impl Patch {
    pub fn new(rule: Arc<SubstitutionRule>, tiles: Vec<PlacedTile>) -> Self {
        Patch {
            rule,
            tiles,
            scale: 1.0,
        }
    }

    /// A patch holding the single tile `ξ^level T_i` in standard position.
    pub fn single(rule: Arc<SubstitutionRule>, i: usize, level: i32) -> Result<Self> {
        if i >= rule.n() {
            return Err(Error::InvalidArgument(format!(
                "tile index {} out of range 1..={}",
                i + 1,
                rule.n()
            )));
        }
        let q = rule.q();
        Ok(Patch::new(
            rule,
            vec![PlacedTile {
                tile: i,
                placement: Isometry::identity(q),
                level,
                address: Address::new(),
            }],
        ))
    }

    pub fn rule(&self) -> &Arc<SubstitutionRule> {
        &self.rule
    }

    pub fn tiles(&self) -> &[PlacedTile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Uniform factor applied to every coordinate.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same tiles with all coordinates multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Patch {
        assert!(factor > 0.0, "scale factor must be positive");
        Patch {
            rule: self.rule.clone(),
            tiles: self.tiles.clone(),
            scale: self.scale * factor,
        }
    }

    pub fn polygon(&self, k: usize) -> Vec<Vec2> {
        self.tiles[k].polygon(&self.rule, self.scale)
    }

    pub fn polygons(&self) -> Vec<Vec<Vec2>> {
        self.tiles
            .par_iter()
            .map(|t| t.polygon(&self.rule, self.scale))
            .collect()
    }

    pub fn centroids(&self) -> Vec<Vec2> {
        self.tiles
            .par_iter()
            .map(|t| t.centroid(&self.rule, self.scale))
            .collect()
    }

    pub fn total_area(&self) -> f64 {
        self.tiles
            .iter()
            .map(|t| t.area(&self.rule, self.scale))
            .sum()
    }

    /// Number of tiles of each basic type.
    pub fn count_types(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.rule.n()];
        for t in &self.tiles {
            counts[t.tile] += 1;
        }
        counts
    }

    /// Largest diameter of a tile in this patch.
    pub fn max_tile_diameter(&self) -> f64 {
        let xi = self.rule.xi();
        self.tiles
            .iter()
            .map(|t| self.rule.tile(t.tile).diameter * xi.powi(t.level) * self.scale)
            .fold(0.0, f64::max)
    }

    pub fn subset(&self, keep: &[usize]) -> Patch {
        Patch {
            rule: self.rule.clone(),
            tiles: keep.iter().map(|&k| self.tiles[k].clone()).collect(),
            scale: self.scale,
        }
    }

    /// Spatial index over tile centroids, for window queries.
    pub fn index(&self) -> TileIndex {
        let centroids = self.centroids();
        let reach = self.max_tile_diameter().max(COORD_TOL);
        TileIndex {
            index: GridIndex::new(&centroids, reach),
            reach,
        }
    }

    /// Tiles with every vertex inside `w` (slack `COORD_TOL`).
    pub fn tiles_inside(&self, w: &Window) -> Patch {
        self.tiles_inside_indexed(&self.index(), w)
    }

    /// Tiles whose support meets `w`.
    pub fn tiles_meeting(&self, w: &Window) -> Patch {
        self.tiles_meeting_indexed(&self.index(), w)
    }

    pub fn tiles_inside_indexed(&self, idx: &TileIndex, w: &Window) -> Patch {
        let keep: Vec<usize> = idx
            .candidates(&w.rect())
            .into_iter()
            .filter(|&k| self.polygon(k).iter().all(|p| w.contains(*p, COORD_TOL)))
            .collect();
        self.subset(&keep)
    }

    pub fn tiles_meeting_indexed(&self, idx: &TileIndex, w: &Window) -> Patch {
        let r = w.rect();
        let keep: Vec<usize> = idx
            .candidates(&r)
            .into_iter()
            .filter(|&k| polygon_intersects_rect(&self.polygon(k), &r, COORD_TOL))
            .collect();
        self.subset(&keep)
    }

    /// Index of the tile containing `p`, if any.
    pub fn locate(&self, idx: &TileIndex, p: Vec2) -> Option<usize> {
        let r = Rect::new(p, p);
        idx.candidates(&r)
            .into_iter()
            .find(|&k| contains_point(&self.polygon(k), p, COORD_TOL))
    }
}

/// Centroid grid plus the largest tile diameter, so that every tile meeting
/// a rectangle has its centroid within `reach` of it.
#[derive(Debug, Clone)]
pub struct TileIndex {
    index: GridIndex,
    reach: f64,
}

impl TileIndex {
    pub fn candidates(&self, r: &Rect) -> Vec<usize> {
        self.index.range(&r.expand(self.reach))
    }
}

fn checked_count(rule: &SubstitutionRule, counts: &[u128], steps: u32, limit: u128) -> Result<()> {
    let mut v = counts.to_vec();
    for _ in 0..steps {
        let mut next = vec![0u128; rule.n()];
        for (j, &cj) in v.iter().enumerate() {
            if cj == 0 {
                continue;
            }
            for c in rule.children(j) {
                next[c.tile] = next[c.tile].saturating_add(cj);
            }
        }
        v = next;
        let total = v.iter().fold(0u128, |a, &b| a.saturating_add(b));
        if total > limit {
            return Err(Error::CapacityExceeded {
                projected: total,
                limit,
            });
        }
    }
    Ok(())
}

fn expand(rule: &SubstitutionRule, tiles: &[PlacedTile]) -> Vec<PlacedTile> {
    tiles
        .par_iter()
        .flat_map_iter(|t| t.children(rule))
        .collect()
}

/// `(ξH)^steps` applied tile by tile in a fixed frame: every tile at level
/// `ℓ` is replaced by its descendants at level `ℓ - steps`, in address order.
pub fn inflate(patch: &Patch, steps: u32) -> Result<Patch> {
    inflate_with_limit(patch, steps, DEFAULT_CAPACITY)
}

pub fn inflate_with_limit(patch: &Patch, steps: u32, limit: u128) -> Result<Patch> {
    if patch.is_empty() {
        return Err(Error::EmptyPatch);
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("inflation needs at least one step".into()));
    }
    let rule = patch.rule.clone();
    let counts: Vec<u128> = patch.count_types().iter().map(|&c| c as u128).collect();
    checked_count(&rule, &counts, steps, limit)?;
    let mut tiles = patch.tiles.clone();
    for _ in 0..steps {
        tiles = expand(&rule, &tiles);
    }
    Ok(Patch {
        rule,
        tiles,
        scale: patch.scale,
    })
}

/// The level-0 patch `(ξH)^m(T_i)` filling `ξ^m T_i`.
pub fn supertile(rule: &Arc<SubstitutionRule>, i: usize, m: u32) -> Result<Patch> {
    supertile_with_limit(rule, i, m, DEFAULT_CAPACITY)
}

pub fn supertile_with_limit(
    rule: &Arc<SubstitutionRule>,
    i: usize,
    m: u32,
    limit: u128,
) -> Result<Patch> {
    let root = Patch::single(rule.clone(), i, m as i32)?;
    if m == 0 {
        return Ok(root);
    }
    inflate_with_limit(&root, m, limit)
}

/// Every level of a master supertile, root first.
///
/// `levels[d]` holds the tiles at depth `d` (level `root_level - d`) in
/// address order; the children of `levels[d][k]` are
/// `levels[d + 1][child_start[d][k]..child_start[d][k + 1]]`.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    rule: Arc<SubstitutionRule>,
    root_type: usize,
    root_level: u32,
    levels: Vec<Vec<PlacedTile>>,
    child_start: Vec<Vec<u32>>,
    scale: f64,
}

impl Hierarchy {
    pub fn build(rule: &Arc<SubstitutionRule>, i: usize, m: u32) -> Result<Hierarchy> {
        Self::build_with_limit(rule, i, m, DEFAULT_CAPACITY)
    }

    pub fn build_with_limit(
        rule: &Arc<SubstitutionRule>,
        i: usize,
        m: u32,
        limit: u128,
    ) -> Result<Hierarchy> {
        let root = Patch::single(rule.clone(), i, m as i32)?;
        let mut e = vec![0u128; rule.n()];
        e[i] = 1;
        checked_count(rule, &e, m, limit)?;
        let mut levels = vec![root.tiles];
        let mut child_start = Vec::with_capacity(m as usize);
        for _ in 0..m {
            let last = levels.last().expect("root level");
            let mut starts = Vec::with_capacity(last.len() + 1);
            let mut acc = 0u32;
            starts.push(0);
            for t in last {
                acc += rule.children(t.tile).len() as u32;
                starts.push(acc);
            }
            let next = expand(rule, last);
            child_start.push(starts);
            levels.push(next);
        }
        Ok(Hierarchy {
            rule: rule.clone(),
            root_type: i,
            root_level: m,
            levels,
            child_start,
            scale: 1.0,
        })
    }

    pub fn rule(&self) -> &Arc<SubstitutionRule> {
        &self.rule
    }

    pub fn root_type(&self) -> usize {
        self.root_type
    }

    pub fn root_level(&self) -> u32 {
        self.root_level
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn scaled(&self, factor: f64) -> Hierarchy {
        let mut h = self.clone();
        h.scale *= factor;
        h
    }

    /// Tiles of `τ_level` inside the root, in address order.
    pub fn level(&self, level: u32) -> &[PlacedTile] {
        &self.levels[(self.root_level - level) as usize]
    }

    /// Indices into `level(level - 1)` of the children of `level(level)[k]`.
    pub fn children_range(&self, level: u32, k: usize) -> std::ops::Range<usize> {
        assert!(level >= 1 && level <= self.root_level);
        let s = &self.child_start[(self.root_level - level) as usize];
        s[k] as usize..s[k + 1] as usize
    }

    /// Range of level-0 tiles descending from `level(level)[k]`.
    pub fn leaf_range(&self, level: u32, k: usize) -> std::ops::Range<usize> {
        let (mut a, mut b) = (k, k + 1);
        for l in (1..=level).rev() {
            a = self.children_range(l, a).start;
            b = self.children_range(l, b - 1).end;
        }
        a..b
    }

    /// The level-`level` tiles as a patch.
    pub fn patch(&self, level: u32) -> Patch {
        Patch {
            rule: self.rule.clone(),
            tiles: self.level(level).to_vec(),
            scale: self.scale,
        }
    }

    pub fn polygon(&self, level: u32, k: usize) -> Vec<Vec2> {
        self.level(level)[k].polygon(&self.rule, self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::super::builtin::{chair, penrose};
    use super::*;

    #[test]
    fn penrose_counts_follow_matrix() {
        let rule = Arc::new(penrose());
        let p = supertile(&rule, 0, 5).unwrap();
        assert_eq!(p.count_types(), vec![89, 55]);
        let p = supertile(&rule, 1, 2).unwrap();
        assert_eq!(p.count_types(), vec![3, 2]);
    }

    #[test]
    fn addresses_are_distinct_with_root_depth() {
        let rule = Arc::new(penrose());
        let p = supertile(&rule, 0, 6).unwrap();
        let mut seen = std::collections::HashSet::new();
        for t in p.tiles() {
            assert_eq!(t.address.len(), 6);
            assert_eq!(t.level, 0);
            assert!(seen.insert(t.address.clone()));
        }
        // address order is lexicographic order
        assert!(p.tiles().windows(2).all(|w| w[0].address < w[1].address));
    }

    #[test]
    fn capacity_is_enforced() {
        let rule = Arc::new(chair());
        let err = supertile_with_limit(&rule, 0, 5, 1000).unwrap_err();
        assert!(matches!(err, Error::CapacityExceeded { projected: 1024, limit: 1000 }));
    }

    #[test]
    fn hierarchy_ranges_are_consistent() {
        let rule = Arc::new(penrose());
        let h = Hierarchy::build(&rule, 0, 5).unwrap();
        assert_eq!(h.level(5).len(), 1);
        assert_eq!(h.level(0).len(), 144);
        assert_eq!(h.leaf_range(5, 0), 0..144);
        for l in 1..=5 {
            for (k, t) in h.level(l).iter().enumerate() {
                for c in h.children_range(l, k) {
                    let child = &h.level(l - 1)[c];
                    assert_eq!(&child.address[..t.address.len()], &t.address[..]);
                }
                let leaves = h.leaf_range(l, k);
                let expected = supertile(&rule, t.tile, l).unwrap().len();
                assert_eq!(leaves.len(), expected);
            }
        }
        let flat = supertile(&rule, 0, 5).unwrap();
        assert_eq!(flat.tiles(), h.level(0));
    }

    #[test]
    fn window_queries() {
        let rule = Arc::new(penrose());
        let p = supertile(&rule, 0, 6).unwrap();
        let everything = Window::new(Vec2::new(-100.0, -100.0), 300.0);
        assert_eq!(p.tiles_inside(&everything).len(), p.len());
        let far = Window::new(Vec2::new(500.0, 500.0), 10.0);
        assert!(p.tiles_inside(&far).is_empty());
        assert!(p.tiles_meeting(&far).is_empty());
    }
}
