//! Built-in rules: Penrose (Robinson half-kite / half-dart) and the chair.

use super::isometry::{Isometry, FIT_TOL};
use super::rule::{BasicTile, Child, SubstitutionRule};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use std::sync::Arc;

/// Golden ratio, the Penrose inflation constant.
pub const PHI: f64 = 1.618_033_988_749_895;

/// Child of type `tile` whose vertices `0, 1, 2, ...` (of `ξ⁻¹ T_tile`) land on `dst`.
pub fn child_onto(tiles: &[BasicTile], xi: f64, q: u32, tile: usize, dst: &[Vec2]) -> Result<Child> {
    let src: Vec<Vec2> = tiles[tile].polygon.iter().map(|p| *p * (1.0 / xi)).collect();
    Isometry::fit(&src, dst, q, FIT_TOL)
        .map(|placement| Child { tile, placement })
        .ok_or_else(|| {
            Error::InvalidRule(format!(
                "no isometry with base angle 2π/{q} maps tile {} onto {dst:?}",
                tile + 1
            ))
        })
}

pub fn penrose_tiles() -> Vec<BasicTile> {
    let h1 = (PHI * PHI - 0.25).sqrt();
    let h2 = (1.0 - PHI * PHI / 4.0).sqrt();
    vec![
        BasicTile::new(
            "half-kite",
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.5, h1)],
        )
        .expect("half-kite"),
        BasicTile::new(
            "half-dart",
            vec![Vec2::new(0.0, 0.0), Vec2::new(PHI, 0.0), Vec2::new(PHI / 2.0, h2)],
        )
        .expect("half-dart"),
    ]
}

/// Penrose substitution on Robinson triangles.
///
/// `T_1` is the half-kite (angles 36°-72°-72°, base 1, legs φ) and `T_2` the
/// half-dart (angles 36°-36°-108°, legs 1, base φ). Vertex 0 to the apex is
/// the symmetry axis of the kite or dart a triangle belongs to; children are
/// placed with reflections so that axis edges pair up inside every supertile.
/// The substitution matrix is `[[2, 1], [1, 1]]` and `ξ = φ`.
pub fn penrose() -> SubstitutionRule {
    let tiles = penrose_tiles();
    let q = 10;
    let (a, b, c) = (tiles[0].polygon[0], tiles[0].polygon[1], tiles[0].polygon[2]);
    // P on BC at distance 1/φ from B, Q on AC at distance 1 from A
    let p = b + (c - b) * (1.0 / (PHI * PHI));
    let qq = a + (c - a) * (1.0 / PHI);
    let (d, e, f) = (tiles[1].polygon[0], tiles[1].polygon[1], tiles[1].polygon[2]);
    // S on DE at distance 1/φ from D
    let s = d + (e - d) * (1.0 / (PHI * PHI));
    let kite_children = vec![
        child_onto(&tiles, PHI, q, 0, &[p, b, a]).expect("kite child 1"),
        child_onto(&tiles, PHI, q, 0, &[p, qq, a]).expect("kite child 2"),
        child_onto(&tiles, PHI, q, 1, &[c, p, qq]).expect("kite child 3"),
    ];
    let dart_children = vec![
        child_onto(&tiles, PHI, q, 1, &[d, f, s]).expect("dart child 1"),
        child_onto(&tiles, PHI, q, 0, &[s, f, e]).expect("dart child 2"),
    ];
    SubstitutionRule::new("penrose", q, PHI, tiles, vec![kite_children, dart_children])
        .expect("built-in penrose rule")
}

/// Chair substitution: one L-shaped tile made of three unit squares, four
/// half-size children, `ξ = 2`, right-angle rotations.
pub fn chair() -> SubstitutionRule {
    let l = vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(2.0, 0.0),
        Vec2::new(2.0, 1.0),
        Vec2::new(1.0, 1.0),
        Vec2::new(1.0, 2.0),
        Vec2::new(0.0, 2.0),
    ];
    let tiles = vec![BasicTile::new("chair", l).expect("chair")];
    let q = 4;
    let children = vec![
        Child { tile: 0, placement: Isometry::new(0, false, Vec2::new(0.0, 0.0), q) },
        Child { tile: 0, placement: Isometry::new(0, false, Vec2::new(0.5, 0.5), q) },
        Child { tile: 0, placement: Isometry::new(1, false, Vec2::new(2.0, 0.0), q) },
        Child { tile: 0, placement: Isometry::new(3, false, Vec2::new(0.0, 2.0), q) },
    ];
    SubstitutionRule::new("chair", q, 2.0, tiles, vec![children]).expect("built-in chair rule")
}

/// Looks up a built-in rule by name.
pub fn builtin(name: &str) -> Option<Arc<SubstitutionRule>> {
    match name {
        "penrose" => Some(Arc::new(penrose())),
        "chair" => Some(Arc::new(chair())),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 2] = ["penrose", "chair"];
