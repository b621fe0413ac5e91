use crate::geometry::{
    bbox, clip_to_rect, signed_area, triangles_overlap_rect_interior, CubeUnion, Rect, Vec2,
    COORD_TOL,
};
use crate::subst::Hierarchy;
use serde::Serialize;
use std::collections::HashMap;

/// One layer `P_l`: tiles of `τ_l` selected by the greedy top-down pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layer {
    pub level: u32,
    /// Indices into `Hierarchy::level(level)`.
    pub tiles: Vec<usize>,
    /// `#(V_l ∩ Y)`, from the hierarchy (level-0 descendants).
    pub count: u64,
    /// `μ(V_l)`.
    pub area: f64,
    /// `#(V_l ∩ Y) - α μ(V_l)`.
    pub discrepancy: f64,
    /// `Σ_{T ∈ P_l} |#(T ∩ Y) - α μ(T)|`.
    pub abs_tile_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerDecomposition {
    /// Highest level first; empty layers included down to `N`.
    pub layers: Vec<Layer>,
    /// Largest level with a selected tile.
    pub top_level: Option<u32>,
    /// `μ(V_∂)`, measured by clipping the selected tiles against the cells.
    pub boundary_area: f64,
    pub union_area: f64,
    /// `|Σ μ(V_l) + μ(V_∂) - μ(U)| / μ(U)`.
    pub partition_error: f64,
}

fn cells_overlapping(tris: &[[Vec2; 3]]) -> impl Iterator<Item = ((i64, i64), Rect)> + '_ {
    let pts: Vec<Vec2> = tris.iter().flatten().copied().collect();
    let b = bbox(&pts);
    let (x0, x1) = (b.min.x.floor() as i64, b.max.x.ceil() as i64);
    let (y0, y1) = (b.min.y.floor() as i64, b.max.y.ceil() as i64);
    (y0..y1).flat_map(move |y| {
        (x0..x1).filter_map(move |x| {
            let r = Rect::new(
                Vec2::new(x as f64, y as f64),
                Vec2::new(x as f64 + 1.0, y as f64 + 1.0),
            );
            triangles_overlap_rect_interior(tris, &r, COORD_TOL).then_some(((x, y), r))
        })
    })
}

fn tile_inside(tris: &[[Vec2; 3]], u: &CubeUnion) -> bool {
    cells_overlapping(tris).all(|(c, _)| u.contains(c))
}

/// Greedy partition of `U` into supertiles of decreasing level.
///
/// A tile of `τ_l` (`l ≥ n`) is selected when its interior lies in `U` and no
/// ancestor was selected; `V_∂` is what remains. The hierarchy must already
/// be in the frame of the cells (see [`Hierarchy::scaled`]).
pub fn layer_decomposition(
    u: &CubeUnion,
    h: &Hierarchy,
    n: u32,
    alpha: f64,
) -> LayerDecomposition {
    let rule = h.rule();
    let scale = h.scale();
    let top = h.root_level();
    let union_area = u.area();
    let mut selected: Vec<Vec<usize>> = vec![Vec::new(); top as usize + 1];
    let mut stack: Vec<(u32, usize)> = vec![(top, 0)];
    while let Some((l, k)) = stack.pop() {
        let t = &h.level(l)[k];
        let area = t.area(rule, scale);
        if l >= n && area <= union_area + COORD_TOL && tile_inside(&t.triangles(rule, scale), u) {
            selected[l as usize].push(k);
            continue;
        }
        if l > n {
            for c in h.children_range(l, k).rev() {
                stack.push((l - 1, c));
            }
        }
    }

    let mut covered: HashMap<(i64, i64), f64> = HashMap::new();
    let mut layers = Vec::new();
    let mut top_level = None;
    for l in (n..=top).rev() {
        let mut tiles = selected[l as usize].clone();
        tiles.sort_unstable();
        let (mut count, mut area, mut abs_sum) = (0u64, 0.0, 0.0);
        for &k in &tiles {
            let t = &h.level(l)[k];
            let c = h.leaf_range(l, k).len() as u64;
            let a = t.area(rule, scale);
            count += c;
            area += a;
            abs_sum += (c as f64 - alpha * a).abs();
            let tris = t.triangles(rule, scale);
            for (cell, r) in cells_overlapping(&tris) {
                let piece: f64 = tris
                    .iter()
                    .map(|tri| {
                        let clipped = clip_to_rect(tri, &r);
                        if clipped.len() >= 3 {
                            signed_area(&clipped).abs()
                        } else {
                            0.0
                        }
                    })
                    .sum();
                if u.contains(cell) {
                    *covered.entry(cell).or_insert(0.0) += piece;
                }
            }
        }
        if !tiles.is_empty() && top_level.is_none() {
            top_level = Some(l);
        }
        layers.push(Layer {
            level: l,
            tiles,
            count,
            area,
            discrepancy: count as f64 - alpha * area,
            abs_tile_sum: abs_sum,
        });
    }
    let boundary_area: f64 = u
        .cells()
        .map(|c| (1.0 - covered.get(&c).copied().unwrap_or(0.0)).max(0.0))
        .sum();
    let layer_total: f64 = layers.iter().map(|l| l.area).sum();
    LayerDecomposition {
        partition_error: (layer_total + boundary_area - union_area).abs() / union_area.max(1e-300),
        layers,
        top_level,
        boundary_area,
        union_area,
    }
}

/// Geometric rate of the mean `|#(V_l ∩ Y) - α μ(V_l)|` over several
/// decompositions, fitted against `l` over the levels where some window
/// selected a tile.
pub fn layer_decay_rate(decomps: &[LayerDecomposition]) -> Option<f64> {
    let mut sums: HashMap<u32, (f64, usize)> = HashMap::new();
    for d in decomps {
        let Some(top) = d.top_level else { continue };
        for l in d.layers.iter().filter(|l| l.level <= top) {
            let e = sums.entry(l.level).or_insert((0.0, 0));
            e.0 += l.discrepancy.abs();
            e.1 += 1;
        }
    }
    let mut levels: Vec<u32> = sums.keys().copied().collect();
    levels.sort_unstable();
    let (xs, ys): (Vec<f64>, Vec<f64>) = levels
        .iter()
        .map(|l| (*l as f64, sums[l].0 / sums[l].1 as f64))
        .filter(|(_, y)| *y > 0.0)
        .unzip();
    crate::fit::log_slope(&xs, &ys).map(|f| f.slope.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subst::chair;
    use std::sync::Arc;

    #[test]
    fn chair_supertile_is_one_layer() {
        // level-3 chair at scale 1 is the L-shape of three 8×8 blocks
        let rule = Arc::new(chair());
        let h = Hierarchy::build(&rule, 0, 3).unwrap();
        let mut u = CubeUnion::block(0, 0, 16, 8);
        for c in CubeUnion::block(0, 8, 8, 8).cells() {
            u.insert(c);
        }
        let d = layer_decomposition(&u, &h, 0, 1.0 / 3.0);
        assert_eq!(d.top_level, Some(3));
        assert_eq!(d.layers[0].tiles, vec![0]);
        assert!(d.layers[1..].iter().all(|l| l.tiles.is_empty()));
        assert!(d.boundary_area.abs() < 1e-9);
        assert!(d.partition_error < 1e-12);
        assert_eq!(d.layers[0].count, 64);
        assert!(d.layers[0].discrepancy.abs() < 1e-12);
    }

    #[test]
    fn nothing_fits() {
        let rule = Arc::new(chair());
        let h = Hierarchy::build(&rule, 0, 3).unwrap();
        let u = CubeUnion::block(1, 1, 1, 1);
        let d = layer_decomposition(&u, &h, 2, 1.0 / 3.0);
        assert!(d.layers.iter().all(|l| l.tiles.is_empty()));
        assert_eq!(d.top_level, None);
        assert!((d.boundary_area - 1.0).abs() < 1e-12);
    }
}
