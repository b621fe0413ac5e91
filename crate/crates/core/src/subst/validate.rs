use super::rule::SubstitutionRule;
use crate::error::{Error, Result};
use crate::geometry::{contains_point, distance_to_boundary, is_simple, Vec2, COORD_TOL};
use serde::Serialize;

/// Relative tolerance on per-tile area conservation.
pub const AREA_TOL: f64 = 1e-8;

fn one_based<S: serde::Serializer>(i: &usize, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(*i as u64 + 1)
}

/// Tile indices are 0-based in memory and 1-based when serialized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaResidual {
    #[serde(serialize_with = "one_based")]
    pub tile: usize,
    pub parent_area: f64,
    pub children_area: f64,
    /// `parent_area - children_area`.
    pub residual: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overlap {
    #[serde(serialize_with = "one_based")]
    pub tile: usize,
    pub child_a: usize,
    pub child_b: usize,
    pub sample: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub residuals: Vec<AreaResidual>,
    pub overlaps: Vec<Overlap>,
    pub max_relative_residual: f64,
    pub ok: bool,
}

fn interior_samples(poly: &[Vec2]) -> Vec<Vec2> {
    let c = crate::geometry::centroid(poly);
    std::iter::once(c)
        .chain(poly.iter().map(|v| (c + *v) * 0.5))
        .collect()
}

/// Geometric checks on a rule: polygons, child containment, area
/// conservation and child overlaps.
pub fn validate_rule(rule: &SubstitutionRule) -> Result<ValidationReport> {
    for (i, t) in rule.tiles().iter().enumerate() {
        if !is_simple(&t.polygon) {
            return Err(Error::MalformedPolygon(format!(
                "tile {} ({}) is self-intersecting",
                i + 1,
                t.name
            )));
        }
        if t.area < crate::geometry::MIN_AREA {
            return Err(Error::MalformedPolygon(format!(
                "tile {} ({}) has area {:e}",
                i + 1,
                t.name,
                t.area
            )));
        }
    }
    let xi2 = rule.xi() * rule.xi();
    let mut residuals = Vec::with_capacity(rule.n());
    let mut overlaps = Vec::new();
    for j in 0..rule.n() {
        let parent = &rule.tile(j).polygon;
        let kids: Vec<Vec<Vec2>> = (0..rule.children(j).len())
            .map(|k| rule.child_polygon(j, k))
            .collect();
        for (k, poly) in kids.iter().enumerate() {
            for v in poly {
                if !contains_point(parent, *v, COORD_TOL) {
                    return Err(Error::ChildOutsideParent {
                        parent: j + 1,
                        child: k + 1,
                        excess: distance_to_boundary(parent, *v),
                    });
                }
            }
        }
        let parent_area = rule.tile(j).area;
        let children_area: f64 = rule
            .children(j)
            .iter()
            .map(|c| rule.tile(c.tile).area / xi2)
            .sum();
        let residual = parent_area - children_area;
        residuals.push(AreaResidual {
            tile: j,
            parent_area,
            children_area,
            residual,
            relative: residual.abs() / parent_area,
        });
        for (a, pa) in kids.iter().enumerate() {
            for s in interior_samples(pa) {
                for (b, pb) in kids.iter().enumerate() {
                    if a != b
                        && contains_point(pb, s, 0.0)
                        && distance_to_boundary(pb, s) > COORD_TOL
                    {
                        overlaps.push(Overlap {
                            tile: j,
                            child_a: a,
                            child_b: b,
                            sample: s,
                        });
                    }
                }
            }
        }
    }
    let max_relative_residual = residuals.iter().map(|r| r.relative).fold(0.0, f64::max);
    Ok(ValidationReport {
        ok: max_relative_residual < AREA_TOL && overlaps.is_empty(),
        residuals,
        overlaps,
        max_relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::super::builtin::{chair, penrose, PHI};
    use super::*;

    #[test]
    fn builtins_validate() {
        for rule in [penrose(), chair()] {
            let r = validate_rule(&rule).unwrap();
            assert!(r.ok, "{r:?}");
            assert!(r.max_relative_residual < 1e-12);
        }
    }

    #[test]
    fn missing_child_is_reported() {
        let rule = penrose().without_child(0, 2).unwrap();
        let r = validate_rule(&rule).unwrap();
        assert!(!r.ok);
        let deleted = rule.tile(1).area / (PHI * PHI);
        assert!((r.residuals[0].residual - deleted).abs() < 1e-12);
    }
}
