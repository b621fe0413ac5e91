//! CSV exports and imports. Metadata rides in leading `# key=value` lines.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::matching::MatchResult;
use crate::net::{NetWindow, Provenance};
use crate::subst::{Address, Isometry, Patch, PlacedTile, SubstitutionRule};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(format!("csv: {e}"))
}

/// Serializes any row type, header included.
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn rows_from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

fn metadata(text: &str) -> HashMap<String, String> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .flat_map(|l| l[1..].split_whitespace())
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn format_address(a: &Address) -> String {
    a.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(".")
}

fn parse_address(s: &str) -> Result<Address> {
    if s.is_empty() {
        return Ok(Address::new());
    }
    s.split('.')
        .map(|d| d.parse::<u8>().map_err(|_| Error::Io(format!("bad address `{s}`"))))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct PatchRow {
    #[serde(rename = "tileId")]
    tile_id: usize,
    level: i32,
    address: String,
    #[serde(rename = "rotationIndex")]
    rotation_index: u32,
    reflect: bool,
    tx: f64,
    ty: f64,
}

/// One row per tile: type (1-based), level, address (child indices joined by
/// `.`), placement, with the rule name and scale in the header comment.
pub fn patch_to_csv(patch: &Patch) -> Result<String> {
    let rows: Vec<PatchRow> = patch
        .tiles()
        .iter()
        .map(|t| PatchRow {
            tile_id: t.tile + 1,
            level: t.level,
            address: format_address(&t.address),
            rotation_index: t.placement.rotation(),
            reflect: t.placement.reflect(),
            tx: t.placement.translation.x,
            ty: t.placement.translation.y,
        })
        .collect();
    Ok(format!(
        "# rule={} q={} scale={:?}\n{}",
        patch.rule().name(),
        patch.rule().q(),
        patch.scale(),
        rows_to_csv(&rows)?
    ))
}

pub fn patch_from_csv(rule: Arc<SubstitutionRule>, text: &str) -> Result<Patch> {
    let meta = metadata(text);
    let scale: f64 = match meta.get("scale") {
        Some(s) => s.parse().map_err(|_| Error::Io(format!("bad scale `{s}`")))?,
        None => 1.0,
    };
    let q = rule.q();
    let tiles = rows_from_csv::<PatchRow>(text)?
        .into_iter()
        .map(|r| {
            if r.tile_id == 0 || r.tile_id > rule.n() {
                return Err(Error::Io(format!("unknown tile id {}", r.tile_id)));
            }
            Ok(PlacedTile {
                tile: r.tile_id - 1,
                placement: Isometry::new(r.rotation_index, r.reflect, Vec2::new(r.tx, r.ty), q),
                level: r.level,
                address: parse_address(&r.address)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Patch::new(rule, tiles).scaled(scale))
}

#[derive(Debug, Serialize, Deserialize)]
struct NetRow {
    x: f64,
    y: f64,
    #[serde(rename = "tileId")]
    tile_id: Option<usize>,
    address: String,
}

pub fn net_to_csv(net: &NetWindow) -> Result<String> {
    let rows: Vec<NetRow> = (0..net.len())
        .map(|k| NetRow {
            x: net.points()[k].x,
            y: net.points()[k].y,
            tile_id: net.tile_ids()[k].map(|t| t + 1),
            address: format_address(&net.addresses()[k]),
        })
        .collect();
    let head = match &net.provenance {
        Some(p) => format!(
            "# rule={} root_type={} root_level={}\n",
            p.rule, p.root_type, p.root_level
        ),
        None => String::new(),
    };
    Ok(head + &rows_to_csv(&rows)?)
}

/// Reads `x, y[, tileId, address]`; missing columns are allowed.
pub fn net_from_csv(text: &str) -> Result<NetWindow> {
    let rows: Vec<NetRow> = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize::<HashMap<String, String>>()
        .map(|r| {
            let r = r.map_err(csv_err)?;
            let num = |k: &str| -> Result<f64> {
                r.get(k)
                    .ok_or_else(|| Error::Io(format!("missing column `{k}`")))?
                    .trim()
                    .parse()
                    .map_err(|_| Error::Io(format!("bad number in column `{k}`")))
            };
            let tile_id = match r.get("tileId").map(|s| s.trim()) {
                None | Some("") => None,
                Some(s) => Some(s.parse().map_err(|_| Error::Io(format!("bad tile id `{s}`")))?),
            };
            Ok(NetRow {
                x: num("x")?,
                y: num("y")?,
                tile_id,
                address: r.get("address").cloned().unwrap_or_default(),
            })
        })
        .collect::<Result<_>>()?;
    let points = rows.iter().map(|r| Vec2::new(r.x, r.y)).collect();
    let ids = rows.iter().map(|r| r.tile_id.map(|t: usize| t.saturating_sub(1))).collect();
    let addrs = rows.iter().map(|r| parse_address(&r.address)).collect::<Result<_>>()?;
    let net = NetWindow::from_parts(points, ids, addrs)?;
    let meta = metadata(text);
    Ok(match (meta.get("rule"), meta.get("root_type"), meta.get("root_level")) {
        (Some(rule), Some(t), Some(l)) => match (t.parse(), l.parse()) {
            (Ok(root_type), Ok(root_level)) => net.with_provenance(Provenance {
                rule: rule.clone(),
                root_type,
                root_level,
            }),
            _ => net,
        },
        _ => net,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct MatchRow {
    yx: f64,
    yy: f64,
    lx: f64,
    ly: f64,
    displacement: f64,
}

pub fn match_to_csv(r: &MatchResult) -> Result<String> {
    let rows: Vec<MatchRow> = r
        .pairs
        .iter()
        .map(|(y, l)| MatchRow {
            yx: y.x,
            yy: y.y,
            lx: l.x,
            ly: l.y,
            displacement: y.dist(*l),
        })
        .collect();
    rows_to_csv(&rows)
}

/// Pairs `(net point, lattice point)` from a match export.
pub fn match_pairs_from_csv(text: &str) -> Result<Vec<(Vec2, Vec2)>> {
    Ok(rows_from_csv::<MatchRow>(text)?
        .into_iter()
        .map(|r| (Vec2::new(r.yx, r.yy), Vec2::new(r.lx, r.ly)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::extract_net;
    use crate::subst::{penrose, supertile};

    #[test]
    fn patch_round_trip() {
        let rule = Arc::new(penrose());
        let p = supertile(&rule, 0, 4).unwrap().scaled(2.5);
        let text = patch_to_csv(&p).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("tileId,level,address,rotationIndex,reflect,tx,ty"));
        let back = patch_from_csv(rule, &text).unwrap();
        assert_eq!(back.tiles(), p.tiles());
        assert_eq!(back.scale(), 2.5);
    }

    #[test]
    fn net_round_trip() {
        let rule = Arc::new(penrose());
        let net = extract_net(&supertile(&rule, 1, 3).unwrap()).unwrap();
        let back = net_from_csv(&net_to_csv(&net).unwrap()).unwrap();
        assert_eq!(back.points(), net.points());
        assert_eq!(back.tile_ids(), net.tile_ids());
        assert_eq!(back.addresses(), net.addresses());
        let bare = net_from_csv("x,y\n0.5,1\n2,3.25\n").unwrap();
        assert_eq!(bare.points(), &[Vec2::new(0.5, 1.0), Vec2::new(2.0, 3.25)]);
    }
}
