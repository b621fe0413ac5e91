//! Plain-text rule files.
//!
//! ```text
//! # comment
//! rule <name>
//! q <int>                      # base angle 2π/q
//! xi <expr>
//! let <name> = <expr>
//! tile <id> ["label"] (x, y) (x, y) ...
//! child <parent> <child> rot <k> [reflect] at (x, y)
//! child <parent> <child> onto (x, y) (x, y) ...
//! ```
//!
//! Expressions use `+ - * / ^`, parentheses, `sqrt(...)` and earlier `let`
//! names. Tile ids are 1-based and must be `1..n`. A `rot` child is the tile
//! scaled by `1/xi`, optionally mirrored across the x-axis, rotated by
//! `2πk/q` and translated to `(x, y)`. An `onto` child lists where each vertex
//! of the scaled tile lands, in the tile's counterclockwise order.

use super::expr::{tokenize, Cursor, Tok};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::subst::{builtin::child_onto, validate_rule, BasicTile, Child, Isometry, SubstitutionRule};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::path::Path;

enum Placement {
    Rot { k: u64, reflect: bool, at: Vec2 },
    Onto(Vec<Vec2>),
}

struct ChildLine {
    line: usize,
    parent: usize,
    child: usize,
    placement: Placement,
}

fn semantic(line: usize, message: impl Into<String>) -> Error {
    Error::Semantic {
        line,
        message: message.into(),
    }
}

fn point(c: &mut Cursor, vars: &HashMap<String, f64>) -> Result<Vec2> {
    c.expect_sym('(')?;
    let x = c.expr(vars)?;
    c.expect_sym(',')?;
    let y = c.expr(vars)?;
    c.expect_sym(')')?;
    Ok(Vec2::new(x, y))
}

fn points(c: &mut Cursor, vars: &HashMap<String, f64>) -> Result<Vec<Vec2>> {
    let mut out = Vec::new();
    while !c.at_end() {
        out.push(point(c, vars)?);
    }
    Ok(out)
}

/// Parses and validates a rule from text.
pub fn parse_rule(text: &str) -> Result<SubstitutionRule> {
    let mut name: Option<String> = None;
    let mut q: Option<(u32, usize)> = None;
    let mut xi: Option<(f64, usize)> = None;
    let mut vars: HashMap<String, f64> = HashMap::new();
    let mut tiles: BTreeMap<usize, (usize, String, Vec<Vec2>)> = BTreeMap::new();
    let mut children: Vec<ChildLine> = Vec::new();
    let mut last_line = 0;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let toks = tokenize(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor::new(&toks, line, raw.chars().count());
        let kw = c.ident()?;
        match kw.as_str() {
            "rule" => {
                let n = match c.next().cloned() {
                    Some(Tok::Ident(s)) | Some(Tok::Str(s)) => s,
                    _ => return Err(c.error("expected a rule name")),
                };
                if name.replace(n).is_some() {
                    return Err(semantic(line, "duplicate `rule` line"));
                }
            }
            "q" => {
                let v = c.integer()?;
                if v == 0 || v > u32::MAX as u64 {
                    return Err(semantic(line, format!("q must be a positive integer, got {v}")));
                }
                if q.replace((v as u32, line)).is_some() {
                    return Err(semantic(line, "duplicate `q` line"));
                }
            }
            "xi" => {
                let v = c.expr(&vars)?;
                if !(v > 1.0) || !v.is_finite() {
                    return Err(semantic(line, format!("xi must exceed 1, got {v}")));
                }
                if xi.replace((v, line)).is_some() {
                    return Err(semantic(line, "duplicate `xi` line"));
                }
            }
            "let" => {
                let n = c.ident()?;
                if n == "sqrt" {
                    return Err(semantic(line, "`sqrt` is reserved"));
                }
                c.expect_sym('=')?;
                let v = c.expr(&vars)?;
                vars.insert(n, v);
            }
            "tile" => {
                let id = c.integer()? as usize;
                if id == 0 {
                    return Err(semantic(line, "tile ids start at 1"));
                }
                let label = match c.peek() {
                    Some(Tok::Str(s)) => {
                        let s = s.clone();
                        c.next();
                        s
                    }
                    _ => format!("T{id}"),
                };
                let poly = points(&mut c, &vars)?;
                if poly.len() < 3 {
                    return Err(semantic(line, format!("tile {id} needs at least 3 vertices")));
                }
                if tiles.insert(id, (line, label, poly)).is_some() {
                    return Err(semantic(line, format!("duplicate tile id {id}")));
                }
            }
            "child" => {
                let parent = c.integer()? as usize;
                let child = c.integer()? as usize;
                let placement = if c.eat_keyword("rot") {
                    let k = c.integer()?;
                    let reflect = c.eat_keyword("reflect");
                    if !c.eat_keyword("at") {
                        return Err(c.error("expected `at`"));
                    }
                    let at = point(&mut c, &vars)?;
                    Placement::Rot { k, reflect, at }
                } else if c.eat_keyword("onto") {
                    Placement::Onto(points(&mut c, &vars)?)
                } else {
                    return Err(c.error("expected `rot` or `onto`"));
                };
                children.push(ChildLine {
                    line,
                    parent,
                    child,
                    placement,
                });
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    column: toks[0].col,
                    message: format!("unknown keyword `{other}`"),
                })
            }
        }
        c.expect_end()?;
    }

    let end = last_line.max(1);
    let name = name.ok_or_else(|| semantic(end, "missing `rule` line"))?;
    let (q, _) = q.ok_or_else(|| semantic(end, "missing `q` line"))?;
    let (xi, _) = xi.ok_or_else(|| semantic(end, "missing `xi` line"))?;
    let n = tiles.len();
    if n == 0 {
        return Err(semantic(end, "no tiles declared"));
    }
    if let Some((&id, (line, _, _))) = tiles.iter().find(|(&id, _)| id > n) {
        return Err(semantic(*line, format!("tile ids must be 1..{n}, found {id}")));
    }
    let mut basic = Vec::with_capacity(n);
    for (line, label, poly) in tiles.values() {
        basic.push(BasicTile::new(label.clone(), poly.clone()).map_err(|e| semantic(*line, e.to_string()))?);
    }
    let mut lists: Vec<Vec<Child>> = vec![Vec::new(); n];
    for cl in &children {
        for id in [cl.parent, cl.child] {
            if id == 0 || id > n {
                return Err(semantic(cl.line, format!("child references unknown tile id {id}")));
            }
        }
        let tile = cl.child - 1;
        let c = match &cl.placement {
            Placement::Rot { k, reflect, at } => {
                if *k >= q as u64 {
                    return Err(semantic(cl.line, format!("rotation {k} is not below q = {q}")));
                }
                Child {
                    tile,
                    placement: Isometry::new(*k as u32, *reflect, *at, q),
                }
            }
            Placement::Onto(dst) => {
                if dst.len() != basic[tile].polygon.len() {
                    return Err(semantic(
                        cl.line,
                        format!(
                            "tile {} has {} vertices, `onto` lists {}",
                            cl.child,
                            basic[tile].polygon.len(),
                            dst.len()
                        ),
                    ));
                }
                child_onto(&basic, xi, q, tile, dst).map_err(|e| semantic(cl.line, e.to_string()))?
            }
        };
        lists[cl.parent - 1].push(c);
    }
    for (id, (line, _, _)) in &tiles {
        if lists[id - 1].is_empty() {
            return Err(semantic(*line, format!("tile {id} has no children")));
        }
    }
    let rule = SubstitutionRule::new(name, q, xi, basic, lists).map_err(|e| semantic(end, e.to_string()))?;
    let report = validate_rule(&rule)?;
    if !report.ok {
        return Err(Error::Validation(format!(
            "max relative area residual {:e}, {} overlapping child pair(s)",
            report.max_relative_residual,
            report.overlaps.len()
        )));
    }
    Ok(rule)
}

pub fn parse_rule_file(path: impl AsRef<Path>) -> Result<SubstitutionRule> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_rule(&text)
}

fn is_ident(s: &str) -> bool {
    let mut ch = s.chars();
    matches!(ch.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && ch.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Writes a rule in the file format; numbers use the shortest exact form, so
/// parsing the output reproduces the rule.
pub fn format_rule(rule: &SubstitutionRule) -> String {
    let mut s = String::new();
    let name = rule.name();
    if is_ident(name) {
        writeln!(s, "rule {name}").unwrap();
    } else {
        writeln!(s, "rule \"{name}\"").unwrap();
    }
    writeln!(s, "q {}", rule.q()).unwrap();
    writeln!(s, "xi {:?}", rule.xi()).unwrap();
    for (i, t) in rule.tiles().iter().enumerate() {
        write!(s, "tile {} \"{}\"", i + 1, t.name).unwrap();
        for p in &t.polygon {
            write!(s, " ({:?}, {:?})", p.x, p.y).unwrap();
        }
        s.push('\n');
    }
    for j in 0..rule.n() {
        for c in rule.children(j) {
            let p = c.placement;
            write!(s, "child {} {} rot {}", j + 1, c.tile + 1, p.rotation()).unwrap();
            if p.reflect() {
                s.push_str(" reflect");
            }
            writeln!(s, " at ({:?}, {:?})", p.translation.x, p.translation.y).unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subst::{chair, penrose};

    #[test]
    fn round_trip_builtins() {
        for rule in [penrose(), chair()] {
            let text = format_rule(&rule);
            assert_eq!(parse_rule(&text).unwrap(), rule, "{text}");
        }
    }

    #[test]
    fn unknown_child_id() {
        let text = "rule t\nq 4\nxi 2\ntile 1 (0,0) (1,0) (1,1) (0,1)\nchild 1 99 rot 0 at (0,0)\n";
        match parse_rule(text) {
            Err(Error::Semantic { line: 5, message }) => assert!(message.contains("99")),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn syntax_errors_point_at_the_token() {
        let text = "rule t\nq 4\nxi 2 +\n";
        match parse_rule(text) {
            Err(Error::Syntax { line: 3, column: 7, .. }) => {}
            e => panic!("{e:?}"),
        }
        assert!(matches!(
            parse_rule("rule t\nfoo 3\n"),
            Err(Error::Syntax { line: 2, column: 1, .. })
        ));
    }

    #[test]
    fn square_rule_validates() {
        let text = "\
rule square
q 4
xi 2
tile 1 \"sq\" (0,0) (1,0) (1,1) (0,1)
child 1 1 rot 0 at (0, 0)
child 1 1 rot 0 at (1/2, 0)
child 1 1 rot 0 at (0, 1/2)
child 1 1 rot 0 at (1/2, 1/2)
";
        let r = parse_rule(text).unwrap();
        assert_eq!(r.n(), 1);
        assert_eq!(r.children(0).len(), 4);
        let missing = text.replace("child 1 1 rot 0 at (1/2, 1/2)\n", "");
        assert!(matches!(parse_rule(&missing), Err(Error::Validation(_))));
    }
}

#[cfg(test)]
mod shipped {
    use super::*;
    use crate::spectral::substitution_matrix;
    use crate::subst::{chair, penrose};

    fn rules_dir() -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../rules")
    }

    fn same_geometry(a: &SubstitutionRule, b: &SubstitutionRule) {
        assert_eq!(a.q(), b.q());
        assert!((a.xi() - b.xi()).abs() < 1e-15);
        assert_eq!(a.n(), b.n());
        for j in 0..a.n() {
            for (p, q) in a.tile(j).polygon.iter().zip(&b.tile(j).polygon) {
                assert!(p.dist(*q) < 1e-12);
            }
            assert_eq!(a.children(j).len(), b.children(j).len());
            for k in 0..a.children(j).len() {
                assert_eq!(a.children(j)[k].tile, b.children(j)[k].tile);
                for (p, q) in a.child_polygon(j, k).iter().zip(&b.child_polygon(j, k)) {
                    assert!(p.dist(*q) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn penrose_file_matches_builtin() {
        let r = parse_rule_file(rules_dir().join("penrose.rule")).unwrap();
        assert_eq!(substitution_matrix(&r).rows(), vec![vec![2, 1], vec![1, 1]]);
        same_geometry(&r, &penrose());
    }

    #[test]
    fn chair_file_matches_builtin() {
        let r = parse_rule_file(rules_dir().join("chair.rule")).unwrap();
        assert_eq!(r.n(), 1);
        assert_eq!(r.xi(), 2.0);
        same_geometry(&r, &chair());
    }
}
