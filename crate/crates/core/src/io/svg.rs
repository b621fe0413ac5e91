//! Deterministic SVG rendering of patches, nets and matchings.

use crate::geometry::{bbox, Vec2};
use crate::matching::MatchResult;
use crate::net::NetWindow;
use crate::subst::Patch;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Output width in pixels; the height follows the aspect ratio.
    pub width: f64,
    /// Margin in pixels.
    pub margin: f64,
    pub stroke_width: f64,
    /// Fill colour per tile type, cycled.
    pub palette: Vec<String>,
    pub point_radius: f64,
    pub point_color: String,
    pub segment_color: String,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            width: 800.0,
            margin: 10.0,
            stroke_width: 0.5,
            palette: ["#f4c542", "#4a90d9", "#e26d5a", "#7bc47f", "#9b6fc3"]
                .map(String::from)
                .to_vec(),
            point_radius: 1.5,
            point_color: "#222222".into(),
            segment_color: "#d0021b".into(),
        }
    }
}

/// Shapes to draw, in world coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    /// Polygon with its fill class (tile type).
    pub polygons: Vec<(Vec<Vec2>, usize)>,
    pub points: Vec<Vec2>,
    pub segments: Vec<(Vec2, Vec2)>,
}

impl Scene {
    pub fn with_patch(mut self, patch: &Patch) -> Self {
        for (k, t) in patch.tiles().iter().enumerate() {
            self.polygons.push((patch.polygon(k), t.tile));
        }
        self
    }

    pub fn with_net(mut self, net: &NetWindow) -> Self {
        self.points.extend_from_slice(net.points());
        self
    }

    pub fn with_match(mut self, m: &MatchResult) -> Self {
        self.segments.extend_from_slice(&m.pairs);
        self
    }

    fn extent(&self) -> Vec<Vec2> {
        self.polygons
            .iter()
            .flat_map(|(p, _)| p.iter().copied())
            .chain(self.points.iter().copied())
            .chain(self.segments.iter().flat_map(|&(a, b)| [a, b]))
            .collect()
    }
}

pub fn render_svg(scene: &Scene, style: &SvgStyle) -> String {
    let pts = scene.extent();
    let (min, span) = if pts.is_empty() {
        (Vec2::ZERO, Vec2::new(1.0, 1.0))
    } else {
        let b = bbox(&pts);
        (b.min, Vec2::new(b.width().max(1e-12), b.height().max(1e-12)))
    };
    let inner = style.width - 2.0 * style.margin;
    let k = inner / span.x.max(span.y);
    let height = span.y * k + 2.0 * style.margin;
    let map = |p: Vec2| {
        (
            style.margin + (p.x - min.x) * k,
            height - style.margin - (p.y - min.y) * k,
        )
    };
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.2}" height="{:.2}" viewBox="0 0 {:.2} {:.2}">"#,
        style.width, height, style.width, height
    )
    .unwrap();
    if !scene.polygons.is_empty() {
        writeln!(
            s,
            r##"<g stroke="#333333" stroke-width="{:.3}" stroke-linejoin="round">"##,
            style.stroke_width
        )
        .unwrap();
        for (poly, class) in &scene.polygons {
            let fill = &style.palette[class % style.palette.len()];
            write!(s, r#"<polygon class="t{}" fill="{}" points=""#, class + 1, fill).unwrap();
            for (i, p) in poly.iter().enumerate() {
                let (x, y) = map(*p);
                if i > 0 {
                    s.push(' ');
                }
                write!(s, "{x:.3},{y:.3}").unwrap();
            }
            s.push_str("\"/>\n");
        }
        s.push_str("</g>\n");
    }
    if !scene.segments.is_empty() {
        writeln!(
            s,
            r#"<g stroke="{}" stroke-width="{:.3}">"#,
            style.segment_color,
            style.stroke_width * 2.0
        )
        .unwrap();
        for (a, b) in &scene.segments {
            let (x1, y1) = map(*a);
            let (x2, y2) = map(*b);
            writeln!(s, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#).unwrap();
        }
        s.push_str("</g>\n");
    }
    if !scene.points.is_empty() {
        writeln!(s, r#"<g fill="{}">"#, style.point_color).unwrap();
        for p in &scene.points {
            let (x, y) = map(*p);
            writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}"/>"#, style.point_radius).unwrap();
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_patch(patch: &Patch, style: &SvgStyle) -> String {
    render_svg(&Scene::default().with_patch(patch), style)
}

pub fn render_net(net: &NetWindow, style: &SvgStyle) -> String {
    render_svg(&Scene::default().with_net(net), style)
}

/// Pairs as segments with both endpoints drawn as points.
pub fn render_match(m: &MatchResult, style: &SvgStyle) -> String {
    let mut scene = Scene::default().with_match(m);
    for (a, b) in &m.pairs {
        scene.points.push(*a);
        scene.points.push(*b);
    }
    render_svg(&scene, style)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::bottleneck_match;
    use crate::subst::{chair, penrose, supertile, Patch};
    use std::sync::Arc;

    #[test]
    fn single_tile() {
        let p = Patch::single(Arc::new(chair()), 0, 0).unwrap();
        let svg = render_patch(&p, &SvgStyle::default());
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg, render_patch(&p, &SvgStyle::default()));
    }

    #[test]
    fn penrose_classes() {
        let p = supertile(&Arc::new(penrose()), 0, 2).unwrap();
        let svg = render_patch(&p, &SvgStyle::default());
        assert_eq!(svg.matches("<polygon class=\"t1\"").count(), 5);
        assert_eq!(svg.matches("<polygon class=\"t2\"").count(), 3);
    }

    #[test]
    fn match_segments() {
        let a: Vec<Vec2> = (0..10).map(|i| Vec2::new(i as f64, 0.0)).collect();
        let b: Vec<Vec2> = (0..10).map(|i| Vec2::new(i as f64, 0.5)).collect();
        let m = bottleneck_match(&a, &b, None).unwrap();
        let svg = render_match(&m, &SvgStyle::default());
        assert_eq!(svg.matches("<line").count(), 10);
    }
}
