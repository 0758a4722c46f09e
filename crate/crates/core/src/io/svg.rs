use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::geometry::{BBox, Point};
use crate::grid::GridLayout;
use crate::matching::GuideShape;
use crate::network::{StationKind, TransitNetwork};

const CANVAS: f64 = 960.0;
const PAD: f64 = 24.0;
const STROKE: f64 = 4.0;
/// Distance between parallel lines, in strokes.
const LINE_GAP: f64 = 1.5;

/// What to draw: station positions and the course of every connection.
#[derive(Debug, Clone)]
pub struct Drawing<'a> {
    pub net: &'a TransitNetwork,
    pub positions: Vec<Point>,
    /// Per connection, oriented `from → to`.
    pub paths: Vec<Vec<Point>>,
    pub dashed: Vec<bool>,
    pub shape: Option<&'a GuideShape>,
}

impl<'a> Drawing<'a> {
    /// Every connection as a straight segment.
    pub fn straight(
        net: &'a TransitNetwork,
        positions: &[Point],
        shape: Option<&'a GuideShape>,
    ) -> Self {
        Self {
            net,
            paths: net
                .connections
                .iter()
                .map(|c| vec![positions[c.from], positions[c.to]])
                .collect(),
            dashed: vec![false; net.connections.len()],
            positions: positions.to_vec(),
            shape,
        }
    }

    /// Routed grid courses; unrouted connections are dashed.
    pub fn grid(
        net: &'a TransitNetwork,
        layout: &GridLayout,
        shape: Option<&'a GuideShape>,
    ) -> Self {
        Self {
            net,
            positions: layout.positions.clone(),
            paths: layout.paths.iter().map(|p| p.points.clone()).collect(),
            dashed: layout.paths.iter().map(|p| !p.routed).collect(),
            shape,
        }
    }
}

fn offset(points: &[Point], by: f64) -> Vec<Point> {
    if by == 0.0 || points.len() < 2 {
        return points.to_vec();
    }
    let normals: Vec<Point> = points
        .windows(2)
        .map(|w| (w[1] - w[0]).perp().normalized().unwrap_or(Point::ZERO))
        .collect();
    (0..points.len())
        .map(|i| {
            let a = normals[i.saturating_sub(1).min(normals.len() - 1)];
            let b = normals[i.min(normals.len() - 1)];
            let n = match (a + b).normalized() {
                Some(n) => n / n.dot(b).max(0.5),
                None => b,
            };
            points[i] + n * by
        })
        .collect()
}

fn path_data(points: &[Point], closed: bool) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let _ = write!(
            d,
            "{}{:.2},{:.2}",
            if i == 0 { "M" } else { " L" },
            p.x,
            p.y
        );
    }
    if closed {
        d.push_str(" Z");
    }
    d
}

/// SVG 1.1 document: gray guide shape, one stroke per line chain, station discs.
pub fn emit_svg(dr: &Drawing) -> String {
    let net = dr.net;
    let mut bbox = BBox::of_points(
        dr.positions
            .iter()
            .copied()
            .chain(dr.paths.iter().flatten().copied()),
    )
    .unwrap_or(BBox {
        min: Point::ZERO,
        max: Point::new(1.0, 1.0),
    });
    if let Some(s) = dr.shape {
        bbox = bbox.union(s.bbox());
    }
    let span = bbox.width().max(bbox.height()).max(1e-12);
    let scale = CANVAS / span;
    let px = |p: Point| {
        Point::new(
            (p.x - bbox.min.x) * scale + PAD,
            (bbox.max.y - p.y) * scale + PAD,
        )
    };
    let width = bbox.width() * scale + 2.0 * PAD;
    let height = bbox.height() * scale + 2.0 * PAD;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    if let Some(s) = dr.shape {
        let _ = writeln!(
            out,
            r##"<g fill="none" stroke="#c8c8c8" stroke-width="{:.2}" stroke-linejoin="round" stroke-linecap="round">"##,
            4.0 * STROKE
        );
        for p in &s.polylines {
            let pts: Vec<Point> = p.vertices().iter().map(|&v| px(v)).collect();
            let _ = writeln!(out, r#"<path d="{}"/>"#, path_data(&pts, p.is_closed()));
        }
        let _ = writeln!(out, "</g>");
    }

    let _ = writeln!(
        out,
        r#"<g fill="none" stroke-width="{STROKE:.2}" stroke-linejoin="round" stroke-linecap="round">"#
    );
    for (li, line) in net.lines.iter().enumerate() {
        let mut chains: Vec<(Vec<Point>, bool)> = Vec::new();
        for w in line.stations.windows(2) {
            let Some(c) = net.connection_between(w[0], w[1]) else {
                continue;
            };
            let conn = &net.connections[c];
            let slot = conn.lines.iter().position(|&l| l == li).unwrap_or(0) as f64;
            let shift = (slot - (conn.lines.len().max(1) - 1) as f64 / 2.0) * LINE_GAP * STROKE;
            let pts: Vec<Point> = dr.paths[c].iter().map(|&p| px(p)).collect();
            let mut pts = offset(&pts, shift);
            if conn.from != w[0] {
                pts.reverse();
            }
            let dashed = dr.dashed[c];
            match chains.last_mut() {
                Some((chain, d)) if *d == dashed && !dashed => {
                    for p in pts {
                        if chain.last().is_none_or(|q| q.dist(p) > 1e-9) {
                            chain.push(p);
                        }
                    }
                }
                _ => chains.push((pts, dashed)),
            }
        }
        for (pts, dashed) in chains {
            let dash = if dashed {
                r#" stroke-dasharray="8 6""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<path class="line-{}" stroke="{}"{dash} d="{}"/>"#,
                line.id,
                line.color,
                path_data(&pts, false)
            );
        }
    }
    let _ = writeln!(out, "</g>");

    // split fragments are drawn as their original station
    let mut groups: BTreeMap<&str, (Point, usize)> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for (i, s) in net.stations.iter().enumerate() {
        if s.kind == StationKind::DummyPlanarization {
            continue;
        }
        let key = s.origin.as_deref().unwrap_or(&s.id);
        let e = groups.entry(key).or_insert_with(|| {
            order.push(key);
            (Point::ZERO, 0)
        });
        e.0 += dr.positions[i];
        e.1 += 1;
    }
    let _ = writeln!(
        out,
        r#"<g fill="white" stroke="black" stroke-width="1.50">"#
    );
    for key in order {
        let (sum, n) = groups[key];
        let c = px(sum / n as f64);
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}"/>"#,
            c.x,
            c.y,
            1.25 * STROKE
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::testnet::build;

    #[test]
    fn one_line_one_path() {
        let net = build(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)],
            &[(0, 1), (1, 2)],
            &[&[0, 1, 2]],
        );
        let svg = emit_svg(&Drawing::straight(&net, &net.positions(), None));
        assert_eq!(svg.matches("<path").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 3);
    }

    #[test]
    fn shared_connection_offsets_two_strokes() {
        let net = build(&[(0.0, 0.0), (1.0, 0.0)], &[(0, 1)], &[&[0, 1], &[0, 1]]);
        let svg = emit_svg(&Drawing::straight(&net, &net.positions(), None));
        let ds: Vec<&str> = svg
            .lines()
            .filter(|l| l.contains("class=\"line-"))
            .collect();
        assert_eq!(ds.len(), 2);
        assert_ne!(ds[0].split("d=").nth(1), ds[1].split("d=").nth(1));
    }

    #[test]
    fn deterministic() {
        let net = build(
            &[(0.0, 0.0), (1.0, 0.3), (2.0, 1.0)],
            &[(0, 1), (1, 2)],
            &[&[0, 1, 2]],
        );
        let a = emit_svg(&Drawing::straight(&net, &net.positions(), None));
        let b = emit_svg(&Drawing::straight(&net, &net.positions(), None));
        assert_eq!(a, b);
    }

    #[test]
    fn offset_keeps_parallel_distance() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 10.0),
        ];
        let o = offset(&pts, 1.0);
        assert!((o[0].y - 1.0).abs() < 1e-12);
        assert!((o[2].x - 9.0).abs() < 1e-12);
        assert!((o[1] - Point::new(9.0, 1.0)).norm() < 1e-12);
    }
}
