//! Line-oriented text formats for networks, guide shapes and layouts.
//!
//! Network documents hold one record per line; `#` starts a comment:
//!
//! ```text
//! station <id> <x> <y> <name...>
//! connection <id> <from> <to> <line,line,...|->
//! line <id> <#rrggbb> <station> <station> ...
//! ```
//!
//! Shape documents hold one polyline per line:
//!
//! ```text
//! polyline <open|closed> <x,y> <x,y> ...
//! ```

mod svg;

pub use svg::{emit_svg, Drawing};

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Point, Polyline};
use crate::matching::GuideShape;
use crate::network::{
    ConnectionRecord, LineRecord, NetworkDocument, StationRecord, TransitNetwork,
};

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line
        .char_indices()
        .chain(std::iter::once((line.len(), ' ')))
    {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    col: s + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

/// Drops a trailing comment: a token starting with `#`, other than the
/// colour field of a `line` record.
fn strip_comment(line: &str) -> &str {
    let ts = tokens(line);
    let cut = ts
        .iter()
        .enumerate()
        .find(|(i, t)| t.text.starts_with('#') && !(*i == 2 && ts[0].text == "line"))
        .map_or(line.len(), |(_, t)| t.col - 1);
    &line[..cut]
}

fn number(t: &Token, line: usize) -> Result<f64> {
    let v: f64 = t.text.parse().map_err(|_| {
        err(
            line,
            t.col,
            format!("expected a number, found `{}`", t.text),
        )
    })?;
    if !v.is_finite() {
        return Err(err(line, t.col, format!("`{}` is not finite", t.text)));
    }
    Ok(v)
}

fn arity(ts: &[Token], n: usize, line: usize, raw: &str, what: &str) -> Result<()> {
    if ts.len() < n {
        return Err(err(
            line,
            raw.trim_end().len() + 1,
            format!("{what} needs {} fields", n - 1),
        ));
    }
    Ok(())
}

/// Parses a network document without checking references.
pub fn parse_network_document(text: &str) -> Result<NetworkDocument> {
    let mut doc = NetworkDocument::default();
    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let body = strip_comment(raw);
        let ts = tokens(body);
        let Some(head) = ts.first() else { continue };
        match head.text {
            "station" => {
                arity(&ts, 4, ln, body, "station")?;
                let name = ts.get(4).map_or("", |t| body[t.col - 1..].trim_end());
                doc.stations.push(StationRecord {
                    id: ts[1].text.to_string(),
                    x: number(&ts[2], ln)?,
                    y: number(&ts[3], ln)?,
                    name: name.to_string(),
                });
            }
            "connection" => {
                arity(&ts, 5, ln, body, "connection")?;
                if ts.len() > 5 {
                    return Err(err(ln, ts[5].col, "unexpected field after line list"));
                }
                let lines = match ts[4].text {
                    "-" => Vec::new(),
                    l => {
                        let v: Vec<String> = l.split(',').map(str::to_string).collect();
                        if v.iter().any(String::is_empty) {
                            return Err(err(ln, ts[4].col, "empty line id in list"));
                        }
                        v
                    }
                };
                doc.connections.push(ConnectionRecord {
                    id: ts[1].text.to_string(),
                    from: ts[2].text.to_string(),
                    to: ts[3].text.to_string(),
                    lines,
                });
            }
            "line" => {
                arity(&ts, 3, ln, body, "line")?;
                let color = ts[2]
                    .text
                    .parse()
                    .map_err(|m: String| err(ln, ts[2].col, m))?;
                doc.lines.push(LineRecord {
                    id: ts[1].text.to_string(),
                    color,
                    stations: ts[3..].iter().map(|t| t.text.to_string()).collect(),
                });
            }
            other => return Err(err(ln, head.col, format!("unknown record `{other}`"))),
        }
    }
    Ok(doc)
}

pub fn parse_network(text: &str) -> Result<TransitNetwork> {
    TransitNetwork::from_document(&parse_network_document(text)?)
}

pub fn emit_network_document(doc: &NetworkDocument) -> String {
    let mut out = String::new();
    for s in &doc.stations {
        let _ = write!(out, "station {} {} {}", s.id, s.x, s.y);
        if !s.name.is_empty() {
            let _ = write!(out, " {}", s.name);
        }
        out.push('\n');
    }
    for c in &doc.connections {
        let lines = if c.lines.is_empty() {
            "-".to_string()
        } else {
            c.lines.join(",")
        };
        let _ = writeln!(out, "connection {} {} {} {}", c.id, c.from, c.to, lines);
    }
    for l in &doc.lines {
        let _ = writeln!(out, "line {} {} {}", l.id, l.color, l.stations.join(" "));
    }
    out
}

pub fn emit_network(net: &TransitNetwork) -> String {
    emit_network_document(&net.to_document())
}

fn point(t: &Token, line: usize) -> Result<Point> {
    let (x, y) = t
        .text
        .split_once(',')
        .ok_or_else(|| err(line, t.col, format!("expected x,y, found `{}`", t.text)))?;
    let part = |s: &str, off: usize| -> Result<f64> {
        number(
            &Token {
                text: s,
                col: t.col + off,
            },
            line,
        )
    };
    Ok(Point::new(part(x, 0)?, part(y, x.len() + 1)?))
}

pub fn parse_shape(text: &str) -> Result<GuideShape> {
    let mut polylines = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let body = strip_comment(raw);
        let ts = tokens(body);
        let Some(head) = ts.first() else { continue };
        if head.text != "polyline" {
            return Err(err(ln, head.col, format!("unknown record `{}`", head.text)));
        }
        arity(&ts, 2, ln, body, "polyline")?;
        let closed = match ts[1].text {
            "open" => false,
            "closed" => true,
            o => {
                return Err(err(
                    ln,
                    ts[1].col,
                    format!("expected open or closed, found `{o}`"),
                ))
            }
        };
        let pts = ts[2..]
            .iter()
            .map(|t| point(t, ln))
            .collect::<Result<Vec<_>>>()?;
        let line = Polyline::new(pts, closed).map_err(|e| match e {
            Error::DegeneratePolyline(m) => Error::DegeneratePolyline(format!("line {ln}: {m}")),
            e => e,
        })?;
        polylines.push(line);
    }
    if polylines.is_empty() {
        return Err(err(1, 1, "shape document has no polyline"));
    }
    GuideShape::new(polylines)
}

pub fn emit_shape(shape: &GuideShape) -> String {
    let mut out = String::new();
    for p in &shape.polylines {
        out.push_str(if p.is_closed() {
            "polyline closed"
        } else {
            "polyline open"
        });
        for v in p.vertices() {
            let _ = write!(out, " {},{}", v.x, v.y);
        }
        out.push('\n');
    }
    out
}

/// `station <id> <x> <y> <shape|octo>` per station.
pub fn emit_layout(net: &TransitNetwork, positions: &[Point], shape_stations: &[bool]) -> String {
    let mut out = String::new();
    for (i, s) in net.stations.iter().enumerate() {
        let kind = if shape_stations.get(i).copied().unwrap_or(false) {
            "shape"
        } else {
            "octo"
        };
        let _ = writeln!(
            out,
            "station {} {} {} {}",
            s.id, positions[i].x, positions[i].y, kind
        );
    }
    out
}

/// Layout plus `path <connection> <routed|failed> <x,y> ...` per connection.
pub fn emit_grid_layout(
    net: &TransitNetwork,
    layout: &crate::grid::GridLayout,
    shape_stations: &[bool],
) -> String {
    let mut out = emit_layout(net, &layout.positions, shape_stations);
    for (c, p) in net.connections.iter().zip(&layout.paths) {
        let _ = write!(
            out,
            "path {} {}",
            c.id,
            if p.routed { "routed" } else { "failed" }
        );
        for v in &p.points {
            let _ = write!(out, " {},{}", v.x, v.y);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "station a 0 0 Alpha Square\nstation b 1 0.5 Beta\nconnection c a b L\nline L #ff0000 a b\n";

    #[test]
    fn minimal_document() {
        let net = parse_network(MINIMAL).unwrap();
        assert_eq!(net.station_count(), 2);
        assert_eq!(net.connections.len(), 1);
        assert_eq!(net.stations[0].name, "Alpha Square");
        assert_eq!(emit_network(&net), MINIMAL);
    }

    #[test]
    fn unknown_station_is_validation_error() {
        let text = "station a 0 0 A\nconnection c a zz L\nline L #ff0000 a zz\n";
        assert!(matches!(parse_network(text), Err(Error::Validation(_))));
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_network("station a 0 0 A\nstation b x 1 B\n") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (2, 11)),
            r => panic!("{r:?}"),
        }
        match parse_network("  bogus a\n") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (1, 3)),
            r => panic!("{r:?}"),
        }
        match parse_shape("polyline open 0,0 1,q\n") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (1, 21)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn comments_and_colors() {
        let text = "# header\nstation a 0 0 A # trailing\nstation b 1 0\nconnection c a b L\nline L #00ff7f a b\n";
        let doc = parse_network_document(text).unwrap();
        assert_eq!(doc.stations[0].name, "A");
        assert_eq!(doc.lines[0].color.to_string(), "#00ff7f");
    }

    #[test]
    fn shape_round_trip() {
        let s = parse_shape("polyline closed 0,0 1,0 1,1\npolyline open 2,2 3,2.5\n").unwrap();
        assert_eq!(s.polylines.len(), 2);
        assert!(s.polylines[0].is_closed());
        assert_eq!(parse_shape(&emit_shape(&s)).unwrap(), s);
        assert!(matches!(
            parse_shape("polyline open 0,0\n"),
            Err(Error::DegeneratePolyline(_))
        ));
    }

    proptest! {
        #[test]
        fn network_round_trip(n in 2usize..12, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut text = String::new();
            for i in 0..n {
                let x: f64 = rng.gen_range(-100.0..100.0);
                let y: f64 = rng.gen_range(-100.0..100.0);
                text.push_str(&format!("station s{i} {x} {y} Stop {i}\n"));
            }
            for i in 0..n - 1 {
                text.push_str(&format!("connection c{i} s{i} s{} A\n", i + 1));
            }
            let stops: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
            text.push_str(&format!("line A #123abc {}\n", stops.join(" ")));
            let net = parse_network(&text).unwrap();
            prop_assert_eq!(emit_network(&net), text.clone());
            prop_assert_eq!(parse_network(&emit_network(&net)).unwrap(), net);
        }
    }
}
