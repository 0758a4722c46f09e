use std::collections::{HashMap, HashSet};

use super::Rgb;

#[derive(Debug, Clone, PartialEq)]
pub struct StationRecord {
    pub id: String,
    pub name: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionRecord {
    pub id: String,
    pub from: String,
    pub to: String,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineRecord {
    pub id: String,
    pub color: Rgb,
    pub stations: Vec<String>,
}

/// Network as written in a document: every reference is by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkDocument {
    pub stations: Vec<StationRecord>,
    pub connections: Vec<ConnectionRecord>,
    pub lines: Vec<LineRecord>,
}

/// Lists every integrity problem of `doc`; empty iff the document is well formed.
pub fn validate(doc: &NetworkDocument) -> Vec<String> {
    let mut out = Vec::new();

    let mut stations = HashSet::new();
    for s in &doc.stations {
        if !stations.insert(s.id.as_str()) {
            out.push(format!("duplicate station id {}", s.id));
        }
        if !(s.x.is_finite() && s.y.is_finite()) {
            out.push(format!("station {} has a non-finite position", s.id));
        }
    }
    let mut line_ids = HashSet::new();
    for l in &doc.lines {
        if !line_ids.insert(l.id.as_str()) {
            out.push(format!("duplicate line id {}", l.id));
        }
    }

    let mut conn_ids = HashSet::new();
    let mut carried: HashMap<(&str, &str), HashSet<&str>> = HashMap::new();
    for c in &doc.connections {
        if !conn_ids.insert(c.id.as_str()) {
            out.push(format!("duplicate connection id {}", c.id));
        }
        for end in [&c.from, &c.to] {
            if !stations.contains(end.as_str()) {
                out.push(format!(
                    "connection {} references unknown station {}",
                    c.id, end
                ));
            }
        }
        if c.from == c.to {
            out.push(format!(
                "connection {} joins station {} to itself",
                c.id, c.from
            ));
        }
        if c.lines.is_empty() {
            out.push(format!("connection {} belongs to no line", c.id));
        }
        for l in &c.lines {
            if !line_ids.contains(l.as_str()) {
                out.push(format!("connection {} references unknown line {}", c.id, l));
            }
        }
        let key = if c.from <= c.to {
            (c.from.as_str(), c.to.as_str())
        } else {
            (c.to.as_str(), c.from.as_str())
        };
        carried
            .entry(key)
            .or_default()
            .extend(c.lines.iter().map(String::as_str));
    }

    for l in &doc.lines {
        if l.stations.len() < 2 {
            out.push(format!("line {} has fewer than two stations", l.id));
        }
        for s in &l.stations {
            if !stations.contains(s.as_str()) {
                out.push(format!("line {} references unknown station {}", l.id, s));
            }
        }
        for w in l.stations.windows(2) {
            let key = if w[0] <= w[1] {
                (w[0].as_str(), w[1].as_str())
            } else {
                (w[1].as_str(), w[0].as_str())
            };
            if !carried
                .get(&key)
                .is_some_and(|ls| ls.contains(l.id.as_str()))
            {
                out.push(format!(
                    "line {} has no connection carrying it between {} and {}",
                    l.id, w[0], w[1]
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_station_line() -> NetworkDocument {
        let st = |id: &str, x: f64| StationRecord {
            id: id.into(),
            name: id.to_uppercase(),
            x,
            y: 0.0,
        };
        let cn = |id: &str, a: &str, b: &str| ConnectionRecord {
            id: id.into(),
            from: a.into(),
            to: b.into(),
            lines: vec!["red".into()],
        };
        NetworkDocument {
            stations: vec![st("a", 0.0), st("b", 1.0), st("c", 2.0)],
            connections: vec![cn("ab", "a", "b"), cn("bc", "b", "c")],
            lines: vec![LineRecord {
                id: "red".into(),
                color: Rgb(255, 0, 0),
                stations: vec!["a".into(), "b".into(), "c".into()],
            }],
        }
    }

    #[test]
    fn well_formed_line_has_no_violations() {
        assert!(validate(&three_station_line()).is_empty());
    }

    #[test]
    fn unknown_station_is_named() {
        let mut doc = three_station_line();
        doc.connections[1].to = "zz".into();
        let v = validate(&doc);
        // the dangling endpoint, and the line no longer has its b-c connection
        assert!(v.iter().any(|m| m.contains("unknown station zz")), "{v:?}");
        assert_eq!(v.iter().filter(|m| m.contains("zz")).count(), 1);
    }

    #[test]
    fn line_gap_is_reported_once() {
        let mut doc = three_station_line();
        doc.connections.pop();
        doc.stations.push(StationRecord {
            id: "d".into(),
            name: "D".into(),
            x: 3.0,
            y: 0.0,
        });
        let v = validate(&doc);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains("between b and c"));
    }

    #[test]
    fn duplicate_ids() {
        let mut doc = three_station_line();
        doc.stations[2].id = "a".into();
        doc.lines[0].stations = vec!["a".into(), "b".into()];
        doc.connections.pop();
        assert_eq!(validate(&doc), vec!["duplicate station id a".to_string()]);
    }
}
