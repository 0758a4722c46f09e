//! Transit network model and normalization.

mod document;
mod dummy;
mod planarize;
mod split;

pub use document::{validate, ConnectionRecord, LineRecord, NetworkDocument, StationRecord};
pub use dummy::{default_dummy_threshold, insert_dummy_edges};
pub use planarize::planarize;
pub use split::{split_high_degree, MAX_DEGREE};

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{BBox, Point, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StationKind {
    Real,
    DummyPlanarization,
    DummyShortcut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConnectionKind {
    Real,
    DummyShortcut,
    /// Link between fragments of a split high-degree station.
    Auxiliary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

impl FromStr for Rgb {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let hex = s
            .strip_prefix('#')
            .ok_or_else(|| format!("color `{s}` must start with #"))?;
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("color `{s}` is not #rrggbb"));
        }
        let c = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).unwrap();
        Ok(Rgb(c(0), c(2), c(4)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: String,
    pub name: String,
    pub pos: Point,
    pub kind: StationKind,
    /// Id of the original station when this is a fragment of a split station.
    pub origin: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub id: String,
    pub from: usize,
    pub to: usize,
    /// Sorted indices into `TransitNetwork::lines`.
    pub lines: Vec<usize>,
    pub kind: ConnectionKind,
}

impl Connection {
    pub fn other(&self, s: usize) -> usize {
        if self.from == s {
            self.to
        } else {
            self.from
        }
    }

    pub fn touches(&self, s: usize) -> bool {
        self.from == s || self.to == s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub color: Rgb,
    pub stations: Vec<usize>,
}

/// Stations, connections and the lines covering them. Stations and
/// connections are addressed by index; ids are kept for I/O.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitNetwork {
    pub stations: Vec<Station>,
    pub connections: Vec<Connection>,
    pub lines: Vec<Line>,
    adj: Vec<Vec<(usize, usize)>>,
    by_pair: HashMap<(usize, usize), usize>,
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl TransitNetwork {
    pub fn new(stations: Vec<Station>, connections: Vec<Connection>, lines: Vec<Line>) -> Self {
        let mut net = Self {
            stations,
            connections,
            lines,
            adj: Vec::new(),
            by_pair: HashMap::new(),
        };
        net.reindex();
        net
    }

    pub(crate) fn reindex(&mut self) {
        self.adj = vec![Vec::new(); self.stations.len()];
        self.by_pair.clear();
        for (ci, c) in self.connections.iter().enumerate() {
            self.adj[c.from].push((c.to, ci));
            self.adj[c.to].push((c.from, ci));
            self.by_pair.insert(pair(c.from, c.to), ci);
        }
    }

    pub fn from_document(doc: &NetworkDocument) -> Result<Self> {
        let problems = validate(doc);
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let st_idx: HashMap<&str, usize> = doc
            .stations
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();
        let line_idx: HashMap<&str, usize> = doc
            .lines
            .iter()
            .enumerate()
            .map(|(i, l)| (l.id.as_str(), i))
            .collect();
        let stations = doc
            .stations
            .iter()
            .map(|s| Station {
                id: s.id.clone(),
                name: s.name.clone(),
                pos: Point::new(s.x, s.y),
                kind: StationKind::Real,
                origin: None,
            })
            .collect();
        let connections = doc
            .connections
            .iter()
            .map(|c| {
                let mut lines: Vec<usize> = c.lines.iter().map(|l| line_idx[l.as_str()]).collect();
                lines.sort_unstable();
                lines.dedup();
                Connection {
                    id: c.id.clone(),
                    from: st_idx[c.from.as_str()],
                    to: st_idx[c.to.as_str()],
                    lines,
                    kind: ConnectionKind::Real,
                }
            })
            .collect();
        let lines = doc
            .lines
            .iter()
            .map(|l| Line {
                id: l.id.clone(),
                color: l.color,
                stations: l.stations.iter().map(|s| st_idx[s.as_str()]).collect(),
            })
            .collect();
        Ok(Self::new(stations, connections, lines))
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            stations: self
                .stations
                .iter()
                .map(|s| StationRecord {
                    id: s.id.clone(),
                    name: s.name.clone(),
                    x: s.pos.x,
                    y: s.pos.y,
                })
                .collect(),
            connections: self
                .connections
                .iter()
                .map(|c| ConnectionRecord {
                    id: c.id.clone(),
                    from: self.stations[c.from].id.clone(),
                    to: self.stations[c.to].id.clone(),
                    lines: c.lines.iter().map(|&l| self.lines[l].id.clone()).collect(),
                })
                .collect(),
            lines: self
                .lines
                .iter()
                .map(|l| LineRecord {
                    id: l.id.clone(),
                    color: l.color,
                    stations: l
                        .stations
                        .iter()
                        .map(|&s| self.stations[s].id.clone())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn station_index(&self, id: &str) -> Option<usize> {
        self.stations.iter().position(|s| s.id == id)
    }

    /// `(neighbour, connection)` pairs incident to station `s`.
    pub fn neighbors(&self, s: usize) -> &[(usize, usize)] {
        &self.adj[s]
    }

    pub fn degree(&self, s: usize) -> usize {
        self.adj[s].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn connection_between(&self, a: usize, b: usize) -> Option<usize> {
        self.by_pair.get(&pair(a, b)).copied()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.stations.iter().map(|s| s.pos).collect()
    }

    pub fn segment(&self, c: usize, pos: &[Point]) -> Segment {
        let c = &self.connections[c];
        Segment::new(pos[c.from], pos[c.to])
    }

    /// Connection segments tagged with their endpoint station indices.
    pub fn segments(&self, pos: &[Point]) -> Vec<(Segment, [usize; 2])> {
        self.connections
            .iter()
            .map(|c| (Segment::new(pos[c.from], pos[c.to]), [c.from, c.to]))
            .collect()
    }

    pub fn bbox(&self) -> Option<BBox> {
        BBox::of_points(self.stations.iter().map(|s| s.pos))
    }

    pub fn average_connection_length(&self) -> f64 {
        average_length(self, &self.positions())
    }

    /// Station ids of a sequence of station indices.
    pub fn ids(&self, seq: &[usize]) -> Vec<String> {
        seq.iter().map(|&s| self.stations[s].id.clone()).collect()
    }

    /// Structural problems of an index-based network (line continuity,
    /// self loops, duplicate adjacencies, real connections without lines).
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for c in &self.connections {
            if c.from == c.to {
                out.push(format!("connection {} is a self loop", c.id));
            }
            if !seen.insert(pair(c.from, c.to)) {
                out.push(format!("connection {} duplicates an adjacency", c.id));
            }
            if c.kind == ConnectionKind::Real && c.lines.is_empty() {
                out.push(format!("connection {} carries no line", c.id));
            }
            if c.kind == ConnectionKind::DummyShortcut && !c.lines.is_empty() {
                out.push(format!("dummy connection {} carries a line", c.id));
            }
        }
        for (li, l) in self.lines.iter().enumerate() {
            for w in l.stations.windows(2) {
                match self.connection_between(w[0], w[1]) {
                    Some(c) if self.connections[c].lines.contains(&li) => {}
                    _ => out.push(format!(
                        "line {} has no connection between {} and {}",
                        l.id, self.stations[w[0]].id, self.stations[w[1]].id
                    )),
                }
            }
        }
        out
    }

    /// Parallel connections between one station pair collapse into one whose
    /// line set is the union. The first connection's id is kept.
    pub fn merge_parallel(&self) -> TransitNetwork {
        let mut keep: Vec<Connection> = Vec::new();
        let mut at: HashMap<(usize, usize), usize> = HashMap::new();
        for c in &self.connections {
            if c.from == c.to {
                continue;
            }
            match at.get(&pair(c.from, c.to)) {
                Some(&k) => {
                    let merged = &mut keep[k];
                    merged.lines.extend(c.lines.iter().copied());
                    merged.lines.sort_unstable();
                    merged.lines.dedup();
                    if merged.kind != ConnectionKind::Real && c.kind == ConnectionKind::Real {
                        merged.kind = ConnectionKind::Real;
                    }
                }
                None => {
                    at.insert(pair(c.from, c.to), keep.len());
                    keep.push(c.clone());
                }
            }
        }
        TransitNetwork::new(self.stations.clone(), keep, self.lines.clone())
    }

    /// merge parallel → planarize → split high degree → planarize, repeated
    /// while the final planarization pushes a station above the degree bound.
    pub fn normalize(&self) -> Result<TransitNetwork> {
        let mut net = planarize(&self.merge_parallel())?;
        for _ in 0..4 {
            net = planarize(&split_high_degree(&net))?;
            if net.max_degree() <= MAX_DEGREE {
                break;
            }
        }
        Ok(net)
    }
}

pub(crate) fn average_length(net: &TransitNetwork, pos: &[Point]) -> f64 {
    let real: Vec<f64> = net
        .connections
        .iter()
        .filter(|c| c.kind != ConnectionKind::DummyShortcut)
        .map(|c| pos[c.from].dist(pos[c.to]))
        .collect();
    if real.is_empty() {
        return 0.0;
    }
    real.iter().sum::<f64>() / real.len() as f64
}

#[cfg(test)]
pub(crate) mod testnet {
    use super::*;

    /// Builds a network from `(x, y)` stations and connections given as
    /// station index pairs; every connection carries one line per entry of
    /// `lines` that lists it.
    pub fn build(
        pts: &[(f64, f64)],
        edges: &[(usize, usize)],
        lines: &[&[usize]],
    ) -> TransitNetwork {
        let stations = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Station {
                id: format!("s{i}"),
                name: format!("S{i}"),
                pos: Point::new(x, y),
                kind: StationKind::Real,
                origin: None,
            })
            .collect();
        let mut conns: Vec<Connection> = edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| Connection {
                id: format!("c{i}"),
                from: a,
                to: b,
                lines: Vec::new(),
                kind: ConnectionKind::Real,
            })
            .collect();
        let mut ls = Vec::new();
        for (li, seq) in lines.iter().enumerate() {
            for w in seq.windows(2) {
                let c = conns
                    .iter_mut()
                    .find(|c| pair(c.from, c.to) == pair(w[0], w[1]))
                    .expect("line follows connections");
                c.lines.push(li);
            }
            ls.push(Line {
                id: format!("L{li}"),
                color: Rgb(200, 0, 0),
                stations: seq.to_vec(),
            });
        }
        for c in &mut conns {
            c.lines.sort_unstable();
            c.lines.dedup();
        }
        TransitNetwork::new(stations, conns, ls)
    }

    /// One line per connection: handy when line structure is irrelevant.
    pub fn simple(pts: &[(f64, f64)], edges: &[(usize, usize)]) -> TransitNetwork {
        let seqs: Vec<Vec<usize>> = edges.iter().map(|&(a, b)| vec![a, b]).collect();
        let refs: Vec<&[usize]> = seqs.iter().map(Vec::as_slice).collect();
        build(pts, edges, &refs)
    }
}

#[cfg(test)]
mod tests {
    use super::testnet::*;
    use super::*;

    #[test]
    fn rgb_round_trip() {
        let c: Rgb = "#0a7FfF".parse().unwrap();
        assert_eq!(c, Rgb(10, 127, 255));
        assert_eq!(c.to_string(), "#0a7fff");
        assert!("0a7fff".parse::<Rgb>().is_err());
    }

    #[test]
    fn merge_parallel_unions_lines() {
        let mut net = build(&[(0.0, 0.0), (1.0, 0.0)], &[(0, 1)], &[&[0, 1]]);
        let mut extra = net.connections[0].clone();
        extra.id = "dup".into();
        extra.from = 1;
        extra.to = 0;
        extra.lines = vec![1];
        net.lines.push(Line {
            id: "L1".into(),
            color: Rgb(0, 0, 0),
            stations: vec![1, 0],
        });
        net.connections.push(extra);
        net.reindex();
        let m = net.merge_parallel();
        assert_eq!(m.connections.len(), 1);
        assert_eq!(m.connections[0].lines, vec![0, 1]);
        assert!(m.check().is_empty());
    }

    #[test]
    fn check_reports_broken_line() {
        let mut net = build(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            &[(0, 1), (1, 2)],
            &[&[0, 1, 2]],
        );
        net.lines[0].stations = vec![0, 2];
        assert_eq!(net.check().len(), 1);
    }
}
