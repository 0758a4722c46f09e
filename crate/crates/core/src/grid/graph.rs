//! Port-augmented octilinear grid with a spliced guide shape.
//!
//! Ports are implicit: every hop (port-to-port edge between two sinks) owns
//! one port at each end, so a sink has one port per incident hop. A shortest
//! path state is "arrived at a sink through a hop".

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{crossing_pairs, segments_intersect, BBox, Point, Segment, SharedEndpoint};
use crate::matching::GuideShape;

use super::GridConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinkKind {
    Grid { col: usize, row: usize },
    Shape { polyline: usize, vertex: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sink {
    pub pos: Point,
    pub kind: SinkKind,
    pub removed: bool,
    /// Incident hops, one port each.
    pub hops: Vec<usize>,
}

impl Sink {
    pub fn is_shape(&self) -> bool {
        matches!(self.kind, SinkKind::Shape { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hop {
    pub a: usize,
    pub b: usize,
    pub cost: f64,
    pub removed: bool,
}

impl Hop {
    pub fn other(&self, s: usize) -> usize {
        if self.a == s {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occupant {
    Station(usize),
    Route(usize),
}

#[derive(Debug, Clone)]
pub struct GridGraph {
    pub cfg: GridConfig,
    pub cols: usize,
    pub rows: usize,
    pub origin: Point,
    pub sinks: Vec<Sink>,
    pub hops: Vec<Hop>,
    pub occupied: Vec<Option<Occupant>>,
    pub hop_used: Vec<bool>,
    /// Number of used hops crossing each hop.
    hop_blocked: Vec<u32>,
    crossings: Vec<Vec<usize>>,
}

/// Grid sinks are columns × rows cells covering `bbox` plus `cfg.margin` cells.
pub fn build_grid(bbox: BBox, cfg: &GridConfig) -> Result<GridGraph> {
    if bbox.is_degenerate() && bbox.width() == 0.0 && bbox.height() == 0.0 {
        return Err(Error::DegenerateBBox("layout"));
    }
    let d = cfg.cell;
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "grid cell size must be positive, got {d}"
        )));
    }
    let m = cfg.margin as f64 * d;
    let origin = bbox.min - Point::new(m, m);
    let cols = ((bbox.width() / d).ceil() as usize).max(1) + 2 * cfg.margin;
    let rows = ((bbox.height() / d).ceil() as usize).max(1) + 2 * cfg.margin;
    let mut g = GridGraph {
        cfg: cfg.clone(),
        cols,
        rows,
        origin,
        sinks: Vec::with_capacity((cols + 1) * (rows + 1)),
        hops: Vec::new(),
        occupied: Vec::new(),
        hop_used: Vec::new(),
        hop_blocked: Vec::new(),
        crossings: Vec::new(),
    };
    for row in 0..=rows {
        for col in 0..=cols {
            g.sinks.push(Sink {
                pos: origin + Point::new(col as f64 * d, row as f64 * d),
                kind: SinkKind::Grid { col, row },
                removed: false,
                hops: Vec::new(),
            });
        }
    }
    let id = |c: usize, r: usize| r * (cols + 1) + c;
    for row in 0..=rows {
        for col in 0..=cols {
            let s = id(col, row);
            if col < cols {
                g.add_hop(s, id(col + 1, row), cfg.c_hop);
            }
            if row < rows {
                g.add_hop(s, id(col, row + 1), cfg.c_hop);
                if col < cols {
                    g.add_hop(s, id(col + 1, row + 1), cfg.c_hop);
                }
                if col > 0 {
                    g.add_hop(s, id(col - 1, row + 1), cfg.c_hop);
                }
            }
        }
    }
    g.finish();
    Ok(g)
}

/// Splices the shape into the grid: its resampled vertices become sinks,
/// grid hops crossing it and grid sinks too close to it are removed, and
/// every shape sink is tied to grid sinks at distance `[d_low, d_up]`.
pub fn overlay_shape(mut g: GridGraph, shape: &GuideShape) -> Result<GridGraph> {
    let cfg = g.cfg.clone();
    let first_shape = g.sinks.len();
    let mut shape_segs: Vec<(Segment, [usize; 2])> = Vec::new();
    for (pi, line) in shape.polylines.iter().enumerate() {
        let line = line.resample(cfg.cell)?;
        let base = g.sinks.len();
        for (vi, &v) in line.vertices().iter().enumerate() {
            g.sinks.push(Sink {
                pos: v,
                kind: SinkKind::Shape {
                    polyline: pi,
                    vertex: vi,
                },
                removed: false,
                hops: Vec::new(),
            });
        }
        let n = line.vertices().len();
        for k in 0..line.segment_count() {
            let (a, b) = (base + k, base + (k + 1) % n);
            shape_segs.push((Segment::new(g.sinks[a].pos, g.sinks[b].pos), [a, b]));
            g.add_hop(a, b, cfg.c_hop / 20.0);
        }
    }

    // grid hops crossing the shape
    let grid_hops: Vec<usize> = (0..g.hops.len())
        .filter(|&h| !g.sinks[g.hops[h].a].is_shape())
        .collect();
    let mut segs: Vec<(Segment, [usize; 2])> =
        grid_hops.iter().map(|&h| g.hop_segment(h)).collect();
    segs.extend(shape_segs.iter().copied());
    for (i, j) in crossing_pairs(&segs) {
        if i < grid_hops.len() && j >= grid_hops.len() {
            g.hops[grid_hops[i]].removed = true;
        }
    }

    // grid sinks near shape vertices, via a bucket lookup on the regular grid
    let near = |g: &GridGraph, p: Point, radius: f64| -> Vec<usize> {
        let d = cfg.cell;
        let lo = ((p - g.origin) - Point::new(radius, radius)) / d;
        let hi = ((p - g.origin) + Point::new(radius, radius)) / d;
        let c0 = lo.x.floor().max(0.0) as usize;
        let r0 = lo.y.floor().max(0.0) as usize;
        let c1 = (hi.x.ceil().max(0.0) as usize).min(g.cols);
        let r1 = (hi.y.ceil().max(0.0) as usize).min(g.rows);
        let mut out = Vec::new();
        for r in r0..=r1.max(r0) {
            for c in c0..=c1.max(c0) {
                if r <= g.rows && c <= g.cols {
                    let s = r * (g.cols + 1) + c;
                    if g.sinks[s].pos.dist(p) <= radius {
                        out.push(s);
                    }
                }
            }
        }
        out
    };
    for s in first_shape..g.sinks.len() {
        for t in near(&g, g.sinks[s].pos, cfg.d_min) {
            g.sinks[t].removed = true;
        }
    }
    for h in 0..g.hops.len() {
        if g.sinks[g.hops[h].a].removed || g.sinks[g.hops[h].b].removed {
            g.hops[h].removed = true;
        }
    }

    for s in first_shape..g.sinks.len() {
        let v = g.sinks[s].pos;
        let mut linked = 0;
        for t in near(&g, v, cfg.d_up) {
            let dist = g.sinks[t].pos.dist(v);
            if g.sinks[t].removed || dist < cfg.d_low {
                continue;
            }
            let link = Segment::new(v, g.sinks[t].pos);
            let blocked = shape_segs.iter().any(|(seg, ends)| {
                let shared = if ends.contains(&s) {
                    SharedEndpoint::Declared
                } else {
                    SharedEndpoint::None
                };
                segments_intersect(link, *seg, shared)
            });
            if !blocked {
                g.add_hop(s, t, cfg.c_hop / 2.0);
                linked += 1;
            }
        }
        if linked == 0 {
            return Err(Error::ShapeUnreachable);
        }
    }
    g.finish();
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, o: &Self) -> Ordering {
        o.cost
            .total_cmp(&self.cost)
            .then_with(|| o.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// A found route: sinks from source to target and the hops between them.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub sinks: Vec<usize>,
    pub hops: Vec<usize>,
    pub cost: f64,
}

impl GridGraph {
    fn add_hop(&mut self, a: usize, b: usize, cost: f64) {
        let h = self.hops.len();
        self.hops.push(Hop {
            a,
            b,
            cost,
            removed: false,
        });
        self.sinks[a].hops.push(h);
        self.sinks[b].hops.push(h);
    }

    /// Drops removed hops from the port lists and rebuilds the crossing table.
    fn finish(&mut self) {
        for s in 0..self.sinks.len() {
            let hops = std::mem::take(&mut self.sinks[s].hops);
            self.sinks[s].hops = hops
                .into_iter()
                .filter(|&h| !self.hops[h].removed)
                .collect();
        }
        let live: Vec<usize> = (0..self.hops.len())
            .filter(|&h| !self.hops[h].removed)
            .collect();
        let segs: Vec<(Segment, [usize; 2])> = live.iter().map(|&h| self.hop_segment(h)).collect();
        self.crossings = vec![Vec::new(); self.hops.len()];
        for (i, j) in crossing_pairs(&segs) {
            self.crossings[live[i]].push(live[j]);
            self.crossings[live[j]].push(live[i]);
        }
        self.occupied = vec![None; self.sinks.len()];
        self.hop_used = vec![false; self.hops.len()];
        self.hop_blocked = vec![0; self.hops.len()];
    }

    fn hop_segment(&self, h: usize) -> (Segment, [usize; 2]) {
        let hop = &self.hops[h];
        (
            Segment::new(self.sinks[hop.a].pos, self.sinks[hop.b].pos),
            [hop.a, hop.b],
        )
    }

    pub fn live_sinks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.sinks.len()).filter(|&s| !self.sinks[s].removed)
    }

    pub fn port_count(&self, s: usize) -> usize {
        self.sinks[s].hops.len()
    }

    /// Hops crossing `h` geometrically.
    pub fn crossing(&self, h: usize) -> &[usize] {
        &self.crossings[h]
    }

    /// Inner angle ∠ at sink `s` between the ports of hops `h1` and `h2`.
    pub fn port_angle(&self, s: usize, h1: usize, h2: usize) -> f64 {
        let p = self.sinks[s].pos;
        let u = self.sinks[self.hops[h1].other(s)].pos - p;
        let v = self.sinks[self.hops[h2].other(s)].pos - p;
        u.cross(v).abs().atan2(u.dot(v))
    }

    /// Within-sink edge cost: `k (2π − θ)` for inner angle θ.
    pub fn turn_cost(&self, s: usize, h1: usize, h2: usize) -> f64 {
        let k = if self.sinks[s].is_shape() {
            1.0
        } else {
            self.cfg.turn_scale()
        };
        k * (2.0 * PI - self.port_angle(s, h1, h2))
    }

    pub fn hop_usable(&self, h: usize) -> bool {
        !self.hops[h].removed && !self.hop_used[h] && self.hop_blocked[h] == 0
    }

    /// Shortest path from one of `sources` to one of `targets`, each with its
    /// virtual edge cost. Intermediate sinks must be free; shape sinks are
    /// only traversed when `through_shape` is set.
    pub fn shortest_path(
        &self,
        sources: &[(usize, f64)],
        targets: &[(usize, f64)],
        through_shape: bool,
    ) -> Option<GridPath> {
        let ports = 2 * self.hops.len();
        let end = ports;
        let mut dist = vec![f64::INFINITY; ports + 1];
        let mut prev = vec![usize::MAX; ports + 1];
        let mut target_cost = vec![f64::NAN; self.sinks.len()];
        for &(t, c) in targets {
            target_cost[t] = c;
        }
        // port 2h sits at hop.a (arrived from b), 2h+1 at hop.b
        let port_at = |h: usize, s: usize| {
            if self.hops[h].a == s {
                2 * h
            } else {
                2 * h + 1
            }
        };
        let sink_of = |p: usize| {
            let h = &self.hops[p / 2];
            if p.is_multiple_of(2) {
                h.a
            } else {
                h.b
            }
        };
        let enterable = |s: usize| {
            !self.sinks[s].removed
                && (!target_cost[s].is_nan()
                    || (self.occupied[s].is_none() && (through_shape || !self.sinks[s].is_shape())))
        };
        let mut heap = BinaryHeap::new();
        for &(s, c) in sources {
            for &h in &self.sinks[s].hops {
                let t = self.hops[h].other(s);
                if !self.hop_usable(h) || !enterable(t) || t == s {
                    continue;
                }
                let p = port_at(h, t);
                let cost = c + self.cfg.c_sink + self.hops[h].cost;
                if cost < dist[p] {
                    dist[p] = cost;
                    // prev of a first port encodes its source sink
                    prev[p] = ports + 1 + s;
                    heap.push(State { cost, node: p });
                }
            }
        }
        while let Some(State { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            if node == end {
                break;
            }
            let s = sink_of(node);
            let h_in = node / 2;
            let tc = target_cost[s];
            if !tc.is_nan() {
                let c = cost + self.cfg.c_sink + tc;
                if c < dist[end] {
                    dist[end] = c;
                    prev[end] = node;
                    heap.push(State { cost: c, node: end });
                }
            }
            let free = self.occupied[s].is_none() && (through_shape || !self.sinks[s].is_shape());
            if !free {
                continue;
            }
            for &h in &self.sinks[s].hops {
                if h == h_in || !self.hop_usable(h) {
                    continue;
                }
                let t = self.hops[h].other(s);
                if !enterable(t) {
                    continue;
                }
                let p = port_at(h, t);
                let c = cost + self.turn_cost(s, h_in, h) + self.hops[h].cost;
                if c < dist[p] {
                    dist[p] = c;
                    prev[p] = node;
                    heap.push(State { cost: c, node: p });
                }
            }
        }
        if !dist[end].is_finite() {
            return None;
        }
        let mut hops = Vec::new();
        let mut sinks = Vec::new();
        let mut p = prev[end];
        loop {
            hops.push(p / 2);
            sinks.push(sink_of(p));
            let q = prev[p];
            if q > ports {
                sinks.push(q - ports - 1);
                break;
            }
            p = q;
        }
        hops.reverse();
        sinks.reverse();
        Some(GridPath {
            sinks,
            hops,
            cost: dist[end],
        })
    }

    /// Marks a route's sinks and hops occupied; its end sinks go to the stations.
    pub fn commit(&mut self, path: &GridPath, route: usize, from: usize, to: usize) {
        let n = path.sinks.len();
        for (i, &s) in path.sinks.iter().enumerate() {
            self.occupied[s] = Some(if i == 0 {
                Occupant::Station(from)
            } else if i + 1 == n {
                Occupant::Station(to)
            } else {
                Occupant::Route(route)
            });
        }
        for &h in &path.hops {
            self.hop_used[h] = true;
            for &x in &self.crossings[h] {
                self.hop_blocked[x] += 1;
            }
        }
    }
}
