//! Route matching: find a network path resembling the guide shape and place
//! the shape on it.

mod shape;

pub use shape::GuideShape;

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::f64::consts::FRAC_PI_4;

use log::debug;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    bbox_align, BBox, DirectionProfile, Point, Polyline, Similarity, DEFAULT_SAMPLES,
};
use crate::network::{ConnectionKind, StationKind, TransitNetwork};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    pub n_samples: usize,
    /// Multiplier of the per-edge mean cost charged for every dummy edge.
    pub dummy_penalty: f64,
    /// Only start the growth from stations inside this box.
    pub window: Option<BBox>,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_SAMPLES,
            dummy_penalty: 5.0,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedRoute {
    /// Station indices of W. A closed route does not repeat its first station.
    pub stations: Vec<usize>,
    /// Connection ids joining consecutive stations (including the closing one).
    pub edges: Vec<String>,
    pub closed: bool,
    /// Full distance between W and the anchor polyline.
    pub score: f64,
    pub dummy_count: usize,
    /// Matched part of the anchor polyline, as arc fractions.
    pub subcurve: (f64, f64),
    pub placement: Similarity,
    /// Distance after each accepted extension; non-increasing.
    pub trace: Vec<f64>,
}

impl MatchedRoute {
    fn single(start: usize) -> Self {
        Self {
            stations: vec![start],
            edges: Vec::new(),
            closed: false,
            score: f64::INFINITY,
            dummy_count: 0,
            subcurve: (0.0, 1.0),
            placement: Similarity::IDENTITY,
            trace: Vec::new(),
        }
    }

    pub fn polyline(&self, pos: &[Point]) -> Result<Polyline> {
        Polyline::new_dedup(self.stations.iter().map(|&s| pos[s]).collect(), self.closed)
    }
}

struct Matcher<'a> {
    net: &'a TransitNetwork,
    target: DirectionProfile,
    closed_shape: bool,
    n: usize,
    /// Penalty per dummy edge.
    unit_penalty: f64,
    pos: Vec<Point>,
}

impl<'a> Matcher<'a> {
    fn new(net: &'a TransitNetwork, shape: &GuideShape, cfg: &MatchConfig) -> Self {
        let anchor = shape.anchor_polyline();
        // mean cost of one edge: a 45° deviation spread over the anchor's segments
        let unit_penalty = cfg.dummy_penalty * FRAC_PI_4 / anchor.segment_count() as f64;
        Self {
            net,
            target: DirectionProfile::new(anchor, cfg.n_samples),
            closed_shape: anchor.is_closed(),
            n: cfg.n_samples,
            unit_penalty,
            pos: net.positions(),
        }
    }

    fn profile(&self, stations: &[usize], closed: bool) -> Option<DirectionProfile> {
        let pts = stations.iter().map(|&s| self.pos[s]).collect();
        Polyline::new_dedup(pts, closed)
            .ok()
            .map(|p| DirectionProfile::new(&p, self.n))
    }

    fn grow(&self, start: usize) -> MatchedRoute {
        let net = self.net;
        let mut route = MatchedRoute::single(start);
        let mut visited = vec![false; net.station_count()];
        visited[start] = true;
        let mut w = vec![start];
        let mut scratch = Vec::with_capacity(net.station_count() + 1);

        struct Cand {
            rank: f64,
            full: f64,
            v: usize,
            conn: usize,
            closing: bool,
        }

        loop {
            let tail = *w.last().unwrap();
            let mut best: Option<Cand> = None;
            for &(v, c) in net.neighbors(tail) {
                let closing = v == start && self.closed_shape && w.len() >= 3;
                if visited[v] && !closing {
                    continue;
                }
                scratch.clear();
                scratch.extend_from_slice(&w);
                if !closing {
                    scratch.push(v);
                }
                let Some(prof) = self.profile(&scratch, closing) else {
                    continue;
                };
                let full = prof.distance_to(&self.target);
                // equal distance still improves the key (δ, -|W|), so an exact
                // match keeps growing along a matching line
                if !(full <= route.score + TOL) {
                    continue;
                }
                let dummy = net.connections[c].kind == ConnectionKind::DummyShortcut;
                let dummies = route.dummy_count + usize::from(dummy);
                let rank =
                    prof.partial_distance_to(&self.target) + self.unit_penalty * dummies as f64;
                let better = match &best {
                    None => true,
                    Some(b) => match cmp_tol(rank, b.rank).then(cmp_tol(full, b.full)) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => net.stations[v].id < net.stations[b.v].id,
                    },
                };
                if better {
                    best = Some(Cand {
                        rank,
                        full,
                        v,
                        conn: c,
                        closing,
                    });
                }
            }
            let Some(b) = best else { break };
            debug_assert!(b.full <= route.score + TOL);
            route.score = b.full;
            route.trace.push(b.full);
            route.edges.push(net.connections[b.conn].id.clone());
            if net.connections[b.conn].kind == ConnectionKind::DummyShortcut {
                route.dummy_count += 1;
            }
            if b.closing {
                route.closed = true;
                break;
            }
            visited[b.v] = true;
            w.push(b.v);
        }
        route.stations = w;
        if route.score.is_finite() {
            if let Some(p) = self.profile(&route.stations, route.closed) {
                route.subcurve = p.match_partial(&self.target).subcurve;
            }
        }
        route
    }

    fn total(&self, r: &MatchedRoute) -> f64 {
        r.score + self.unit_penalty * r.dummy_count as f64
    }
}

fn cmp_tol(a: f64, b: f64) -> Ordering {
    if a < b - TOL {
        Ordering::Less
    } else if a > b + TOL {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

/// Grows a path from `start`, appending at each step the improving neighbour
/// of the tail with the lowest partial distance (plus dummy penalty).
/// `net` is the matching network, i.e. with dummy shortcuts inserted.
pub fn grow_path(
    net: &TransitNetwork,
    shape: &GuideShape,
    start: usize,
    cfg: &MatchConfig,
) -> MatchedRoute {
    let m = Matcher::new(net, shape, cfg);
    let mut r = m.grow(start);
    r.placement = placement_for(&r, &m.pos, shape).unwrap_or(Similarity::IDENTITY);
    r
}

fn placement_for(r: &MatchedRoute, pos: &[Point], shape: &GuideShape) -> Result<Similarity> {
    let target = BBox::of_points(r.stations.iter().map(|&s| pos[s]))
        .ok_or(Error::DegenerateBBox("route"))?;
    bbox_align(&shape.anchor_polyline().bbox(), &target)
}

/// Runs [`grow_path`] from every admissible start and keeps the best route by
/// (score + dummy penalty, dummy count, station-id sequence).
pub fn match_route(
    net: &TransitNetwork,
    shape: &GuideShape,
    cfg: &MatchConfig,
) -> Result<MatchedRoute> {
    let m = Matcher::new(net, shape, cfg);
    let starts: Vec<usize> = (0..net.station_count())
        .filter(|&s| {
            cfg.window
                .as_ref()
                .is_none_or(|w| w.contains(net.stations[s].pos))
        })
        .collect();
    let routes: Vec<MatchedRoute> = starts.par_iter().map(|&s| m.grow(s)).collect();
    let mut best: Option<(MatchedRoute, Vec<String>)> = None;
    for r in routes {
        if !r.score.is_finite() {
            continue;
        }
        let ids = net.ids(&r.stations);
        let better = match &best {
            None => true,
            Some((b, bids)) => {
                cmp_tol(m.total(&r), m.total(b))
                    .then(r.dummy_count.cmp(&b.dummy_count))
                    .then_with(|| ids.cmp(bids))
                    == Ordering::Less
            }
        };
        if better {
            best = Some((r, ids));
        }
    }
    let (mut r, ids) = best.ok_or(Error::NoRoute)?;
    debug!(
        "matched route {:?} score {:.6} dummies {}",
        ids, r.score, r.dummy_count
    );
    r.placement = placement_for(&r, &m.pos, shape).unwrap_or(Similarity::IDENTITY);
    Ok(r)
}

/// Fits the shape onto the route's bounding box. Every polyline gets the
/// same transform, so multi-polyline shapes keep their relative layout.
pub fn place_shape(
    shape: &GuideShape,
    route: &MatchedRoute,
    pos: &[Point],
) -> Result<(GuideShape, Similarity)> {
    if route.stations.len() < 2 {
        return Err(Error::InvalidParameter(
            "route needs at least two stations".into(),
        ));
    }
    let t = placement_for(route, pos, shape)?;
    Ok((shape.transformed(&t), t))
}

/// Wraps a user-given station sequence as a route. Consecutive ids may be
/// separated by stations introduced during normalization (crossing dummies
/// and fragments of split stations); those are filled in.
pub fn manual_route(
    net: &TransitNetwork,
    station_ids: &[String],
    shape: &GuideShape,
    n_samples: usize,
) -> Result<MatchedRoute> {
    if station_ids.len() < 2 {
        return Err(Error::InvalidParameter(
            "manual route needs at least two stations".into(),
        ));
    }
    let idx: Vec<usize> = station_ids
        .iter()
        .map(|id| {
            net.station_index(id)
                .ok_or_else(|| Error::UnknownStation(id.clone()))
        })
        .collect::<Result<_>>()?;
    let mut stations = vec![idx[0]];
    let mut edges = Vec::new();
    for w in idx.windows(2) {
        let path = bridge(net, w[0], w[1]).ok_or_else(|| {
            Error::RouteGap(net.stations[w[0]].id.clone(), net.stations[w[1]].id.clone())
        })?;
        for p in path.windows(2) {
            let c = net
                .connection_between(p[0], p[1])
                .expect("bridge follows connections");
            edges.push(net.connections[c].id.clone());
        }
        stations.extend_from_slice(&path[1..]);
    }
    let closed = stations.len() > 3 && stations.first() == stations.last();
    if closed {
        stations.pop();
    }
    let uniq: HashSet<usize> = stations.iter().copied().collect();
    if uniq.len() != stations.len() {
        return Err(Error::InvalidParameter(
            "manual route repeats a station".into(),
        ));
    }
    let pos = net.positions();
    let mut route = MatchedRoute::single(stations[0]);
    route.stations = stations;
    route.edges = edges;
    route.closed = closed;
    let target = DirectionProfile::new(shape.anchor_polyline(), n_samples);
    let prof = DirectionProfile::new(&route.polyline(&pos)?, n_samples);
    route.score = prof.distance_to(&target);
    route.subcurve = prof.match_partial(&target).subcurve;
    route.trace = vec![route.score];
    route.placement = placement_for(&route, &pos, shape).unwrap_or(Similarity::IDENTITY);
    Ok(route)
}

/// Shortest path from `a` to `b` whose interior stations are normalization
/// artefacts (crossing dummies or fragments of `a` / `b`).
fn bridge(net: &TransitNetwork, a: usize, b: usize) -> Option<Vec<usize>> {
    if net.connection_between(a, b).is_some() {
        return Some(vec![a, b]);
    }
    let origin = |s: usize| {
        net.stations[s]
            .origin
            .clone()
            .unwrap_or_else(|| net.stations[s].id.clone())
    };
    let (oa, ob) = (origin(a), origin(b));
    let transparent = |s: usize| {
        let st = &net.stations[s];
        st.kind == StationKind::DummyPlanarization
            || st.origin.as_ref().is_some_and(|o| *o == oa || *o == ob)
    };
    let mut prev = vec![usize::MAX; net.station_count()];
    prev[a] = a;
    let mut q = VecDeque::from([a]);
    while let Some(u) = q.pop_front() {
        for &(v, c) in net.neighbors(u) {
            if prev[v] != usize::MAX || net.connections[c].kind == ConnectionKind::DummyShortcut {
                continue;
            }
            prev[v] = u;
            if v == b {
                let mut path = vec![b];
                let mut x = b;
                while x != a {
                    x = prev[x];
                    path.push(x);
                }
                path.reverse();
                return Some(path);
            }
            if transparent(v) {
                q.push_back(v);
            }
        }
    }
    None
}
