//! Least-squares deformation: a smooth layout that pulls shape stations onto
//! the guide shape, then a mixed layout that rotates the remaining edges onto
//! octolinear sectors.
//!
//! Both stages minimise their energy by alternating linearization: the
//! nonlinear parts (edge directions, closest shape points, sector projections)
//! are frozen at the current iterate, the resulting sparse linear least-squares
//! problem is solved, and a backtracking step along the solution is accepted
//! only if it keeps the layout planar and does not raise the energy.

mod sectors;
mod solver;

pub use sectors::{
    assign_octolinear_sectors, hungarian, nearest_sector, rotation, sector_angle, sector_dir,
    sectors_valid, station_sectors,
};
pub use solver::LeastSquares;

use log::{debug, warn};

use crate::geometry::{
    closest_point_on_segment, count_crossings, crossing_pairs, segments_intersect, Point, Segment,
    SharedEndpoint,
};
use crate::matching::GuideShape;
use crate::network::{average_length, ConnectionKind, StationKind, TransitNetwork};

const STEP_SCALES: [f64; 7] = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];
const ACCEPT_TOL: f64 = 1e-9;
const HOLD_ITERATIONS: usize = 3;
const GUARD_WEIGHT: f64 = 1.0;
const PROXIMAL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformWeights {
    pub w_c: f64,
    pub w_l: f64,
    pub w_a: f64,
    pub w_p: f64,
    pub w_o: f64,
    /// Target edge length L.
    pub target_length: f64,
}

impl DeformWeights {
    pub fn smooth(target_length: f64) -> Self {
        Self {
            w_c: 4.0,
            w_l: 1.0,
            w_a: 2.0,
            w_p: 0.16,
            w_o: 0.0,
            target_length,
        }
    }

    pub fn mixed(target_length: f64) -> Self {
        Self {
            w_c: 10.0,
            w_l: 0.0,
            w_a: 0.0,
            w_p: 0.1,
            w_o: 2.0,
            target_length,
        }
    }

    /// Target length used for `net`: the average real connection length.
    pub fn default_length(net: &TransitNetwork) -> f64 {
        average_length(net, &net.positions())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformConfig {
    pub max_iter: usize,
    /// Stop once the relative energy decrease falls below this.
    pub tol: f64,
}

impl DeformConfig {
    pub const SMOOTH: DeformConfig = DeformConfig {
        max_iter: 100,
        tol: 1e-4,
    };
    pub const MIXED: DeformConfig = DeformConfig {
        max_iter: 50,
        tol: 1e-4,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub energy: f64,
    /// Crossing pairs of the accepted layout (brute force over all pairs).
    pub crossings: usize,
    /// Stations moved back by the planarity guard in this iteration.
    pub reverted: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutState {
    pub positions: Vec<Point>,
    /// S'_shape, per station.
    pub shape_stations: Vec<bool>,
    /// C'_shape, per connection.
    pub shape_edges: Vec<bool>,
    /// Sector of each octo connection relative to `from → to`; `None` for shape edges.
    pub sectors: Vec<Option<u8>>,
    pub iteration: usize,
    pub energy: f64,
    /// One record per accepted iterate, starting with the initial layout.
    pub trace: Vec<IterationRecord>,
}

impl LayoutState {
    pub fn geographic(net: &TransitNetwork) -> Self {
        Self {
            positions: net.positions(),
            shape_stations: vec![false; net.station_count()],
            shape_edges: vec![false; net.connections.len()],
            sectors: vec![None; net.connections.len()],
            iteration: 0,
            energy: f64::NAN,
            trace: Vec::new(),
        }
    }

    pub fn octo_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.shape_edges
            .iter()
            .enumerate()
            .filter(|(_, s)| !**s)
            .map(|(c, _)| c)
    }
}

/// Stations whose reflection segment across their closest shape point is not
/// blocked by any connection, with those closest points.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeAssignment {
    pub stations: Vec<bool>,
    pub closest: Vec<Point>,
}

pub fn shape_assignment(
    net: &TransitNetwork,
    pos: &[Point],
    shape: &GuideShape,
) -> ShapeAssignment {
    let segs = net.segments(pos);
    let mut stations = vec![false; pos.len()];
    let mut closest = Vec::with_capacity(pos.len());
    for (i, &v) in pos.iter().enumerate() {
        let (p, _, _) = shape.closest_point(v);
        closest.push(p);
        let mirror = Segment::new(v, p * 2.0 - v);
        let lo = mirror.a.x.min(mirror.b.x);
        let hi = mirror.a.x.max(mirror.b.x);
        stations[i] = v == p
            || !segs.iter().any(|(s, ends)| {
                !ends.contains(&i)
                    && s.a.x.max(s.b.x) >= lo
                    && s.a.x.min(s.b.x) <= hi
                    && segments_intersect(mirror, *s, SharedEndpoint::None)
            });
    }
    ShapeAssignment { stations, closest }
}

/// Recomputes S'_shape and C'_shape for the state's positions.
pub fn assign_shape_stations(
    state: &LayoutState,
    net: &TransitNetwork,
    shape: &GuideShape,
) -> LayoutState {
    let a = shape_assignment(net, &state.positions, shape);
    let mut out = state.clone();
    out.shape_edges = net
        .connections
        .iter()
        .map(|c| a.stations[c.from] && a.stations[c.to])
        .collect();
    out.shape_stations = a.stations;
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Stage {
    Smooth,
    Mixed,
}

/// Everything that stays fixed during one stage.
struct Problem<'a> {
    net: &'a TransitNetwork,
    shape: &'a GuideShape,
    w: DeformWeights,
    stage: Stage,
    /// Ω_p anchors.
    anchor: Vec<Point>,
    /// Ω_l target length per connection.
    target_len: Vec<f64>,
    /// Ω_a triples `(i, j, k, t_i)`, `j` then `k` counter-clockwise around `i`.
    angle_pairs: Vec<(usize, usize, usize, f64)>,
    degree: Vec<f64>,
    /// Mixed stage: fixed shape stations and octo sectors.
    fixed_shape: Vec<bool>,
    sectors: Vec<Option<u8>>,
}

fn angle_pairs(net: &TransitNetwork, pos: &[Point]) -> Vec<(usize, usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 0..net.station_count() {
        let mut nb: Vec<(f64, usize)> = net
            .neighbors(i)
            .iter()
            .map(|&(j, _)| ((pos[j] - pos[i]).angle(), j))
            .collect();
        let d = nb.len();
        if d < 2 {
            continue;
        }
        nb.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let t = 1.0 / (std::f64::consts::PI / d as f64).tan();
        let t = if d == 2 { 0.0 } else { t };
        let count = if d == 2 { 1 } else { d };
        for q in 0..count {
            out.push((i, nb[q].1, nb[(q + 1) % d].1, t));
        }
    }
    out
}

impl<'a> Problem<'a> {
    fn new(
        net: &'a TransitNetwork,
        shape: &'a GuideShape,
        w: DeformWeights,
        stage: Stage,
        anchor: Vec<Point>,
    ) -> Self {
        let geo = net.positions();
        let l = w.target_length;
        let target_len = net
            .connections
            .iter()
            .map(|c| {
                let dummy_end = [c.from, c.to]
                    .iter()
                    .any(|&s| net.stations[s].kind == StationKind::DummyPlanarization);
                if dummy_end || c.kind == ConnectionKind::Auxiliary {
                    l / 2.0
                } else {
                    l
                }
            })
            .collect();
        for s in 0..net.station_count() {
            if net.degree(s) == 0 {
                warn!(
                    "station {} is isolated; it only follows the position term",
                    net.stations[s].id
                );
            }
        }
        Self {
            net,
            shape,
            w,
            stage,
            anchor,
            target_len,
            angle_pairs: angle_pairs(net, &geo),
            degree: (0..net.station_count())
                .map(|s| net.degree(s) as f64)
                .collect(),
            fixed_shape: vec![false; net.station_count()],
            sectors: vec![None; net.connections.len()],
        }
    }

    fn shape_set(&self, x: &[Point]) -> (Vec<bool>, Vec<Point>) {
        match self.stage {
            Stage::Smooth => {
                if self.w.w_c == 0.0 {
                    return (vec![false; x.len()], x.to_vec());
                }
                let a = shape_assignment(self.net, x, self.shape);
                (a.stations, a.closest)
            }
            Stage::Mixed => {
                let closest = x
                    .iter()
                    .zip(&self.fixed_shape)
                    .map(|(&v, &s)| if s { self.shape.closest_point(v).0 } else { v })
                    .collect();
                (self.fixed_shape.clone(), closest)
            }
        }
    }

    fn energy(&self, x: &[Point]) -> f64 {
        let w = &self.w;
        let mut e = 0.0;
        if w.w_c > 0.0 {
            let (set, closest) = self.shape_set(x);
            let mut ec = 0.0;
            for i in 0..x.len() {
                if set[i] {
                    ec += self.degree[i] * (x[i] - closest[i]).norm2();
                }
            }
            e += w.w_c * ec;
        }
        if w.w_l > 0.0 {
            let el: f64 = self
                .net
                .connections
                .iter()
                .zip(&self.target_len)
                .map(|(c, &l)| (x[c.to].dist(x[c.from]) - l).powi(2))
                .sum();
            e += w.w_l * el;
        }
        if w.w_a > 0.0 {
            let ea: f64 = self
                .angle_pairs
                .iter()
                .map(|&(i, j, k, t)| angle_residual(x, i, j, k, t).norm2())
                .sum();
            e += w.w_a * ea;
        }
        if w.w_p > 0.0 {
            let ep: f64 = x
                .iter()
                .zip(&self.anchor)
                .map(|(a, b)| (*a - *b).norm2())
                .sum();
            e += w.w_p * ep;
        }
        if w.w_o > 0.0 {
            let eo: f64 = self
                .net
                .connections
                .iter()
                .zip(&self.sectors)
                .filter_map(|(c, k)| k.map(|k| ray_residual(x[c.to] - x[c.from], k).norm2()))
                .sum();
            e += w.w_o * eo;
        }
        e
    }

    /// Linearized system at `x`, plus guard terms.
    fn system(&self, x: &[Point], holds: &[Hold], push: &[(usize, Point)]) -> LeastSquares {
        let n = x.len();
        let w = &self.w;
        let mut ls = LeastSquares::new(2 * n);
        let point = |ls: &mut LeastSquares, weight: f64, i: usize, target: Point| {
            ls.row(weight, &[(2 * i, 1.0)], target.x);
            ls.row(weight, &[(2 * i + 1, 1.0)], target.y);
        };
        if w.w_c > 0.0 {
            let (set, closest) = self.shape_set(x);
            for i in 0..n {
                if set[i] {
                    point(&mut ls, w.w_c * self.degree[i], i, closest[i]);
                }
            }
        }
        let edge = |ls: &mut LeastSquares, weight: f64, from: usize, to: usize, target: Point| {
            ls.row(weight, &[(2 * to, 1.0), (2 * from, -1.0)], target.x);
            ls.row(weight, &[(2 * to + 1, 1.0), (2 * from + 1, -1.0)], target.y);
        };
        if w.w_l > 0.0 {
            let geo = self.net.positions();
            for (c, &l) in self.net.connections.iter().zip(&self.target_len) {
                let dir = (x[c.to] - x[c.from])
                    .normalized()
                    .or_else(|| (geo[c.to] - geo[c.from]).normalized())
                    .unwrap_or(Point::new(1.0, 0.0));
                edge(&mut ls, w.w_l, c.from, c.to, dir * l);
            }
        }
        if w.w_a > 0.0 {
            for &(i, j, k, t) in &self.angle_pairs {
                let h = t / 2.0;
                // r = v_i − (v_j + v_k)/2 − h·R90(v_k − v_j), R90(a, b) = (−b, a)
                ls.row(
                    w.w_a,
                    &[
                        (2 * i, 1.0),
                        (2 * j, -0.5),
                        (2 * k, -0.5),
                        (2 * k + 1, h),
                        (2 * j + 1, -h),
                    ],
                    0.0,
                );
                ls.row(
                    w.w_a,
                    &[
                        (2 * i + 1, 1.0),
                        (2 * j + 1, -0.5),
                        (2 * k + 1, -0.5),
                        (2 * k, -h),
                        (2 * j, h),
                    ],
                    0.0,
                );
            }
        }
        if w.w_p > 0.0 {
            for i in 0..n {
                point(&mut ls, w.w_p, i, self.anchor[i]);
            }
        }
        if w.w_o > 0.0 {
            for (c, k) in self.net.connections.iter().zip(&self.sectors) {
                if let Some(k) = *k {
                    let e = x[c.to] - x[c.from];
                    let target = e - ray_residual(e, k);
                    edge(&mut ls, w.w_o, c.from, c.to, target);
                }
            }
        }
        for h in holds {
            point(&mut ls, GUARD_WEIGHT, h.station, h.pos);
        }
        for &(i, target) in push {
            point(&mut ls, GUARD_WEIGHT, i, target);
        }
        let prox = PROXIMAL * (w.w_c + w.w_l + w.w_a + w.w_p + w.w_o).max(1.0);
        for i in 0..n {
            point(&mut ls, prox, i, x[i]);
        }
        ls
    }
}

fn angle_residual(x: &[Point], i: usize, j: usize, k: usize, t: f64) -> Point {
    x[i] - (x[j] + x[k]) * 0.5 - (x[k] - x[j]).perp() * (t / 2.0)
}

/// Offset of `e` from its closest point on the ray of sector `k`.
fn ray_residual(e: Point, k: u8) -> Point {
    let u = sector_dir(k);
    e - u * e.dot(u).max(0.0)
}

#[derive(Debug, Clone, Copy)]
struct Hold {
    station: usize,
    pos: Point,
    left: usize,
}

/// Moves stations back to `prev` until `next` has no crossing. Every endpoint
/// of a crossing pair that moved is reverted. Returns the reverted stations.
pub fn planarity_guard(net: &TransitNetwork, prev: &[Point], next: &mut [Point]) -> Vec<usize> {
    let mut reverted = Vec::new();
    loop {
        let pairs = crossing_pairs(&net.segments(next));
        if pairs.is_empty() {
            break;
        }
        let mut changed = false;
        for (a, b) in pairs {
            for c in [a, b] {
                for s in [net.connections[c].from, net.connections[c].to] {
                    if next[s] != prev[s] {
                        next[s] = prev[s];
                        reverted.push(s);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            // prev itself is not planar; nothing left to revert
            break;
        }
    }
    reverted.sort_unstable();
    reverted.dedup();
    reverted
}

/// Separation targets for stations closer than `threshold` to a connection
/// they are not part of.
fn proximity_targets(net: &TransitNetwork, x: &[Point], threshold: f64) -> Vec<(usize, Point)> {
    let mut out = Vec::new();
    for (i, &v) in x.iter().enumerate() {
        let mut best: Option<(f64, Point)> = None;
        for c in &net.connections {
            if c.touches(i) {
                continue;
            }
            let (a, b) = (x[c.from], x[c.to]);
            if v.x < a.x.min(b.x) - threshold
                || v.x > a.x.max(b.x) + threshold
                || v.y < a.y.min(b.y) - threshold
                || v.y > a.y.max(b.y) + threshold
            {
                continue;
            }
            let (q, _) = closest_point_on_segment(v, a, b);
            let d = q.dist(v);
            if d < threshold && best.is_none_or(|(bd, _)| d < bd) {
                let away = (v - q)
                    .normalized()
                    .unwrap_or_else(|| (b - a).perp().normalized().unwrap_or(Point::new(1.0, 0.0)));
                best = Some((d, q + away * threshold));
            }
        }
        if let Some((_, t)) = best {
            out.push((i, t));
        }
    }
    out
}

fn record(net: &TransitNetwork, x: &[Point], energy: f64, reverted: usize) -> IterationRecord {
    IterationRecord {
        energy,
        crossings: count_crossings(&net.segments(x)),
        reverted,
    }
}

struct RunResult {
    positions: Vec<Point>,
    energy: f64,
    iterations: usize,
    trace: Vec<IterationRecord>,
}

fn iterate(p: &Problem, init: Vec<Point>, cfg: DeformConfig) -> RunResult {
    let net = p.net;
    let sep = p.w.target_length / 4.0;
    let mut x = init;
    let mut e = p.energy(&x);
    let mut trace = vec![record(net, &x, e, 0)];
    let mut holds: Vec<Hold> = Vec::new();
    let mut push = proximity_targets(net, &x, sep);
    let mut iterations = 0;
    let mut flat: Vec<f64> = Vec::with_capacity(2 * x.len());
    for it in 0..cfg.max_iter {
        flat.clear();
        flat.extend(x.iter().flat_map(|v| [v.x, v.y]));
        let sol = p.system(&x, &holds, &push).solve(&flat, 1e-10);
        let target: Vec<Point> = sol.chunks(2).map(|c| Point::new(c[0], c[1])).collect();
        let mut accepted = None;
        for alpha in STEP_SCALES {
            let mut cand: Vec<Point> = x
                .iter()
                .zip(&target)
                .map(|(&a, &b)| a + (b - a) * alpha)
                .collect();
            let reverted = planarity_guard(net, &x, &mut cand);
            let ec = p.energy(&cand);
            if ec <= e * (1.0 + ACCEPT_TOL) {
                accepted = Some((cand, ec, reverted));
                break;
            }
        }
        let Some((cand, ec, reverted)) = accepted else {
            debug!("{:?}: no improving step at iteration {it}", p.stage);
            break;
        };
        let rel = if e > 0.0 { (e - ec) / e } else { 0.0 };
        x = cand;
        e = ec;
        iterations += 1;
        trace.push(record(net, &x, e, reverted.len()));
        holds.retain_mut(|h| {
            h.left -= 1;
            h.left > 0
        });
        for s in reverted {
            holds.retain(|h| h.station != s);
            holds.push(Hold {
                station: s,
                pos: x[s],
                left: HOLD_ITERATIONS,
            });
        }
        push = proximity_targets(net, &x, sep);
        if rel < cfg.tol {
            break;
        }
    }
    RunResult {
        positions: x,
        energy: e,
        iterations,
        trace,
    }
}

/// Ω_smooth of the state's positions; the shape assignment is recomputed.
pub fn smooth_energy(
    state: &LayoutState,
    net: &TransitNetwork,
    shape: &GuideShape,
    w: DeformWeights,
) -> f64 {
    Problem::new(net, shape, w, Stage::Smooth, net.positions()).energy(&state.positions)
}

/// One accepted smooth iteration (or the unchanged state if none improves).
pub fn smooth_step(
    state: &LayoutState,
    net: &TransitNetwork,
    shape: &GuideShape,
    w: DeformWeights,
) -> LayoutState {
    let p = Problem::new(net, shape, w, Stage::Smooth, net.positions());
    let r = iterate(
        &p,
        state.positions.clone(),
        DeformConfig {
            max_iter: 1,
            tol: 0.0,
        },
    );
    let mut out = assign_shape_stations(
        &LayoutState {
            positions: r.positions,
            ..state.clone()
        },
        net,
        shape,
    );
    out.iteration = state.iteration + r.iterations;
    out.energy = r.energy;
    out
}

/// Smooth stage from the geographic layout of `net`.
pub fn run_smooth(
    net: &TransitNetwork,
    shape: &GuideShape,
    w: DeformWeights,
    cfg: DeformConfig,
) -> LayoutState {
    let geo = net.positions();
    let p = Problem::new(net, shape, w, Stage::Smooth, geo.clone());
    let r = iterate(&p, geo, cfg);
    debug!(
        "smooth: {} iterations, energy {:.6}",
        r.iterations, r.energy
    );
    let mut state = assign_shape_stations(
        &LayoutState {
            positions: r.positions,
            ..LayoutState::geographic(net)
        },
        net,
        shape,
    );
    state.iteration = r.iterations;
    state.energy = r.energy;
    state.trace = r.trace;
    state
}

/// Assigns sectors to the octo edges of a smooth state.
pub fn with_sectors(state: &LayoutState, net: &TransitNetwork) -> LayoutState {
    let octo: Vec<bool> = state.shape_edges.iter().map(|s| !s).collect();
    let mut out = state.clone();
    out.sectors = assign_octolinear_sectors(net, &state.positions, &octo);
    out
}

/// Mixed stage starting from (and anchored to) a smooth state with sectors.
pub fn run_mixed(
    state: &LayoutState,
    net: &TransitNetwork,
    shape: &GuideShape,
    w: DeformWeights,
    cfg: DeformConfig,
) -> LayoutState {
    let mut p = Problem::new(net, shape, w, Stage::Mixed, state.positions.clone());
    p.fixed_shape = state.shape_stations.clone();
    p.sectors = state.sectors.clone();
    let r = iterate(&p, state.positions.clone(), cfg);
    debug!("mixed: {} iterations, energy {:.6}", r.iterations, r.energy);
    LayoutState {
        positions: r.positions,
        iteration: r.iterations,
        energy: r.energy,
        trace: r.trace,
        ..state.clone()
    }
}

/// Ω_mixed of a state's positions relative to `anchor` (the smooth layout).
pub fn mixed_energy(
    state: &LayoutState,
    anchor: &[Point],
    net: &TransitNetwork,
    shape: &GuideShape,
    w: DeformWeights,
) -> f64 {
    let mut p = Problem::new(net, shape, w, Stage::Mixed, anchor.to_vec());
    p.fixed_shape = state.shape_stations.clone();
    p.sectors = state.sectors.clone();
    p.energy(&state.positions)
}
