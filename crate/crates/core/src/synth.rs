//! Deterministic synthetic networks and guide shapes.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::{PI, TAU};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point, Polyline};
use crate::matching::GuideShape;
use crate::network::{
    ConnectionRecord, LineRecord, NetworkDocument, Rgb, StationRecord, TransitNetwork,
};

const PALETTE: [Rgb; 10] = [
    Rgb(0xe4, 0x1a, 0x1c),
    Rgb(0x37, 0x7e, 0xb8),
    Rgb(0x4d, 0xaf, 0x4a),
    Rgb(0x98, 0x4e, 0xa3),
    Rgb(0xff, 0x7f, 0x00),
    Rgb(0xa6, 0x56, 0x28),
    Rgb(0xf7, 0x81, 0xbf),
    Rgb(0x1b, 0x9e, 0x77),
    Rgb(0x66, 0x66, 0x66),
    Rgb(0xe6, 0xab, 0x02),
];

/// Collects stations and line paths and turns them into a network.
#[derive(Default)]
struct Builder {
    pos: Vec<Point>,
    lines: Vec<Vec<usize>>,
}

impl Builder {
    fn station(&mut self, p: Point) -> usize {
        self.pos.push(p);
        self.pos.len() - 1
    }

    fn build(self) -> TransitNetwork {
        let mut used: Vec<bool> = vec![false; self.pos.len()];
        for l in &self.lines {
            for &s in l {
                used[s] = true;
            }
        }
        let mut rename = vec![usize::MAX; self.pos.len()];
        let mut doc = NetworkDocument::default();
        for (i, p) in self.pos.iter().enumerate() {
            if used[i] {
                rename[i] = doc.stations.len();
                doc.stations.push(StationRecord {
                    id: format!("s{}", rename[i]),
                    name: format!("Stop {}", rename[i]),
                    x: (p.x * 1e6).round() / 1e6,
                    y: (p.y * 1e6).round() / 1e6,
                });
            }
        }
        let mut conns: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
        for (li, l) in self.lines.iter().enumerate() {
            let id = format!("L{}", li + 1);
            for w in l.windows(2) {
                let (a, b) = (rename[w[0]], rename[w[1]]);
                let e = conns.entry((a.min(b), a.max(b))).or_default();
                if !e.contains(&id) {
                    e.push(id.clone());
                }
            }
            doc.lines.push(LineRecord {
                id,
                color: PALETTE[li % PALETTE.len()],
                stations: l.iter().map(|&s| format!("s{}", rename[s])).collect(),
            });
        }
        for (k, ((a, b), lines)) in conns.into_iter().enumerate() {
            doc.connections.push(ConnectionRecord {
                id: format!("c{k}"),
                from: format!("s{a}"),
                to: format!("s{b}"),
                lines,
            });
        }
        TransitNetwork::from_document(&doc).expect("synthetic network is well formed")
    }
}

fn jitter(rng: &mut ChaCha8Rng, amount: f64) -> Point {
    Point::new(
        rng.gen_range(-amount..amount),
        rng.gen_range(-amount..amount),
    )
}

/// `rows × cols` stations with one line per row and per column.
pub fn grid(rows: usize, cols: usize, seed: u64) -> TransitNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::default();
    let ids: Vec<Vec<usize>> = (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| b.station(Point::new(c as f64, r as f64) + jitter(&mut rng, 0.15)))
                .collect()
        })
        .collect();
    for row in &ids {
        b.lines.push(row.clone());
    }
    for c in 0..cols {
        b.lines.push((0..rows).map(|r| ids[r][c]).collect());
    }
    b.build()
}

/// A circle line of `n` stations plus `spokes` radial lines through a hub.
pub fn ring(n: usize, spokes: usize, seed: u64) -> TransitNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::default();
    let r = n as f64 / TAU;
    let ring: Vec<usize> = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            b.station(Point::from_angle(t) * r + jitter(&mut rng, 0.1))
        })
        .collect();
    let mut l = ring.clone();
    l.push(ring[0]);
    b.lines.push(l);
    let hub = b.station(jitter(&mut rng, 0.1));
    let steps = (r.floor() as usize).max(2);
    for s in 0..spokes.min(8) {
        let k = s * n / spokes;
        let t = TAU * k as f64 / n as f64;
        let mut line = vec![hub];
        for q in 1..steps {
            let f = q as f64 / steps as f64;
            line.push(b.station(Point::from_angle(t) * (r * f) + jitter(&mut rng, 0.08)));
        }
        line.push(ring[k]);
        b.lines.push(line);
    }
    b.build()
}

/// A random tree grown on a lattice; every leaf ends a line from the root.
pub fn tree(n: usize, seed: u64) -> TransitNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cell: Vec<(i32, i32)> = vec![(0, 0)];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut taken: HashSet<(i32, i32)> = HashSet::from([(0, 0)]);
    const DIRS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    let mut tries = 0;
    while cell.len() < n && tries < 100 * n {
        tries += 1;
        let from = rng.gen_range(0..cell.len());
        let (dx, dy) = DIRS[rng.gen_range(0..4)];
        let c = (cell[from].0 + dx, cell[from].1 + dy);
        // keep branches apart so the drawing stays planar
        let crowded = DIRS
            .iter()
            .filter(|d| taken.contains(&(c.0 + d.0, c.1 + d.1)))
            .count()
            > 1;
        if taken.contains(&c) || crowded {
            continue;
        }
        taken.insert(c);
        cell.push(c);
        parent.push(Some(from));
    }
    let mut b = Builder::default();
    for &(x, y) in &cell {
        b.station(Point::new(x as f64, y as f64) + jitter(&mut rng, 0.12));
    }
    let mut is_parent = vec![false; cell.len()];
    for p in parent.iter().flatten() {
        is_parent[*p] = true;
    }
    for leaf in (0..cell.len()).filter(|&i| !is_parent[i]) {
        let mut path = vec![leaf];
        let mut cur = leaf;
        while let Some(p) = parent[cur] {
            path.push(p);
            cur = p;
        }
        if path.len() >= 2 {
            b.lines.push(path);
        }
    }
    b.build()
}

/// A metro-like network of about `stations` stations: lines are
/// self-avoiding walks on a warped, jittered lattice that prefer to run
/// straight and start from stations already served.
pub fn metro(stations: usize, lines: usize, seed: u64) -> TransitNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = ((stations as f64 * 1.7).sqrt().ceil() as i32).max(4);
    let warp = |x: f64, y: f64| Point::new(x + 0.3 * (0.45 * y).sin(), y + 0.3 * (0.4 * x).cos());
    let mut pos: BTreeMap<(i32, i32), Point> = BTreeMap::new();
    for x in 0..side {
        for y in 0..side {
            pos.insert((x, y), warp(x as f64, y as f64) + jitter(&mut rng, 0.12));
        }
    }
    const DIRS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    let mut served: Vec<(i32, i32)> = Vec::new();
    let mut served_set: HashSet<(i32, i32)> = HashSet::new();
    let mut walks: Vec<Vec<(i32, i32)>> = Vec::new();
    let target_len = (side as f64 * 1.3) as usize;
    let mut attempts = 0;
    while (served_set.len() < stations || walks.len() < lines) && attempts < 50 * lines.max(1) {
        attempts += 1;
        let start = if served.is_empty() {
            (side / 2, side / 2)
        } else {
            *served.choose(&mut rng).unwrap()
        };
        let mut walk = vec![start];
        let mut seen: HashSet<(i32, i32)> = HashSet::from([start]);
        let mut dir = rng.gen_range(0..4);
        while walk.len() < target_len {
            let cur = *walk.last().unwrap();
            let mut options: Vec<usize> = Vec::new();
            for k in 0..4 {
                let n = (cur.0 + DIRS[k].0, cur.1 + DIRS[k].1);
                if n.0 >= 0 && n.1 >= 0 && n.0 < side && n.1 < side && !seen.contains(&n) {
                    options.push(k);
                }
            }
            if options.is_empty() {
                break;
            }
            dir = if options.contains(&dir) && rng.gen_bool(0.75) {
                dir
            } else {
                *options.choose(&mut rng).unwrap()
            };
            let n = (cur.0 + DIRS[dir].0, cur.1 + DIRS[dir].1);
            seen.insert(n);
            walk.push(n);
        }
        if walk.len() < 4 {
            continue;
        }
        let fresh = walk.iter().filter(|c| !served_set.contains(c)).count();
        if fresh == 0 && walks.len() >= lines {
            continue;
        }
        for &c in &walk {
            if served_set.insert(c) {
                served.push(c);
            }
        }
        walks.push(walk);
        if served_set.len() >= stations && walks.len() >= lines {
            break;
        }
    }
    let mut b = Builder::default();
    let mut index: BTreeMap<(i32, i32), usize> = BTreeMap::new();
    for (&c, &p) in &pos {
        index.insert(c, b.station(p));
    }
    for w in walks {
        b.lines.push(w.iter().map(|c| index[c]).collect());
    }
    b.build()
}

fn closed(points: Vec<Point>) -> GuideShape {
    GuideShape::new(vec![
        Polyline::new_dedup(points, true).expect("shape polyline")
    ])
    .expect("one polyline")
}

fn polar(n: usize, r: impl Fn(f64) -> f64) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            Point::from_angle(t) * r(t)
        })
        .collect()
}

pub fn heart() -> GuideShape {
    closed(
        (0..64)
            .map(|k| {
                let t = TAU * k as f64 / 64.0;
                Point::new(
                    16.0 * t.sin().powi(3),
                    13.0 * t.cos()
                        - 5.0 * (2.0 * t).cos()
                        - 2.0 * (3.0 * t).cos()
                        - (4.0 * t).cos(),
                ) / 16.0
            })
            .rev()
            .collect(),
    )
}

pub fn flower() -> GuideShape {
    closed(polar(80, |t| 1.0 + 0.3 * (5.0 * t).cos()))
}

pub fn circle() -> GuideShape {
    closed(polar(48, |_| 1.0))
}

pub fn square() -> GuideShape {
    closed(vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ])
}

pub fn cloverleaf() -> GuideShape {
    closed(polar(96, |t| 0.35 + (2.0 * t).cos().abs()))
}

pub fn stadium() -> GuideShape {
    let mut pts = Vec::new();
    for k in 0..=12 {
        let t = -PI / 2.0 + PI * k as f64 / 12.0;
        pts.push(Point::new(1.0, 0.0) + Point::from_angle(t) * 0.6);
    }
    for k in 0..=12 {
        let t = PI / 2.0 + PI * k as f64 / 12.0;
        pts.push(Point::new(-1.0, 0.0) + Point::from_angle(t) * 0.6);
    }
    closed(pts)
}

/// Almond outline with a round pupil.
pub fn eye() -> GuideShape {
    let outline: Vec<Point> = (0..64)
        .map(|k| {
            let t = TAU * k as f64 / 64.0;
            Point::new(t.cos(), 0.55 * t.sin() * t.sin().abs().sqrt())
        })
        .collect();
    let pupil = polar(24, |_| 0.22);
    GuideShape::new(vec![
        Polyline::new_dedup(outline, true).expect("outline"),
        Polyline::new(pupil, true).expect("pupil"),
    ])
    .expect("two polylines")
}

pub fn shape_by_name(name: &str) -> Option<GuideShape> {
    Some(match name {
        "heart" => heart(),
        "flower" => flower(),
        "circle" => circle(),
        "square" => square(),
        "cloverleaf" => cloverleaf(),
        "stadium" => stadium(),
        "eye" => eye(),
        _ => return None,
    })
}

pub const SHAPES: [&str; 7] = [
    "heart",
    "flower",
    "eye",
    "circle",
    "square",
    "stadium",
    "cloverleaf",
];
