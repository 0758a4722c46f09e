use std::collections::VecDeque;

use crate::deform::LayoutState;
use crate::geometry::Point;
use crate::matching::GuideShape;
use crate::network::TransitNetwork;

use super::{ConnectionPath, RoutedEdge};

/// A maximal chain of connections through removed degree-2 stations.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEdge {
    pub from: usize,
    pub to: usize,
    /// Stations from `from` to `to`, inclusive, in chain order.
    pub stations: Vec<usize>,
    /// Original connections in chain order.
    pub connections: Vec<usize>,
    pub shape: bool,
}

impl ReducedEdge {
    pub fn interior(&self) -> &[usize] {
        &self.stations[1..self.stations.len() - 1]
    }

    pub fn length(&self, pos: &[Point]) -> f64 {
        self.stations
            .windows(2)
            .map(|w| pos[w[0]].dist(pos[w[1]]))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collapsed {
    pub edges: Vec<ReducedEdge>,
    pub removed: Vec<bool>,
}

impl Collapsed {
    pub fn removed_count(&self) -> usize {
        self.removed.iter().filter(|&&r| r).count()
    }
}

fn sector_at(net: &TransitNetwork, state: &LayoutState, c: usize, s: usize) -> Option<u8> {
    state.sectors[c].map(|k| {
        if net.connections[c].from == s {
            k
        } else {
            (k + 4) % 8
        }
    })
}

/// Drops degree-2 octo stations whose two edges sit on equal or opposite
/// sectors. Shape stations are always kept.
pub fn collapse_network(net: &TransitNetwork, state: &LayoutState) -> Collapsed {
    let mut removable: Vec<bool> = (0..net.station_count())
        .map(|s| {
            let nb = net.neighbors(s);
            if state.shape_stations[s] || nb.len() != 2 {
                return false;
            }
            match (
                sector_at(net, state, nb[0].1, s),
                sector_at(net, state, nb[1].1, s),
            ) {
                (Some(a), Some(b)) => a == b || (a + 4) % 8 == b,
                _ => false,
            }
        })
        .collect();

    // a cycle made only of removable stations keeps two of them
    let mut seen = vec![false; net.station_count()];
    for s in 0..net.station_count() {
        if !removable[s] || seen[s] {
            continue;
        }
        let mut cycle = vec![s];
        let (mut cur, mut prev_c) = net.neighbors(s)[0];
        while cur != s && removable[cur] {
            cycle.push(cur);
            let &(next, c) = net
                .neighbors(cur)
                .iter()
                .find(|&&(_, c)| c != prev_c)
                .expect("degree two");
            prev_c = c;
            cur = next;
        }
        if cur == s {
            for &x in &cycle {
                seen[x] = true;
            }
            removable[cycle[0]] = false;
            removable[cycle[cycle.len() / 2]] = false;
        }
    }

    let walk = |start: usize, c0: usize| -> (Vec<usize>, Vec<usize>) {
        let mut stations = vec![start];
        let mut conns = vec![c0];
        let mut cur = net.connections[c0].other(start);
        let mut prev_c = c0;
        while removable[cur] {
            stations.push(cur);
            let &(next, c) = net
                .neighbors(cur)
                .iter()
                .find(|&&(_, c)| c != prev_c)
                .expect("degree two");
            conns.push(c);
            prev_c = c;
            cur = next;
        }
        stations.push(cur);
        (stations, conns)
    };

    let mut used = vec![false; net.connections.len()];
    let mut edges = Vec::new();
    for s in 0..net.station_count() {
        if removable[s] {
            continue;
        }
        for &(_, c) in net.neighbors(s) {
            if used[c] {
                continue;
            }
            let (stations, connections) = walk(s, c);
            for &x in &connections {
                used[x] = true;
            }
            edges.push(ReducedEdge {
                from: stations[0],
                to: *stations.last().unwrap(),
                shape: connections.len() == 1 && state.shape_edges[connections[0]],
                stations,
                connections,
            });
        }
    }
    Collapsed {
        edges,
        removed: removable,
    }
}

/// Routing order: shape edges along the shape, then octo edges breadth-first
/// from stations already reached (longer first, then by connection id).
pub fn route_order(
    c: &Collapsed,
    net: &TransitNetwork,
    state: &LayoutState,
    shape: &GuideShape,
) -> Vec<usize> {
    let pos = &state.positions;
    let id = |e: usize| net.connections[c.edges[e].connections[0]].id.as_str();
    let mut shape_edges: Vec<(usize, f64, usize)> = c
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.shape)
        .map(|(i, e)| {
            let mid = pos[e.from].lerp(pos[e.to], 0.5);
            let (_, pl, t) = shape.closest_point(mid);
            (pl, t, i)
        })
        .collect();
    shape_edges.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then_with(|| id(a.2).cmp(id(b.2)))
    });
    let mut order: Vec<usize> = shape_edges.iter().map(|x| x.2).collect();

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); net.station_count()];
    for (i, e) in c.edges.iter().enumerate() {
        if !e.shape {
            incident[e.from].push(i);
            incident[e.to].push(i);
        }
    }
    let len: Vec<f64> = c.edges.iter().map(|e| e.length(pos)).collect();
    let by_priority =
        |a: &usize, b: &usize| len[*b].total_cmp(&len[*a]).then_with(|| id(*a).cmp(id(*b)));
    let mut placed = vec![false; c.edges.len()];
    let mut reached = vec![false; net.station_count()];
    let mut queue = VecDeque::new();
    for &e in &order {
        placed[e] = true;
        for s in [c.edges[e].from, c.edges[e].to] {
            if !std::mem::replace(&mut reached[s], true) {
                queue.push_back(s);
            }
        }
    }
    let mut rest: Vec<usize> = (0..c.edges.len()).filter(|&e| !placed[e]).collect();
    rest.sort_by(by_priority);
    loop {
        while let Some(s) = queue.pop_front() {
            let mut next: Vec<usize> = incident[s]
                .iter()
                .copied()
                .filter(|&e| !placed[e])
                .collect();
            next.sort_by(by_priority);
            for e in next {
                placed[e] = true;
                order.push(e);
                let o = if c.edges[e].from == s {
                    c.edges[e].to
                } else {
                    c.edges[e].from
                };
                if !std::mem::replace(&mut reached[o], true) {
                    queue.push_back(o);
                }
            }
        }
        let Some(&seed) = rest.iter().find(|&&e| !placed[e]) else {
            break;
        };
        placed[seed] = true;
        order.push(seed);
        for s in [c.edges[seed].from, c.edges[seed].to] {
            if !std::mem::replace(&mut reached[s], true) {
                queue.push_back(s);
            }
        }
    }
    order
}

/// Cuts a polyline at ascending arc lengths; segment flags follow their pieces.
pub fn split_at_lengths(
    points: &[Point],
    flags: &[bool],
    cuts: &[f64],
) -> Vec<(Vec<Point>, Vec<bool>)> {
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut cur = vec![points[0]];
    let mut cur_flags = Vec::new();
    let mut cuts = cuts.iter().copied().peekable();
    let mut acc = 0.0;
    // cuts this close to a vertex snap onto it, leaving no sliver segment
    let eps = 1e-9 * points.windows(2).map(|w| w[0].dist(w[1])).sum::<f64>();
    for i in 0..points.len().saturating_sub(1) {
        let (a, b) = (points[i], points[i + 1]);
        let l = a.dist(b);
        while let Some(&t) = cuts.peek() {
            if t > acc + l + eps {
                break;
            }
            cuts.next();
            let mut p = if l > 0.0 {
                a.lerp(b, ((t - acc) / l).clamp(0.0, 1.0))
            } else {
                a
            };
            if p.dist(a) <= eps {
                p = a;
            } else if p.dist(b) <= eps {
                p = b;
            }
            if *cur.last().unwrap() != p {
                cur.push(p);
                cur_flags.push(flags[i]);
            }
            out.push((
                std::mem::replace(&mut cur, vec![p]),
                std::mem::take(&mut cur_flags),
            ));
        }
        if *cur.last().unwrap() != b {
            cur.push(b);
            cur_flags.push(flags[i]);
        }
        acc += l;
    }
    // cuts beyond the end (rounding) land on the last point
    let last = *points.last().unwrap();
    for _ in cuts {
        out.push((
            std::mem::replace(&mut cur, vec![last]),
            std::mem::take(&mut cur_flags),
        ));
    }
    out.push((cur, cur_flags));
    out
}

/// Places removed stations at equal arc-length spacing along their routes and
/// returns the drawn path of every original connection. Unrouted chains are
/// drawn straight between their end stations.
pub fn reinsert_stations(
    net: &TransitNetwork,
    c: &Collapsed,
    routes: &[RoutedEdge],
    on_shape: &[Vec<bool>],
    positions: &mut [Point],
) -> Vec<ConnectionPath> {
    let mut paths = vec![
        ConnectionPath {
            points: Vec::new(),
            exempt: Vec::new(),
            routed: false,
            shape: false,
        };
        net.connections.len()
    ];
    for (e, r) in c.edges.iter().zip(routes) {
        let (points, flags) = if r.routed {
            let s = &on_shape[r.edge];
            let flags: Vec<bool> = s.windows(2).map(|w| w[0] || w[1]).collect();
            (r.points.clone(), flags)
        } else {
            (vec![positions[e.from], positions[e.to]], vec![false])
        };
        let total: f64 = points.windows(2).map(|w| w[0].dist(w[1])).sum();
        let m = e.interior().len();
        let cuts: Vec<f64> = (1..=m).map(|q| total * q as f64 / (m + 1) as f64).collect();
        let pieces = split_at_lengths(&points, &flags, &cuts);
        for (q, (pts, fl)) in pieces.into_iter().enumerate() {
            if q < m {
                positions[e.stations[q + 1]] = *pts.last().unwrap();
            }
            let conn = e.connections[q];
            let (mut pts, mut fl) = (pts, fl);
            if net.connections[conn].from != e.stations[q] {
                pts.reverse();
                fl.reverse();
            }
            paths[conn] = ConnectionPath {
                points: pts,
                exempt: fl,
                routed: r.routed,
                shape: e.shape,
            };
        }
    }
    paths
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::{assign_octolinear_sectors, LayoutState};
    use crate::geometry::Polyline;
    use crate::network::testnet::simple;
    use rand::{Rng, SeedableRng};

    fn octo_state(net: &TransitNetwork) -> LayoutState {
        let mut s = LayoutState::geographic(net);
        s.sectors =
            assign_octolinear_sectors(net, &s.positions, &vec![true; net.connections.len()]);
        s
    }

    fn line(n: usize) -> TransitNetwork {
        let pts: Vec<(f64, f64)> = (0..n).map(|i| (i as f64, 0.0)).collect();
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        simple(&pts, &edges)
    }

    #[test]
    fn straight_line_collapses_to_one_edge() {
        let net = line(5);
        let c = collapse_network(&net, &octo_state(&net));
        assert_eq!(c.edges.len(), 1);
        assert_eq!(c.edges[0].interior(), &[1, 2, 3]);
        assert_eq!(c.removed_count(), 3);
    }

    #[test]
    fn right_angle_station_kept() {
        let net = simple(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)], &[(0, 1), (1, 2)]);
        let c = collapse_network(&net, &octo_state(&net));
        assert_eq!(c.edges.len(), 2);
        assert!(!c.removed[1]);
    }

    #[test]
    fn shape_stations_kept() {
        let net = line(5);
        let mut s = octo_state(&net);
        s.shape_stations[2] = true;
        let c = collapse_network(&net, &s);
        assert_eq!(c.edges.len(), 2);
        assert!(!c.removed[2]);
    }

    #[test]
    fn ring_keeps_its_corners() {
        let net = simple(
            &[
                (0.0, 0.0),
                (1.0, 0.0),
                (2.0, 0.0),
                (2.0, 1.0),
                (1.0, 1.0),
                (0.0, 1.0),
            ],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)],
        );
        let c = collapse_network(&net, &octo_state(&net));
        // corners turn by 90°, only 1 and 4 are straight
        assert_eq!(c.removed_count(), 2);
        assert_eq!(c.edges.len(), 4);
        let ring = line(2);
        assert_eq!(collapse_network(&ring, &octo_state(&ring)).edges.len(), 1);
    }

    #[test]
    fn order_puts_shape_first_then_bfs() {
        // shape path 0-1-2-3, octo edges 3-4, 4-5, 1-6 and a detached 7-8
        let net = simple(
            &[
                (0.0, 0.0),
                (1.0, 0.0),
                (2.0, 0.0),
                (3.0, 0.0),
                (3.0, 1.0),
                (3.0, 3.0),
                (1.0, -1.0),
                (10.0, 10.0),
                (10.0, 12.0),
            ],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 6), (7, 8)],
        );
        let mut s = octo_state(&net);
        for i in 0..4 {
            s.shape_stations[i] = true;
        }
        for c in 0..3 {
            s.shape_edges[c] = true;
            s.sectors[c] = None;
        }
        let shape = GuideShape::new(vec![Polyline::new(
            vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0)],
            false,
        )
        .unwrap()])
        .unwrap();
        let col = collapse_network(&net, &s);
        // 4 is straight (north both ways) and collapses 3-4-5
        assert!(col.removed[4]);
        let order = route_order(&col, &net, &s, &shape);
        let ids: Vec<Vec<usize>> = order
            .iter()
            .map(|&e| col.edges[e].connections.clone())
            .collect();
        // BFS queue after shapes: 0, 1, 2, 3; station 1 reaches c5 before 3 reaches c3-c4
        assert_eq!(
            ids,
            vec![vec![0], vec![1], vec![2], vec![5], vec![3, 4], vec![6]]
        );
    }

    #[test]
    fn equal_spacing_on_route() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
        ];
        let pieces = split_at_lengths(&pts, &[false, true], &[1.0, 2.0, 3.0]);
        let ends: Vec<Point> = pieces.iter().map(|p| *p.0.last().unwrap()).collect();
        assert_eq!(
            ends[..3],
            [
                Point::new(1.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(2.0, 1.0)
            ]
        );
        assert_eq!(pieces.len(), 4);
        assert_eq!(pieces[3].1, vec![true]);
        let whole = split_at_lengths(&pts, &[false, true], &[]);
        assert_eq!(whole, vec![(pts.clone(), vec![false, true])]);
    }

    #[test]
    fn reinsertion_keeps_line_order() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(3..9);
            let net = line(n);
            let col = collapse_network(&net, &octo_state(&net));
            let e = &col.edges[0];
            // a random staircase route
            let mut p = Point::ZERO;
            let mut pts = vec![p];
            for _ in 0..rng.gen_range(2..10) {
                p += if rng.gen_bool(0.5) {
                    Point::new(1.0, 0.0)
                } else {
                    Point::new(0.0, 1.0)
                };
                pts.push(p);
            }
            let routes = vec![RoutedEdge {
                edge: 0,
                sinks: (0..pts.len()).collect(),
                points: pts.clone(),
                routed: true,
            }];
            let mut pos = net.positions();
            pos[e.from] = pts[0];
            pos[e.to] = *pts.last().unwrap();
            let paths = reinsert_stations(&net, &col, &routes, &[vec![false; pts.len()]], &mut pos);
            // arc position of each station along the route is increasing in chain order
            let arc = |q: Point| -> f64 {
                let mut acc = 0.0;
                for w in pts.windows(2) {
                    let (c, t) = crate::geometry::closest_point_on_segment(q, w[0], w[1]);
                    if c.dist(q) < 1e-9 {
                        return acc + t * w[0].dist(w[1]);
                    }
                    acc += w[0].dist(w[1]);
                }
                f64::NAN
            };
            let a: Vec<f64> = e.stations.iter().map(|&s| arc(pos[s])).collect();
            assert!(a.windows(2).all(|w| w[0] < w[1]), "{a:?}");
            assert!(paths.iter().all(|p| p.routed && p.points.len() >= 2));
        }
    }
}
