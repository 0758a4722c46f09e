use std::collections::HashSet;

use super::{Connection, Station, StationKind, TransitNetwork};
use crate::error::{Error, Result};
use crate::geometry::{crossing_pairs, segment_intersection_point, Point};

/// Inserts a dummy station at every crossing of two connections. A station
/// lying on another connection splits that connection at the station itself.
pub fn planarize(net: &TransitNetwork) -> Result<TransitNetwork> {
    let mut out = net.clone();
    // rounding of inserted points can, rarely, leave a new touching pair
    for _ in 0..4 {
        match planarize_once(&out)? {
            Some(next) => out = next,
            None => return Ok(out),
        }
    }
    Ok(out)
}

fn planarize_once(net: &TransitNetwork) -> Result<Option<TransitNetwork>> {
    let pos = net.positions();
    let segs = net.segments(&pos);
    let pairs = crossing_pairs(&segs);
    if pairs.is_empty() {
        return Ok(None);
    }
    let diag = net
        .bbox()
        .map_or(1.0, |b| b.width().hypot(b.height()).max(1e-300));
    let eps = 1e-9 * diag;

    let mut stations = net.stations.clone();
    let mut taken: HashSet<String> = stations.iter().map(|s| s.id.clone()).collect();
    let mut next_dummy = 0usize;
    let mut dummies: Vec<usize> = Vec::new();
    let mut splits: Vec<Vec<(f64, usize)>> = vec![Vec::new(); net.connections.len()];

    let overlap = |i: usize, j: usize| {
        Error::PlanarizeOverlap(net.connections[i].id.clone(), net.connections[j].id.clone())
    };

    for (i, j) in pairs {
        let (ci, cj) = (&net.connections[i], &net.connections[j]);
        let (si, sj) = (segs[i].0, segs[j].0);
        let shares = ci.touches(cj.from) || ci.touches(cj.to);
        if shares {
            // declared-shared pairs only intersect when collinear and overlapping
            return Err(overlap(i, j));
        }
        let p = segment_intersection_point(si, sj).ok_or_else(|| overlap(i, j))?;
        let near = |c: &Connection| [c.from, c.to].into_iter().find(|&s| pos[s].dist(p) <= eps);
        let param = |a: Point, b: Point| (p - a).dot(b - a) / (b - a).norm2();
        match (near(ci), near(cj)) {
            (Some(a), Some(b)) => {
                return Err(Error::Validation(vec![format!(
                    "stations {} and {} coincide",
                    net.stations[a].id, net.stations[b].id
                )]))
            }
            (Some(a), None) => splits[j].push((param(sj.a, sj.b), a)),
            (None, Some(b)) => splits[i].push((param(si.a, si.b), b)),
            (None, None) => {
                let d = match dummies
                    .iter()
                    .copied()
                    .find(|&d| stations[d].pos.dist(p) <= eps)
                {
                    Some(d) => d,
                    None => {
                        let id = loop {
                            let cand = format!("x{next_dummy}");
                            next_dummy += 1;
                            if taken.insert(cand.clone()) {
                                break cand;
                            }
                        };
                        stations.push(Station {
                            id,
                            name: String::new(),
                            pos: p,
                            kind: StationKind::DummyPlanarization,
                            origin: None,
                        });
                        dummies.push(stations.len() - 1);
                        stations.len() - 1
                    }
                };
                splits[i].push((param(si.a, si.b), d));
                splits[j].push((param(sj.a, sj.b), d));
            }
        }
    }

    let mut connections = Vec::new();
    let mut chains: Vec<Vec<usize>> = Vec::with_capacity(net.connections.len());
    for (c, mut sp) in net.connections.iter().zip(splits) {
        sp.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut chain = vec![c.from];
        for (_, s) in sp {
            if !chain.contains(&s) {
                chain.push(s);
            }
        }
        chain.push(c.to);
        if chain.len() == 2 {
            connections.push(c.clone());
        } else {
            for (k, w) in chain.windows(2).enumerate() {
                connections.push(Connection {
                    id: format!("{}.{}", c.id, k + 1),
                    from: w[0],
                    to: w[1],
                    lines: c.lines.clone(),
                    kind: c.kind,
                });
            }
        }
        chains.push(chain);
    }

    let mut lines = net.lines.clone();
    for l in &mut lines {
        let mut seq = vec![l.stations[0]];
        for w in l.stations.windows(2) {
            let c = net
                .connection_between(w[0], w[1])
                .expect("line follows connections");
            let chain = &chains[c];
            if chain[0] == w[0] {
                seq.extend_from_slice(&chain[1..]);
            } else {
                seq.extend(chain.iter().rev().skip(1));
            }
        }
        l.stations = seq;
    }
    Ok(Some(TransitNetwork::new(stations, connections, lines)))
}

#[cfg(test)]
mod tests {
    use super::super::testnet::*;
    use super::*;
    use crate::geometry::count_crossings;
    use proptest::prelude::*;

    #[test]
    fn planar_input_is_unchanged() {
        let net = simple(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)], &[(0, 1), (1, 2)]);
        assert_eq!(planarize(&net).unwrap(), net);
    }

    #[test]
    fn two_crossing_connections() {
        let net = build(
            &[(0.0, 0.0), (2.0, 2.0), (0.0, 2.0), (2.0, 0.0)],
            &[(0, 1), (2, 3)],
            &[&[0, 1], &[2, 3]],
        );
        let p = planarize(&net).unwrap();
        assert_eq!(p.stations.len(), 5);
        assert_eq!(p.connections.len(), 4);
        assert_eq!(p.stations[4].kind, StationKind::DummyPlanarization);
        assert_eq!(p.stations[4].pos, Point::new(1.0, 1.0));
        assert_eq!(p.degree(4), 4);
        assert_eq!(p.lines[0].stations, vec![0, 4, 1]);
        assert!(p.check().is_empty());
    }

    #[test]
    fn k4_with_one_crossing() {
        // square with both diagonals: six connections, one crossing pair
        let pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)];
        let p = planarize(&simple(&pts, &edges)).unwrap();
        assert_eq!(p.stations.len(), 5);
        assert_eq!(p.connections.len(), 8);
        assert_eq!(count_crossings(&p.segments(&p.positions())), 0);
    }

    #[test]
    fn t_touch_reuses_station() {
        let net = simple(
            &[(0.0, 0.0), (2.0, 0.0), (1.0, 0.0), (1.0, 1.0)],
            &[(0, 1), (2, 3)],
        );
        let p = planarize(&net).unwrap();
        assert_eq!(p.stations.len(), 4);
        assert_eq!(p.connections.len(), 3);
        assert_eq!(p.degree(2), 3);
    }

    #[test]
    fn concurrent_crossing_gets_one_dummy() {
        let pts = [
            (-1.0, 0.0),
            (1.0, 0.0),
            (0.0, -1.0),
            (0.0, 1.0),
            (-1.0, -1.0),
            (1.0, 1.0),
        ];
        let p = planarize(&simple(&pts, &[(0, 1), (2, 3), (4, 5)])).unwrap();
        assert_eq!(p.stations.len(), 7);
        assert_eq!(p.degree(6), 6);
    }

    #[test]
    fn collinear_overlap_is_rejected() {
        let net = simple(
            &[(0.0, 0.0), (2.0, 0.0), (1.0, 0.0), (3.0, 0.0)],
            &[(0, 1), (2, 3)],
        );
        assert!(matches!(planarize(&net), Err(Error::PlanarizeOverlap(..))));
    }

    proptest! {
        #[test]
        fn random_drawings_become_planar_and_stay_so(
            pts in proptest::collection::vec((0i32..50, 0i32..50), 4..12),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut uniq = pts.clone();
            uniq.sort();
            uniq.dedup();
            prop_assume!(uniq.len() >= 4);
            let coords: Vec<(f64, f64)> = uniq
                .iter()
                .map(|&(x, y)| (x as f64 + 0.37 * (y as f64).sin(), y as f64 + 0.21 * (x as f64).cos()))
                .collect();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = coords.len();
            let mut edges = Vec::new();
            for _ in 0..n {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
                    edges.push((a, b));
                }
            }
            prop_assume!(!edges.is_empty());
            let lines: Vec<Vec<usize>> = edges.iter().map(|&(a, b)| vec![a, b]).collect();
            let refs: Vec<&[usize]> = lines.iter().map(Vec::as_slice).collect();
            let net = build(&coords, &edges, &refs);
            let Ok(p) = planarize(&net) else { return Ok(()) };
            prop_assert_eq!(count_crossings(&p.segments(&p.positions())), 0);
            prop_assert!(p.check().is_empty(), "{:?}", p.check());
            prop_assert_eq!(planarize(&p).unwrap(), p);
        }
    }
}
