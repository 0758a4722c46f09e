use super::{Connection, ConnectionKind, Station, TransitNetwork};
use crate::geometry::Point;

pub const MAX_DEGREE: usize = 8;

// fragment offset from the original position, relative to the shortest incident connection
const FRAGMENT_OFFSET: f64 = 0.05;

/// Splits every station of degree above eight into a chain of fragments, each
/// taking a contiguous fan of the incident connections in angular order.
/// Consecutive fragments are joined by auxiliary connections that carry the
/// lines passing from one fan to the other.
pub fn split_high_degree(net: &TransitNetwork) -> TransitNetwork {
    let mut out = net.clone();
    let heavy: Vec<usize> = (0..net.stations.len())
        .filter(|&s| net.degree(s) > MAX_DEGREE)
        .collect();
    for s in heavy {
        split_station(&mut out, s);
    }
    out
}

fn fan_sizes(d: usize) -> Vec<usize> {
    // end fragments have one auxiliary link, middle fragments two
    let k = if d <= 2 * (MAX_DEGREE - 1) {
        2
    } else {
        2 + (d - 2 * (MAX_DEGREE - 1)).div_ceil(MAX_DEGREE - 2)
    };
    let base = d / k;
    let mut sizes = vec![base; k];
    let mut rest = d - base * k;
    // remainder goes to the ends first, then inwards
    let mut order: Vec<usize> = vec![0, k - 1];
    order.extend(1..k - 1);
    for i in order {
        if rest == 0 {
            break;
        }
        sizes[i] += 1;
        rest -= 1;
    }
    sizes
}

fn split_station(net: &mut TransitNetwork, s: usize) {
    let center = net.stations[s].pos;
    let mut inc: Vec<(f64, usize)> = net
        .neighbors(s)
        .iter()
        .map(|&(nb, c)| ((net.stations[nb].pos - center).angle(), c))
        .collect();
    inc.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let d = inc.len();

    // start after the widest angular gap so no fan wraps across it
    let gap = |i: usize| {
        let next = inc[(i + 1) % d].0
            + if i + 1 == d {
                std::f64::consts::TAU
            } else {
                0.0
            };
        next - inc[i].0
    };
    let widest = (0..d).max_by(|&a, &b| gap(a).total_cmp(&gap(b))).unwrap();
    inc.rotate_left((widest + 1) % d);

    let shortest = inc
        .iter()
        .map(|&(_, c)| {
            let c = &net.connections[c];
            net.stations[c.from].pos.dist(net.stations[c.to].pos)
        })
        .fold(f64::INFINITY, f64::min);
    let eps = FRAGMENT_OFFSET * shortest;

    let sizes = fan_sizes(d);
    let orig = net.stations[s].clone();
    let mut fan_of_conn = std::collections::HashMap::new();
    let mut fragments = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for (f, &size) in sizes.iter().enumerate() {
        let fan = &inc[at..at + size];
        at += size;
        let dir = fan
            .iter()
            .fold(Point::ZERO, |acc, &(a, _)| acc + Point::from_angle(a));
        let dir = dir
            .normalized()
            .unwrap_or_else(|| Point::from_angle(fan[size / 2].0));
        let idx = if f == 0 {
            s
        } else {
            net.stations.push(Station {
                id: format!("{}~{}", orig.id, f + 1),
                ..orig.clone()
            });
            net.stations.len() - 1
        };
        net.stations[idx].pos = center + dir * eps;
        net.stations[idx].origin = Some(orig.origin.clone().unwrap_or_else(|| orig.id.clone()));
        for &(_, c) in fan {
            fan_of_conn.insert(c, f);
            let conn = &mut net.connections[c];
            if conn.from == s {
                conn.from = idx;
            } else {
                conn.to = idx;
            }
        }
        fragments.push(idx);
    }

    let first_aux = net.connections.len();
    for f in 0..fragments.len() - 1 {
        net.connections.push(Connection {
            id: format!("{}~aux{}", orig.id, f + 1),
            from: fragments[f],
            to: fragments[f + 1],
            lines: Vec::new(),
            kind: ConnectionKind::Auxiliary,
        });
    }

    // old adjacency is still indexed by the original station
    let old_conn = |net: &TransitNetwork, a: usize, b: usize| net.connection_between(a, b);
    let mut new_lines = net.lines.clone();
    for (li, line) in net.lines.iter().enumerate() {
        let st = &line.stations;
        let mut seq = Vec::with_capacity(st.len() + 2);
        for (p, &x) in st.iter().enumerate() {
            if x != s {
                seq.push(x);
                continue;
            }
            let fan_before = (p > 0).then(|| fan_of_conn[&old_conn(net, st[p - 1], s).unwrap()]);
            let fan_after =
                (p + 1 < st.len()).then(|| fan_of_conn[&old_conn(net, s, st[p + 1]).unwrap()]);
            match (fan_before, fan_after) {
                (Some(a), Some(b)) => {
                    let path: Vec<usize> = if a <= b {
                        (a..=b).collect()
                    } else {
                        (b..=a).rev().collect()
                    };
                    for w in path.windows(2) {
                        let aux = first_aux + w[0].min(w[1]);
                        let ls = &mut net.connections[aux].lines;
                        if !ls.contains(&li) {
                            ls.push(li);
                            ls.sort_unstable();
                        }
                    }
                    seq.extend(path.iter().map(|&f| fragments[f]));
                }
                (Some(f), None) | (None, Some(f)) => seq.push(fragments[f]),
                (None, None) => seq.push(fragments[0]),
            }
        }
        new_lines[li].stations = seq;
    }
    net.lines = new_lines;
    net.reindex();
}
