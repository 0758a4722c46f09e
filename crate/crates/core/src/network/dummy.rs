use super::{Connection, ConnectionKind, TransitNetwork};

/// Default shortcut threshold: 1.2 × the average connection length.
pub fn default_dummy_threshold(net: &TransitNetwork) -> f64 {
    1.2 * net.average_connection_length()
}

/// Adds a line-less shortcut connection between every unconnected station
/// pair closer than `threshold`.
pub fn insert_dummy_edges(net: &TransitNetwork, threshold: f64) -> TransitNetwork {
    let mut conns = net.connections.clone();
    let n = net.stations.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| net.stations[a].pos.x.total_cmp(&net.stations[b].pos.x));
    let mut found = Vec::new();
    for (k, &a) in order.iter().enumerate() {
        let pa = net.stations[a].pos;
        for &b in &order[k + 1..] {
            let pb = net.stations[b].pos;
            if pb.x - pa.x >= threshold {
                break;
            }
            if pa.dist(pb) < threshold && net.connection_between(a, b).is_none() {
                found.push((a.min(b), a.max(b)));
            }
        }
    }
    found.sort_unstable();
    for (a, b) in found {
        conns.push(Connection {
            id: format!("~{}~{}", net.stations[a].id, net.stations[b].id),
            from: a,
            to: b,
            lines: Vec::new(),
            kind: ConnectionKind::DummyShortcut,
        });
    }
    TransitNetwork::new(net.stations.clone(), conns, net.lines.clone())
}
