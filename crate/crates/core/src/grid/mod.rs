//! Final snapping onto an octilinear grid with the guide shape spliced in.
//! Every (collapsed) connection is routed as a shortest path in a fixed
//! order; removed degree-2 stations are put back along their routes.

mod collapse;
mod graph;

pub use collapse::{
    collapse_network, reinsert_stations, route_order, split_at_lengths, Collapsed, ReducedEdge,
};
pub use graph::{build_grid, overlay_shape, GridGraph, GridPath, Hop, Occupant, Sink, SinkKind};

use std::f64::consts::PI;

use log::{debug, info};

use crate::deform::LayoutState;
use crate::error::Result;
use crate::geometry::{BBox, Point};
use crate::matching::GuideShape;
use crate::network::{average_length, TransitNetwork};

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// Cell size d.
    pub cell: f64,
    pub c_hop: f64,
    pub c_sink: f64,
    pub d_min: f64,
    pub d_low: f64,
    pub d_up: f64,
    /// Candidate radius for octo stations.
    pub radius: f64,
    /// Extra cells around the covered box.
    pub margin: usize,
}

impl GridConfig {
    pub const C_HOP: f64 = 20.0;

    pub fn for_cell(d: f64) -> Self {
        Self::with_costs(d, Self::C_HOP)
    }

    pub fn with_costs(d: f64, c_hop: f64) -> Self {
        Self {
            cell: d,
            c_hop,
            c_sink: 10.0 * c_hop,
            d_min: d / 5.0,
            d_low: d / 2.0,
            d_up: 1.5 * d,
            radius: 2.0 * d,
            margin: 1,
        }
    }

    /// Grid factor f_d by network size.
    pub fn default_factor(station_count: usize) -> f64 {
        if station_count > 150 {
            0.2
        } else {
            0.3
        }
    }

    /// Cell size `f_d` times the average connection length of the layout.
    pub fn for_layout(net: &TransitNetwork, pos: &[Point], f_d: f64, c_hop: f64) -> Self {
        Self::with_costs(f_d * average_length(net, pos), c_hop)
    }

    /// Scale k of the within-sink cost `k (2π − θ)` at grid sinks: a 45°
    /// inner angle costs `c_hop / 2`.
    pub fn turn_scale(&self) -> f64 {
        2.0 * self.c_hop / (7.0 * PI)
    }
}

/// The drawn course of one original connection.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionPath {
    pub points: Vec<Point>,
    /// Per segment: touches a spliced shape sink, so it need not be octilinear.
    pub exempt: Vec<bool>,
    pub routed: bool,
    pub shape: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedEdge {
    /// Index into the collapsed edge list.
    pub edge: usize,
    pub sinks: Vec<usize>,
    pub points: Vec<Point>,
    pub routed: bool,
}

#[derive(Debug, Clone)]
pub struct GridLayout {
    pub positions: Vec<Point>,
    /// Per original connection.
    pub paths: Vec<ConnectionPath>,
    pub routes: Vec<RoutedEdge>,
    pub collapsed: Collapsed,
    /// Collapsed edges without a route.
    pub failed: usize,
    pub cell: f64,
    pub sink_count: usize,
}

impl GridLayout {
    pub fn failed_connections(&self) -> impl Iterator<Item = usize> + '_ {
        self.paths
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.routed)
            .map(|(c, _)| c)
    }
}

/// Candidate sinks `(sink, virtual edge cost)` for a station.
fn candidates(g: &GridGraph, pos: Point, shape_station: bool) -> Vec<(usize, f64)> {
    let cfg = &g.cfg;
    let cost = |s: usize| g.sinks[s].pos.dist(pos) / cfg.cell * cfg.c_hop / 2.0;
    let mut free: Vec<(usize, f64)> = g
        .live_sinks()
        .filter(|&s| g.occupied[s].is_none() && g.sinks[s].is_shape() == shape_station)
        .map(|s| (s, g.sinks[s].pos.dist(pos)))
        .collect();
    free.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let keep = if shape_station {
        2.min(free.len())
    } else {
        let within = free.iter().take_while(|x| x.1 <= cfg.radius).count();
        // nothing in reach: fall back to the nearest free sink
        within.max(1.min(free.len()))
    };
    free.truncate(keep);
    free.into_iter().map(|(s, _)| (s, cost(s))).collect()
}

/// Routes the collapsed network of a mixed layout on the grid.
pub fn align_to_grid(
    net: &TransitNetwork,
    state: &LayoutState,
    shape: &GuideShape,
    cfg: &GridConfig,
) -> Result<GridLayout> {
    let bbox = BBox::of_points(state.positions.iter().copied())
        .map(|b| b.union(shape.bbox()))
        .unwrap_or_else(|| shape.bbox());
    let grid = build_grid(bbox, cfg)?;
    let mut grid = overlay_shape(grid, shape)?;
    info!(
        "grid: {}×{} cells of {:.4}, {} sinks, {} hops",
        grid.cols,
        grid.rows,
        cfg.cell,
        grid.sinks.len(),
        grid.hops.len()
    );
    let collapsed = collapse_network(net, state);
    let order = route_order(&collapsed, net, state, shape);
    let mut fixed: Vec<Option<usize>> = vec![None; net.station_count()];
    let mut routes: Vec<Option<RoutedEdge>> = vec![None; collapsed.edges.len()];
    let mut failed = 0;
    for &e in &order {
        let edge = &collapsed.edges[e];
        let ends = [edge.from, edge.to].map(|s| match fixed[s] {
            Some(k) => vec![(k, 0.0)],
            None => candidates(&grid, state.positions[s], state.shape_stations[s]),
        });
        let [mut src, mut dst] = ends;
        // a sink offered to both ends goes to the cheaper one
        dst.retain(|&(t, ct)| src.iter().all(|&(s, cs)| s != t || ct < cs));
        src.retain(|&(s, _)| dst.iter().all(|&(t, _)| t != s));
        let found = if src.is_empty() || dst.is_empty() {
            None
        } else {
            grid.shortest_path(&src, &dst, edge.shape)
        };
        routes[e] = Some(match found {
            Some(path) => {
                grid.commit(&path, e, edge.from, edge.to);
                fixed[edge.from] = Some(path.sinks[0]);
                fixed[edge.to] = Some(*path.sinks.last().unwrap());
                RoutedEdge {
                    edge: e,
                    points: path.sinks.iter().map(|&s| grid.sinks[s].pos).collect(),
                    sinks: path.sinks,
                    routed: true,
                }
            }
            None => {
                failed += 1;
                debug!(
                    "no grid route for {} ({} → {})",
                    net.connections[edge.connections[0]].id,
                    net.stations[edge.from].id,
                    net.stations[edge.to].id
                );
                RoutedEdge {
                    edge: e,
                    sinks: Vec::new(),
                    points: Vec::new(),
                    routed: false,
                }
            }
        });
    }
    if failed > 0 {
        info!("{failed} edges could not be routed");
    }
    let mut positions = state.positions.clone();
    for (s, f) in fixed.iter().enumerate() {
        if let Some(k) = f {
            positions[s] = grid.sinks[*k].pos;
        }
    }
    let routes: Vec<RoutedEdge> = routes
        .into_iter()
        .map(|r| r.expect("every edge is ordered"))
        .collect();
    let shape_sink = |r: &RoutedEdge| -> Vec<bool> {
        r.sinks.iter().map(|&s| grid.sinks[s].is_shape()).collect()
    };
    let on_shape: Vec<Vec<bool>> = routes.iter().map(shape_sink).collect();
    let paths = reinsert_stations(net, &collapsed, &routes, &on_shape, &mut positions);
    Ok(GridLayout {
        positions,
        paths,
        routes,
        collapsed,
        failed,
        cell: cfg.cell,
        sink_count: grid.sinks.len(),
    })
}
