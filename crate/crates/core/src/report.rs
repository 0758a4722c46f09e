//! Layout quality measures and the run report.

use serde::Serialize;

use crate::geometry::{integral_frechet, Point, Polyline, DEFAULT_SAMPLES};
use crate::grid::GridLayout;
use crate::matching::GuideShape;
use crate::network::TransitNetwork;

/// Angular slack when testing a segment for a multiple of 45°.
pub const OCTO_TOL: f64 = 1e-6;

pub fn is_octolinear(a: Point, b: Point) -> bool {
    let ang = (b - a).angle();
    let q = ang / std::f64::consts::FRAC_PI_4;
    (q - q.round()).abs() * std::f64::consts::FRAC_PI_4 <= OCTO_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Octolinearity {
    /// Octilinear share of the checked octo-edge segments.
    pub fraction: f64,
    pub checked: usize,
    /// Segments touching spliced shape sinks, not checked.
    pub excluded: usize,
    /// All routed segments, shape edges included.
    pub total: usize,
}

/// Checks the routed octo connections of a grid layout.
pub fn octolinearity(layout: &GridLayout) -> Octolinearity {
    let (mut ok, mut checked, mut excluded, mut total) = (0, 0, 0, 0);
    for p in layout.paths.iter().filter(|p| p.routed) {
        for (w, &ex) in p.points.windows(2).zip(&p.exempt) {
            total += 1;
            if p.shape {
                continue;
            }
            if ex {
                excluded += 1;
            } else {
                checked += 1;
                ok += is_octolinear(w[0], w[1]) as usize;
            }
        }
    }
    Octolinearity {
        fraction: if checked == 0 {
            1.0
        } else {
            ok as f64 / checked as f64
        },
        checked,
        excluded,
        total,
    }
}

/// Distance between the shape stations, chained in the order of their closest
/// points along each polyline, and that polyline; summed over polylines with
/// at least two stations. `None` when no polyline has two.
pub fn shape_fidelity(
    positions: &[Point],
    stations: &[usize],
    shape: &GuideShape,
    n_samples: usize,
) -> Option<f64> {
    let mut per_line: Vec<Vec<(f64, usize)>> = vec![Vec::new(); shape.polylines.len()];
    for &s in stations {
        let (_, pl, t) = shape.closest_point(positions[s]);
        per_line[pl].push((t, s));
    }
    let mut total = None;
    for (pl, mut st) in per_line.into_iter().enumerate() {
        st.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let line = &shape.polylines[pl];
        let pts: Vec<Point> = st.iter().map(|&(_, s)| positions[s]).collect();
        let closed = line.is_closed() && pts.len() >= 3;
        let Ok(chain) = Polyline::new_dedup(pts, closed) else {
            continue;
        };
        let d = integral_frechet(&chain, line, n_samples).distance;
        *total.get_or_insert(0.0) += d;
    }
    total
}

/// Stations incident to a shape edge.
pub fn shape_edge_stations(net: &TransitNetwork, shape_edges: &[bool]) -> Vec<usize> {
    let mut on = vec![false; net.station_count()];
    for (c, &s) in net.connections.iter().zip(shape_edges) {
        if s {
            on[c.from] = true;
            on[c.to] = true;
        }
    }
    (0..on.len()).filter(|&i| on[i]).collect()
}

pub fn default_fidelity(
    positions: &[Point],
    stations: &[usize],
    shape: &GuideShape,
) -> Option<f64> {
    shape_fidelity(positions, stations, shape, DEFAULT_SAMPLES)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageTimes {
    pub normalize: f64,
    pub route: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smooth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<f64>,
    pub total: f64,
}

impl StageTimes {
    pub fn stage_sum(&self) -> f64 {
        self.normalize
            + self.route
            + self.smooth.unwrap_or(0.0)
            + self.mixed.unwrap_or(0.0)
            + self.grid.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteSummary {
    pub manual: bool,
    pub stations: Vec<String>,
    pub closed: bool,
    pub score: f64,
    pub dummy_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformSummary {
    pub iterations: usize,
    pub energy: f64,
    pub shape_stations: usize,
    pub shape_edges: usize,
    /// Largest crossing count over the accepted iterates.
    pub max_crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub cell: f64,
    pub sinks: usize,
    pub collapsed_stations: usize,
    pub routed_edges: usize,
    pub failed_edges: usize,
    /// Connections drawn straight because their route failed.
    pub failed: Vec<String>,
    pub octolinearity: Octolinearity,
    pub crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fidelity {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geographic: Option<f64>,
    #[serde(rename = "final", skip_serializing_if = "Option::is_none")]
    pub final_layout: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub stations: usize,
    pub connections: usize,
    pub lines: usize,
    pub normalized_stations: usize,
    pub normalized_connections: usize,
    pub stage: String,
    pub times: StageTimes,
    pub route: RouteSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smooth: Option<DeformSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixed: Option<DeformSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSummary>,
    pub fidelity: Fidelity,
}

impl RunReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}
