//! normalize → route → place → smooth → mixed → grid.

use std::collections::HashMap;
use std::time::Instant;

use log::info;

use crate::deform::{
    run_mixed, run_smooth, with_sectors, DeformConfig, DeformWeights, LayoutState,
};
use crate::error::{Error, Result};
use crate::geometry::{crossing_pairs, Point, Segment};
use crate::grid::{align_to_grid, GridConfig, GridLayout};
use crate::matching::{
    manual_route, match_route, place_shape, GuideShape, MatchConfig, MatchedRoute,
};
use crate::network::{average_length, insert_dummy_edges, TransitNetwork};
use crate::report::{
    default_fidelity, octolinearity, shape_edge_stations, DeformSummary, Fidelity, GridSummary,
    RouteSummary, RunReport, StageTimes,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Smooth,
    Mixed,
    Grid,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Smooth => "smooth",
            Stage::Mixed => "mixed",
            Stage::Grid => "grid",
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "smooth" => Ok(Stage::Smooth),
            "mixed" => Ok(Stage::Mixed),
            "grid" => Ok(Stage::Grid),
            _ => Err(format!("unknown stage `{s}` (smooth, mixed or grid)")),
        }
    }
}

/// Weights without a target length; it is taken from the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageWeights {
    pub w_c: f64,
    pub w_l: f64,
    pub w_a: f64,
    pub w_p: f64,
    pub w_o: f64,
}

impl StageWeights {
    fn with_length(self, target_length: f64) -> DeformWeights {
        DeformWeights {
            w_c: self.w_c,
            w_l: self.w_l,
            w_a: self.w_a,
            w_p: self.w_p,
            w_o: self.w_o,
            target_length,
        }
    }

    fn of(w: DeformWeights) -> Self {
        Self {
            w_c: w.w_c,
            w_l: w.w_l,
            w_a: w.w_a,
            w_p: w.w_p,
            w_o: w.w_o,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub stage: Stage,
    pub smooth: StageWeights,
    pub mixed: StageWeights,
    pub smooth_iter: DeformConfig,
    pub mixed_iter: DeformConfig,
    /// Grid factor f_d; by network size when unset.
    pub grid_factor: Option<f64>,
    pub c_hop: f64,
    /// Dummy edge threshold as a multiple of the average connection length.
    pub dummy_factor: f64,
    pub matching: MatchConfig,
    pub manual_route: Option<Vec<String>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stage: Stage::Grid,
            smooth: StageWeights::of(DeformWeights::smooth(1.0)),
            mixed: StageWeights::of(DeformWeights::mixed(1.0)),
            smooth_iter: DeformConfig::SMOOTH,
            mixed_iter: DeformConfig::MIXED,
            grid_factor: None,
            c_hop: GridConfig::C_HOP,
            dummy_factor: 1.2,
            matching: MatchConfig::default(),
            manual_route: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: RunReport,
    pub network: TransitNetwork,
    pub route: MatchedRoute,
    pub shape: GuideShape,
    /// Weights the deformation stages ran with, target length included.
    pub smooth_weights: DeformWeights,
    pub mixed_weights: DeformWeights,
    pub smooth: Option<LayoutState>,
    pub mixed: Option<LayoutState>,
    pub grid: Option<GridLayout>,
}

impl PipelineOutput {
    /// Positions of the last stage that ran.
    pub fn final_positions(&self) -> Vec<Point> {
        if let Some(g) = &self.grid {
            g.positions.clone()
        } else if let Some(m) = &self.mixed {
            m.positions.clone()
        } else if let Some(s) = &self.smooth {
            s.positions.clone()
        } else {
            self.network.positions()
        }
    }

    pub fn shape_stations(&self) -> Vec<bool> {
        self.smooth
            .as_ref()
            .map(|s| s.shape_stations.clone())
            .unwrap_or_else(|| vec![false; self.network.station_count()])
    }
}

fn summary(s: &LayoutState) -> DeformSummary {
    DeformSummary {
        iterations: s.iteration,
        energy: s.energy,
        shape_stations: s.shape_stations.iter().filter(|&&b| b).count(),
        shape_edges: s.shape_edges.iter().filter(|&&b| b).count(),
        max_crossings: s.trace.iter().map(|r| r.crossings).max().unwrap_or(0),
    }
}

/// Crossings between the routed courses of a grid layout, by sweep.
pub fn routed_crossings(g: &GridLayout) -> usize {
    // vertices are keyed by position so courses meeting at a sink share it
    let mut keys: HashMap<(u64, u64), usize> = HashMap::new();
    let mut key = |p: Point| {
        let n = keys.len();
        *keys.entry((p.x.to_bits(), p.y.to_bits())).or_insert(n)
    };
    let mut segs = Vec::new();
    for p in g.paths.iter().filter(|p| p.routed) {
        for w in p.points.windows(2) {
            segs.push((Segment::new(w[0], w[1]), [key(w[0]), key(w[1])]));
        }
    }
    crossing_pairs(&segs).len()
}

/// A finished deformation stage, handed out before the next stage runs.
pub struct StageArtifact<'a> {
    pub stage: Stage,
    pub network: &'a TransitNetwork,
    pub shape: &'a GuideShape,
    pub state: &'a LayoutState,
}

pub fn run_pipeline(
    input: &TransitNetwork,
    shape: &GuideShape,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    run_pipeline_observed(input, shape, cfg, &mut |_| {})
}

/// Like [`run_pipeline`], calling `observe` after the smooth and mixed stages
/// so callers keep intermediate layouts even when a later stage fails.
pub fn run_pipeline_observed(
    input: &TransitNetwork,
    shape: &GuideShape,
    cfg: &PipelineConfig,
    observe: &mut dyn FnMut(&StageArtifact),
) -> Result<PipelineOutput> {
    let t_all = Instant::now();
    let mut times = StageTimes::default();

    let t = Instant::now();
    let net = input.normalize().map_err(|e| e.in_stage("normalize"))?;
    times.normalize = t.elapsed().as_secs_f64();
    info!(
        "normalized: {} stations, {} connections",
        net.station_count(),
        net.connections.len()
    );

    let t = Instant::now();
    let route = match &cfg.manual_route {
        Some(ids) => manual_route(&net, ids, shape, cfg.matching.n_samples),
        None => {
            let with_dummies =
                insert_dummy_edges(&net, cfg.dummy_factor * net.average_connection_length());
            match_route(&with_dummies, shape, &cfg.matching)
        }
    }
    .map_err(|e| e.in_stage("route"))?;
    let (placed, _) =
        place_shape(shape, &route, &net.positions()).map_err(|e| e.in_stage("route"))?;
    times.route = t.elapsed().as_secs_f64();
    info!(
        "route: {} stations, score {:.4}",
        route.stations.len(),
        route.score
    );

    let geo = net.positions();
    let length = average_length(&net, &geo);
    if !(length > 0.0) {
        return Err(
            Error::InvalidParameter("network has no connection of positive length".into())
                .in_stage("smooth"),
        );
    }

    let t = Instant::now();
    let smooth_weights = cfg.smooth.with_length(length);
    let mixed_weights = cfg.mixed.with_length(length);
    let smooth = run_smooth(&net, &placed, smooth_weights, cfg.smooth_iter);
    times.smooth = Some(t.elapsed().as_secs_f64());
    info!(
        "smooth: {} iterations, energy {:.6}",
        smooth.iteration, smooth.energy
    );
    observe(&StageArtifact {
        stage: Stage::Smooth,
        network: &net,
        shape: &placed,
        state: &smooth,
    });

    let mut mixed = None;
    let mut grid = None;
    if cfg.stage >= Stage::Mixed {
        let t = Instant::now();
        let start = with_sectors(&smooth, &net);
        let m = run_mixed(&start, &net, &placed, mixed_weights, cfg.mixed_iter);
        times.mixed = Some(t.elapsed().as_secs_f64());
        info!("mixed: {} iterations, energy {:.6}", m.iteration, m.energy);
        observe(&StageArtifact {
            stage: Stage::Mixed,
            network: &net,
            shape: &placed,
            state: &m,
        });
        if cfg.stage >= Stage::Grid {
            let t = Instant::now();
            let f_d = cfg
                .grid_factor
                .unwrap_or_else(|| GridConfig::default_factor(input.station_count()));
            let gcfg = GridConfig::for_layout(&net, &m.positions, f_d, cfg.c_hop);
            let g = align_to_grid(&net, &m, &placed, &gcfg).map_err(|e| e.in_stage("grid"))?;
            times.grid = Some(t.elapsed().as_secs_f64());
            grid = Some(g);
        }
        mixed = Some(m);
    }

    let shape_st = shape_edge_stations(&net, &smooth.shape_edges);
    let final_pos = grid
        .as_ref()
        .map(|g| g.positions.clone())
        .or_else(|| mixed.as_ref().map(|m| m.positions.clone()))
        .unwrap_or_else(|| smooth.positions.clone());
    let fidelity = Fidelity {
        geographic: default_fidelity(&geo, &shape_st, &placed),
        final_layout: default_fidelity(&final_pos, &shape_st, &placed),
    };
    let grid_summary = grid.as_ref().map(|g| GridSummary {
        cell: g.cell,
        sinks: g.sink_count,
        collapsed_stations: g.collapsed.removed_count(),
        routed_edges: g.routes.iter().filter(|r| r.routed).count(),
        failed_edges: g.failed,
        failed: g
            .failed_connections()
            .map(|c| net.connections[c].id.clone())
            .collect(),
        octolinearity: octolinearity(g),
        crossings: routed_crossings(g),
    });
    times.total = t_all.elapsed().as_secs_f64();
    let report = RunReport {
        stations: input.station_count(),
        connections: input.connections.len(),
        lines: input.lines.len(),
        normalized_stations: net.station_count(),
        normalized_connections: net.connections.len(),
        stage: cfg.stage.name().into(),
        times,
        route: RouteSummary {
            manual: cfg.manual_route.is_some(),
            stations: net.ids(&route.stations),
            closed: route.closed,
            score: route.score,
            dummy_edges: route.dummy_count,
        },
        smooth: Some(summary(&smooth)),
        mixed: mixed.as_ref().map(summary),
        grid: grid_summary,
        fidelity,
    };
    Ok(PipelineOutput {
        report,
        network: net,
        route,
        shape: placed,
        smooth_weights,
        mixed_weights,
        smooth: Some(smooth),
        mixed,
        grid,
    })
}
