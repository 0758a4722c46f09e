//! Metro map layout that embeds a guide shape: route matching with a
//! direction-based Fréchet distance, least-squares deformation into a smooth
//! and then a mixed (shape plus octilinear) layout, and final grid routing.

pub mod deform;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod matching;
pub mod network;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use deform::{DeformConfig, DeformWeights, LayoutState};
pub use error::{Error, Result};
pub use geometry::{BBox, Point, Polyline, Similarity};
pub use grid::{GridConfig, GridLayout};
pub use matching::{GuideShape, MatchConfig, MatchedRoute};
pub use network::{Connection, Line, Station, TransitNetwork};
pub use pipeline::{
    run_pipeline, run_pipeline_observed, PipelineConfig, PipelineOutput, Stage, StageArtifact,
};
pub use report::RunReport;
