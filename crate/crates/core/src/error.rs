use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("invalid network: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("degenerate bounding box ({0})")]
    DegenerateBBox(&'static str),
    #[error("degenerate polyline: {0}")]
    DegeneratePolyline(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("overlapping connections {0} and {1} cannot be planarized")]
    PlanarizeOverlap(String, String),
    #[error("stations {0} and {1} are not adjacent")]
    RouteGap(String, String),
    #[error("unknown station {0}")]
    UnknownStation(String),
    #[error("no route with finite score matches the shape")]
    NoRoute,
    #[error("shape vertex unreachable after splicing into the grid")]
    ShapeUnreachable,
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors caused by malformed or inconsistent input documents.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::DegeneratePolyline(_)
            | Error::UnknownStation(_) => true,
            Error::Stage { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
