use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("world file not found: {0}")]
    WorldFileNotFound(PathBuf),

    #[error("image not found: {0}")]
    ImageNotFound(PathBuf),

    #[error("malformed world file, line {line}: {reason}")]
    WorldFileParse { line: usize, reason: String },

    #[error("unsupported image format: {0}")]
    Format(String),

    #[error("raster too small: {width}x{height}, need at least {min}x{min}")]
    TooSmall { width: usize, height: usize, min: usize },

    #[error("singular geo transform (determinant {0})")]
    SingularTransform(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("eigensolver did not converge after {iterations} Lanczos steps")]
    EigenNoConvergence { iterations: usize },

    #[error("un-noded crossing at ({x}, {y})")]
    Topology { x: f64, y: f64 },

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("no path between terminals: {}", format_pairs(.0))]
    NoPath(Vec<(usize, usize)>),

    #[error("undefined measure: {0}")]
    UndefinedMeasure(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid session state: {0}")]
    State(String),

    #[error("empty reference raster")]
    EmptyReference,

    #[error("geojson: {0}")]
    GeoJson(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_pairs(pairs: &[(usize, usize)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("{a}-{b}"))
        .collect::<Vec<_>>()
        .join(", ")
}
