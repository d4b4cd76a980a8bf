use thiserror::Error;

/// Errors produced by the segmentation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("histogram shape mismatch: {0} vs {1} bins")]
    HistogramShape(usize, usize),
    #[error("histogram is not normalized")]
    UnnormalizedHistogram,
    #[error("coincident points: direction undefined")]
    CoincidentPoints,
    #[error("empty candidate set")]
    EmptyCandidates,
    #[error("need at least {needed} seeds, got {got}")]
    InsufficientSeeds { needed: usize, got: usize },
    #[error("seed at ({x}, {y}) lies outside the image")]
    SeedOutOfBounds { x: f64, y: f64 },
    #[error("spline fit needs at least {needed} distinct points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("scene out of bounds: {0}")]
    SceneBounds(String),
    #[error("unsupported document version {0}")]
    Version(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Codec(#[from] image::ImageError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
