use thiserror::Error;

#[derive(Debug, Error)]
pub enum VemError {
    #[error("degenerate Voronoi diagram: {0}")]
    DegenerateDiagram(String),

    #[error("invalid cell {cell}: {reason}")]
    InvalidCell { cell: usize, reason: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("index {index} out of range (size {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("unsupported degree {0} (supported: 1, 2, 3)")]
    UnsupportedDegree(usize),

    #[error("singular projector system on cell {cell}")]
    SingularProjector { cell: usize },

    #[error("point ({x}, {y}) is not on edge {edge} (distance {distance:e})")]
    PointOffEdge {
        edge: usize,
        x: f64,
        y: f64,
        distance: f64,
    },

    #[error("edge {0} is a boundary edge")]
    BoundaryEdge(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh file parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = VemError> = std::result::Result<T, E>;
