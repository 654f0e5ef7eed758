use std::io;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("segment endpoints coincide")]
    DegenerateSegment,

    #[error("degenerate geometry: pixel ray passes through the focus at the minimal pathlength")]
    DegenerateGeometry,

    #[error("no ellipsoid solution in front of the sensor")]
    NoSolution,

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid rig: {0}")]
    InvalidRig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("renderer integrity: {0}")]
    RendererIntegrity(String),

    #[error("pathlength {path:.4} m outside the gate [{min:.4}, {max:.4}) m")]
    OutOfGate { path: f64, min: f64, max: f64 },

    #[error("cube geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("anchor fit is rank deficient")]
    RankDeficient,

    #[error("no valid pixels overlap")]
    NoOverlap,

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("placement failed after {attempts} attempts: {constraint}")]
    PlacementFailed { attempts: usize, constraint: String },

    #[error("camera pose outside the grid bounds")]
    PoseOutsideBounds,

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
