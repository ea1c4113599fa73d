use std::path::PathBuf;

use crate::geom::Frame;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error category; the CLI maps these onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    Schema,
    Geometry,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Io => 2,
            ErrorCategory::Schema => 3,
            ErrorCategory::Geometry => 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point or depth is not in front of the camera (z = {0})")]
    NonPositiveDepth(f64),
    #[error("depth map has no valid pixels")]
    EmptyDepthMap,
    #[error("frame mismatch: expected `{expected}`, found `{found}`")]
    FrameMismatch { expected: Frame, found: Frame },
    #[error("grasp axis is parallel to the platform normal; dihedral angle does not fix the gripper roll")]
    DegenerateAxis,
    #[error("dihedral angle {phi} rad is infeasible for the grasp axis (|cos phi| = {cos_phi}, limit {limit})")]
    InfeasibleAngle { phi: f64, cos_phi: f64, limit: f64 },
    #[error("contact points coincide (separation {0} m)")]
    DegenerateContactPair(f64),
    #[error("grasp and approach axes are not orthogonal (dot = {0})")]
    NonOrthogonalFrame(f64),
    #[error("approach axis points away from the platform (n_z . n = {0})")]
    ApproachAwayFromPlatform(f64),
    #[error("vector is not unit length (norm = {0})")]
    NotUnit(f64),
    #[error("matrix is not a proper rotation: {0}")]
    NotRotation(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid grasp: {0}")]
    InvalidGrasp(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("view {0} has no depth map")]
    MissingDepth(usize),
    #[error("normal window contains no valid normals")]
    EmptyWindow,
    #[error("crop window does not intersect the image")]
    DegenerateWindow,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io { .. } => ErrorCategory::Io,
            Error::Format { .. } | Error::Json(_) | Error::Config(_) => ErrorCategory::Schema,
            _ => ErrorCategory::Geometry,
        }
    }
}
