//! Metric reconstruction: PnP, depth rescaling, point-cloud fusion and
//! Gaussian scale initialization.

mod depth;
mod fusion;
mod pnp;
mod types;

pub use depth::{align_depth, MIN_SOURCE_VARIANCE};
pub use fusion::{
    assign_gaussian_scales, fuse_point_clouds, initial_gaussian_scales, observed_depth, View,
    VISIBILITY_TOLERANCE,
};
pub use pnp::{
    reprojection_residuals, solve_pnp, PnpOptions, PnpResult, ReprojectionResiduals, MINIMAL_SAMPLE,
};
pub use types::{CloudPoint, Correspondence, DepthAlignment, DepthMap, PointCloud};

use thiserror::Error;

use crate::camera::CameraError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("depth samples have (near) zero variance")]
    DegenerateSamples,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no valid pixels to fuse")]
    EmptyCloud,
    #[error("non-finite input")]
    NonFinite,
    #[error(transparent)]
    Camera(#[from] CameraError),
}
