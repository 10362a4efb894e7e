//! Sequence 3D-consistency (self and cross reprojection warp error) and image metrics.

mod image;
mod warp;

pub use image::{depth_l1, d_ssim, photometric_loss, psnr, ssim, DepthL1, SsimOptions};
pub use warp::{
    cross_reprojection_error, pairs, self_reprojection_error, warp_error, CrossTarget, FrameGeometry, PairError,
    PairingPolicy, Reprojection, WarpReport, DEFAULT_GRID_STRIDE,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConsistencyError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("image {width}x{height} smaller than the {window}px window")]
    TooSmall { width: usize, height: usize, window: usize },
    #[error("no jointly valid depth pixels")]
    NoOverlap,
    #[error("no usable points ({behind_camera} behind the camera, {unmatched} unmatched)")]
    NoValidPoints { behind_camera: usize, unmatched: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("invalid frame geometry: {0}")]
    BadGeometry(String),
    #[error("weight {0} outside [0, 1]")]
    BadWeight(f64),
}
