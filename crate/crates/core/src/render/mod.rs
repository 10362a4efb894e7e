//! Point-splat rendering along trajectories, normals from depth and bilateral-grid
//! colour harmonization.

mod bilateral;
mod normals;
mod sequence;
mod splat;

pub use bilateral::{
    apply_bilateral_grid, fit_bilateral_grid, fit_bilateral_grid_masked, BilateralGrid, GridDims, GridFitOptions,
};
pub use normals::{normal_from_depth, NormalMap};
pub use sequence::{
    read_sequence, render_sequence, render_sequence_to_disk, write_sequence, RenderedSequence, SequenceLayout,
    SequenceOnDisk, StreamedSequence,
};
pub use splat::{coverage_fraction, mean_depth, render_view, render_view_sequential, RenderOptions, Splat};

use thiserror::Error;

use crate::camera::{CameraError, Pose};
use crate::geometry::DepthMap;
use crate::io::IoError;
use crate::raster::{Raster, RgbImage};
use crate::scalar::Real;
use crate::trajectory::TrajectoryError;

/// One rendered view. Depth is valid exactly where `coverage` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T: Real> {
    pub rgb: RgbImage<T>,
    pub depth: DepthMap<T>,
    pub coverage: Raster<bool>,
    /// World→camera pose the frame was rendered from.
    pub pose: Pose<T>,
    pub index: usize,
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("frame {index}: {source}")]
    Frame {
        index: usize,
        #[source]
        source: Box<RenderError>,
    },
    #[error("layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Io(#[from] IoError),
}
