//! Stereo-to-multiview dataset tooling: camera models, image filtering, stereo reconstruction,
//! camera trajectories, point-cloud rendering, consistency metrics, synthetic scenes and a
//! batch pipeline tying them together.
//!
//! Geometric code is generic over [`Real`]; the `*64` and `*32` aliases below fix the precision.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod consistency;
pub mod geometry;
pub mod imgfilter;
pub mod io;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod scalar;
pub mod synthworld;
pub mod trajectory;

pub use camera::{CameraError, Intrinsics, Pixel, Pose};
pub use geometry::{DepthMap, GeometryError, PointCloud};
pub use raster::{Raster, RgbImage};
pub use scalar::Real;
pub use trajectory::{Trajectory, TrajectoryKind};

pub type Pose64 = Pose<f64>;
pub type Pose32 = Pose<f32>;
pub type Intrinsics64 = Intrinsics<f64>;
pub type Intrinsics32 = Intrinsics<f32>;
pub type Pixel64 = Pixel<f64>;
pub type Pixel32 = Pixel<f32>;
pub type DepthMap64 = DepthMap<f64>;
pub type DepthMap32 = DepthMap<f32>;
pub type PointCloud64 = PointCloud<f64>;
pub type PointCloud32 = PointCloud<f32>;
pub type RgbImage64 = RgbImage<f64>;
pub type RgbImage32 = RgbImage<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
