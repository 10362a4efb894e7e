//! Procedural terrain stereo simulator with exact ground truth.
//!
//! World frame is Z-up; the terrain is a bilinear heightfield rendered by ray casting
//! with Lambert shading. Everything is a pure function of `(seed, params)`.

mod capture;
mod perturb;
mod terrain;

pub use capture::{
    default_rig, look_at, ray_cast_view, simulate_stereo_capture, RayCastView, Rig, StereoCapture, SKY,
};
pub use perturb::{perturb_capture, perturb_image, Perturbation, PerturbationRecord, OUTLIER_MIN_OFFSET};
pub use terrain::{generate_terrain, value_noise, Terrain, TerrainParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("no terrain visible from the rig")]
    NoVisibleTerrain,
    #[error("bad perturbation spec: {0}")]
    BadSpec(String),
}
