//! Camera models: pinhole with radial distortion, CAHVOR, rigid poses.

mod cahvor;
mod distortion;
pub mod format;
mod intrinsics;
mod pose;

pub use cahvor::{cahvor_to_pinhole, CahvScalars, CahvorModel, ConvertedCamera, ORTHOGONALITY_TOLERANCE};
pub use distortion::{apply_distortion, undistort, MAX_UNDISTORT_ITERATIONS};
pub use intrinsics::{Intrinsics, Pixel};
pub use pose::{nearest_rotation, Pose};

use nalgebra::Vector3;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CameraError {
    #[error("point has non-positive depth")]
    NonPositiveDepth,
    #[error("degenerate camera model: {0}")]
    DegenerateModel(String),
    #[error("converted axes deviate from a rotation by {residual:e}")]
    NonOrthogonal { residual: f64 },
    #[error("undistortion did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("matrix is not a rotation (residual {residual:e})")]
    InvalidRotation { residual: f64 },
    #[error("non-finite camera parameter")]
    NonFinite,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing key `{0}`")]
    MissingKey(String),
}

/// Ideal pinhole projection of a camera-frame point.
pub fn project<T: Real>(point_cam: &Vector3<T>, intr: &Intrinsics<T>) -> Result<Pixel<T>, CameraError> {
    intr.project(point_cam)
}

/// Lifts a pixel with metric depth into the camera frame.
pub fn back_project<T: Real>(
    pixel: &Pixel<T>,
    depth: T,
    intr: &Intrinsics<T>,
) -> Result<Vector3<T>, CameraError> {
    intr.back_project(pixel, depth)
}

pub fn transform_point<T: Real>(pose: &Pose<T>, p: &Vector3<T>) -> Vector3<T> {
    pose.transform_point(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Converted pinhole projection must agree with the CAHV ratios.
    #[test]
    fn converted_projection_matches_cahv() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let pose = Pose::from_rotation_vector(
            &Vector3::new(0.3, -0.2, 0.1),
            Vector3::new(1.0, -2.0, 0.5),
        );
        let intr = Intrinsics::new(900.0, 880.0, 512.0, 384.0, 1024, 768).unwrap();
        let m = CahvorModel::from_pinhole(&pose, &intr);
        let conv = cahvor_to_pinhole(&m).unwrap();
        let mut checked = 0;
        while checked < 1000 {
            let cam = Vector3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(0.5..50.0),
            );
            let world = pose.inverse().transform_point(&cam);
            let direct = m.project_cahv(&world).unwrap();
            let via = project(&conv.pose.transform_point(&world), &conv.intrinsics).unwrap();
            assert!(direct.distance(&via) < 1e-6);
            checked += 1;
        }
    }
}
