use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

use super::CameraError;
use crate::scalar::{lit, Real};

/// Rigid SE(3) transform `p ↦ R·p + t`.
///
/// The frames it maps between depend on where it is used: capture and render
/// poses are world→camera, trajectory keys are camera→world and relative poses
/// map one camera frame into another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T: Real> {
    rotation: Matrix3<T>,
    translation: Vector3<T>,
}

impl<T: Real> Pose<T> {
    /// Validates orthonormality and a positive determinant.
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self, CameraError> {
        if !rotation.iter().chain(translation.iter()).all(|v| v.is_finite()) {
            return Err(CameraError::NonFinite);
        }
        let residual = rotation_residual(&rotation);
        if residual > T::rotation_tolerance() {
            return Err(CameraError::InvalidRotation {
                residual: crate::scalar::to_f64(residual),
            });
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Builds a pose from a matrix known to be a rotation (no checks).
    pub fn from_parts_unchecked(rotation: Matrix3<T>, translation: Vector3<T>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::from_parts_unchecked(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_translation(translation: Vector3<T>) -> Self {
        Self::from_parts_unchecked(Matrix3::identity(), translation)
    }

    /// Rotation of `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: &Vector3<T>, angle: T, translation: Vector3<T>) -> Self {
        let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), angle);
        Self::from_parts_unchecked(rot.into_inner(), translation)
    }

    /// Rotation from a rotation vector (axis·angle).
    pub fn from_rotation_vector(omega: &Vector3<T>, translation: Vector3<T>) -> Self {
        Self::from_parts_unchecked(Rotation3::new(*omega).into_inner(), translation)
    }

    pub fn from_quaternion(q: &UnitQuaternion<T>, translation: Vector3<T>) -> Self {
        Self::from_parts_unchecked(q.to_rotation_matrix().into_inner(), translation)
    }

    /// Projects an arbitrary 3×3 matrix onto SO(3) (closest rotation in Frobenius norm).
    pub fn from_nearest_rotation(m: &Matrix3<T>, translation: Vector3<T>) -> Self {
        Self::from_parts_unchecked(nearest_rotation(m), translation)
    }

    #[inline]
    pub fn rotation(&self) -> &Matrix3<T> {
        &self.rotation
    }

    #[inline]
    pub fn translation(&self) -> &Vector3<T> {
        &self.translation
    }

    pub fn quaternion(&self) -> UnitQuaternion<T> {
        UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.rotation))
    }

    #[inline]
    pub fn transform_point(&self, p: &Vector3<T>) -> Vector3<T> {
        self.rotation * p + self.translation
    }

    #[inline]
    pub fn rotate(&self, v: &Vector3<T>) -> Vector3<T> {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Pose<T>) -> Pose<T> {
        Self::from_parts_unchecked(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Pose<T> {
        let rt = self.rotation.transpose();
        Self::from_parts_unchecked(rt, -(rt * self.translation))
    }

    /// Position of the frame origin after inversion, i.e. the camera center for a world→camera pose.
    pub fn center(&self) -> Vector3<T> {
        -(self.rotation.transpose() * self.translation)
    }

    /// Rotation angle in radians, robust near 0 and π.
    pub fn rotation_angle(&self) -> T {
        self.quaternion().angle()
    }

    /// `max(‖RᵀR − I‖_max, |det R − 1|)`.
    pub fn orthonormality_residual(&self) -> T {
        rotation_residual(&self.rotation)
    }

    /// Rotation angle and translation distance between two poses.
    pub fn distance(&self, other: &Pose<T>) -> (T, T) {
        let delta = self.compose(&other.inverse());
        (
            delta.rotation_angle(),
            (self.translation - other.translation).norm(),
        )
    }

    /// Row-major `[R | t]`.
    pub fn to_row_major(&self) -> [T; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            t[0],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            t[1],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t[2],
        ]
    }

    pub fn from_row_major(v: &[T; 12]) -> Result<Self, CameraError> {
        let rotation = Matrix3::new(v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10]);
        Self::new(rotation, Vector3::new(v[3], v[7], v[11]))
    }

    pub fn cast<U: Real>(&self) -> Pose<U> {
        Pose::from_parts_unchecked(
            self.rotation.map(|x| lit(crate::scalar::to_f64(x))),
            self.translation.map(|x| lit(crate::scalar::to_f64(x))),
        )
    }
}

impl<T: Real> Default for Pose<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> std::ops::Mul for Pose<T> {
    type Output = Pose<T>;
    fn mul(self, rhs: Pose<T>) -> Pose<T> {
        self.compose(&rhs)
    }
}

pub(crate) fn rotation_residual<T: Real>(r: &Matrix3<T>) -> T {
    let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
    let det = (r.determinant() - T::one()).abs();
    if ortho > det {
        ortho
    } else {
        det
    }
}

/// SVD projection onto SO(3).
pub fn nearest_rotation<T: Real>(m: &Matrix3<T>) -> Matrix3<T> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let mut r = u * v_t;
    if r.determinant() < T::zero() {
        let mut d = Matrix3::identity();
        d[(2, 2)] = -T::one();
        r = u * d * v_t;
    }
    r
}
