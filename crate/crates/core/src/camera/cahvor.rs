use nalgebra::{Matrix3, Vector3};

use super::pose::rotation_residual;
use super::{CameraError, Intrinsics, Pixel, Pose};
use crate::scalar::{lit, to_f64, Real};

/// Largest tolerated deviation of the converted axes from a rotation.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-6;

/// CAHVOR camera: center, axis, horizontal, vertical, optical offset and radial terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CahvorModel<T: Real> {
    pub c: Vector3<T>,
    pub a: Vector3<T>,
    pub h: Vector3<T>,
    pub v: Vector3<T>,
    pub o: Vector3<T>,
    pub r: Vector3<T>,
    /// Millimetres per pixel.
    pub pixel_size: T,
    /// Image size; when absent the converter assumes a centered principal point.
    pub width: Option<u32>,
    pub height: Option<u32>,
}

/// The four CAHV scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CahvScalars<T: Real> {
    pub h_c: T,
    pub v_c: T,
    pub h_s: T,
    pub v_s: T,
}

/// Pinhole equivalent of a CAHVOR model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvertedCamera<T: Real> {
    /// World→camera with rows `(Hₙ, Vₙ, A)`: x right, y down, z along the axis.
    pub pose: Pose<T>,
    pub intrinsics: Intrinsics<T>,
    /// Rows `(Hₙ, −Vₙ, A)`: the same axes with the vertical image axis pointing up.
    /// This has determinant −1 and therefore is not a [`Pose`].
    pub y_up_rotation: Matrix3<T>,
    /// Deviation of `(Hₙ, Vₙ, A)` from a rotation.
    pub orthogonality_residual: T,
    pub scalars: CahvScalars<T>,
}

impl<T: Real> CahvorModel<T> {
    /// `h_c = H·A`, `v_c = V·A`, `h_s = ‖H − h_c A‖`, `v_s = ‖V − v_c A‖`.
    pub fn scalars(&self) -> CahvScalars<T> {
        let h_c = self.h.dot(&self.a);
        let v_c = self.v.dot(&self.a);
        CahvScalars {
            h_c,
            v_c,
            h_s: (self.h - self.a * h_c).norm(),
            v_s: (self.v - self.a * v_c).norm(),
        }
    }

    /// Builds the CAHVOR model equivalent to a pinhole camera (`O = A`).
    pub fn from_pinhole(world_to_camera: &Pose<T>, intr: &Intrinsics<T>) -> Self {
        let r = world_to_camera.rotation();
        let h_n: Vector3<T> = r.row(0).transpose();
        let v_n: Vector3<T> = r.row(1).transpose();
        let a: Vector3<T> = r.row(2).transpose();
        let scale = intr.pixel_size * intr.fx;
        let s2 = scale * scale;
        Self {
            c: world_to_camera.center(),
            a,
            h: h_n * intr.fx + a * intr.cx,
            v: v_n * intr.fy + a * intr.cy,
            o: a,
            r: Vector3::new(intr.k[0], intr.k[1] * s2, intr.k[2] * s2 * s2),
            pixel_size: intr.pixel_size,
            width: Some(intr.width),
            height: Some(intr.height),
        }
    }

    /// Direct CAHV projection `u = (P−C)·H / (P−C)·A`, `v = (P−C)·V / (P−C)·A`.
    pub fn project_cahv(&self, p: &Vector3<T>) -> Result<Pixel<T>, CameraError> {
        let d = p - self.c;
        let den = d.dot(&self.a);
        if !(den > T::zero()) {
            return Err(CameraError::NonPositiveDepth);
        }
        Ok(Pixel::new(d.dot(&self.h) / den, d.dot(&self.v) / den))
    }
}

/// Converts CAHVOR to pinhole + radial distortion. The `O` vector is not used.
pub fn cahvor_to_pinhole<T: Real>(m: &CahvorModel<T>) -> Result<ConvertedCamera<T>, CameraError> {
    let finite = [m.c, m.a, m.h, m.v, m.o, m.r]
        .iter()
        .all(|v| v.iter().all(|x| x.is_finite()))
        && m.pixel_size.is_finite();
    if !finite {
        return Err(CameraError::NonFinite);
    }
    let axis_err = (m.a.norm() - T::one()).abs();
    if axis_err > T::rotation_tolerance() {
        return Err(CameraError::DegenerateModel(format!(
            "axis vector is not unit length (|A| - 1 = {})",
            to_f64(axis_err)
        )));
    }
    if !(m.pixel_size > T::zero()) {
        return Err(CameraError::DegenerateModel("pixel_size must be positive".into()));
    }
    let s = m.scalars();
    let tiny = T::default_epsilon() * lit(1.0e3);
    if s.h_s <= tiny || s.v_s <= tiny {
        return Err(CameraError::DegenerateModel(format!(
            "h_s = {}, v_s = {}",
            to_f64(s.h_s),
            to_f64(s.v_s)
        )));
    }
    let h_n = (m.h - m.a * s.h_c) / s.h_s;
    let v_n = (m.v - m.a * s.v_c) / s.v_s;
    let rows = Matrix3::from_rows(&[h_n.transpose(), v_n.transpose(), m.a.transpose()]);
    let residual = rotation_residual(&rows);
    if to_f64(residual) > ORTHOGONALITY_TOLERANCE {
        return Err(CameraError::NonOrthogonal {
            residual: to_f64(residual),
        });
    }
    let y_up_rotation =
        Matrix3::from_rows(&[h_n.transpose(), (-v_n).transpose(), m.a.transpose()]);

    let pose = Pose::from_parts_unchecked(rows, -(rows * m.c));
    let scale = m.pixel_size * s.h_s;
    let scale2 = scale * scale;
    let k = [m.r[0], m.r[1] / scale2, m.r[2] / (scale2 * scale2)];
    let dim = |given: Option<u32>, center: T| {
        given.unwrap_or_else(|| (to_f64(center) * 2.0 + 1.0).round().max(1.0) as u32)
    };
    let intrinsics = Intrinsics {
        fx: s.h_s,
        fy: s.v_s,
        cx: s.h_c,
        cy: s.v_c,
        width: dim(m.width, s.h_c),
        height: dim(m.height, s.v_c),
        k,
        pixel_size: m.pixel_size,
    }
    .validated()?;
    Ok(ConvertedCamera {
        pose,
        intrinsics,
        y_up_rotation,
        orthogonality_residual: residual,
        scalars: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn axis_aligned() -> CahvorModel<f64> {
        CahvorModel {
            c: Vector3::zeros(),
            a: Vector3::new(0.0, 0.0, 1.0),
            h: Vector3::new(800.0, 0.0, 320.0),
            v: Vector3::new(0.0, 800.0, 240.0),
            o: Vector3::new(0.0, 0.0, 1.0),
            r: Vector3::zeros(),
            pixel_size: 1.0,
            width: None,
            height: None,
        }
    }

    #[test]
    fn axis_aligned_construction() {
        let out = cahvor_to_pinhole(&axis_aligned()).unwrap();
        let k = out.intrinsics;
        assert_eq!((k.fx, k.fy, k.cx, k.cy), (800.0, 800.0, 320.0, 240.0));
        assert_eq!(k.k, [0.0; 3]);
        assert_eq!(
            out.y_up_rotation,
            Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0))
        );
        assert_eq!(*out.pose.rotation(), Matrix3::identity());
        assert_eq!(out.pose.center(), Vector3::zeros());
        assert_eq!((k.width, k.height), (641, 481));
    }

    #[test]
    fn radial_terms() {
        let mut m = axis_aligned();
        m.r = Vector3::new(0.01, 8e-4, 0.0);
        let k = cahvor_to_pinhole(&m).unwrap().intrinsics.k;
        assert_eq!(k[0], 0.01);
        assert!((k[1] - 1.25e-9).abs() < 1e-24);
        assert_eq!(k[2], 0.0);
    }

    #[test]
    fn degenerate_and_skewed_models() {
        let mut m = axis_aligned();
        m.h = Vector3::new(0.0, 0.0, 320.0);
        assert!(matches!(cahvor_to_pinhole(&m), Err(CameraError::DegenerateModel(_))));

        let mut m = axis_aligned();
        m.v = Vector3::new(10.0, 800.0, 240.0);
        match cahvor_to_pinhole(&m) {
            Err(CameraError::NonOrthogonal { residual }) => assert!(residual > 1e-6),
            other => panic!("expected NonOrthogonal, got {other:?}"),
        }

        let mut m = axis_aligned();
        m.a = Vector3::new(0.0, 0.0, 2.0);
        assert!(matches!(cahvor_to_pinhole(&m), Err(CameraError::DegenerateModel(_))));
    }

    #[test]
    fn pinhole_roundtrip_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let pose = Pose::from_rotation_vector(
                &Vector3::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                ),
                Vector3::new(
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                ),
            );
            let intr = Intrinsics::<f64>::new(
                rng.random_range(200.0..2000.0),
                rng.random_range(200.0..2000.0),
                rng.random_range(100.0..800.0),
                rng.random_range(100.0..600.0),
                1024,
                768,
            )
            .unwrap()
            .with_distortion([
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
            ])
            .unwrap()
            .with_pixel_size(rng.random_range(0.005..0.02))
            .unwrap();
            let m = CahvorModel::from_pinhole(&pose, &intr);
            let out = cahvor_to_pinhole(&m).unwrap();
            let k = out.intrinsics;
            for (a, b) in [(k.fx, intr.fx), (k.fy, intr.fy), (k.cx, intr.cx), (k.cy, intr.cy)] {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
            for i in 0..3 {
                assert!((k.k[i] - intr.k[i]).abs() < 1e-9 * (1.0 + intr.k[i].abs()));
            }
            assert!((out.pose.rotation() - pose.rotation()).abs().max() < 1e-9);
            assert!((out.pose.translation() - pose.translation()).norm() < 1e-9);
        }
    }
}
