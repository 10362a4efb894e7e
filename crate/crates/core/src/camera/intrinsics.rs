use nalgebra::{Matrix3, Vector2, Vector3};

use super::distortion::{apply_distortion, undistort};
use super::CameraError;
use crate::scalar::{lit, Real};

/// Continuous image coordinates in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pixel<T: Real> {
    pub u: T,
    pub v: T,
}

impl<T: Real> Pixel<T> {
    pub fn new(u: T, v: T) -> Self {
        Self { u, v }
    }

    pub fn to_vector(self) -> Vector2<T> {
        Vector2::new(self.u, self.v)
    }

    pub fn from_vector(v: &Vector2<T>) -> Self {
        Self::new(v[0], v[1])
    }

    pub fn distance(&self, other: &Pixel<T>) -> T {
        self.distance_squared(other).sqrt()
    }

    pub fn distance_squared(&self, other: &Pixel<T>) -> T {
        let du = self.u - other.u;
        let dv = self.v - other.v;
        du * du + dv * dv
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// Pinhole calibration with radial distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics<T: Real> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: u32,
    pub height: u32,
    /// Radial coefficients `k0, k1, k2`.
    pub k: [T; 3],
    /// Physical pixel pitch in millimetres.
    pub pixel_size: T,
}

impl<T: Real> Intrinsics<T> {
    pub fn new(
        fx: T,
        fy: T,
        cx: T,
        cy: T,
        width: u32,
        height: u32,
    ) -> Result<Self, CameraError> {
        Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            k: [T::zero(); 3],
            pixel_size: T::one(),
        }
        .validated()
    }

    pub fn with_distortion(mut self, k: [T; 3]) -> Result<Self, CameraError> {
        self.k = k;
        self.validated()
    }

    pub fn with_pixel_size(mut self, pixel_size: T) -> Result<Self, CameraError> {
        self.pixel_size = pixel_size;
        self.validated()
    }

    /// Checks `fx, fy > 0`, non-empty size and finiteness.
    pub fn validated(self) -> Result<Self, CameraError> {
        let scalars = [self.fx, self.fy, self.cx, self.cy, self.pixel_size];
        if !scalars.iter().chain(self.k.iter()).all(|v| v.is_finite()) {
            return Err(CameraError::NonFinite);
        }
        if self.fx <= T::zero() || self.fy <= T::zero() {
            return Err(CameraError::InvalidIntrinsics("focal lengths must be positive".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(CameraError::InvalidIntrinsics("image size must be at least 1x1".into()));
        }
        if self.pixel_size <= T::zero() {
            return Err(CameraError::InvalidIntrinsics("pixel_size must be positive".into()));
        }
        Ok(self)
    }

    pub fn matrix(&self) -> Matrix3<T> {
        Matrix3::new(
            self.fx,
            T::zero(),
            self.cx,
            T::zero(),
            self.fy,
            self.cy,
            T::zero(),
            T::zero(),
            T::one(),
        )
    }

    pub fn has_distortion(&self) -> bool {
        self.k.iter().any(|c| *c != T::zero())
    }

    /// `(fx + fy) / 2`.
    pub fn mean_focal(&self) -> T {
        (self.fx + self.fy) * lit(0.5)
    }

    /// Ideal pinhole projection, distortion ignored.
    #[inline]
    pub fn project(&self, p: &Vector3<T>) -> Result<Pixel<T>, CameraError> {
        if !(p[2] > T::zero()) {
            return Err(CameraError::NonPositiveDepth);
        }
        Ok(Pixel::new(
            self.fx * p[0] / p[2] + self.cx,
            self.fy * p[1] / p[2] + self.cy,
        ))
    }

    /// `d·K⁻¹[u, v, 1]ᵀ`, distortion ignored.
    #[inline]
    pub fn back_project(&self, px: &Pixel<T>, depth: T) -> Result<Vector3<T>, CameraError> {
        if !(depth > T::zero()) {
            return Err(CameraError::NonPositiveDepth);
        }
        Ok(Vector3::new(
            (px.u - self.cx) / self.fx * depth,
            (px.v - self.cy) / self.fy * depth,
            depth,
        ))
    }

    /// Projection with radial distortion applied in normalized coordinates.
    pub fn project_distorted(&self, p: &Vector3<T>) -> Result<Pixel<T>, CameraError> {
        if !(p[2] > T::zero()) {
            return Err(CameraError::NonPositiveDepth);
        }
        let n = Vector2::new(p[0] / p[2], p[1] / p[2]);
        let d = apply_distortion(&n, &self.k);
        Ok(Pixel::new(self.fx * d[0] + self.cx, self.fy * d[1] + self.cy))
    }

    /// Maps an observed (distorted) pixel to where an ideal pinhole would have imaged it.
    pub fn undistort_pixel(&self, px: &Pixel<T>) -> Result<Pixel<T>, CameraError> {
        if !self.has_distortion() {
            return Ok(*px);
        }
        let n = Vector2::new((px.u - self.cx) / self.fx, (px.v - self.cy) / self.fy);
        let u = undistort(&n, &self.k)?;
        Ok(Pixel::new(self.fx * u[0] + self.cx, self.fy * u[1] + self.cy))
    }

    pub fn contains(&self, px: &Pixel<T>) -> bool {
        px.u >= T::zero()
            && px.v >= T::zero()
            && px.u <= lit::<T>(self.width as f64 - 1.0)
            && px.v <= lit::<T>(self.height as f64 - 1.0)
    }

    /// Same calibration for an image scaled by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self, CameraError> {
        let w = (lit::<T>(self.width as f64) * factor).round();
        let h = (lit::<T>(self.height as f64) * factor).round();
        Self {
            fx: self.fx * factor,
            fy: self.fy * factor,
            cx: self.cx * factor,
            cy: self.cy * factor,
            width: crate::scalar::to_f64(w).max(1.0) as u32,
            height: crate::scalar::to_f64(h).max(1.0) as u32,
            k: self.k,
            pixel_size: self.pixel_size,
        }
        .validated()
    }

    pub fn cast<U: Real>(&self) -> Intrinsics<U> {
        let c = |x: T| lit::<U>(crate::scalar::to_f64(x));
        Intrinsics {
            fx: c(self.fx),
            fy: c(self.fy),
            cx: c(self.cx),
            cy: c(self.cy),
            width: self.width,
            height: self.height,
            k: self.k.map(c),
            pixel_size: c(self.pixel_size),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intr() -> Intrinsics<f64> {
        Intrinsics::new(800.0, 800.0, 320.0, 240.0, 640, 480).unwrap()
    }

    #[test]
    fn project_examples() {
        let k = intr();
        assert_eq!(k.project(&Vector3::new(0.0, 0.0, 2.0)).unwrap(), Pixel::new(320.0, 240.0));
        assert_eq!(k.project(&Vector3::new(1.0, 0.0, 10.0)).unwrap(), Pixel::new(400.0, 240.0));
        assert!(matches!(
            k.project(&Vector3::new(0.0, 0.0, -1.0)),
            Err(CameraError::NonPositiveDepth)
        ));
        assert!(matches!(
            k.project(&Vector3::new(0.0, 0.0, 0.0)),
            Err(CameraError::NonPositiveDepth)
        ));
    }

    #[test]
    fn back_project_examples() {
        let k = intr();
        assert_eq!(
            k.back_project(&Pixel::new(320.0, 240.0), 2.0).unwrap(),
            Vector3::new(0.0, 0.0, 2.0)
        );
        assert_eq!(
            k.back_project(&Pixel::new(400.0, 240.0), 10.0).unwrap(),
            Vector3::new(1.0, 0.0, 10.0)
        );
        assert!(k.back_project(&Pixel::new(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn grid_roundtrip() {
        let k = intr();
        for i in 0..5 {
            for j in 0..5 {
                let px = Pixel::new(i as f64 * 150.0 + 3.7, j as f64 * 110.0 + 1.3);
                let p = k.back_project(&px, 3.0).unwrap();
                assert_eq!(p[2], 3.0);
                let back = k.project(&p).unwrap();
                assert!(back.distance(&px) < 1e-9);
            }
        }
    }

    #[test]
    fn distorted_projection_roundtrips_through_undistort() {
        let k = intr().with_distortion([0.01, -0.05, 0.002]).unwrap();
        let p = Vector3::new(0.4, -0.3, 2.0);
        let observed = k.project_distorted(&p).unwrap();
        let ideal = k.undistort_pixel(&observed).unwrap();
        assert!(ideal.distance(&k.project(&p).unwrap()) < 1e-9);
    }

    #[test]
    fn invalid_intrinsics() {
        assert!(Intrinsics::new(0.0, 1.0, 0.0, 0.0, 10, 10).is_err());
        assert!(Intrinsics::new(1.0, 1.0, 0.0, 0.0, 0, 10).is_err());
        assert!(Intrinsics::new(f64::NAN, 1.0, 0.0, 0.0, 10, 10).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let k = Intrinsics::<f32>::new(800.0, 800.0, 320.0, 240.0, 640, 480).unwrap();
        let p = k.back_project(&Pixel::new(400.0, 240.0), 10.0).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-6);
    }
}
