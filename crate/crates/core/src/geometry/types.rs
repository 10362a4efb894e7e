use nalgebra::Vector3;

use crate::camera::Pixel;
use crate::raster::Raster;
use crate::scalar::Real;

/// Per-pixel metric depth; `None` marks invalid pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap<T: Real> {
    values: Raster<Option<T>>,
}

impl<T: Real> DepthMap<T> {
    /// Every pixel invalid.
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            values: Raster::filled(width, height, None),
        }
    }

    /// Non-finite and non-positive entries become invalid.
    pub fn from_values(width: usize, height: usize, values: Vec<T>) -> Self {
        let values = values.into_iter().map(sanitize).collect();
        Self {
            values: Raster::from_vec(width, height, values),
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Option<T>) -> Self {
        Self {
            values: Raster::from_fn(width, height, |x, y| f(x, y).and_then(sanitize)),
        }
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<T> {
        *self.values.get(x, y)
    }

    pub fn set(&mut self, x: usize, y: usize, depth: Option<T>) {
        self.values.set(x, y, depth.and_then(sanitize));
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.get(x, y).is_some()
    }

    pub fn valid_count(&self) -> usize {
        self.values.pixels().iter().filter(|d| d.is_some()).count()
    }

    pub fn raster(&self) -> &Raster<Option<T>> {
        &self.values
    }

    /// Depth at the nearest pixel to a continuous location.
    pub fn sample_nearest(&self, px: &Pixel<T>) -> Option<T> {
        let x = crate::scalar::to_f64(px.u).round();
        let y = crate::scalar::to_f64(px.v).round();
        if x < 0.0 || y < 0.0 || x >= self.width() as f64 || y >= self.height() as f64 {
            return None;
        }
        self.get(x as usize, y as usize)
    }

    /// Bilinear depth; `None` unless all four neighbours are valid.
    pub fn sample_bilinear(&self, px: &Pixel<T>) -> Option<T> {
        self.interpolate(px, |d| d)
    }

    /// Bilinear interpolation of inverse depth; exact for planar surfaces, where `1/z`
    /// is affine in pixel coordinates.
    pub fn sample_inverse_bilinear(&self, px: &Pixel<T>) -> Option<T> {
        self.interpolate(px, |d| T::one() / d).and_then(|i| sanitize(T::one() / i))
    }

    fn interpolate(&self, px: &Pixel<T>, f: impl Fn(T) -> T) -> Option<T> {
        let u = crate::scalar::to_f64(px.u);
        let v = crate::scalar::to_f64(px.v);
        if !(u >= 0.0 && v >= 0.0) || u > (self.width() - 1) as f64 || v > (self.height() - 1) as f64 {
            return None;
        }
        let x0 = (u.floor() as usize).min(self.width().saturating_sub(2));
        let y0 = (v.floor() as usize).min(self.height().saturating_sub(2));
        let x1 = (x0 + 1).min(self.width() - 1);
        let y1 = (y0 + 1).min(self.height() - 1);
        let fx: T = crate::scalar::lit(u - x0 as f64);
        let fy: T = crate::scalar::lit(v - y0 as f64);
        let d00 = f(self.get(x0, y0)?);
        let d10 = f(self.get(x1, y0)?);
        let d01 = f(self.get(x0, y1)?);
        let d11 = f(self.get(x1, y1)?);
        let one = T::one();
        Some((d00 * (one - fx) + d10 * fx) * (one - fy) + (d01 * (one - fx) + d11 * fx) * fy)
    }

    /// Applies `d ↦ s·d + b` to every valid pixel.
    pub fn affine(&self, scale: T, bias: T) -> Self {
        Self {
            values: self.values.map(|d| d.and_then(|d| sanitize(scale * d + bias))),
        }
    }

    pub fn valid_values(&self) -> Vec<T> {
        self.values.pixels().iter().filter_map(|d| *d).collect()
    }
}

fn sanitize<T: Real>(d: T) -> Option<T> {
    (d.is_finite() && d > T::zero()).then_some(d)
}

/// A matched pixel pair between two views.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence<T: Real> {
    pub p1: Pixel<T>,
    pub p2: Pixel<T>,
    pub weight: Option<T>,
}

impl<T: Real> Correspondence<T> {
    pub fn new(p1: Pixel<T>, p2: Pixel<T>) -> Self {
        Self {
            p1,
            p2,
            weight: None,
        }
    }
}

/// A colored world point with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint<T: Real> {
    pub position: Vector3<T>,
    pub color: [T; 3],
    pub view_id: usize,
    pub source_pixel: Pixel<T>,
    /// Depth in the source camera.
    pub cam_depth: T,
    /// Gaussian scale in metres, once initialized.
    pub scale: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud<T: Real> {
    pub points: Vec<CloudPoint<T>>,
}

impl<T: Real> PointCloud<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CloudPoint<T>> {
        self.points.iter()
    }
}

/// Result of the depth scale/bias regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthAlignment<T: Real> {
    pub scale: T,
    pub bias: T,
    pub residual_rms: T,
    pub sample_count: usize,
}

impl<T: Real> DepthAlignment<T> {
    #[inline]
    pub fn apply(&self, d: T) -> T {
        self.scale * d + self.bias
    }
}
