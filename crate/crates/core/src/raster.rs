//! Dense row-major 2D rasters.

use crate::scalar::{lit, Real};

/// A row-major grid of pixels of any type.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<P> {
    width: usize,
    height: usize,
    data: Vec<P>,
}

/// Linear RGB image with channels in `[0, 1]`.
pub type RgbImage<T> = Raster<[T; 3]>;

/// Single-channel image.
pub type GrayImage<T> = Raster<T>;

impl<P: Clone> Raster<P> {
    pub fn filled(width: usize, height: usize, value: P) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<P> Raster<P> {
    /// Panics if `data.len() != width * height`.
    pub fn from_vec(width: usize, height: usize, data: Vec<P>) -> Self {
        assert_eq!(data.len(), width * height, "raster size mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> P) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn same_shape<Q>(&self, other: &Raster<Q>) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &P {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut P {
        &mut self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: P) {
        self.data[y * self.width + x] = value;
    }

    pub fn pixels(&self) -> &[P] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [P] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<P> {
        self.data
    }

    pub fn map<Q>(&self, f: impl FnMut(&P) -> Q) -> Raster<Q> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// Rec. 601 luma weights.
pub fn luma<T: Real>(rgb: &[T; 3]) -> T {
    lit::<T>(0.299) * rgb[0] + lit::<T>(0.587) * rgb[1] + lit::<T>(0.114) * rgb[2]
}

impl<T: Real> Raster<[T; 3]> {
    pub fn luminance(&self) -> GrayImage<T> {
        self.map(luma)
    }

    /// Converts to 8-bit with rounding and clamping.
    pub fn to_u8(&self) -> Raster<[u8; 3]> {
        self.map(|p| p.map(quantize))
    }
}

impl Raster<[u8; 3]> {
    pub fn to_real<T: Real>(&self) -> RgbImage<T> {
        self.map(|p| p.map(|c| lit::<T>(c as f64 / 255.0)))
    }
}

/// Quantizes a unit-range value to 8 bits.
pub fn quantize<T: Real>(c: T) -> u8 {
    let v = crate::scalar::to_f64(c);
    if !v.is_finite() {
        return 0;
    }
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Separable Gaussian blur with edge clamping; kernel radius `ceil(3σ)`.
pub fn gaussian_blur<T: Real>(img: &RgbImage<T>, sigma: f64) -> RgbImage<T> {
    if !(sigma > 0.0) {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = weights.iter().sum();
    let weights: Vec<T> = weights.iter().map(|w| lit(w / norm)).collect();
    let (w, h) = (img.width() as isize, img.height() as isize);
    let pass = |src: &RgbImage<T>, horizontal: bool| {
        Raster::from_fn(src.width(), src.height(), |x, y| {
            let mut acc = [T::zero(); 3];
            for (k, wt) in weights.iter().enumerate() {
                let o = k as isize - radius;
                let (sx, sy) = if horizontal {
                    ((x as isize + o).clamp(0, w - 1), y as isize)
                } else {
                    (x as isize, (y as isize + o).clamp(0, h - 1))
                };
                let p = src.get(sx as usize, sy as usize);
                for c in 0..3 {
                    acc[c] += *wt * p[c];
                }
            }
            acc
        })
    };
    pass(&pass(img, true), false)
}
