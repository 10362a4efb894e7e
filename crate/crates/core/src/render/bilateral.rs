use super::RenderError;
use crate::raster::{luma, RgbImage};
use crate::scalar::{lit, to_f64, Real};

/// Grid resolution: spatial `width × height`, `depth` luminance bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridDims {
    pub width: usize,
    pub height: usize,
    pub depth: usize,
}

impl Default for GridDims {
    fn default() -> Self {
        Self {
            width: 16,
            height: 16,
            depth: 8,
        }
    }
}

impl GridDims {
    pub fn cells(&self) -> usize {
        self.width * self.height * self.depth
    }

    /// Cell order with luminance fastest keeps the normal equations narrowly banded.
    #[inline]
    fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (y * self.width + x) * self.depth + z
    }
}

const IDENTITY: [f64; 12] = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];

/// Per-cell 3×4 affine colour transforms, row-major `[a00 a01 a02 b0 | a10 … | a20 …]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilateralGrid<T: Real> {
    pub dims: GridDims,
    pub cells: Vec<[T; 12]>,
}

impl<T: Real> BilateralGrid<T> {
    pub fn identity(dims: GridDims) -> Self {
        Self::uniform(dims, IDENTITY.map(lit))
    }

    pub fn uniform(dims: GridDims, affine: [T; 12]) -> Self {
        Self {
            dims,
            cells: vec![affine; dims.cells()],
        }
    }

    pub fn cell(&self, x: usize, y: usize, z: usize) -> &[T; 12] {
        &self.cells[self.dims.index(x, y, z)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridFitOptions {
    pub dims: GridDims,
    /// Weight of the squared differences between adjacent cells.
    pub tv_weight: f64,
    /// Pull towards the identity transform; keeps unobserved cells determined.
    pub ridge: f64,
}

impl Default for GridFitOptions {
    fn default() -> Self {
        Self {
            dims: GridDims::default(),
            tv_weight: 1e-3,
            ridge: 1e-8,
        }
    }
}

/// Continuous grid coordinate of pixel `i` of `n`, on the node lattice `0..cells-1`.
#[inline]
fn axis(i: usize, n: usize, cells: usize) -> f64 {
    if n <= 1 || cells <= 1 {
        0.0
    } else {
        i as f64 * (cells - 1) as f64 / (n - 1) as f64
    }
}

/// Lower node and fractional offset.
#[inline]
fn split(c: f64, cells: usize) -> (usize, f64) {
    if cells <= 1 {
        return (0, 0.0);
    }
    let c = c.clamp(0.0, (cells - 1) as f64);
    let i = (c.floor() as usize).min(cells - 2);
    (i, c - i as f64)
}

/// Lattice coordinates of a pixel: `(x, y)` in the image, luminance in `[0, 1]`.
fn coords<T: Real>(dims: &GridDims, x: usize, y: usize, w: usize, h: usize, rgb: &[T; 3]) -> [(usize, f64); 3] {
    let l = to_f64(luma(rgb)).clamp(0.0, 1.0);
    [
        split(axis(x, w, dims.width), dims.width),
        split(axis(y, h, dims.height), dims.height),
        split(l * (dims.depth - 1) as f64, dims.depth),
    ]
}

/// The eight corners with trilinear weights.
fn corners(dims: &GridDims, c: &[(usize, f64); 3]) -> [(usize, f64); 8] {
    let mut out = [(0, 0.0); 8];
    for (k, o) in out.iter_mut().enumerate() {
        let (dx, dy, dz) = (k & 1, (k >> 1) & 1, (k >> 2) & 1);
        let pick = |(i, f): (usize, f64), d: usize, n: usize| {
            if d == 0 {
                (i, 1.0 - f)
            } else {
                ((i + 1).min(n - 1), f)
            }
        };
        let (x, wx) = pick(c[0], dx, dims.width);
        let (y, wy) = pick(c[1], dy, dims.height);
        let (z, wz) = pick(c[2], dz, dims.depth);
        *o = (dims.index(x, y, z), wx * wy * wz);
    }
    out
}

#[inline]
fn lerp<T: Real>(a: T, b: T, t: T) -> T {
    a + (b - a) * t
}

/// Trilinear slice by nested linear interpolation (exact when all corners agree).
fn slice<T: Real>(grid: &BilateralGrid<T>, c: &[(usize, f64); 3]) -> [T; 12] {
    let d = &grid.dims;
    let at = |dx: usize, dy: usize, dz: usize| {
        let x = (c[0].0 + dx).min(d.width - 1);
        let y = (c[1].0 + dy).min(d.height - 1);
        let z = (c[2].0 + dz).min(d.depth - 1);
        &grid.cells[d.index(x, y, z)]
    };
    let (fx, fy, fz) = (lit::<T>(c[0].1), lit::<T>(c[1].1), lit::<T>(c[2].1));
    let mut out = [T::zero(); 12];
    for (k, o) in out.iter_mut().enumerate() {
        let x00 = lerp(at(0, 0, 0)[k], at(1, 0, 0)[k], fx);
        let x10 = lerp(at(0, 1, 0)[k], at(1, 1, 0)[k], fx);
        let x01 = lerp(at(0, 0, 1)[k], at(1, 0, 1)[k], fx);
        let x11 = lerp(at(0, 1, 1)[k], at(1, 1, 1)[k], fx);
        *o = lerp(lerp(x00, x10, fy), lerp(x01, x11, fy), fz);
    }
    out
}

/// Applies the sliced affine to each pixel; no clipping.
pub fn apply_bilateral_grid<T: Real>(grid: &BilateralGrid<T>, image: &RgbImage<T>) -> RgbImage<T> {
    let (w, h) = (image.width(), image.height());
    crate::raster::Raster::from_fn(w, h, |x, y| {
        let p = image.get(x, y);
        let a = slice(grid, &coords(&grid.dims, x, y, w, h, p));
        let mut out = [T::zero(); 3];
        for (c, o) in out.iter_mut().enumerate() {
            let r = &a[4 * c..4 * c + 4];
            *o = r[0] * p[0] + r[1] * p[1] + r[2] * p[2] + r[3];
        }
        out
    })
}

/// Symmetric positive definite band matrix, lower triangle stored row by row.
struct Band {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl Band {
    fn new(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.bw);
        &mut self.data[i * (self.bw + 1) + (i - j)]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.bw + 1) + (i - j)]
    }

    /// In-place Cholesky; `Err(row)` at the first non-positive pivot.
    fn factor(&mut self) -> Result<(), usize> {
        let stride = self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(self.bw));
                let mut s = self.get(i, j);
                for k in klo..j {
                    s -= self.data[i * stride + (i - k)] * self.data[j * stride + (j - k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(i);
                    }
                    self.data[i * stride] = s.sqrt();
                } else {
                    self.data[i * stride + (i - j)] = s / self.data[j * stride];
                }
            }
        }
        Ok(())
    }

    fn solve(&self, b: &mut [f64]) {
        let stride = self.bw + 1;
        for i in 0..self.n {
            let mut s = b[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.data[i * stride + (i - k)] * b[k];
            }
            b[i] = s / self.data[i * stride];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + self.bw + 1).min(self.n) {
                s -= self.data[k * stride + (k - i)] * b[k];
            }
            b[i] = s / self.data[i * stride];
        }
    }
}

/// Least-squares grid mapping `source` to `target`:
/// `Σ‖slice(A)·[r,g,b,1] − target‖² + tv·Σ‖A_i − A_j‖² + ridge·Σ‖A − I‖²`,
/// the second sum over face-adjacent cells. Pixels where `mask` is false are ignored.
pub fn fit_bilateral_grid_masked<T: Real>(
    source: &RgbImage<T>,
    target: &RgbImage<T>,
    mask: Option<&crate::raster::Raster<bool>>,
    options: &GridFitOptions,
) -> Result<BilateralGrid<T>, RenderError> {
    if !source.same_shape(target) || mask.is_some_and(|m| !m.same_shape(source)) {
        return Err(RenderError::ShapeMismatch(format!(
            "source {}x{} vs target {}x{}",
            source.width(),
            source.height(),
            target.width(),
            target.height()
        )));
    }
    let d = options.dims;
    if d.width == 0 || d.height == 0 || d.depth == 0 {
        return Err(RenderError::BadGrid("grid dimensions must be positive".into()));
    }
    let cells = d.cells();
    let n = 4 * cells;
    let bw = 4 * (d.index(1, 1, 1).max(d.index(0, 1, 0)).max(d.index(1, 0, 0)) + 1) + 3;
    let bw = bw.min(n.saturating_sub(1));
    let mut m = Band::new(n, bw);
    let mut rhs = vec![[0.0f64; 3]; n];
    let (w, h) = (source.width(), source.height());
    for y in 0..h {
        for x in 0..w {
            if mask.is_some_and(|m| !*m.get(x, y)) {
                continue;
            }
            let s = source.get(x, y);
            let t = target.get(x, y).map(to_f64);
            let f = [to_f64(s[0]), to_f64(s[1]), to_f64(s[2]), 1.0];
            let cs = corners(&d, &coords(&d, x, y, w, h, s));
            for &(ci, wi) in &cs {
                if wi == 0.0 {
                    continue;
                }
                for a in 0..4 {
                    let va = wi * f[a];
                    let row = 4 * ci + a;
                    for c in 0..3 {
                        rhs[row][c] += va * t[c];
                    }
                    for &(cj, wj) in &cs {
                        if wj == 0.0 {
                            continue;
                        }
                        for b in 0..4 {
                            let col = 4 * cj + b;
                            if col <= row {
                                *m.at(row, col) += va * wj * f[b];
                            }
                        }
                    }
                }
            }
        }
    }
    let tv = options.tv_weight;
    for z in 0..d.depth {
        for y in 0..d.height {
            for x in 0..d.width {
                let i = d.index(x, y, z);
                let neighbours = [
                    (x + 1 < d.width).then(|| d.index(x + 1, y, z)),
                    (y + 1 < d.height).then(|| d.index(x, y + 1, z)),
                    (z + 1 < d.depth).then(|| d.index(x, y, z + 1)),
                ];
                for j in neighbours.into_iter().flatten() {
                    for a in 0..4 {
                        *m.at(4 * i + a, 4 * i + a) += tv;
                        *m.at(4 * j + a, 4 * j + a) += tv;
                        *m.at(4 * i + a, 4 * j + a) -= tv;
                    }
                }
                for a in 0..4 {
                    *m.at(4 * i + a, 4 * i + a) += options.ridge;
                    for c in 0..3 {
                        rhs[4 * i + a][c] += options.ridge * IDENTITY[4 * c + a];
                    }
                }
            }
        }
    }
    m.factor().map_err(|row| {
        RenderError::SingularSystem(format!(
            "non-positive pivot at unknown {row}; increase the ridge or tv weight"
        ))
    })?;
    let mut grid = BilateralGrid::<T>::identity(d);
    for c in 0..3 {
        let mut b: Vec<f64> = rhs.iter().map(|r| r[c]).collect();
        m.solve(&mut b);
        if b.iter().any(|v| !v.is_finite()) {
            return Err(RenderError::SingularSystem("non-finite solution; increase the ridge".into()));
        }
        for (i, cell) in grid.cells.iter_mut().enumerate() {
            for a in 0..4 {
                cell[4 * c + a] = lit(b[4 * i + a]);
            }
        }
    }
    Ok(grid)
}

pub fn fit_bilateral_grid<T: Real>(
    source: &RgbImage<T>,
    target: &RgbImage<T>,
    options: &GridFitOptions,
) -> Result<BilateralGrid<T>, RenderError> {
    fit_bilateral_grid_masked(source, target, None, options)
}
