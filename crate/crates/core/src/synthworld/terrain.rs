use nalgebra::{Vector2, Vector3};

use crate::raster::{Raster, RgbImage};
use crate::scalar::{lit, to_f64, Real};

/// Terrain generation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerrainParams {
    /// Side length of the square terrain (metres), centred on the world origin.
    pub extent: f64,
    /// Peak relief (metres).
    pub amplitude: f64,
    pub octaves: u32,
    /// Vertices per side.
    pub resolution: usize,
    /// Lowest noise frequency in cycles per metre.
    pub base_frequency: f64,
}

impl Default for TerrainParams {
    fn default() -> Self {
        Self {
            extent: 80.0,
            amplitude: 2.5,
            octaves: 5,
            resolution: 513,
            base_frequency: 0.04,
        }
    }
}

/// Heightfield `z = h(x, y)` over `[-extent/2, extent/2]²` with an albedo texture on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Terrain<T: Real> {
    pub heights: Raster<T>,
    pub albedo: RgbImage<T>,
    pub extent: T,
    pub seed: u64,
    min_height: T,
    max_height: T,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic lattice value in `[0, 1)`.
fn lattice(seed: u64, ix: i64, iy: i64) -> f64 {
    let h = splitmix(seed ^ splitmix((ix as u64).wrapping_mul(0x1F1F_1F1F) ^ splitmix(iy as u64)));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Smoothly interpolated value noise in `[0, 1)`.
pub fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (tx, ty) = (smooth(x - x0), smooth(y - y0));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let a = lattice(seed, ix, iy);
    let b = lattice(seed, ix + 1, iy);
    let c = lattice(seed, ix, iy + 1);
    let d = lattice(seed, ix + 1, iy + 1);
    (a * (1.0 - tx) + b * tx) * (1.0 - ty) + (c * (1.0 - tx) + d * tx) * ty
}

/// Sum of octaves in `[-1, 1]`.
fn fractal(seed: u64, x: f64, y: f64, freq: f64, octaves: u32) -> f64 {
    let mut sum = 0.0;
    let mut norm = 0.0;
    let mut amp = 1.0;
    let mut f = freq;
    for o in 0..octaves {
        sum += amp * (value_noise(seed.wrapping_add(o as u64 * 7919), x * f, y * f) * 2.0 - 1.0);
        norm += amp;
        amp *= 0.5;
        f *= 2.0;
    }
    if norm > 0.0 {
        sum / norm
    } else {
        0.0
    }
}

pub fn generate_terrain<T: Real>(seed: u64, params: &TerrainParams) -> Terrain<T> {
    let n = params.resolution.max(2);
    let cell = params.extent / (n - 1) as f64;
    let half = params.extent / 2.0;
    let coord = |i: usize| -half + i as f64 * cell;
    let heights = Raster::from_fn(n, n, |i, j| {
        if params.amplitude == 0.0 {
            return T::zero();
        }
        let (x, y) = (coord(i), coord(j));
        lit(params.amplitude * fractal(seed, x, y, params.base_frequency, params.octaves.max(1)))
    });
    let tone_seed = seed ^ 0xA5A5_5A5A;
    let grain_seed = seed ^ 0x3C3C_C3C3;
    let dust = [0.72, 0.45, 0.30];
    let rock = [0.42, 0.30, 0.24];
    let albedo = Raster::from_fn(n, n, |i, j| {
        let (x, y) = (coord(i), coord(j));
        let mix = value_noise(tone_seed, x * 0.12, y * 0.12);
        let grain = 0.7 + 0.6 * value_noise(grain_seed, x * 4.0, y * 4.0);
        let fine = 0.85 + 0.3 * value_noise(grain_seed.wrapping_add(1), x * 9.0, y * 9.0);
        let mut c = [T::zero(); 3];
        for k in 0..3 {
            c[k] = lit(((dust[k] * mix + rock[k] * (1.0 - mix)) * grain * fine).clamp(0.0, 1.0));
        }
        c
    });
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for h in heights.pixels() {
        lo = lo.min(to_f64(*h));
        hi = hi.max(to_f64(*h));
    }
    Terrain {
        heights,
        albedo,
        extent: lit(params.extent),
        seed,
        min_height: lit(lo),
        max_height: lit(hi),
    }
}

impl<T: Real> Terrain<T> {
    pub fn resolution(&self) -> usize {
        self.heights.width()
    }

    pub fn cell_size(&self) -> T {
        self.extent / lit((self.resolution() - 1) as f64)
    }

    pub fn height_range(&self) -> (T, T) {
        (self.min_height, self.max_height)
    }

    fn grid_coords(&self, x: T, y: T) -> Option<(usize, usize, T, T)> {
        let half = self.extent * lit(0.5);
        let cell = self.cell_size();
        let gx = (x + half) / cell;
        let gy = (y + half) / cell;
        let max = lit::<T>((self.resolution() - 1) as f64);
        if !(gx >= T::zero() && gy >= T::zero() && gx <= max && gy <= max) {
            return None;
        }
        let n = self.resolution();
        let ix = (to_f64(gx.floor()) as usize).min(n - 2);
        let iy = (to_f64(gy.floor()) as usize).min(n - 2);
        Some((ix, iy, gx - lit(ix as f64), gy - lit(iy as f64)))
    }

    /// Bilinear height; `None` outside the terrain.
    pub fn height(&self, x: T, y: T) -> Option<T> {
        let (ix, iy, fx, fy) = self.grid_coords(x, y)?;
        let h = |i, j| *self.heights.get(i, j);
        let one = T::one();
        Some(
            (h(ix, iy) * (one - fx) + h(ix + 1, iy) * fx) * (one - fy)
                + (h(ix, iy + 1) * (one - fx) + h(ix + 1, iy + 1) * fx) * fy,
        )
    }

    /// Analytic gradient of the bilinear patch.
    pub fn gradient(&self, x: T, y: T) -> Option<Vector2<T>> {
        let (ix, iy, fx, fy) = self.grid_coords(x, y)?;
        let h = |i, j| *self.heights.get(i, j);
        let one = T::one();
        let cell = self.cell_size();
        let dx = ((h(ix + 1, iy) - h(ix, iy)) * (one - fy) + (h(ix + 1, iy + 1) - h(ix, iy + 1)) * fy) / cell;
        let dy = ((h(ix, iy + 1) - h(ix, iy)) * (one - fx) + (h(ix + 1, iy + 1) - h(ix + 1, iy)) * fx) / cell;
        Some(Vector2::new(dx, dy))
    }

    pub fn normal(&self, x: T, y: T) -> Option<Vector3<T>> {
        let g = self.gradient(x, y)?;
        Some(Vector3::new(-g[0], -g[1], T::one()).normalize())
    }

    pub fn albedo_at(&self, x: T, y: T) -> Option<[T; 3]> {
        let (ix, iy, fx, fy) = self.grid_coords(x, y)?;
        let a = |i, j| *self.albedo.get(i, j);
        let one = T::one();
        let mut out = [T::zero(); 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = (a(ix, iy)[k] * (one - fx) + a(ix + 1, iy)[k] * fx) * (one - fy)
                + (a(ix, iy + 1)[k] * (one - fx) + a(ix + 1, iy + 1)[k] * fx) * fy;
        }
        Some(out)
    }

    /// First intersection parameter `s` of `origin + s·dir` with the surface.
    pub fn intersect(&self, origin: &Vector3<T>, dir: &Vector3<T>) -> Option<T> {
        let half = self.extent * lit(0.5);
        let (zlo, zhi) = (self.min_height - lit(1e-6), self.max_height + lit(1e-6));
        let lo = [-half, -half, zlo];
        let hi = [half, half, zhi];
        let mut s0 = T::zero();
        let mut s1 = lit::<T>(1e12);
        for k in 0..3 {
            if dir[k].abs() < lit(1e-15) {
                if origin[k] < lo[k] || origin[k] > hi[k] {
                    return None;
                }
            } else {
                let a = (lo[k] - origin[k]) / dir[k];
                let b = (hi[k] - origin[k]) / dir[k];
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                s0 = s0.max(a);
                s1 = s1.min(b);
            }
        }
        if s0 > s1 {
            return None;
        }
        let above = |s: T| -> Option<T> {
            let p = origin + dir * s;
            self.height(p[0], p[1]).map(|h| p[2] - h)
        };
        let horiz = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
        let step_h = if horiz > lit(1e-12) {
            self.cell_size() * lit(0.25) / horiz
        } else {
            s1 - s0
        };
        let step_v = if dir[2].abs() > lit(1e-12) {
            (zhi - zlo) / (dir[2].abs() * lit(16.0))
        } else {
            step_h
        };
        let step = step_h.min(step_v).max(lit(1e-9));
        let mut prev = s0;
        let mut prev_f = above(prev).unwrap_or(T::one());
        if prev_f <= T::zero() {
            return Some(prev);
        }
        let mut s = s0;
        while s < s1 {
            s = (s + step).min(s1);
            let Some(f) = above(s) else {
                prev = s;
                continue;
            };
            if f <= T::zero() {
                let (mut a, mut b) = (prev, s);
                let _ = prev_f;
                for _ in 0..80 {
                    let m = (a + b) * lit(0.5);
                    match above(m) {
                        Some(fm) if fm > T::zero() => a = m,
                        _ => b = m,
                    }
                }
                return Some(b);
            }
            prev = s;
            prev_f = f;
            if s >= s1 {
                break;
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TerrainParams {
        TerrainParams {
            resolution: 65,
            extent: 20.0,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        let a: Terrain<f64> = generate_terrain(1, &small());
        let b: Terrain<f64> = generate_terrain(1, &small());
        let c: Terrain<f64> = generate_terrain(2, &small());
        assert_eq!(a, b);
        assert_ne!(a.heights, c.heights);
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let t: Terrain<f64> = generate_terrain(
            5,
            &TerrainParams {
                amplitude: 0.0,
                ..small()
            },
        );
        assert!(t.heights.pixels().iter().all(|h| *h == 0.0));
        let hit = t
            .intersect(&Vector3::new(0.3, 0.2, 5.0), &Vector3::new(0.0, 0.0, -1.0))
            .unwrap();
        assert!((hit - 5.0).abs() < 1e-12);
    }

    #[test]
    fn intersection_lies_on_surface() {
        let t: Terrain<f64> = generate_terrain(9, &small());
        let o = Vector3::new(-3.0, -8.0, 6.0);
        let d = Vector3::new(0.1, 0.6, -0.5).normalize();
        let s = t.intersect(&o, &d).unwrap();
        let p = o + d * s;
        assert!((p[2] - t.height(p[0], p[1]).unwrap()).abs() < 1e-9);
        // ray pointing up misses
        assert!(t.intersect(&o, &Vector3::new(0.0, 0.0, 1.0)).is_none());
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let t: Terrain<f64> = generate_terrain(4, &small());
        let (x, y) = (1.13, -2.71);
        let g = t.gradient(x, y).unwrap();
        let e = 1e-6;
        let dx = (t.height(x + e, y).unwrap() - t.height(x - e, y).unwrap()) / (2.0 * e);
        let dy = (t.height(x, y + e).unwrap() - t.height(x, y - e).unwrap()) / (2.0 * e);
        assert!((g[0] - dx).abs() < 1e-6 && (g[1] - dy).abs() < 1e-6);
    }
}
