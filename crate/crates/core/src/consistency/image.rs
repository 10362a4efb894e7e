use super::ConsistencyError;
use crate::geometry::DepthMap;
use crate::raster::RgbImage;
use crate::scalar::{from_usize, lit, Real};

fn same_shape<T: Real>(a: &RgbImage<T>, b: &RgbImage<T>) -> Result<(), ConsistencyError> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(ConsistencyError::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )))
    }
}

fn mean_over_channels<T: Real>(a: &RgbImage<T>, b: &RgbImage<T>, f: impl Fn(T) -> T) -> T {
    let mut s = T::zero();
    for (p, q) in a.pixels().iter().zip(b.pixels()) {
        for c in 0..3 {
            s += f(p[c] - q[c]);
        }
    }
    s / from_usize(3 * a.len().max(1))
}

/// `10·log10(peak²/MSE)` over all channels; identical images give `+∞`.
pub fn psnr<T: Real>(a: &RgbImage<T>, b: &RgbImage<T>, peak: T) -> Result<T, ConsistencyError> {
    same_shape(a, b)?;
    let mse = mean_over_channels(a, b, |d| d * d);
    if mse == T::zero() {
        return Ok(lit(f64::INFINITY));
    }
    Ok(lit::<T>(10.0) * (peak * peak / mse).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimOptions {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    /// Dynamic range `L` of the pixel values.
    pub range: f64,
}

impl Default for SsimOptions {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            range: 1.0,
        }
    }
}

fn gaussian_kernel<T: Real>(window: usize, sigma: f64) -> Vec<T> {
    let c = (window as f64 - 1.0) / 2.0;
    let w: Vec<f64> = (0..window).map(|i| (-(i as f64 - c).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| lit(v / s)).collect()
}

/// Separable "valid" filtering: output is `(w − n + 1) × (h − n + 1)`.
fn filter_valid<T: Real>(img: &[T], w: usize, h: usize, k: &[T]) -> Vec<T> {
    let n = k.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut rows = vec![T::zero(); ow * h];
    for y in 0..h {
        for x in 0..ow {
            let mut s = T::zero();
            for (i, kv) in k.iter().enumerate() {
                s += *kv * img[y * w + x + i];
            }
            rows[y * ow + x] = s;
        }
    }
    let mut out = vec![T::zero(); ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut s = T::zero();
            for (i, kv) in k.iter().enumerate() {
                s += *kv * rows[(y + i) * ow + x];
            }
            out[y * ow + x] = s;
        }
    }
    out
}

fn ssim_channel<T: Real>(a: &[T], b: &[T], w: usize, h: usize, o: &SsimOptions) -> T {
    let k = gaussian_kernel::<T>(o.window, o.sigma);
    let c1: T = lit((o.k1 * o.range).powi(2));
    let c2: T = lit((o.k2 * o.range).powi(2));
    let prod = |x: &[T], y: &[T]| -> Vec<T> { x.iter().zip(y).map(|(p, q)| *p * *q).collect() };
    let mu_a = filter_valid(a, w, h, &k);
    let mu_b = filter_valid(b, w, h, &k);
    let aa = filter_valid(&prod(a, a), w, h, &k);
    let bb = filter_valid(&prod(b, b), w, h, &k);
    let ab = filter_valid(&prod(a, b), w, h, &k);
    let two: T = lit(2.0);
    let mut s = T::zero();
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = aa[i] - ma * ma;
        let vb = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        s += (two * ma * mb + c1) * (two * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    s / from_usize(mu_a.len())
}

/// Gaussian-windowed structural similarity, averaged over valid window positions and
/// the three channels.
pub fn ssim<T: Real>(a: &RgbImage<T>, b: &RgbImage<T>, options: &SsimOptions) -> Result<T, ConsistencyError> {
    same_shape(a, b)?;
    let (w, h) = (a.width(), a.height());
    if w < options.window || h < options.window {
        return Err(ConsistencyError::TooSmall {
            width: w,
            height: h,
            window: options.window,
        });
    }
    let channel = |img: &RgbImage<T>, c: usize| -> Vec<T> { img.pixels().iter().map(|p| p[c]).collect() };
    let mut s = T::zero();
    for c in 0..3 {
        s += ssim_channel(&channel(a, c), &channel(b, c), w, h, options);
    }
    Ok(s / lit(3.0))
}

/// `(1 − ssim)/2`.
pub fn d_ssim<T: Real>(a: &RgbImage<T>, b: &RgbImage<T>, options: &SsimOptions) -> Result<T, ConsistencyError> {
    Ok((T::one() - ssim(a, b, options)?) / lit(2.0))
}

/// `(1−λ)·mean|a−b| + λ·d_ssim(a, b)`.
pub fn photometric_loss<T: Real>(a: &RgbImage<T>, b: &RgbImage<T>, lambda: T) -> Result<T, ConsistencyError> {
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(ConsistencyError::BadWeight(crate::scalar::to_f64(lambda)));
    }
    same_shape(a, b)?;
    let l1 = mean_over_channels(a, b, |d| d.abs());
    if lambda == T::zero() {
        return Ok(l1);
    }
    Ok((T::one() - lambda) * l1 + lambda * d_ssim(a, b, &SsimOptions::default())?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthL1<T: Real> {
    pub mean: T,
    pub count: usize,
}

/// Mean absolute depth difference over jointly valid pixels.
pub fn depth_l1<T: Real>(rendered: &DepthMap<T>, reference: &DepthMap<T>) -> Result<DepthL1<T>, ConsistencyError> {
    if rendered.width() != reference.width() || rendered.height() != reference.height() {
        return Err(ConsistencyError::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            rendered.width(),
            rendered.height(),
            reference.width(),
            reference.height()
        )));
    }
    let mut s = T::zero();
    let mut count = 0;
    for (a, b) in rendered.raster().pixels().iter().zip(reference.raster().pixels()) {
        if let (Some(a), Some(b)) = (a, b) {
            s += (*a - *b).abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(ConsistencyError::NoOverlap);
    }
    Ok(DepthL1 {
        mean: s / from_usize(count),
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Raster;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(seed: u64, w: usize, h: usize) -> RgbImage<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Raster::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()])
    }

    #[test]
    fn psnr_cases() {
        let a = random(1, 16, 12);
        assert_eq!(psnr(&a, &a, 1.0).unwrap(), f64::INFINITY);
        let z = Raster::filled(10, 10, [0.0f64; 3]);
        let o = Raster::filled(10, 10, [0.1f64; 3]);
        assert!((psnr(&z, &o, 1.0).unwrap() - 20.0).abs() < 1e-12);
        let b = random(2, 16, 12);
        let mut mse = 0.0;
        for (p, q) in a.pixels().iter().zip(b.pixels()) {
            for c in 0..3 {
                mse += (p[c] - q[c]).powi(2);
            }
        }
        mse /= (16 * 12 * 3) as f64;
        let want = 10.0 * (1.0 / mse).log10();
        assert!((psnr(&a, &b, 1.0).unwrap() - want).abs() < 1e-9);
        assert_eq!(psnr(&a, &b, 1.0).unwrap(), psnr(&b, &a, 1.0).unwrap());
        assert!(matches!(psnr(&a, &z, 1.0), Err(ConsistencyError::ShapeMismatch(_))));
    }

    #[test]
    fn ssim_cases() {
        let o = SsimOptions::default();
        let a = random(3, 24, 20);
        assert!((ssim(&a, &a, &o).unwrap() - 1.0).abs() < 1e-12);
        assert!(d_ssim(&a, &a, &o).unwrap().abs() < 1e-12);
        let z = Raster::filled(16, 16, [0.0; 3]);
        let one = Raster::filled(16, 16, [1.0; 3]);
        let c1 = 0.01f64.powi(2);
        assert!((ssim(&z, &one, &o).unwrap() - c1 / (1.0 + c1)).abs() < 1e-12);
        let b = random(4, 24, 20);
        let (x, y): (f64, f64) = (ssim(&a, &b, &o).unwrap(), ssim(&b, &a, &o).unwrap());
        assert!((x - y).abs() < 1e-15 && (-1.0..=1.0).contains(&x));
        let small = random(5, 10, 30);
        assert!(matches!(ssim(&small, &small, &o), Err(ConsistencyError::TooSmall { .. })));
    }

    #[test]
    fn ssim_matches_direct_window_sum() {
        // independent evaluation at one window position with an explicit 2D kernel
        let o = SsimOptions::default();
        let a = random(6, 11, 11);
        let b = random(7, 11, 11);
        let g: Vec<f64> = (0..11).map(|i| (-((i as f64 - 5.0).powi(2)) / 4.5).exp()).collect();
        let gs: f64 = g.iter().sum();
        let mut want = 0.0;
        for c in 0..3 {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for y in 0..11 {
                for x in 0..11 {
                    let w = g[x] * g[y] / (gs * gs);
                    let (p, q) = (a.get(x, y)[c], b.get(x, y)[c]);
                    ma += w * p;
                    mb += w * q;
                    saa += w * p * p;
                    sbb += w * q * q;
                    sab += w * p * q;
                }
            }
            let (c1, c2) = (1e-4, 9e-4);
            want += (2.0 * ma * mb + c1) * (2.0 * (sab - ma * mb) + c2)
                / ((ma * ma + mb * mb + c1) * (saa - ma * ma + sbb - mb * mb + c2));
        }
        assert!((ssim(&a, &b, &o).unwrap() - want / 3.0).abs() < 1e-12);
    }

    #[test]
    fn photometric_cases() {
        let a = random(8, 20, 20);
        let b = random(9, 20, 20);
        assert_eq!(photometric_loss(&a, &a, 0.2).unwrap(), 0.0);
        let l1 = a.pixels().iter().zip(b.pixels()).map(|(p, q)| (0..3).map(|c| (p[c] - q[c]).abs()).sum::<f64>()).sum::<f64>()
            / (20 * 20 * 3) as f64;
        assert!((photometric_loss(&a, &b, 0.0).unwrap() - l1).abs() < 1e-15);
        let d = d_ssim(&a, &b, &SsimOptions::default()).unwrap();
        let lambda = 0.2;
        let l1_lib = photometric_loss(&a, &b, 0.0).unwrap();
        assert_eq!(photometric_loss(&a, &b, lambda).unwrap(), (1.0 - lambda) * l1_lib + lambda * d);
        assert!(matches!(photometric_loss(&a, &b, 1.5), Err(ConsistencyError::BadWeight(_))));
    }

    #[test]
    fn depth_l1_cases() {
        let a = DepthMap::from_fn(8, 8, |x, y| Some(1.0 + (x + y) as f64));
        assert_eq!(depth_l1(&a, &a).unwrap().mean, 0.0);
        let b = a.affine(1.0, 0.5);
        assert!((depth_l1(&b, &a).unwrap().mean - 0.5).abs() < 1e-15);
        let half = DepthMap::from_fn(8, 8, |x, y| (x < 4).then_some(1.0 + (x + y) as f64 + 2.0));
        let r = depth_l1(&half, &a).unwrap();
        assert_eq!(r.count, 32);
        assert!((r.mean - 2.0).abs() < 1e-15);
        assert_eq!(depth_l1(&DepthMap::<f64>::empty(8, 8), &a), Err(ConsistencyError::NoOverlap));
    }
}
