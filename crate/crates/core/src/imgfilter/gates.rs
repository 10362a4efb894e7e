use std::fmt;

use super::FilterError;
use crate::raster::Raster;

/// 8-bit RGB image as decoded from disk.
pub type Rgb8 = Raster<[u8; 3]>;

/// Gate thresholds; statistics are on the 0–255 intensity scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub min_dim: u32,
    pub min_bytes: u64,
    pub var_threshold: f64,
    pub max_hamming: u32,
    pub lap_var_threshold: f64,
    pub spike_bound: f64,
    /// Allowed histogram entropy range in bits.
    pub entropy_bounds: (f64, f64),
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            min_dim: 64,
            min_bytes: 4096,
            var_threshold: 4.0,
            max_hamming: 8,
            lap_var_threshold: 25.0,
            spike_bound: 0.5,
            entropy_bounds: (1.0, 7.9),
        }
    }
}

/// Luminance on the 0–255 scale, Rec. 601 weights.
#[inline]
pub fn luma8(p: &[u8; 3]) -> f64 {
    0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
}

pub fn size_gate(width: u32, height: u32, file_bytes: u64, min_dim: u32, min_bytes: u64) -> bool {
    width.min(height) >= min_dim && file_bytes >= min_bytes
}

/// Mean over pixels of the population variance of the channels.
pub fn channel_variance(data: &[u8], channels: usize) -> Result<f64, FilterError> {
    if channels != 3 {
        return Err(FilterError::NotThreeChannel(channels));
    }
    let n = data.len() / 3;
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = data
        .chunks_exact(3)
        .map(|p| {
            let m = (p[0] as f64 + p[1] as f64 + p[2] as f64) / 3.0;
            p.iter().map(|&c| (c as f64 - m).powi(2)).sum::<f64>() / 3.0
        })
        .sum();
    Ok(sum / n as f64)
}

/// `(pass, inter-channel variance)`.
pub fn grayscale_gate(img: &Rgb8, var_threshold: f64) -> (bool, f64) {
    let flat: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    let v = channel_variance(&flat, 3).expect("three channels");
    (v >= var_threshold, v)
}

/// 64-bit difference hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PerceptualHash {
    pub bits: u64,
}

impl PerceptualHash {
    pub const ALGORITHM: &'static str = "dhash-9x8";

    pub fn distance(&self, other: &PerceptualHash) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }
}

impl fmt::Display for PerceptualHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.bits)
    }
}

/// Box-averages luminance onto a 9×8 grid and sets bit `8·row + col` iff cell `col` is
/// darker than cell `col + 1`. Integer arithmetic keeps it exactly invariant to uniform
/// brightness offsets.
pub fn perceptual_hash(img: &Rgb8) -> Result<PerceptualHash, FilterError> {
    let (w, h) = (img.width(), img.height());
    if w < 9 || h < 8 {
        return Err(FilterError::TooSmall { width: w, height: h });
    }
    let xs: Vec<usize> = (0..=9).map(|j| j * w / 9).collect();
    let ys: Vec<usize> = (0..=8).map(|j| j * h / 8).collect();
    let mut sums = [[0u64; 9]; 8];
    for (r, row) in sums.iter_mut().enumerate() {
        for y in ys[r]..ys[r + 1] {
            for (c, cell) in row.iter_mut().enumerate() {
                for x in xs[c]..xs[c + 1] {
                    let p = img.get(x, y);
                    *cell += 299 * p[0] as u64 + 587 * p[1] as u64 + 114 * p[2] as u64;
                }
            }
        }
    }
    let area = |r: usize, c: usize| ((xs[c + 1] - xs[c]) * (ys[r + 1] - ys[r])) as u128;
    let mut bits = 0u64;
    for r in 0..8 {
        for c in 0..8 {
            // sums[r][c]/area(r,c) < sums[r][c+1]/area(r,c+1)
            if sums[r][c] as u128 * area(r, c + 1) < sums[r][c + 1] as u128 * area(r, c) {
                bits |= 1 << (r * 8 + c);
            }
        }
    }
    Ok(PerceptualHash { bits })
}

/// Greedy first-wins: an entry is dropped iff it lies within `max_hamming` of an earlier kept one.
pub fn dedup(hashes: &[PerceptualHash], max_hamming: u32) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for (i, h) in hashes.iter().enumerate() {
        if kept.iter().all(|&k| hashes[k].distance(h) > max_hamming) {
            kept.push(i);
        }
    }
    kept
}

/// Variance of the 4-neighbour Laplacian over interior pixels.
pub fn laplacian_variance(img: &Rgb8) -> Result<f64, FilterError> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(FilterError::TooSmall { width: w, height: h });
    }
    let lum = img.map(luma8);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let r = 4.0 * lum.get(x, y) - lum.get(x - 1, y) - lum.get(x + 1, y) - lum.get(x, y - 1) - lum.get(x, y + 1);
            sum += r;
            sum_sq += r * r;
        }
    }
    let n = ((w - 2) * (h - 2)) as f64;
    let mean = sum / n;
    Ok((sum_sq / n - mean * mean).max(0.0))
}

pub fn sharpness_gate(img: &Rgb8, lap_var_threshold: f64) -> Result<(bool, f64), FilterError> {
    let v = laplacian_variance(img)?;
    Ok((v >= lap_var_threshold, v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramStats {
    /// Largest single-bin fraction.
    pub peak_fraction: f64,
    /// Shannon entropy in bits.
    pub entropy: f64,
}

pub fn luminance_histogram(img: &Rgb8) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for p in img.pixels() {
        hist[luma8(p).round().clamp(0.0, 255.0) as usize] += 1;
    }
    hist
}

pub fn histogram_stats(img: &Rgb8) -> HistogramStats {
    let hist = luminance_histogram(img);
    let n = img.len().max(1) as f64;
    let mut peak = 0u64;
    let mut entropy = 0.0;
    for &c in &hist {
        peak = peak.max(c);
        if c > 0 {
            let p = c as f64 / n;
            entropy -= p * p.log2();
        }
    }
    HistogramStats {
        peak_fraction: peak as f64 / n,
        entropy,
    }
}

pub fn histogram_gate(img: &Rgb8, entropy_bounds: (f64, f64), spike_bound: f64) -> (bool, HistogramStats) {
    let s = histogram_stats(img);
    let pass = s.peak_fraction <= spike_bound && s.entropy >= entropy_bounds.0 && s.entropy <= entropy_bounds.1;
    (pass, s)
}
