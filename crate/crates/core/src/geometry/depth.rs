use super::{DepthAlignment, GeometryError};
use crate::scalar::{from_usize, Real};

/// Minimum population variance of the source depths.
pub const MIN_SOURCE_VARIANCE: f64 = 1e-12;

/// Least-squares `(s, b)` minimizing `Σ (s·d1ⱼ + b − d2ⱼ)²`.
///
/// Uses the centered closed form `s = cov(d1, d2) / var(d1)`, `b = mean(d2) − s·mean(d1)`.
pub fn align_depth<T: Real>(d1: &[T], d2: &[T]) -> Result<DepthAlignment<T>, GeometryError> {
    if d1.len() != d2.len() {
        return Err(GeometryError::LengthMismatch {
            left: d1.len(),
            right: d2.len(),
        });
    }
    let n = d1.len();
    if n < 2 {
        return Err(GeometryError::TooFewPoints { needed: 2, got: n });
    }
    if d1.iter().chain(d2).any(|d| !d.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let nf = from_usize::<T>(n);
    let m1 = d1.iter().fold(T::zero(), |a, &b| a + b) / nf;
    let m2 = d2.iter().fold(T::zero(), |a, &b| a + b) / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in d1.iter().zip(d2) {
        let da = a - m1;
        sxx += da * da;
        sxy += da * (b - m2);
    }
    if crate::scalar::to_f64(sxx / nf) < MIN_SOURCE_VARIANCE {
        return Err(GeometryError::DegenerateSamples);
    }
    let scale = sxy / sxx;
    let bias = m2 - scale * m1;
    let sq = d1.iter().zip(d2).fold(T::zero(), |acc, (&a, &b)| {
        let r = scale * a + bias - b;
        acc + r * r
    });
    Ok(DepthAlignment {
        scale,
        bias,
        residual_rms: (sq / nf).sqrt(),
        sample_count: n,
    })
}
