//! Radial distortion on normalized image coordinates.
//!
//! A normalized point `x` with radius `r = ‖x‖` maps to `x·(1 + k0 + k1·r² + k2·r⁴)`.

use nalgebra::Vector2;

use super::CameraError;
use crate::scalar::{lit, Real};

/// Iteration cap for [`undistort`].
pub const MAX_UNDISTORT_ITERATIONS: usize = 50;

#[inline]
fn radial_factor<T: Real>(r2: T, k: &[T; 3]) -> T {
    T::one() + k[0] + k[1] * r2 + k[2] * r2 * r2
}

pub fn apply_distortion<T: Real>(x: &Vector2<T>, k: &[T; 3]) -> Vector2<T> {
    x * radial_factor(x.norm_squared(), k)
}

/// Inverts [`apply_distortion`].
///
/// Solves `r·f(r) = ρ` for the undistorted radius with Newton steps started at
/// `r = ρ / (1 + k0)`, kept inside a bracket `[lo, hi]` and replaced by bisection when a
/// step would leave it. Fails when the curve folds over before reaching `ρ`.
pub fn undistort<T: Real>(xd: &Vector2<T>, k: &[T; 3]) -> Result<Vector2<T>, CameraError> {
    if k.iter().all(|c| *c == T::zero()) {
        return Ok(*xd);
    }
    let rho = xd.norm();
    if rho == T::zero() {
        return Ok(*xd);
    }
    let base = T::one() + k[0];
    if base <= T::zero() {
        return Err(CameraError::NoConvergence { iterations: 0 });
    }
    let tol = T::default_epsilon() * lit(8.0);
    let half = lit::<T>(0.5);
    let (mut lo, mut hi) = (T::zero(), None::<T>);
    let mut r = rho / base;
    for it in 0..MAX_UNDISTORT_ITERATIONS {
        let r2 = r * r;
        let g = r * radial_factor(r2, k) - rho;
        if !g.is_finite() {
            return Err(CameraError::NoConvergence { iterations: it });
        }
        if g == T::zero() {
            return Ok(xd * (r / rho));
        }
        if g < T::zero() {
            lo = r;
        } else {
            hi = Some(r);
        }
        // d/dr [r·f(r)] = 1 + k0 + 3 k1 r² + 5 k2 r⁴
        let dg = base + lit::<T>(3.0) * k[1] * r2 + lit::<T>(5.0) * k[2] * r2 * r2;
        let newton = r - g / dg;
        let next = match hi {
            Some(h) if !(dg > T::zero()) || !(newton > lo && newton < h) => (lo + h) * half,
            Some(_) => newton,
            // rising side of the curve still below ρ with no upper bracket yet
            None if dg > T::zero() && newton.is_finite() => newton,
            None => return Err(CameraError::NoConvergence { iterations: it }),
        };
        let step = (next - r).abs();
        r = next;
        let width_done = hi.is_some_and(|h| h - lo <= tol * (T::one() + h));
        if step <= tol * (T::one() + r.abs()) || width_done {
            return Ok(xd * (r / rho));
        }
    }
    Err(CameraError::NoConvergence {
        iterations: MAX_UNDISTORT_ITERATIONS,
    })
}
