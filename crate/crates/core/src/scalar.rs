//! Scalar abstraction shared by all geometric code.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the geometry, rendering and metric code: `f32` or `f64`.
pub trait Real:
    RealField + Copy + Debug + Display + FromStr + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Orthonormality tolerance for rotation matrices at this precision.
    fn rotation_tolerance() -> Self {
        let eps = Self::default_epsilon() * lit(1.0e4);
        let floor = lit(1.0e-9);
        if eps > floor {
            eps
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts `T` into `f64`.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Converts a count into `T`.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    nalgebra::convert(n as f64)
}
