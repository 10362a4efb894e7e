use nalgebra::Vector3;

use crate::camera::{Intrinsics, Pixel};
use crate::geometry::DepthMap;
use crate::raster::Raster;
use crate::scalar::{lit, Real};

pub type NormalMap<T> = Raster<Option<Vector3<T>>>;

/// Camera-frame unit normals from central differences of back-projected depth.
///
/// A pixel gets a normal only when it and its four neighbours are valid; normals face
/// the camera (`n·P < 0`).
pub fn normal_from_depth<T: Real>(depth: &DepthMap<T>, intr: &Intrinsics<T>) -> NormalMap<T> {
    let (w, h) = (depth.width(), depth.height());
    let point = |x: usize, y: usize| -> Option<Vector3<T>> {
        let d = depth.get(x, y)?;
        intr.back_project(&Pixel::new(lit(x as f64), lit(y as f64)), d).ok()
    };
    Raster::from_fn(w, h, |x, y| {
        if x == 0 || y == 0 || x + 1 >= w || y + 1 >= h {
            return None;
        }
        let p = point(x, y)?;
        let tx = point(x + 1, y)? - point(x - 1, y)?;
        let ty = point(x, y + 1)? - point(x, y - 1)?;
        let n = tx.cross(&ty);
        let len = n.norm();
        if !(len > T::zero()) || !len.is_finite() {
            return None;
        }
        let n = n / len;
        Some(if n.dot(&p) > T::zero() { -n } else { n })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intr() -> Intrinsics<f64> {
        Intrinsics::new(60.0, 60.0, 15.5, 11.5, 32, 24).unwrap()
    }

    #[test]
    fn fronto_parallel_plane() {
        let d = DepthMap::from_fn(32, 24, |_, _| Some(2.0));
        let n = normal_from_depth(&d, &intr());
        for y in 1..23 {
            for x in 1..31 {
                let v = n.get(x, y).unwrap();
                assert!((v - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
            }
        }
        assert!(n.get(0, 5).is_none());
    }

    #[test]
    fn inclined_plane_matches_analytic_normal() {
        // plane z = 3 + x (45° about the y axis): ray depth d satisfies d = 3 + d·(u−cx)/fx
        let k = intr();
        let d = DepthMap::from_fn(32, 24, |x, _| Some(3.0 / (1.0 - (x as f64 - k.cx) / k.fx)));
        let n = normal_from_depth(&d, &k);
        let want = Vector3::new(1.0, 0.0, -1.0).normalize();
        for y in 1..23 {
            for x in 1..31 {
                let v = n.get(x, y).unwrap();
                assert!((v - want).norm() < 1e-6, "{v:?}");
                assert!((v.norm() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn isolated_pixel_has_no_normal() {
        let mut d = DepthMap::empty(5, 5);
        d.set(2, 2, Some(1.0));
        let n = normal_from_depth(&d, &intr());
        assert!(n.pixels().iter().all(Option::is_none));
    }
}
