use rayon::prelude::*;

use super::{CloudPoint, DepthMap, GeometryError, PointCloud};
use crate::camera::{Intrinsics, Pixel, Pose};
use crate::raster::RgbImage;
use crate::scalar::{lit, Real};

/// Relative depth agreement for a view to count as observing a point.
pub const VISIBILITY_TOLERANCE: f64 = 0.01;

/// One calibrated view: image, metric depth, intrinsics and world→camera pose.
#[derive(Debug, Clone, Copy)]
pub struct View<'a, T: Real> {
    pub image: &'a RgbImage<T>,
    pub depth: &'a DepthMap<T>,
    pub intrinsics: &'a Intrinsics<T>,
    pub world_to_camera: &'a Pose<T>,
}

/// Lifts every valid pixel on the stride grid into world space.
pub fn fuse_point_clouds<T: Real>(views: &[View<'_, T>], stride: usize) -> Result<PointCloud<T>, GeometryError> {
    let stride = stride.max(1);
    let mut points = Vec::new();
    for (view_id, view) in views.iter().enumerate() {
        let (w, h) = (view.depth.width(), view.depth.height());
        if !view.image.same_shape(view.depth.raster()) {
            return Err(GeometryError::ShapeMismatch(format!(
                "view {view_id}: image {}x{} vs depth {w}x{h}",
                view.image.width(),
                view.image.height()
            )));
        }
        let cam_to_world = view.world_to_camera.inverse();
        let rows: Vec<usize> = (0..h).step_by(stride).collect();
        let per_row: Vec<Vec<CloudPoint<T>>> = rows
            .par_iter()
            .map(|&y| {
                (0..w)
                    .step_by(stride)
                    .filter_map(|x| {
                        let d = view.depth.get(x, y)?;
                        let px = Pixel::new(lit::<T>(x as f64), lit::<T>(y as f64));
                        let cam = view.intrinsics.back_project(&px, d).ok()?;
                        Some(CloudPoint {
                            position: cam_to_world.transform_point(&cam),
                            color: *view.image.get(x, y),
                            view_id,
                            source_pixel: px,
                            cam_depth: d,
                            scale: None,
                        })
                    })
                    .collect()
            })
            .collect();
        points.extend(per_row.into_iter().flatten());
    }
    if points.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    Ok(PointCloud { points })
}

/// Whether `view` sees `position` at camera depth within [`VISIBILITY_TOLERANCE`] of its depth map.
pub fn observed_depth<T: Real>(view: &View<'_, T>, position: &nalgebra::Vector3<T>) -> Option<T> {
    let cam = view.world_to_camera.transform_point(position);
    let px = view.intrinsics.project(&cam).ok()?;
    let d = view.depth.sample_nearest(&px)?;
    ((d - cam[2]).abs() <= cam[2] * lit(VISIBILITY_TOLERANCE)).then_some(cam[2])
}

/// `scale = d′_min / f_avg`: the minimum camera depth over the observing views
/// divided by their mean focal length. The source view always observes its own points.
pub fn initial_gaussian_scales<T: Real>(cloud: &PointCloud<T>, views: &[View<'_, T>]) -> Vec<T> {
    cloud
        .points
        .par_iter()
        .map(|p| {
            let mut d_min = p.cam_depth;
            let mut f_sum = T::zero();
            let mut count = 0usize;
            for (id, view) in views.iter().enumerate() {
                let depth = if id == p.view_id {
                    Some(p.cam_depth)
                } else {
                    observed_depth(view, &p.position)
                };
                if let Some(d) = depth {
                    if d < d_min {
                        d_min = d;
                    }
                    f_sum += view.intrinsics.mean_focal();
                    count += 1;
                }
            }
            if count == 0 {
                // no observing view
                return T::zero();
            }
            d_min / (f_sum / crate::scalar::from_usize(count))
        })
        .collect()
}

/// Writes [`initial_gaussian_scales`] into the cloud.
pub fn assign_gaussian_scales<T: Real>(cloud: &mut PointCloud<T>, views: &[View<'_, T>]) {
    let scales = initial_gaussian_scales(cloud, views);
    for (p, s) in cloud.points.iter_mut().zip(scales) {
        p.scale = (s > T::zero()).then_some(s);
    }
}
