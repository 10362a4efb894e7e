use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use super::{SynthError, Terrain};
use crate::camera::{Intrinsics, Pixel, Pose};
use crate::geometry::{Correspondence, DepthMap};
use crate::raster::{Raster, RgbImage};
use crate::scalar::{lit, Real};

/// Colour returned for rays that miss the terrain.
pub const SKY: [f64; 3] = [0.80, 0.68, 0.58];

/// Direction towards the sun in world coordinates (before normalization).
const SUN: [f64; 3] = [0.45, -0.35, 0.82];
const AMBIENT: f64 = 0.3;

/// World→camera pose of a camera at `eye` looking at `target`, image `y` pointing away from `up`.
pub fn look_at<T: Real>(eye: &Vector3<T>, target: &Vector3<T>, up: &Vector3<T>) -> Result<Pose<T>, SynthError> {
    let z = target - eye;
    if z.norm() <= T::default_epsilon() {
        return Err(SynthError::BadSpec("eye and target coincide".into()));
    }
    let z = z.normalize();
    let x = z.cross(up);
    if x.norm() <= lit(1e-9) {
        return Err(SynthError::BadSpec("view direction parallel to up".into()));
    }
    let x = x.normalize();
    let y = z.cross(&x);
    let r = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    let t = -(r * eye);
    Ok(Pose::from_parts_unchecked(r, t))
}

/// Stereo rig: intrinsics shared by both cameras, left world→camera pose, and the
/// left-camera→right-camera transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Rig<T: Real> {
    pub intrinsics: Intrinsics<T>,
    pub left: Pose<T>,
    pub relative: Pose<T>,
}

impl<T: Real> Rig<T> {
    /// Parallel cameras with the right one `baseline` metres along the left camera's x axis.
    pub fn parallel(intrinsics: Intrinsics<T>, left: Pose<T>, baseline: T) -> Self {
        Self {
            intrinsics,
            left,
            relative: Pose::from_translation(Vector3::new(-baseline, T::zero(), T::zero())),
        }
    }

    pub fn right(&self) -> Pose<T> {
        self.relative.compose(&self.left)
    }

    pub fn baseline(&self) -> T {
        self.relative.center().norm()
    }
}

/// The default oracle viewpoint over a terrain of the given extent: oblique, no sky in frame.
pub fn default_rig<T: Real>(size: u32, baseline: T) -> Rig<T> {
    let f = lit::<T>(0.9 * size as f64);
    let c = lit::<T>((size as f64 - 1.0) / 2.0);
    let intr = Intrinsics::new(f, f, c, c, size, size).expect("positive focal");
    let left = look_at(
        &Vector3::new(lit(0.0), lit(-6.0), lit(12.0)),
        &Vector3::new(lit(0.0), lit(4.0), T::zero()),
        &Vector3::z(),
    )
    .expect("valid viewpoint");
    Rig::parallel(intr, left, baseline)
}

/// Ray-cast image and exact depth of one view.
#[derive(Debug, Clone, PartialEq)]
pub struct RayCastView<T: Real> {
    pub image: RgbImage<T>,
    pub depth: DepthMap<T>,
}

/// Renders a view by casting one ray per pixel centre; depth is the camera `z` of the hit.
pub fn ray_cast_view<T: Real>(terrain: &Terrain<T>, world_to_camera: &Pose<T>, intr: &Intrinsics<T>) -> RayCastView<T> {
    let (w, h) = (intr.width as usize, intr.height as usize);
    let center = world_to_camera.center();
    let rt = world_to_camera.rotation().transpose();
    let sun = Vector3::new(lit::<T>(SUN[0]), lit(SUN[1]), lit(SUN[2])).normalize();
    let sky = SKY.map(lit::<T>);
    let rows: Vec<Vec<([T; 3], Option<T>)>> = (0..h)
        .into_par_iter()
        .map(|y| {
            (0..w)
                .map(|x| {
                    let d_cam = Vector3::new(
                        (lit::<T>(x as f64) - intr.cx) / intr.fx,
                        (lit::<T>(y as f64) - intr.cy) / intr.fy,
                        T::one(),
                    );
                    // parameter along a z=1 ray is the camera depth
                    let dir = rt * d_cam;
                    match terrain.intersect(&center, &dir) {
                        Some(s) => {
                            let p = center + dir * s;
                            let n = terrain.normal(p[0], p[1]).unwrap_or_else(Vector3::z);
                            let a = terrain.albedo_at(p[0], p[1]).unwrap_or(sky);
                            let lambert = n.dot(&sun).max(T::zero());
                            let shade = lit::<T>(AMBIENT) + lit::<T>(1.0 - AMBIENT) * lambert;
                            (a.map(|c| (c * shade).min(T::one())), Some(s))
                        }
                        None => (sky, None),
                    }
                })
                .collect()
        })
        .collect();
    let mut image = Vec::with_capacity(w * h);
    let mut depth = Vec::with_capacity(w * h);
    for (c, d) in rows.into_iter().flatten() {
        image.push(c);
        depth.push(d);
    }
    let mut it = depth.into_iter();
    RayCastView {
        image: Raster::from_vec(w, h, image),
        depth: DepthMap::from_fn(w, h, |_, _| it.next().flatten()),
    }
}

/// A ray-cast stereo pair with exact geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoCapture<T: Real> {
    pub left: RgbImage<T>,
    pub right: RgbImage<T>,
    pub left_depth: DepthMap<T>,
    pub right_depth: DepthMap<T>,
    /// World→camera.
    pub left_pose: Pose<T>,
    pub right_pose: Pose<T>,
    pub intrinsics: Intrinsics<T>,
    /// Left grid pixels matched to exact projections in the right view.
    pub correspondences: Vec<Correspondence<T>>,
    pub baseline: T,
}

impl<T: Real> StereoCapture<T> {
    /// Left-camera→right-camera transform.
    pub fn relative_pose(&self) -> Pose<T> {
        self.right_pose.compose(&self.left_pose.inverse())
    }

    /// Left-camera points behind each correspondence, from the left depth.
    pub fn left_points(&self) -> Vec<Vector3<T>> {
        self.correspondences
            .iter()
            .map(|c| {
                let (x, y) = pixel_index(&c.p1);
                let d = self.left_depth.get(x, y).expect("correspondence on valid depth");
                self.intrinsics.back_project(&c.p1, d).expect("positive depth")
            })
            .collect()
    }
}

fn pixel_index<T: Real>(p: &Pixel<T>) -> (usize, usize) {
    (
        crate::scalar::to_f64(p.u).round() as usize,
        crate::scalar::to_f64(p.v).round() as usize,
    )
}

/// Relative agreement required between a projected point and the other view's first hit.
const COVISIBILITY_TOLERANCE: f64 = 1e-6;

/// Ray casts both views and matches every `stride`-th left pixel whose surface point the
/// right camera also sees first along its ray.
pub fn simulate_stereo_capture<T: Real>(terrain: &Terrain<T>, rig: &Rig<T>, stride: usize) -> Result<StereoCapture<T>, SynthError> {
    let stride = stride.max(1);
    let intr = &rig.intrinsics;
    let right_pose = rig.right();
    let l = ray_cast_view(terrain, &rig.left, intr);
    if l.depth.valid_count() == 0 {
        return Err(SynthError::NoVisibleTerrain);
    }
    let r = ray_cast_view(terrain, &right_pose, intr);
    let left_to_world = rig.left.inverse();
    let right_center = right_pose.center();
    let (w, h) = (intr.width as usize, intr.height as usize);
    let mut correspondences = Vec::new();
    for y in (0..h).step_by(stride) {
        for x in (0..w).step_by(stride) {
            let Some(d) = l.depth.get(x, y) else { continue };
            let p1 = Pixel::new(lit::<T>(x as f64), lit(y as f64));
            let Ok(cam1) = intr.back_project(&p1, d) else { continue };
            let world = left_to_world.transform_point(&cam1);
            let cam2 = right_pose.transform_point(&world);
            let Ok(p2) = intr.project(&cam2) else { continue };
            if !intr.contains(&p2) {
                continue;
            }
            let dir = world - right_center;
            let dist = dir.norm();
            let Some(s) = terrain.intersect(&right_center, &(dir / dist)) else { continue };
            if (s - dist).abs() > dist * lit(COVISIBILITY_TOLERANCE) {
                continue;
            }
            correspondences.push(Correspondence::new(p1, p2));
        }
    }
    Ok(StereoCapture {
        left: l.image,
        right: r.image,
        left_depth: l.depth,
        right_depth: r.depth,
        left_pose: rig.left,
        right_pose,
        intrinsics: *intr,
        correspondences,
        baseline: rig.baseline(),
    })
}
