use std::cmp::Ordering;

use rayon::prelude::*;

use super::{Frame, RenderError};
use crate::camera::{Intrinsics, Pose};
use crate::geometry::{CloudPoint, DepthMap, PointCloud};
use crate::raster::Raster;
use crate::scalar::{lit, to_f64, Real};

/// Splat footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Splat<T: Real> {
    /// Same radius in pixels for every point.
    Fixed(T),
    /// `max(1, scale·f/z)` pixels from the per-point Gaussian scale; points without one use 1.
    Footprint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions<T: Real> {
    pub splat: Splat<T>,
    /// Colour of uncovered pixels.
    pub background: [T; 3],
}

impl<T: Real> Default for RenderOptions<T> {
    fn default() -> Self {
        Self {
            splat: Splat::Footprint,
            background: [T::zero(); 3],
        }
    }
}

impl<T: Real> RenderOptions<T> {
    pub fn fixed(radius: T) -> Self {
        Self {
            splat: Splat::Fixed(radius),
            ..Default::default()
        }
    }
}

/// Points that project in front of the camera, with their camera depth and pixel.
struct Projected<T> {
    index: usize,
    depth: T,
    u: f64,
    v: f64,
    radius: f64,
}

fn project_point<T: Real>(
    index: usize,
    p: &CloudPoint<T>,
    pose: &Pose<T>,
    intr: &Intrinsics<T>,
    splat: Splat<T>,
) -> Option<Projected<T>> {
    let cam = pose.transform_point(&p.position);
    if !(cam[2] > T::zero()) {
        return None;
    }
    let px = if intr.has_distortion() {
        intr.project_distorted(&cam).ok()?
    } else {
        intr.project(&cam).ok()?
    };
    let radius = match splat {
        Splat::Fixed(r) => to_f64(r),
        Splat::Footprint => p
            .scale
            .map_or(1.0, |s| to_f64(s * intr.mean_focal() / cam[2]))
            .max(1.0),
    };
    let (u, v) = (to_f64(px.u), to_f64(px.v));
    (u.is_finite() && v.is_finite() && radius.is_finite()).then_some(Projected {
        index,
        depth: cam[2],
        u,
        v,
        radius,
    })
}

/// Pixels covered by a splat: every pixel centre within `radius − 0.5` of the projection,
/// plus the pixel containing the projection.
fn for_each_covered(p: &Projected<impl Real>, w: usize, h: usize, mut f: impl FnMut(usize)) {
    let reach = p.radius - 0.5;
    let (cx, cy) = ((p.u + 0.5).floor(), (p.v + 0.5).floor());
    let inside = |x: f64, y: f64| x >= 0.0 && y >= 0.0 && x < w as f64 && y < h as f64;
    if reach > 0.0 {
        let (x0, x1) = ((p.u - reach).ceil().max(0.0), (p.u + reach).floor().min(w as f64 - 1.0));
        let (y0, y1) = ((p.v - reach).ceil().max(0.0), (p.v + reach).floor().min(h as f64 - 1.0));
        let r2 = reach * reach;
        let mut y = y0;
        while y <= y1 {
            let mut x = x0;
            while x <= x1 {
                let (dx, dy) = (x - p.u, y - p.v);
                if dx * dx + dy * dy <= r2 && !(x == cx && y == cy) {
                    f(y as usize * w + x as usize);
                }
                x += 1.0;
            }
            y += 1.0;
        }
    }
    if inside(cx, cy) {
        f(cy as usize * w + cx as usize);
    }
}

/// Total order deciding which point owns a pixel: nearer first, then point content,
/// then input index. Content before index keeps the result independent of cloud order.
fn nearer<T: Real>(cloud: &[CloudPoint<T>], a: (T, usize), b: (T, usize)) -> bool {
    match a.0.partial_cmp(&b.0) {
        Some(Ordering::Less) => return true,
        Some(Ordering::Greater) => return false,
        _ => {}
    }
    let (pa, pb) = (&cloud[a.1], &cloud[b.1]);
    let ka = pa.position.iter().chain(pa.color.iter());
    let kb = pb.position.iter().chain(pb.color.iter());
    for (x, y) in ka.zip(kb) {
        match x.partial_cmp(y) {
            Some(Ordering::Less) => return true,
            Some(Ordering::Greater) => return false,
            _ => {}
        }
    }
    a.1 < b.1
}

type ZBuffer<T> = Vec<Option<(T, usize)>>;

fn splat_into<T: Real>(buf: &mut ZBuffer<T>, cloud: &[CloudPoint<T>], p: &Projected<T>, w: usize, h: usize) {
    for_each_covered(p, w, h, |i| {
        let cand = (p.depth, p.index);
        match buf[i] {
            Some(cur) if !nearer(cloud, cand, cur) => {}
            _ => buf[i] = Some(cand),
        }
    });
}

fn merge<T: Real>(cloud: &[CloudPoint<T>], mut a: ZBuffer<T>, b: ZBuffer<T>) -> ZBuffer<T> {
    for (x, y) in a.iter_mut().zip(b) {
        if let Some(cand) = y {
            match *x {
                Some(cur) if !nearer(cloud, cand, cur) => {}
                _ => *x = Some(cand),
            }
        }
    }
    a
}

fn resolve<T: Real>(
    buf: ZBuffer<T>,
    cloud: &[CloudPoint<T>],
    pose: &Pose<T>,
    w: usize,
    h: usize,
    background: [T; 3],
    index: usize,
) -> Frame<T> {
    let rgb = Raster::from_vec(w, h, buf.iter().map(|e| e.map_or(background, |(_, i)| cloud[i].color)).collect());
    let coverage = Raster::from_vec(w, h, buf.iter().map(Option::is_some).collect());
    let depth = DepthMap::from_values(w, h, buf.iter().map(|e| e.map_or(T::zero(), |(d, _)| d)).collect());
    Frame {
        rgb,
        depth,
        coverage,
        pose: *pose,
        index,
    }
}

fn check<T: Real>(cloud: &PointCloud<T>) -> Result<(), RenderError> {
    if cloud.is_empty() {
        Err(RenderError::EmptyCloud)
    } else {
        Ok(())
    }
}

const CHUNK: usize = 8192;

/// Renders a world→camera view with a nearest-wins z-buffer; parallel over point chunks.
pub fn render_view<T: Real>(
    cloud: &PointCloud<T>,
    pose: &Pose<T>,
    intr: &Intrinsics<T>,
    options: &RenderOptions<T>,
) -> Result<Frame<T>, RenderError> {
    check(cloud)?;
    let (w, h) = (intr.width as usize, intr.height as usize);
    let pts = &cloud.points;
    let buf = pts
        .par_chunks(CHUNK)
        .enumerate()
        .fold(
            || vec![None; w * h],
            |mut buf, (c, chunk)| {
                for (k, p) in chunk.iter().enumerate() {
                    if let Some(pr) = project_point(c * CHUNK + k, p, pose, intr, options.splat) {
                        splat_into(&mut buf, pts, &pr, w, h);
                    }
                }
                buf
            },
        )
        .reduce(|| vec![None; w * h], |a, b| merge(pts, a, b));
    Ok(resolve(buf, pts, pose, w, h, options.background, 0))
}

/// Single-threaded reference implementation of [`render_view`].
pub fn render_view_sequential<T: Real>(
    cloud: &PointCloud<T>,
    pose: &Pose<T>,
    intr: &Intrinsics<T>,
    options: &RenderOptions<T>,
) -> Result<Frame<T>, RenderError> {
    check(cloud)?;
    let (w, h) = (intr.width as usize, intr.height as usize);
    let mut buf = vec![None; w * h];
    for (i, p) in cloud.points.iter().enumerate() {
        if let Some(pr) = project_point(i, p, pose, intr, options.splat) {
            splat_into(&mut buf, &cloud.points, &pr, w, h);
        }
    }
    Ok(resolve(buf, &cloud.points, pose, w, h, options.background, 0))
}

/// Fraction of covered pixels.
pub fn coverage_fraction<T: Real>(frame: &Frame<T>) -> f64 {
    let n = frame.coverage.len().max(1);
    frame.coverage.pixels().iter().filter(|c| **c).count() as f64 / n as f64
}

/// Mean rendered depth over covered pixels.
pub fn mean_depth<T: Real>(frame: &Frame<T>) -> Option<T> {
    let v = frame.depth.valid_values();
    if v.is_empty() {
        return None;
    }
    let sum = v.iter().fold(T::zero(), |a, b| a + *b);
    Some(sum / lit(v.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::Pixel;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point(p: [f64; 3], color: [f64; 3]) -> CloudPoint<f64> {
        CloudPoint {
            position: Vector3::from(p),
            color,
            view_id: 0,
            source_pixel: Pixel::new(0.0, 0.0),
            cam_depth: p[2],
            scale: None,
        }
    }

    fn intr() -> Intrinsics<f64> {
        Intrinsics::new(100.0, 100.0, 50.0, 50.0, 101, 101).unwrap()
    }

    #[test]
    fn single_point_radius_zero() {
        let cloud = PointCloud {
            points: vec![point([0.0, 0.0, 2.0], [1.0, 0.5, 0.25])],
        };
        let f = render_view(&cloud, &Pose::identity(), &intr(), &RenderOptions::fixed(0.0)).unwrap();
        assert_eq!(*f.rgb.get(50, 50), [1.0, 0.5, 0.25]);
        assert_eq!(f.depth.get(50, 50), Some(2.0));
        assert_eq!(f.depth.valid_count(), 1);
        assert_eq!(coverage_fraction(&f), 1.0 / (101.0 * 101.0));
    }

    #[test]
    fn nearer_point_wins() {
        let cloud = PointCloud {
            points: vec![point([0.3, 0.3, 3.0], [0.0, 0.0, 1.0]), point([0.2, 0.2, 2.0], [1.0, 0.0, 0.0])],
        };
        let f = render_view(&cloud, &Pose::identity(), &intr(), &RenderOptions::fixed(0.0)).unwrap();
        assert_eq!(f.depth.get(60, 60), Some(2.0));
        assert_eq!(*f.rgb.get(60, 60), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_cloud_is_an_error() {
        let r = render_view(&PointCloud::<f64>::default(), &Pose::identity(), &intr(), &RenderOptions::default());
        assert!(matches!(r, Err(RenderError::EmptyCloud)));
    }

    #[test]
    fn radius_covers_disc() {
        let cloud = PointCloud {
            points: vec![point([0.0, 0.0, 2.0], [1.0; 3])],
        };
        let f = render_view(&cloud, &Pose::identity(), &intr(), &RenderOptions::fixed(2.5)).unwrap();
        // centres within 2 px of (50, 50)
        let expected = (-2i32..=2)
            .flat_map(|dy| (-2i32..=2).map(move |dx| dx * dx + dy * dy))
            .filter(|d| *d <= 4)
            .count();
        assert_eq!(f.depth.valid_count(), expected);
    }

    fn random_cloud(seed: u64, n: usize) -> PointCloud<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud {
            points: (0..n)
                .map(|_| {
                    // coarse depths force many exact ties
                    let z = rng.random_range(2..6) as f64;
                    let mut p = point(
                        [rng.random_range(-1.0..1.0) * z, rng.random_range(-1.0..1.0) * z, z],
                        [rng.random(), rng.random(), rng.random()],
                    );
                    p.scale = Some(rng.random_range(0.001..0.05));
                    p
                })
                .collect(),
        }
    }

    #[test]
    fn depth_is_minimum_over_splatting_points() {
        let cloud = random_cloud(5, 400);
        let opts = RenderOptions::default();
        let f = render_view(&cloud, &Pose::identity(), &intr(), &opts).unwrap();
        let (w, h) = (101, 101);
        let mut brute = vec![f64::INFINITY; w * h];
        for (i, p) in cloud.points.iter().enumerate() {
            let pr = project_point(i, p, &Pose::identity(), &intr(), opts.splat).unwrap();
            for_each_covered(&pr, w, h, |k| brute[k] = brute[k].min(pr.depth));
        }
        for y in 0..h {
            for x in 0..w {
                let b = brute[y * w + x];
                assert_eq!(f.depth.get(x, y), b.is_finite().then_some(b));
            }
        }
    }

    #[test]
    fn parallel_matches_sequential_and_is_order_free() {
        let mut cloud = random_cloud(6, 3 * CHUNK + 17);
        let pose = Pose::from_rotation_vector(&Vector3::new(0.01, -0.02, 0.0), Vector3::new(0.1, 0.0, 0.2));
        let opts = RenderOptions::fixed(1.7);
        let a = render_view(&cloud, &pose, &intr(), &opts).unwrap();
        let b = render_view_sequential(&cloud, &pose, &intr(), &opts).unwrap();
        assert_eq!(a, b);
        cloud.points.reverse();
        let c = render_view(&cloud, &pose, &intr(), &opts).unwrap();
        assert_eq!(a.rgb, c.rgb);
        assert_eq!(a.depth, c.depth);
    }
}
