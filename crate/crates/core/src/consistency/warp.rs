use std::collections::HashMap;

use nalgebra::Vector3;
use rayon::prelude::*;

use super::ConsistencyError;
use crate::camera::{Intrinsics, Pixel, Pose};
use crate::geometry::DepthMap;
use crate::scalar::{from_usize, lit, to_f64, Real};

pub const DEFAULT_GRID_STRIDE: usize = 8;

/// Camera-frame points sampled on a pixel grid of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGeometry<T: Real> {
    pub points_cam: Vec<Vector3<T>>,
    pub grid: Vec<Pixel<T>>,
    pub intr: Intrinsics<T>,
    /// World→camera.
    pub pose_world: Pose<T>,
}

impl<T: Real> FrameGeometry<T> {
    pub fn new(
        points_cam: Vec<Vector3<T>>,
        grid: Vec<Pixel<T>>,
        intr: Intrinsics<T>,
        pose_world: Pose<T>,
    ) -> Result<Self, ConsistencyError> {
        if points_cam.len() != grid.len() {
            return Err(ConsistencyError::BadGeometry(format!(
                "{} points for {} grid locations",
                points_cam.len(),
                grid.len()
            )));
        }
        if let Some(g) = grid.iter().find(|g| !intr.contains(g)) {
            return Err(ConsistencyError::BadGeometry(format!("grid location ({}, {}) outside the image", g.u, g.v)));
        }
        Ok(Self {
            points_cam,
            grid,
            intr,
            pose_world,
        })
    }

    /// Back-projects valid depth on a `stride`-pixel grid offset by `stride/2`.
    pub fn from_depth(depth: &DepthMap<T>, intr: &Intrinsics<T>, pose_world: &Pose<T>, stride: usize) -> Self {
        let stride = stride.max(1);
        let mut points_cam = Vec::new();
        let mut grid = Vec::new();
        for y in (stride / 2..depth.height()).step_by(stride) {
            for x in (stride / 2..depth.width()).step_by(stride) {
                let Some(d) = depth.get(x, y) else { continue };
                let px = Pixel::new(from_usize(x), from_usize(y));
                if let Ok(p) = intr.back_project(&px, d) {
                    points_cam.push(p);
                    grid.push(px);
                }
            }
        }
        Self {
            points_cam,
            grid,
            intr: *intr,
            pose_world: *pose_world,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Maps frame-`k` camera coordinates into this frame's camera coordinates.
    pub fn relative_from(&self, k: &FrameGeometry<T>) -> Pose<T> {
        self.pose_world.compose(&k.pose_world.inverse())
    }
}

/// Mean squared reprojection distance with exclusion counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reprojection<T: Real> {
    pub mean_sq: T,
    pub used: usize,
    pub behind_camera: usize,
    /// Points without an expected location.
    pub unmatched: usize,
}

fn finish<T: Real>(sum: T, used: usize, behind_camera: usize, unmatched: usize) -> Result<Reprojection<T>, ConsistencyError> {
    if used == 0 {
        return Err(ConsistencyError::NoValidPoints {
            behind_camera,
            unmatched,
        });
    }
    Ok(Reprojection {
        mean_sq: sum / from_usize(used),
        used,
        behind_camera,
        unmatched,
    })
}

/// Mean over points of `‖π(p) − grid‖²`; points with `z ≤ 0` are excluded and counted.
pub fn self_reprojection_error<T: Real>(g: &FrameGeometry<T>) -> Result<Reprojection<T>, ConsistencyError> {
    let mut sum = T::zero();
    let (mut used, mut behind) = (0, 0);
    for (p, x) in g.points_cam.iter().zip(&g.grid) {
        match g.intr.project(p) {
            Ok(r) => {
                sum += r.distance_squared(x);
                used += 1;
            }
            Err(_) => behind += 1,
        }
    }
    finish(sum, used, behind, 0)
}

/// Mean of `‖π_i(M_ik·p) − expected‖²` over frame-`k` points. `expected[j]` is `None`
/// when point `j` has no expected location in frame `i`.
pub fn cross_reprojection_error<T: Real>(
    g_k: &FrameGeometry<T>,
    m_ik: &Pose<T>,
    intr_i: &Intrinsics<T>,
    expected: &[Option<Pixel<T>>],
) -> Result<Reprojection<T>, ConsistencyError> {
    if expected.len() != g_k.len() {
        return Err(ConsistencyError::BadGeometry(format!(
            "{} expected locations for {} points",
            expected.len(),
            g_k.len()
        )));
    }
    let mut sum = T::zero();
    let (mut used, mut behind, mut unmatched) = (0, 0, 0);
    for (p, e) in g_k.points_cam.iter().zip(expected) {
        let Some(e) = e else {
            unmatched += 1;
            continue;
        };
        match intr_i.project(&m_ik.transform_point(p)) {
            Ok(r) => {
                sum += r.distance_squared(e);
                used += 1;
            }
            Err(_) => behind += 1,
        }
    }
    finish(sum, used, behind, unmatched)
}

/// Which ordered frame pairs `(i, k)` (points of `k` warped into `i`) enter the cross term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairingPolicy {
    /// `(i, i+1)` and `(i+1, i)`.
    #[default]
    Consecutive,
    /// Every ordered pair `i ≠ k`.
    AllPairs,
}

impl PairingPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            PairingPolicy::Consecutive => "consecutive",
            PairingPolicy::AllPairs => "all-pairs",
        }
    }
}

pub fn pairs(n: usize, policy: PairingPolicy) -> Vec<(usize, usize)> {
    match policy {
        PairingPolicy::Consecutive => (0..n.saturating_sub(1)).flat_map(|i| [(i, i + 1), (i + 1, i)]).collect(),
        PairingPolicy::AllPairs => (0..n)
            .flat_map(|i| (0..n).filter(move |&k| k != i).map(move |k| (i, k)))
            .collect(),
    }
}

/// Source of the expected frame-`i` locations of frame-`k` grid points.
#[derive(Debug, Clone, Copy)]
pub enum CrossTarget<'a, T: Real> {
    /// Projections through reference geometry (same grids; typically ground truth):
    /// `π_i(M^ref_ik · p^ref_k)` for the reference point at the same grid location.
    Reference(&'a [FrameGeometry<T>]),
    /// Depth-consistency round trip through the evaluated frame `i`'s own depth map: the
    /// warped point is replaced by frame `i`'s surface point at the same pixel, mapped back
    /// into frame `k`, and compared with its grid origin (error in frame-`k` pixels).
    RoundTrip(&'a [DepthMap<T>]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairError<T: Real> {
    pub i: usize,
    pub k: usize,
    pub value: Reprojection<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpReport<T: Real> {
    pub policy: PairingPolicy,
    pub self_errors: Vec<Reprojection<T>>,
    pub pair_errors: Vec<PairError<T>>,
    /// Pairs with no usable point.
    pub skipped_pairs: Vec<(usize, usize)>,
    pub self_avg: T,
    /// Zero when there are no pairs.
    pub cross_avg: T,
    pub l2d: T,
}

fn grid_key<T: Real>(p: &Pixel<T>) -> (i64, i64) {
    (to_f64(p.u).round() as i64, to_f64(p.v).round() as i64)
}

fn reference_targets<T: Real>(
    g_k: &FrameGeometry<T>,
    ref_i: &FrameGeometry<T>,
    ref_k: &FrameGeometry<T>,
) -> Vec<Option<Pixel<T>>> {
    let m = ref_i.relative_from(ref_k);
    let lookup: HashMap<(i64, i64), &Vector3<T>> =
        ref_k.grid.iter().map(grid_key).zip(ref_k.points_cam.iter()).collect();
    g_k.grid
        .iter()
        .map(|g| {
            let p = lookup.get(&grid_key(g))?;
            ref_i.intr.project(&m.transform_point(p)).ok()
        })
        .collect()
}

fn round_trip<T: Real>(g_k: &FrameGeometry<T>, g_i: &FrameGeometry<T>, depth_i: &DepthMap<T>) -> Result<Reprojection<T>, ConsistencyError> {
    let m_ik = g_i.relative_from(g_k);
    let m_ki = m_ik.inverse();
    let mut sum = T::zero();
    let (mut used, mut behind, mut unmatched) = (0, 0, 0);
    for (p, g) in g_k.points_cam.iter().zip(&g_k.grid) {
        let Ok(x) = g_i.intr.project(&m_ik.transform_point(p)) else {
            behind += 1;
            continue;
        };
        let Some(q) = depth_i
            .sample_inverse_bilinear(&x)
            .and_then(|d| g_i.intr.back_project(&x, d).ok())
        else {
            unmatched += 1;
            continue;
        };
        match g_k.intr.project(&m_ki.transform_point(&q)) {
            Ok(r) => {
                sum += r.distance_squared(g);
                used += 1;
            }
            Err(_) => behind += 1,
        }
    }
    finish(sum, used, behind, unmatched)
}

fn mean<T: Real>(v: impl Iterator<Item = T>) -> T {
    let (mut s, mut n) = (T::zero(), 0usize);
    for x in v {
        s += x;
        n += 1;
    }
    if n == 0 {
        T::zero()
    } else {
        s / from_usize(n)
    }
}

/// `L_2D = ½(L_self_avg + L_cross_avg)` over a sequence. Per-frame and per-pair terms run in
/// parallel; averages are reduced in index order.
pub fn warp_error<T: Real>(
    frames: &[FrameGeometry<T>],
    policy: PairingPolicy,
    target: CrossTarget<'_, T>,
) -> Result<WarpReport<T>, ConsistencyError> {
    if frames.is_empty() {
        return Err(ConsistencyError::EmptySequence);
    }
    let n = frames.len();
    match target {
        CrossTarget::Reference(r) if r.len() != n => {
            return Err(ConsistencyError::BadGeometry(format!("{} reference frames for {n} frames", r.len())))
        }
        CrossTarget::RoundTrip(d) if d.len() != n => {
            return Err(ConsistencyError::BadGeometry(format!("{} depth maps for {n} frames", d.len())))
        }
        _ => {}
    }
    let self_errors = frames
        .par_iter()
        .map(self_reprojection_error)
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<((usize, usize), Result<Reprojection<T>, ConsistencyError>)> = pairs(n, policy)
        .into_par_iter()
        .map(|(i, k)| {
            let r = match target {
                CrossTarget::Reference(refs) => {
                    let expected = reference_targets(&frames[k], &refs[i], &refs[k]);
                    cross_reprojection_error(&frames[k], &frames[i].relative_from(&frames[k]), &frames[i].intr, &expected)
                }
                CrossTarget::RoundTrip(depths) => round_trip(&frames[k], &frames[i], &depths[i]),
            };
            ((i, k), r)
        })
        .collect();
    let mut pair_errors = Vec::new();
    let mut skipped_pairs = Vec::new();
    for ((i, k), r) in results {
        match r {
            Ok(value) => pair_errors.push(PairError { i, k, value }),
            Err(ConsistencyError::NoValidPoints { .. }) => skipped_pairs.push((i, k)),
            Err(e) => return Err(e),
        }
    }
    let self_avg = mean(self_errors.iter().map(|r| r.mean_sq));
    let cross_avg = mean(pair_errors.iter().map(|p| p.value.mean_sq));
    Ok(WarpReport {
        policy,
        self_errors,
        pair_errors,
        skipped_pairs,
        self_avg,
        cross_avg,
        l2d: (self_avg + cross_avg) * lit(0.5),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn intr() -> Intrinsics<f64> {
        Intrinsics::new(50.0, 50.0, 31.5, 23.5, 64, 48).unwrap()
    }

    /// Fronto-parallel plane `z = z0` in world coordinates viewed by `pose`.
    fn plane_depth(pose: &Pose<f64>, z0: f64) -> DepthMap<f64> {
        let k = intr();
        let c = pose.center();
        let r = pose.inverse();
        DepthMap::from_fn(64, 48, |x, y| {
            let ray_cam = Vector3::new((x as f64 - k.cx) / k.fx, (y as f64 - k.cy) / k.fy, 1.0);
            let ray = r.rotate(&ray_cam);
            let t = (z0 - c[2]) / ray[2];
            (t > 0.0).then_some(t)
        })
    }

    fn sequence(n: usize) -> (Vec<FrameGeometry<f64>>, Vec<DepthMap<f64>>) {
        let k = intr();
        (0..n)
            .map(|i| {
                let pose = Pose::from_axis_angle(&Vector3::y(), 0.02 * i as f64, Vector3::new(-0.1 * i as f64, 0.0, 0.0));
                let d = plane_depth(&pose, 6.0);
                (FrameGeometry::from_depth(&d, &k, &pose, 8), d)
            })
            .unzip()
    }

    #[test]
    fn exact_back_projection_has_zero_self_error() {
        let (g, _) = sequence(1);
        let r = self_reprojection_error(&g[0]).unwrap();
        assert!(r.mean_sq < 1e-20);
        assert_eq!(r.used, g[0].len());
    }

    #[test]
    fn one_pixel_shift_gives_unit_error() {
        let (mut g, _) = sequence(1);
        let f = &mut g[0];
        for p in &mut f.points_cam {
            p[0] += p[2] / f.intr.fx;
        }
        let r = self_reprojection_error(f).unwrap();
        assert!((r.mean_sq - 1.0).abs() < 1e-9);
    }

    #[test]
    fn self_error_matches_scalar_recomputation() {
        let (mut g, _) = sequence(1);
        let f = &mut g[0];
        for (j, p) in f.points_cam.iter_mut().enumerate() {
            *p *= 1.0 + 0.01 * ((j * 7919) % 13) as f64 / 13.0;
            p[1] += 0.003 * (j % 5) as f64;
        }
        let mut want = 0.0;
        for (p, x) in f.points_cam.iter().zip(&f.grid) {
            let u = f.intr.fx * p[0] / p[2] + f.intr.cx;
            let v = f.intr.fy * p[1] / p[2] + f.intr.cy;
            want += (u - x.u).powi(2) + (v - x.v).powi(2);
        }
        want /= f.len() as f64;
        assert!((self_reprojection_error(f).unwrap().mean_sq - want).abs() < 1e-12);
    }

    #[test]
    fn behind_camera_points_are_counted() {
        let (mut g, _) = sequence(1);
        g[0].points_cam[0][2] = -1.0;
        let r = self_reprojection_error(&g[0]).unwrap();
        assert_eq!(r.behind_camera, 1);
        assert_eq!(r.used, g[0].len() - 1);
    }

    #[test]
    fn degenerate_pair_equals_self_error() {
        let (mut g, _) = sequence(1);
        for p in &mut g[0].points_cam {
            p[0] += 0.01;
        }
        let f = &g[0];
        let expected: Vec<_> = f.grid.iter().copied().map(Some).collect();
        let c = cross_reprojection_error(f, &Pose::identity(), &f.intr, &expected).unwrap();
        assert_eq!(c.mean_sq, self_reprojection_error(f).unwrap().mean_sq);
    }

    #[test]
    fn translation_error_of_one_pixel_on_plane() {
        // camera k at the origin, i shifted by 0.5 m; plane at z = 6, fx = 50 ⇒ 1 px ≙ 0.12 m
        let k = intr();
        let pk = Pose::identity();
        let pi = Pose::from_translation(Vector3::new(-0.5, 0.0, 0.0));
        let gk = FrameGeometry::from_depth(&plane_depth(&pk, 6.0), &k, &pk, 8);
        let gi = FrameGeometry::from_depth(&plane_depth(&pi, 6.0), &k, &pi, 8);
        let truth = gi.relative_from(&gk);
        let expected: Vec<_> = gk.points_cam.iter().map(|p| k.project(&truth.transform_point(p)).ok()).collect();
        let exact = cross_reprojection_error(&gk, &truth, &k, &expected).unwrap();
        assert!(exact.mean_sq < 1e-24);
        let bad = Pose::from_translation(truth.translation() + Vector3::new(6.0 / 50.0, 0.0, 0.0));
        let r = cross_reprojection_error(&gk, &bad, &k, &expected).unwrap();
        assert!((r.mean_sq - 1.0).abs() < 1e-9, "{}", r.mean_sq);
    }

    #[test]
    fn single_frame_has_zero_cross_term() {
        let (g, d) = sequence(1);
        let r = warp_error(&g, PairingPolicy::Consecutive, CrossTarget::RoundTrip(&d)).unwrap();
        assert!(r.pair_errors.is_empty());
        assert_eq!(r.cross_avg, 0.0);
        assert_eq!(r.l2d, r.self_avg / 2.0);
    }

    #[test]
    fn consistent_sequence_is_near_zero_both_targets() {
        let (g, d) = sequence(5);
        let rt = warp_error(&g, PairingPolicy::Consecutive, CrossTarget::RoundTrip(&d)).unwrap();
        assert_eq!(rt.pair_errors.len(), 8);
        assert!(rt.l2d < 1e-10, "{}", rt.l2d);
        let rf = warp_error(&g, PairingPolicy::AllPairs, CrossTarget::Reference(&g)).unwrap();
        assert_eq!(rf.pair_errors.len(), 20);
        assert!(rf.l2d < 1e-10);
    }

    #[test]
    fn pose_corruption_grows_warp_error() {
        let (g, d) = sequence(4);
        let mut last = -1.0;
        for level in [0.0, 0.01, 0.03, 0.09] {
            let bad: Vec<_> = g
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let mut f = f.clone();
                    let delta = Pose::from_translation(Vector3::new(level * (i % 2) as f64, 0.0, 0.0));
                    f.pose_world = delta.compose(&f.pose_world);
                    f
                })
                .collect();
            let rf = warp_error(&bad, PairingPolicy::Consecutive, CrossTarget::Reference(&g)).unwrap();
            let rt = warp_error(&bad, PairingPolicy::Consecutive, CrossTarget::RoundTrip(&d)).unwrap();
            assert!(rf.l2d > last);
            assert!(rt.l2d > 0.0 || level == 0.0);
            last = rf.l2d;
        }
    }

    #[test]
    fn pairing_policies() {
        assert_eq!(pairs(3, PairingPolicy::Consecutive), vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
        assert_eq!(pairs(3, PairingPolicy::AllPairs).len(), 6);
        assert!(pairs(1, PairingPolicy::Consecutive).is_empty());
    }

    #[test]
    fn rejects_mismatched_geometry() {
        let k = intr();
        let e = FrameGeometry::new(vec![Vector3::z()], vec![], k, Pose::identity());
        assert!(matches!(e, Err(ConsistencyError::BadGeometry(_))));
        let e = FrameGeometry::new(vec![Vector3::z()], vec![Pixel::new(-3.0, 0.0)], k, Pose::identity());
        assert!(matches!(e, Err(ConsistencyError::BadGeometry(_))));
        assert_eq!(
            warp_error::<f64>(&[], PairingPolicy::Consecutive, CrossTarget::Reference(&[])),
            Err(ConsistencyError::EmptySequence)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn rigid_motion_invariance(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0,
                                   angle in -3.0f64..3.0, t in prop::array::uniform3(-20.0f64..20.0),
                                   noise in 0.0f64..0.05) {
            let (mut g, _) = sequence(4);
            for (i, f) in g.iter_mut().enumerate() {
                f.pose_world = Pose::from_translation(Vector3::new(noise * i as f64, 0.0, 0.0)).compose(&f.pose_world);
            }
            let (reference, _) = sequence(4);
            let axis = Vector3::new(ax, ay, az);
            prop_assume!(axis.norm() > 1e-3);
            let gm = Pose::from_axis_angle(&axis.normalize(), angle, Vector3::from(t));
            let moved = |v: &[FrameGeometry<f64>]| -> Vec<FrameGeometry<f64>> {
                v.iter().map(|f| FrameGeometry { pose_world: f.pose_world.compose(&gm.inverse()), ..f.clone() }).collect()
            };
            let a = warp_error(&g, PairingPolicy::AllPairs, CrossTarget::Reference(&reference)).unwrap();
            let b = warp_error(&moved(&g), PairingPolicy::AllPairs, CrossTarget::Reference(&moved(&reference))).unwrap();
            for (x, y) in a.pair_errors.iter().zip(&b.pair_errors) {
                prop_assert!((x.value.mean_sq - y.value.mean_sq).abs() < 1e-9);
            }
            prop_assert!((a.l2d - b.l2d).abs() < 1e-9);
            prop_assert_eq!(a.l2d, (a.self_avg + a.cross_avg) * 0.5);
            prop_assert!(a.self_avg >= 0.0 && a.cross_avg >= 0.0);
        }
    }
}
