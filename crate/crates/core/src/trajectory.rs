//! Canonical virtual-camera paths, depth-adaptive scaling, interpolation and motion captions.
//!
//! Keys are camera→world poses. Every kind is a closed-form motion in the anchor camera
//! frame (x right, y down, z forward) composed onto the anchor, so key 1 is the anchor.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::{UnitQuaternion, Vector3};
use thiserror::Error;

use crate::camera::Pose;
use crate::geometry::DepthMap;
use crate::io::text::{format_pose, parse_pose_line};
use crate::scalar::{from_usize, lit, to_f64, Real};

pub const DEFAULT_FRAMES: usize = 49;
pub const DEFAULT_REFERENCE_DEPTH: f64 = 10.0;
pub const SCALE_CLAMP: (f64, f64) = (0.05, 20.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("unknown trajectory kind `{0}`")]
    UnknownKind(String),
    #[error("bad trajectory parameters: {0}")]
    BadParams(String),
    #[error("time {t} outside [1, {last}]")]
    OutOfRange { t: f64, last: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrajectoryKind {
    Orbit,
    Dolly,
    Truck,
    Pan,
    Spiral,
    Boom,
}

impl TrajectoryKind {
    pub const ALL: [TrajectoryKind; 6] = [
        TrajectoryKind::Orbit,
        TrajectoryKind::Dolly,
        TrajectoryKind::Truck,
        TrajectoryKind::Pan,
        TrajectoryKind::Spiral,
        TrajectoryKind::Boom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TrajectoryKind::Orbit => "orbit",
            TrajectoryKind::Dolly => "dolly",
            TrajectoryKind::Truck => "truck",
            TrajectoryKind::Pan => "pan",
            TrajectoryKind::Spiral => "spiral",
            TrajectoryKind::Boom => "boom",
        }
    }

    /// Whether `extent` is an angle (radians) rather than a distance (metres).
    pub fn angular(&self) -> bool {
        matches!(self, TrajectoryKind::Orbit | TrajectoryKind::Pan | TrajectoryKind::Spiral)
    }
}

impl fmt::Display for TrajectoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrajectoryKind {
    type Err = TrajectoryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| TrajectoryError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryParams<T: Real> {
    /// Metres for dolly/truck/boom, radians for pan/orbit/spiral.
    pub extent: T,
    pub frames: usize,
    /// Distance from the anchor to the orbit pivot along the optical axis.
    pub pivot_depth: T,
}

impl<T: Real> TrajectoryParams<T> {
    pub fn new(extent: T, frames: usize) -> Self {
        Self {
            extent,
            frames,
            pivot_depth: lit(DEFAULT_REFERENCE_DEPTH),
        }
    }

    pub fn with_pivot_depth(mut self, depth: T) -> Self {
        self.pivot_depth = depth;
        self
    }
}

/// Ordered camera→world keys at timestamps `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub kind: TrajectoryKind,
    pub poses: Vec<Pose<T>>,
    /// Product of all depth-adaptive factors applied.
    pub scale_factor: T,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn timestamps(&self) -> Vec<T> {
        (1..=self.poses.len()).map(from_usize).collect()
    }

    pub fn anchor(&self) -> &Pose<T> {
        &self.poses[0]
    }

    /// Key poses expressed in the anchor camera frame.
    pub fn local_poses(&self) -> Vec<Pose<T>> {
        let inv = self.anchor().inverse();
        self.poses.iter().map(|p| inv.compose(p)).collect()
    }

    /// World→camera poses, as consumed by the renderer.
    pub fn world_to_camera(&self) -> Vec<Pose<T>> {
        self.poses.iter().map(Pose::inverse).collect()
    }
}

fn yaw<T: Real>(angle: T) -> Pose<T> {
    Pose::from_axis_angle(&Vector3::y(), angle, Vector3::zeros())
}

/// Anchor-frame motion at normalized time `tau ∈ [0, 1]`.
fn local_motion<T: Real>(kind: TrajectoryKind, extent: T, pivot: T, tau: T) -> Pose<T> {
    let s = extent * tau;
    let zero = T::zero();
    match kind {
        TrajectoryKind::Dolly => Pose::from_translation(Vector3::new(zero, zero, s)),
        TrajectoryKind::Truck => Pose::from_translation(Vector3::new(s, zero, zero)),
        // image y points down
        TrajectoryKind::Boom => Pose::from_translation(Vector3::new(zero, -s, zero)),
        TrajectoryKind::Pan => yaw(s),
        TrajectoryKind::Orbit | TrajectoryKind::Spiral => {
            let radius = if kind == TrajectoryKind::Spiral {
                pivot * (T::one() - lit::<T>(0.5) * tau)
            } else {
                pivot
            };
            let r = yaw(s);
            // centre = pivot − radius·forward, forward = R·ẑ
            let forward = r.rotate(&Vector3::z());
            let center = Vector3::new(zero, zero, pivot) - forward * radius;
            Pose::from_parts_unchecked(*r.rotation(), center)
        }
    }
}

pub fn canonical_trajectory<T: Real>(
    kind: TrajectoryKind,
    params: &TrajectoryParams<T>,
    anchor: &Pose<T>,
) -> Result<Trajectory<T>, TrajectoryError> {
    if params.frames < 2 {
        return Err(TrajectoryError::BadParams(format!("need at least 2 frames, got {}", params.frames)));
    }
    if !(params.extent > T::zero() && params.extent.is_finite()) {
        return Err(TrajectoryError::BadParams("extent must be positive and finite".into()));
    }
    if kind.angular() && kind != TrajectoryKind::Pan && !(params.pivot_depth > T::zero()) {
        return Err(TrajectoryError::BadParams("pivot depth must be positive".into()));
    }
    let last = from_usize::<T>(params.frames - 1);
    let poses = (0..params.frames)
        .map(|i| {
            let tau = from_usize::<T>(i) / last;
            anchor.compose(&local_motion(kind, params.extent, params.pivot_depth, tau))
        })
        .collect();
    Ok(Trajectory {
        kind,
        poses,
        scale_factor: T::one(),
    })
}

/// Percentiles of the valid depths of a reference map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthStats<T: Real> {
    pub median_depth: T,
    pub p10_depth: T,
    pub p90_depth: T,
}

impl<T: Real> DepthStats<T> {
    /// Nearest-rank percentiles; `None` without valid pixels.
    pub fn from_depth(depth: &DepthMap<T>) -> Option<Self> {
        let mut v = depth.valid_values();
        if v.is_empty() {
            return None;
        }
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite depth"));
        let pick = |q: f64| v[((q * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
        Some(Self {
            median_depth: pick(0.5),
            p10_depth: pick(0.1),
            p90_depth: pick(0.9),
        })
    }

    pub fn uniform(depth: T) -> Self {
        Self {
            median_depth: depth,
            p10_depth: depth,
            p90_depth: depth,
        }
    }
}

/// `clamp(median / reference, 0.05, 20)`.
pub fn adaptive_factor<T: Real>(stats: &DepthStats<T>, reference_depth: T) -> T {
    let f = stats.median_depth / reference_depth;
    f.max(lit(SCALE_CLAMP.0)).min(lit(SCALE_CLAMP.1))
}

/// Scales every anchor-frame translation (and so orbit radii) by [`adaptive_factor`].
pub fn depth_adaptive_scale<T: Real>(traj: &Trajectory<T>, stats: &DepthStats<T>, reference_depth: T) -> Trajectory<T> {
    let factor = adaptive_factor(stats, reference_depth);
    if factor == T::one() {
        return traj.clone();
    }
    let anchor = *traj.anchor();
    let poses = traj
        .local_poses()
        .iter()
        .map(|l| anchor.compose(&Pose::from_parts_unchecked(*l.rotation(), l.translation() * factor)))
        .collect();
    Trajectory {
        kind: traj.kind,
        poses,
        scale_factor: traj.scale_factor * factor,
    }
}

/// Unit quaternion between the keys bracketing `t`.
pub fn interpolate_rotation<T: Real>(traj: &Trajectory<T>, t: T) -> Result<UnitQuaternion<T>, TrajectoryError> {
    let (i, frac) = bracket(traj, t)?;
    let qa = traj.poses[i].quaternion();
    if frac == T::zero() {
        return Ok(qa);
    }
    let qb = traj.poses[i + 1].quaternion();
    Ok(qa.slerp(&qb, frac))
}

fn bracket<T: Real>(traj: &Trajectory<T>, t: T) -> Result<(usize, T), TrajectoryError> {
    let last = from_usize::<T>(traj.len());
    if !(t >= T::one() && t <= last) {
        return Err(TrajectoryError::OutOfRange {
            t: to_f64(t),
            last: to_f64(last),
        });
    }
    let k = t.floor();
    let i = to_f64(k) as usize - 1;
    if i + 1 >= traj.len() {
        return Ok((traj.len() - 1, T::zero()));
    }
    Ok((i, t - k))
}

/// Slerp on rotation, linear on translation; returns keys unchanged at integer times.
pub fn interpolate_pose<T: Real>(traj: &Trajectory<T>, t: T) -> Result<Pose<T>, TrajectoryError> {
    let (i, frac) = bracket(traj, t)?;
    if frac == T::zero() {
        return Ok(traj.poses[i]);
    }
    let q = interpolate_rotation(traj, t)?;
    let (a, b) = (traj.poses[i].translation(), traj.poses[i + 1].translation());
    Ok(Pose::from_quaternion(&q, a + (b - a) * frac))
}

/// Resamples to `frames` keys evenly spaced over the same time span.
pub fn resample<T: Real>(traj: &Trajectory<T>, frames: usize) -> Result<Trajectory<T>, TrajectoryError> {
    if frames < 2 {
        return Err(TrajectoryError::BadParams("need at least 2 frames".into()));
    }
    let span = from_usize::<T>(traj.len() - 1);
    let poses = (0..frames)
        .map(|i| {
            let t = if i == frames - 1 {
                from_usize(traj.len())
            } else {
                T::one() + span * from_usize::<T>(i) / from_usize::<T>(frames - 1)
            };
            interpolate_pose(traj, t)
        })
        .collect::<Result<_, _>>()?;
    Ok(Trajectory {
        kind: traj.kind,
        poses,
        scale_factor: traj.scale_factor,
    })
}

const TRANSLATION_EPS: f64 = 1e-6;
const ROTATION_EPS: f64 = 1e-6;
/// Rotations under this many radians get "slightly".
const SLIGHT_ROTATION: f64 = 10.0 * std::f64::consts::PI / 180.0;
/// Relative change of pivot distance that counts as approaching or receding.
const RADIUS_CHANGE: f64 = 0.01;

/// One-sentence caption from the net anchor-frame motion between the first and last keys.
///
/// Signs: forward is +z, right is +x, up is −y; a positive rotation about +y pans right,
/// about +x tilts up. An orbit is a yaw whose lateral travel is opposite to the turn,
/// i.e. the optical axes converge in front of the camera.
pub fn describe_motion<T: Real>(traj: &Trajectory<T>) -> String {
    let local = traj.local_poses();
    let last = local.last().expect("non-empty trajectory");
    let d = last.translation().map(to_f64);
    let omega = last.cast::<f64>().quaternion().scaled_axis();
    let angle = omega.norm();
    let moving = d.norm() > TRANSLATION_EPS;
    let turning = angle > ROTATION_EPS;

    if !moving && !turning {
        return "The camera remains static.".into();
    }

    if moving && turning && omega[1].abs() >= omega[0].abs().max(omega[2].abs()) && d[0] * omega[1] < 0.0 {
        // pivot where the final optical axis crosses the initial one (x = 0)
        let fwd = last.cast::<f64>().rotate(&Vector3::z());
        if fwd[0].abs() > 1e-12 {
            let s = -d[0] / fwd[0];
            let pivot_z = d[2] + s * fwd[2];
            if s > 0.0 && pivot_z > 0.0 {
                let change = (s - pivot_z) / pivot_z;
                return if change < -RADIUS_CHANGE {
                    "The camera orbits while moving forward.".into()
                } else if change > RADIUS_CHANGE {
                    "The camera orbits while moving backward.".into()
                } else if d[0] < 0.0 {
                    "The camera orbits left.".into()
                } else {
                    "The camera orbits right.".into()
                };
            }
        }
    }

    let translation = moving.then(|| {
        let a = d.map(f64::abs);
        if a[2] >= a[0] && a[2] >= a[1] {
            if d[2] > 0.0 { "forward" } else { "backward" }
        } else if a[0] >= a[1] {
            if d[0] > 0.0 { "right" } else { "left" }
        } else if d[1] < 0.0 {
            "up"
        } else {
            "down"
        }
    });
    let rotation = turning.then(|| {
        let a = omega.map(f64::abs);
        let slight = if angle < SLIGHT_ROTATION { "slightly " } else { "" };
        let (verb, gerund, dir) = if a[1] >= a[0] && a[1] >= a[2] {
            ("pans", "panning", if omega[1] > 0.0 { "right" } else { "left" })
        } else if a[0] >= a[2] {
            ("tilts", "tilting", if omega[0] > 0.0 { "up" } else { "down" })
        } else {
            ("rolls", "rolling", if omega[2] > 0.0 { "clockwise" } else { "counterclockwise" })
        };
        (verb, gerund, format!("{slight}{dir}"))
    });
    match (translation, rotation) {
        (Some(t), None) => format!("The camera moves {t}."),
        (None, Some((verb, _, dir))) => format!("The camera {verb} {dir}."),
        (Some(t), Some((_, gerund, dir))) => format!("The camera moves {t} while {gerund} {dir}."),
        (None, None) => unreachable!(),
    }
}

/// Header `kind N scale_factor`, then one row-major 3×4 pose per line.
pub fn write_trajectory<T: Real>(traj: &Trajectory<T>) -> String {
    let mut s = format!("{} {} {}\n", traj.kind, traj.len(), traj.scale_factor);
    for p in &traj.poses {
        let _ = writeln!(s, "{}", format_pose(p));
    }
    s
}

pub fn parse_trajectory<T: Real>(text: &str) -> Result<Trajectory<T>, TrajectoryError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line, message: String| TrajectoryError::Parse { line, message };
    let (hl, header) = lines.next().ok_or_else(|| err(1, "empty trajectory file".into()))?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 3 {
        return Err(err(hl, "expected header `kind N scale_factor`".into()));
    }
    let kind: TrajectoryKind = f[0].parse()?;
    let n: usize = f[1].parse().map_err(|_| err(hl, format!("bad frame count `{}`", f[1])))?;
    let scale_factor: T = f[2].parse().map_err(|_| err(hl, format!("bad scale factor `{}`", f[2])))?;
    let poses = lines
        .map(|(line, l)| {
            let fields: Vec<&str> = l.split_whitespace().collect();
            parse_pose_line(line, &fields).map_err(|e| err(line, e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if poses.len() != n {
        return Err(err(hl, format!("header says {n} poses, found {}", poses.len())));
    }
    if n < 2 {
        return Err(TrajectoryError::BadParams("need at least 2 poses".into()));
    }
    Ok(Trajectory {
        kind,
        poses,
        scale_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn traj(kind: TrajectoryKind, extent: f64, n: usize) -> Trajectory<f64> {
        canonical_trajectory(kind, &TrajectoryParams::new(extent, n), &Pose::identity()).unwrap()
    }

    fn yaw_of(p: &Pose<f64>) -> f64 {
        let f = p.rotate(&Vector3::z());
        f[0].atan2(f[2])
    }

    #[test]
    fn dolly_spacing() {
        let t = traj(TrajectoryKind::Dolly, 0.4, 5);
        for (i, p) in t.poses.iter().enumerate() {
            assert!((p.translation()[2] - 0.1 * i as f64).abs() < 1e-15);
            assert_eq!(*p.rotation(), nalgebra::Matrix3::identity());
        }
    }

    #[test]
    fn pan_angles() {
        let t = traj(TrajectoryKind::Pan, FRAC_PI_2, 3);
        for (p, want) in t.poses.iter().zip([0.0, FRAC_PI_4, FRAC_PI_2]) {
            assert!((yaw_of(p) - want).abs() < 1e-12);
            assert_eq!(p.translation().norm(), 0.0);
        }
        assert_eq!(describe_motion(&t), "The camera pans right.");
    }

    #[test]
    fn orbit_keeps_pivot_on_axis() {
        let anchor: Pose<f64> = Pose::from_rotation_vector(&Vector3::new(0.1, -0.4, 0.2), Vector3::new(3.0, 1.0, -2.0));
        let r: f64 = 6.5;
        let params = TrajectoryParams::new(1.2, 17).with_pivot_depth(r);
        let t = canonical_trajectory(TrajectoryKind::Orbit, &params, &anchor).unwrap();
        let pivot = anchor.transform_point(&Vector3::new(0.0, 0.0, r));
        for p in t.world_to_camera() {
            let c = p.transform_point(&pivot);
            assert!(c[0].abs() < 1e-9 && c[1].abs() < 1e-9);
            assert!((c[2] - r).abs() < 1e-9);
            assert!(p.orthonormality_residual() < 1e-9);
        }
        assert_eq!(describe_motion(&t), "The camera orbits left.");
    }

    #[test]
    fn captions() {
        assert_eq!(describe_motion(&traj(TrajectoryKind::Dolly, 0.4, 5)), "The camera moves forward.");
        assert_eq!(describe_motion(&traj(TrajectoryKind::Truck, 1.0, 5)), "The camera moves right.");
        assert_eq!(describe_motion(&traj(TrajectoryKind::Boom, 1.0, 5)), "The camera moves up.");
        assert_eq!(describe_motion(&traj(TrajectoryKind::Spiral, 1.0, 9)), "The camera orbits while moving forward.");
        assert_eq!(describe_motion(&traj(TrajectoryKind::Pan, 0.1, 3)), "The camera pans slightly right.");
        let tilt = Trajectory {
            kind: TrajectoryKind::Dolly,
            poses: vec![
                Pose::identity(),
                Pose::from_axis_angle(&Vector3::x(), 0.5, Vector3::new(0.0, 0.0, 2.0)),
            ],
            scale_factor: 1.0,
        };
        assert_eq!(describe_motion(&tilt), "The camera moves forward while tilting up.");
        let still = Trajectory {
            kind: TrajectoryKind::Pan,
            poses: vec![Pose::<f64>::identity(); 2],
            scale_factor: 1.0,
        };
        assert_eq!(describe_motion(&still), "The camera remains static.");
    }

    #[test]
    fn adaptive_scale_examples() {
        let t = traj(TrajectoryKind::Truck, 1.0, 4);
        assert_eq!(depth_adaptive_scale(&t, &DepthStats::uniform(10.0), 10.0), t);
        let s = depth_adaptive_scale(&t, &DepthStats::uniform(2.0), 10.0);
        for (a, b) in t.poses.iter().zip(&s.poses) {
            assert!((b.translation().norm() - 0.2 * a.translation().norm()).abs() < 1e-15);
            assert_eq!(a.rotation(), b.rotation());
        }
        assert_eq!(s.kind, TrajectoryKind::Truck);
        assert!((s.scale_factor - 0.2).abs() < 1e-15);
        let far = depth_adaptive_scale(&t, &DepthStats::uniform(1000.0), 10.0);
        assert_eq!(far.scale_factor, 20.0);
    }

    #[test]
    fn interpolation_examples() {
        let t = traj(TrajectoryKind::Pan, FRAC_PI_2, 2);
        assert_eq!(interpolate_pose(&t, 1.0).unwrap(), t.poses[0]);
        assert_eq!(interpolate_pose(&t, 2.0).unwrap(), t.poses[1]);
        let mid = interpolate_pose(&t, 1.5).unwrap();
        assert!((yaw_of(&mid) - FRAC_PI_4).abs() < 1e-12);
        let same = Trajectory {
            kind: TrajectoryKind::Dolly,
            poses: vec![t.poses[1]; 2],
            scale_factor: 1.0,
        };
        let (a, d) = interpolate_pose(&same, 1.5).unwrap().distance(&t.poses[1]);
        assert!(a < 1e-12 && d < 1e-15);
        assert!(matches!(interpolate_pose(&t, 0.5), Err(TrajectoryError::OutOfRange { .. })));
        assert!(interpolate_pose(&t, 2.0 + 1e-9).is_err());
    }

    #[test]
    fn errors() {
        assert!("zoom".parse::<TrajectoryKind>().is_err());
        let p = TrajectoryParams::new(1.0, 1);
        assert!(canonical_trajectory(TrajectoryKind::Dolly, &p, &Pose::<f64>::identity()).is_err());
        let p = TrajectoryParams::new(-1.0, 4);
        assert!(canonical_trajectory(TrajectoryKind::Dolly, &p, &Pose::<f64>::identity()).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let t = depth_adaptive_scale(&traj(TrajectoryKind::Spiral, 1.3, 7), &DepthStats::uniform(3.0), 10.0);
        let text = write_trajectory(&t);
        assert!(text.starts_with("spiral 7 0.3\n"));
        let back: Trajectory<f64> = parse_trajectory(&text).unwrap();
        assert_eq!(back, t);
        assert!(parse_trajectory::<f64>("dolly 3 1\n").is_err());
    }

    #[test]
    fn depth_stats_percentiles() {
        let d = DepthMap::from_fn(10, 1, |x, _| Some(1.0 + x as f64));
        let s = DepthStats::from_depth(&d).unwrap();
        assert_eq!((s.p10_depth, s.median_depth, s.p90_depth), (2.0, 6.0, 9.0));
        assert!(DepthStats::<f64>::from_depth(&DepthMap::empty(3, 3)).is_none());
    }

    proptest! {
        #[test]
        fn all_kinds_emit_rotations(k in 0usize..6, extent in 0.01f64..3.0, n in 2usize..40) {
            let t = traj(TrajectoryKind::ALL[k], extent, n);
            prop_assert_eq!(t.len(), n);
            for p in &t.poses {
                prop_assert!(p.orthonormality_residual() < 1e-9);
            }
        }

        #[test]
        fn scaling_is_homogeneous(k in 0usize..6, median in 0.6f64..90.0) {
            let t = traj(TrajectoryKind::ALL[k], 0.8, 9);
            let a = depth_adaptive_scale(&t, &DepthStats::uniform(median), 10.0);
            let b = depth_adaptive_scale(&t, &DepthStats::uniform(2.0 * median), 10.0);
            for (pa, pb) in a.poses.iter().zip(&b.poses) {
                prop_assert_eq!(pb.translation().norm(), 2.0 * pa.translation().norm());
            }
        }

        #[test]
        fn slerp_stays_unit(k in 0usize..6, t in 1.0f64..9.0) {
            let tr = traj(TrajectoryKind::ALL[k], 1.7, 9);
            let q = interpolate_rotation(&tr, t).unwrap();
            prop_assert!((q.as_ref().norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn caption_survives_resampling(k in 0usize..6, extent in 0.05f64..PI, n in 2usize..60) {
            let t = traj(TrajectoryKind::ALL[k], extent, 13);
            prop_assert_eq!(describe_motion(&resample(&t, n).unwrap()), describe_motion(&t));
        }
    }
}
