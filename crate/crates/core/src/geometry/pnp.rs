//! Perspective-n-point: RANSAC over six-point DLT hypotheses, then
//! Levenberg–Marquardt on the reprojection error with a left-multiplied
//! 6-parameter rigid-motion update.

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix3x4, SymmetricEigen, Vector2, Vector3, Vector6};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GeometryError;
use crate::camera::{Intrinsics, Pixel, Pose};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Points per RANSAC hypothesis.
pub const MINIMAL_SAMPLE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnpOptions {
    /// Inlier threshold on the reprojection residual (pixels).
    pub ransac_threshold: f64,
    /// Cap on refinement iterations.
    pub max_iterations: usize,
    /// Cap on RANSAC hypotheses.
    pub max_hypotheses: usize,
    /// Early-exit confidence for adaptive hypothesis counting.
    pub confidence: f64,
    pub seed: u64,
}

impl Default for PnpOptions {
    fn default() -> Self {
        Self {
            ransac_threshold: 2.0,
            max_iterations: 100,
            max_hypotheses: 1000,
            confidence: 0.9999,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnpResult<T: Real> {
    /// Maps view-1 camera coordinates into view-2 camera coordinates.
    pub pose: Pose<T>,
    pub inliers: Vec<bool>,
    /// RMS reprojection error over inliers (pixels).
    pub reprojection_rms: T,
    /// Refinement iterations summed over all refinement rounds.
    pub iterations: usize,
    /// Summed squared residual after each accepted refinement step, per round.
    pub cost_log: Vec<Vec<T>>,
    pub hypotheses: usize,
}

impl<T: Real> PnpResult<T> {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|b| **b).count()
    }
}

/// Per-point reprojection residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct ReprojectionResiduals<T: Real> {
    /// `None` for points that land behind the camera.
    pub residuals: Vec<Option<T>>,
    pub rms: T,
    pub behind_camera: usize,
}

/// `‖p₂ᵢ − π(K[R|t]P₁ᵢ)‖` for every point; distortion applied when the intrinsics carry it.
pub fn reprojection_residuals<T: Real>(
    pose: &Pose<T>,
    intr: &Intrinsics<T>,
    points3d: &[Vector3<T>],
    pixels2: &[Pixel<T>],
) -> ReprojectionResiduals<T> {
    let residuals: Vec<Option<T>> = points3d
        .iter()
        .zip(pixels2)
        .map(|(p, obs)| {
            intr.project_distorted(&pose.transform_point(p))
                .ok()
                .map(|px| px.distance(obs))
        })
        .collect();
    let mut sum = T::zero();
    let mut n = 0usize;
    for r in residuals.iter().flatten() {
        if r.is_finite() {
            sum += *r * *r;
            n += 1;
        }
    }
    let behind_camera = residuals.iter().filter(|r| r.is_none()).count();
    let rms = if n == 0 {
        T::zero()
    } else {
        (sum / from_usize(n)).sqrt()
    };
    ReprojectionResiduals {
        residuals,
        rms,
        behind_camera,
    }
}

/// Estimates the pose mapping view-1 camera points onto view-2 pixels.
pub fn solve_pnp<T: Real>(
    points3d: &[Vector3<T>],
    pixels2: &[Pixel<T>],
    intr: &Intrinsics<T>,
    options: &PnpOptions,
) -> Result<PnpResult<T>, GeometryError> {
    if points3d.len() != pixels2.len() {
        return Err(GeometryError::LengthMismatch {
            left: points3d.len(),
            right: pixels2.len(),
        });
    }
    let n = points3d.len();
    if n < MINIMAL_SAMPLE {
        return Err(GeometryError::TooFewPoints {
            needed: MINIMAL_SAMPLE,
            got: n,
        });
    }
    if points3d.iter().any(|p| !p.iter().all(|x| x.is_finite()))
        || pixels2.iter().any(|p| !p.is_finite())
    {
        return Err(GeometryError::NonFinite);
    }
    let observed: Vec<Pixel<T>> = pixels2
        .iter()
        .map(|p| intr.undistort_pixel(p))
        .collect::<Result<_, _>>()?;
    let normalized: Vec<Vector2<T>> = observed
        .iter()
        .map(|p| Vector2::new((p.u - intr.cx) / intr.fx, (p.v - intr.cy) / intr.fy))
        .collect();
    check_configuration(points3d, &normalized)?;

    let threshold: T = lit(options.ransac_threshold);
    let problem = Problem {
        points: points3d,
        observed: &observed,
        intr,
    };

    let mut best: Option<Hypothesis<T>> = None;
    let mut hypotheses = 0usize;
    let consider = |pose: Pose<T>, best: &mut Option<Hypothesis<T>>| {
        let h = problem.score(pose, threshold);
        let better = match best {
            None => true,
            Some(b) => h.inliers > b.inliers || (h.inliers == b.inliers && h.score < b.score),
        };
        if better {
            *best = Some(h);
        }
    };

    let all: Vec<usize> = (0..n).collect();
    if let Some(pose) = dlt_pose(points3d, &normalized, &all) {
        consider(pose, &mut best);
    }
    hypotheses += 1;

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let conf = options.confidence.clamp(0.0, 1.0 - 1e-12);
    while hypotheses < options.max_hypotheses.max(1) {
        if let Some(b) = &best {
            let w = b.inliers as f64 / n as f64;
            let p_good = w.powi(MINIMAL_SAMPLE as i32);
            let needed = if p_good >= 1.0 {
                0.0
            } else if p_good <= 0.0 {
                f64::INFINITY
            } else {
                (1.0 - conf).ln() / (1.0 - p_good).ln()
            };
            if (hypotheses as f64) >= needed {
                break;
            }
        }
        hypotheses += 1;
        let idx = sample(&mut rng, n, MINIMAL_SAMPLE).into_vec();
        if let Some(pose) = dlt_pose(points3d, &normalized, &idx) {
            consider(pose, &mut best);
        }
    }

    let best = best.ok_or(GeometryError::DegenerateConfiguration(
        "no hypothesis could be formed".into(),
    ))?;
    if best.inliers < MINIMAL_SAMPLE {
        return Err(GeometryError::NoConvergence(format!(
            "best hypothesis has {} inliers",
            best.inliers
        )));
    }

    let mut pose = best.pose;
    let mut mask = problem.inlier_mask(&pose, threshold);
    let mut iterations = 0usize;
    let mut cost_log = Vec::new();
    for _round in 0..8 {
        let active: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        if active.len() < MINIMAL_SAMPLE {
            return Err(GeometryError::NoConvergence(format!(
                "only {} inliers after refinement",
                active.len()
            )));
        }
        let out = problem.refine(pose, &active, options.max_iterations);
        iterations += out.iterations;
        cost_log.push(out.costs);
        pose = out.pose;
        let next = problem.inlier_mask(&pose, threshold);
        if next == mask {
            break;
        }
        mask = next;
    }

    let mut sum = T::zero();
    let mut count = 0usize;
    for i in (0..n).filter(|&i| mask[i]) {
        if let Some(r2) = problem.residual_sq(&pose, i) {
            sum += r2;
            count += 1;
        }
    }
    if count < MINIMAL_SAMPLE {
        return Err(GeometryError::NoConvergence("inliers fell behind the camera".into()));
    }
    let rms = (sum / from_usize(count)).sqrt();
    if !rms.is_finite() || rms > threshold {
        return Err(GeometryError::NoConvergence(format!(
            "refined rms {} px exceeds threshold",
            to_f64(rms)
        )));
    }
    Ok(PnpResult {
        pose,
        inliers: mask,
        reprojection_rms: rms,
        iterations,
        cost_log,
        hypotheses,
    })
}

struct Hypothesis<T: Real> {
    pose: Pose<T>,
    inliers: usize,
    score: T,
}

struct Problem<'a, T: Real> {
    points: &'a [Vector3<T>],
    observed: &'a [Pixel<T>],
    intr: &'a Intrinsics<T>,
}

struct Refined<T: Real> {
    pose: Pose<T>,
    iterations: usize,
    costs: Vec<T>,
}

impl<T: Real> Problem<'_, T> {
    fn residual_sq(&self, pose: &Pose<T>, i: usize) -> Option<T> {
        let p = pose.transform_point(&self.points[i]);
        self.intr
            .project(&p)
            .ok()
            .map(|px| px.distance_squared(&self.observed[i]))
    }

    fn score(&self, pose: Pose<T>, threshold: T) -> Hypothesis<T> {
        let t2 = threshold * threshold;
        let mut inliers = 0;
        let mut score = T::zero();
        for i in 0..self.points.len() {
            match self.residual_sq(&pose, i) {
                Some(r2) if r2 < t2 => {
                    inliers += 1;
                    score += r2;
                }
                _ => score += t2,
            }
        }
        Hypothesis {
            pose,
            inliers,
            score,
        }
    }

    fn inlier_mask(&self, pose: &Pose<T>, threshold: T) -> Vec<bool> {
        let t2 = threshold * threshold;
        (0..self.points.len())
            .map(|i| matches!(self.residual_sq(pose, i), Some(r2) if r2 < t2))
            .collect()
    }

    /// Sum of squared residuals over `active`; `None` if any point is behind the camera.
    fn cost(&self, pose: &Pose<T>, active: &[usize]) -> Option<T> {
        let mut c = T::zero();
        for &i in active {
            c += self.residual_sq(pose, i)?;
        }
        Some(c)
    }

    fn refine(&self, start: Pose<T>, active_in: &[usize], max_iterations: usize) -> Refined<T> {
        let intr = self.intr;
        let mut pose = start;
        let mut costs = Vec::new();
        let mut lambda: T = lit(1e-6);
        let mut iterations = 0;
        let rel_tol: T = lit(1e-12);
        let mut active: Vec<usize> = active_in.to_vec();

        while iterations < max_iterations {
            // behind-camera points leave the active set for this iteration
            active.retain(|&i| pose.transform_point(&self.points[i])[2] > T::zero());
            if active.len() < MINIMAL_SAMPLE {
                break;
            }
            let mut h = nalgebra::Matrix6::<T>::zeros();
            let mut g = Vector6::<T>::zeros();
            let mut cost = T::zero();
            for &i in &active {
                let p = pose.transform_point(&self.points[i]);
                let iz = T::one() / p[2];
                let Ok(px) = intr.project(&p) else { continue };
                let r = Vector2::new(px.u - self.observed[i].u, px.v - self.observed[i].v);
                // same expression as `residual_sq` so logged costs compare exactly
                cost += px.distance_squared(&self.observed[i]);
                let jp = nalgebra::Matrix2x3::new(
                    intr.fx * iz,
                    T::zero(),
                    -intr.fx * p[0] * iz * iz,
                    T::zero(),
                    intr.fy * iz,
                    -intr.fy * p[1] * iz * iz,
                );
                // d(p)/d(ω, v) for p ↦ exp(ω)p + v at ω = 0
                let mut dp = nalgebra::Matrix3x6::<T>::zeros();
                dp.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-skew(&p)));
                dp.fixed_view_mut::<3, 3>(0, 3).copy_from(&Matrix3::identity());
                let j = jp * dp;
                h += j.transpose() * j;
                g += j.transpose() * r;
            }
            if costs.is_empty() {
                costs.push(cost);
            }
            iterations += 1;
            if cost == T::zero() {
                break;
            }
            let mut accepted = false;
            let mut converged = false;
            for _ in 0..32 {
                let mut damped = h;
                for k in 0..6 {
                    damped[(k, k)] += lambda * (h[(k, k)] + lit::<T>(1e-12));
                }
                let Some(step) = damped.cholesky().map(|c| c.solve(&(-g))) else {
                    lambda *= lit(10.0);
                    continue;
                };
                if step.norm() <= lit::<T>(1e-15) * (T::one() + pose.translation().norm()) {
                    converged = true;
                    break;
                }
                let omega = Vector3::new(step[0], step[1], step[2]);
                let dv = Vector3::new(step[3], step[4], step[5]);
                let delta = Pose::from_rotation_vector(&omega, dv);
                let candidate = delta.compose(&pose);
                match self.cost(&candidate, &active) {
                    Some(c) if c < cost => {
                        let decrease = cost - c;
                        pose = candidate;
                        costs.push(c);
                        lambda = (lambda * lit(0.1)).max(lit(1e-15));
                        accepted = true;
                        converged = decrease <= rel_tol * cost;
                        break;
                    }
                    _ => lambda *= lit(10.0),
                }
            }
            if !accepted || converged {
                break;
            }
        }
        // keep the rotation on SO(3) after many compositions
        let pose = Pose::from_nearest_rotation(pose.rotation(), *pose.translation());
        Refined {
            pose,
            iterations,
            costs,
        }
    }
}

fn skew<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    Matrix3::new(
        T::zero(),
        -v[2],
        v[1],
        v[2],
        T::zero(),
        -v[0],
        -v[1],
        v[0],
        T::zero(),
    )
}

/// Linear pose from normalized image coordinates. Returns `None` when the
/// subset does not determine a unique projection matrix.
fn dlt_pose<T: Real>(points: &[Vector3<T>], normalized: &[Vector2<T>], idx: &[usize]) -> Option<Pose<T>> {
    let m = idx.len();
    let mf = from_usize::<T>(m);
    let centroid = idx.iter().fold(Vector3::zeros(), |a, &i| a + points[i]) / mf;
    let spread = idx
        .iter()
        .fold(T::zero(), |a, &i| a + (points[i] - centroid).norm())
        / mf;
    if !(spread > T::zero()) {
        return None;
    }
    let s = lit::<T>(3.0f64.sqrt()) / spread;

    let mut a = DMatrix::<T>::zeros(2 * m.max(6), 12);
    for (row, &i) in idx.iter().enumerate() {
        let x = (points[i] - centroid) * s;
        let (u, v) = (normalized[i][0], normalized[i][1]);
        let xh = [x[0], x[1], x[2], T::one()];
        for k in 0..4 {
            a[(2 * row, k)] = xh[k];
            a[(2 * row, 8 + k)] = -u * xh[k];
            a[(2 * row + 1, 4 + k)] = xh[k];
            a[(2 * row + 1, 8 + k)] = -v * xh[k];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&x, &y| sv[x].partial_cmp(&sv[y]).unwrap_or(std::cmp::Ordering::Equal));
    let (smallest, second) = (order[0], order[1]);
    let largest = order[sv.len() - 1];
    if !(sv[second] > sv[largest] * lit(1e-9)) {
        return None;
    }
    let null = v_t.row(smallest);
    let mut p = Matrix3x4::<T>::zeros();
    for r in 0..3 {
        for c in 0..4 {
            p[(r, c)] = null[4 * r + c];
        }
    }
    // undo the point normalization: P_orig = P_n · [sI, −s·c; 0, 1]
    let mut norm = nalgebra::Matrix4::<T>::identity() * s;
    norm[(3, 3)] = T::one();
    let shift = -centroid * s;
    for r in 0..3 {
        norm[(r, 3)] = shift[r];
    }
    let mut p = p * norm;
    let mut left = p.fixed_view::<3, 3>(0, 0).into_owned();
    if left.determinant() < T::zero() {
        p = -p;
        left = -left;
    }
    let svd = left.svd(true, true);
    let scale = svd.singular_values.sum() / lit(3.0);
    if !(scale > T::zero()) || !scale.is_finite() {
        return None;
    }
    let r = crate::camera::nearest_rotation(&left);
    let t = p.column(3).into_owned() / scale;
    if !t.iter().all(|x| x.is_finite()) {
        return None;
    }
    Some(Pose::from_parts_unchecked(r, t))
}

fn check_configuration<T: Real>(points: &[Vector3<T>], normalized: &[Vector2<T>]) -> Result<(), GeometryError> {
    let n = from_usize::<T>(points.len());
    let c3 = points.iter().fold(Vector3::zeros(), |a, p| a + p) / n;
    let cov3 = points
        .iter()
        .fold(Matrix3::zeros(), |a, p| a + (p - c3) * (p - c3).transpose())
        / n;
    let mut e3: Vec<T> = SymmetricEigen::new(cov3).eigenvalues.iter().copied().collect();
    e3.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let rel: T = lit(1e-12);
    if !(e3[1] > e3[0] * rel) {
        return Err(GeometryError::DegenerateConfiguration(
            "3D points are collinear".into(),
        ));
    }
    let c2 = normalized.iter().fold(Vector2::zeros(), |a, p| a + p) / n;
    let cov2 = normalized
        .iter()
        .fold(Matrix2::zeros(), |a, p| a + (p - c2) * (p - c2).transpose())
        / n;
    let e2 = SymmetricEigen::new(cov2).eigenvalues;
    let (lo, hi) = if e2[0] < e2[1] { (e2[0], e2[1]) } else { (e2[1], e2[0]) };
    if !(lo > hi * rel) {
        return Err(GeometryError::DegenerateConfiguration(
            "image points are collinear (points coplanar with the camera center)".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn intr() -> Intrinsics<f64> {
        Intrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap()
    }

    fn scene(seed: u64, n: usize) -> (Vec<Vector3<f64>>, Pose<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n)
            .map(|_| {
                Vector3::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(4.0..12.0),
                )
            })
            .collect();
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let pose = Pose::from_axis_angle(&axis, 5f64.to_radians(), Vector3::new(-0.2, 0.0, 0.0));
        (pts, pose)
    }

    fn project_all(pose: &Pose<f64>, pts: &[Vector3<f64>]) -> Vec<Pixel<f64>> {
        pts.iter()
            .map(|p| intr().project(&pose.transform_point(p)).unwrap())
            .collect()
    }

    #[test]
    fn identity_pose_exact() {
        let (pts, _) = scene(1, 50);
        let px = project_all(&Pose::identity(), &pts);
        let out = solve_pnp(&pts, &px, &intr(), &PnpOptions::default()).unwrap();
        assert!(out.reprojection_rms < 1e-9);
        assert_eq!(out.inlier_count(), 50);
        let (rot, tr) = out.pose.distance(&Pose::identity());
        assert!(rot < 1e-9 && tr < 1e-9, "{rot} {tr}");
    }

    #[test]
    fn recovers_known_pose() {
        for seed in 0..5 {
            let (pts, gt) = scene(seed, 200);
            let px = project_all(&gt, &pts);
            let out = solve_pnp(&pts, &px, &intr(), &PnpOptions { seed, ..Default::default() }).unwrap();
            let (rot, tr) = out.pose.distance(&gt);
            assert!(rot < 1e-6 && tr < 1e-6, "seed {seed}: {rot} {tr}");
            assert!(out.reprojection_rms < 1e-9);
            for round in &out.cost_log {
                for w in round.windows(2) {
                    assert!(w[1] <= w[0], "{round:?}");
                }
            }
        }
    }

    #[test]
    fn rejects_planted_outliers() {
        let (pts, gt) = scene(42, 200);
        let mut px = project_all(&gt, &pts);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let planted: Vec<usize> = sample(&mut rng, 200, 40).into_vec();
        for &i in &planted {
            px[i] = Pixel::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0));
        }
        let out = solve_pnp(
            &pts,
            &px,
            &intr(),
            &PnpOptions {
                ransac_threshold: 2.0,
                seed: 3,
                ..Default::default()
            },
        )
        .unwrap();
        for &i in &planted {
            assert!(!out.inliers[i], "outlier {i} kept");
        }
        let (rot, tr) = out.pose.distance(&gt);
        assert!(rot < 1e-4 && tr < 1e-4);
    }

    #[test]
    fn deterministic_given_seed() {
        let (pts, gt) = scene(9, 100);
        let mut px = project_all(&gt, &pts);
        for p in px.iter_mut().step_by(5) {
            p.u += 37.0;
        }
        let opts = PnpOptions { seed: 77, ..Default::default() };
        let a = solve_pnp(&pts, &px, &intr(), &opts).unwrap();
        let b = solve_pnp(&pts, &px, &intr(), &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn error_cases() {
        let (pts, gt) = scene(2, 5);
        let px = project_all(&gt, &pts);
        assert!(matches!(
            solve_pnp(&pts, &px, &intr(), &PnpOptions::default()),
            Err(GeometryError::TooFewPoints { .. })
        ));

        let line: Vec<Vector3<f64>> = (0..10).map(|i| Vector3::new(i as f64 * 0.1, 0.0, 5.0 + i as f64)).collect();
        let px = project_all(&Pose::identity(), &line);
        assert!(matches!(
            solve_pnp(&line, &px, &intr(), &PnpOptions::default()),
            Err(GeometryError::DegenerateConfiguration(_))
        ));

        // plane y = 0 contains the camera center: every image point lands on v = cy
        let plane: Vec<Vector3<f64>> = (0..20)
            .map(|i| Vector3::new((i % 5) as f64 - 2.0, 0.0, 4.0 + (i / 5) as f64))
            .collect();
        let px = project_all(&Pose::identity(), &plane);
        assert!(matches!(
            solve_pnp(&plane, &px, &intr(), &PnpOptions::default()),
            Err(GeometryError::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn residuals_match_scalar_recomputation() {
        let (pts, gt) = scene(12, 30);
        let px = project_all(&gt, &pts);
        let zero = reprojection_residuals(&gt, &intr(), &pts, &px);
        assert!(zero.residuals.iter().all(|r| r.unwrap() < 1e-12));

        let perturbed = Pose::from_rotation_vector(&Vector3::new(0.01, -0.02, 0.005), Vector3::new(0.05, 0.0, -0.1))
            .compose(&gt);
        let out = reprojection_residuals(&perturbed, &intr(), &pts, &px);
        // independent scalar path
        let k = intr();
        let r = perturbed.rotation();
        let t = perturbed.translation();
        let mut sum = 0.0;
        for (p, o) in pts.iter().zip(&px) {
            let x = r[(0, 0)] * p[0] + r[(0, 1)] * p[1] + r[(0, 2)] * p[2] + t[0];
            let y = r[(1, 0)] * p[0] + r[(1, 1)] * p[1] + r[(1, 2)] * p[2] + t[1];
            let z = r[(2, 0)] * p[0] + r[(2, 1)] * p[1] + r[(2, 2)] * p[2] + t[2];
            let du = k.fx * x / z + k.cx - o.u;
            let dv = k.fy * y / z + k.cy - o.v;
            sum += du * du + dv * dv;
        }
        let rms = (sum / pts.len() as f64).sqrt();
        assert!((out.rms - rms).abs() < 1e-9);
    }

    #[test]
    fn one_pixel_baseline_shift() {
        // fronto-parallel points at z = 5, shifting t_x by z/fx moves every projection 1 px
        let k = intr();
        let pts: Vec<Vector3<f64>> = (0..25)
            .map(|i| Vector3::new((i % 5) as f64 * 0.3 - 0.6, (i / 5) as f64 * 0.3 - 0.6, 5.0))
            .collect();
        let px = project_all(&Pose::identity(), &pts);
        let shifted = Pose::from_translation(Vector3::new(5.0 / k.fx, 0.0, 0.0));
        let out = reprojection_residuals(&shifted, &k, &pts, &px);
        for r in out.residuals {
            assert!((r.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn behind_camera_flagged() {
        let pts = vec![Vector3::new(0.0, 0.0, -1.0), Vector3::new(0.0, 0.0, 2.0)];
        let px = vec![Pixel::new(320.0, 240.0); 2];
        let out = reprojection_residuals(&Pose::identity(), &intr(), &pts, &px);
        assert_eq!(out.behind_camera, 1);
        assert_eq!(out.residuals[0], None);
        assert_eq!(out.rms, 0.0);
    }
}
