use nalgebra::Vector3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stereoforge::camera::{Intrinsics, Pixel, Pose};
use stereoforge::consistency::{psnr, ssim, warp_error, CrossTarget, FrameGeometry, PairingPolicy, SsimOptions};
use stereoforge::geometry::{align_depth, fuse_point_clouds, solve_pnp, CloudPoint, DepthMap, PnpOptions, PointCloud, View};
use stereoforge::imgfilter::{filter_images, LoadedImage, Thresholds};
use stereoforge::raster::{Raster, RgbImage};
use stereoforge::render::{normal_from_depth, render_view_sequential, RenderOptions, Splat};
use stereoforge::synthworld::{generate_terrain, TerrainParams};
use stereoforge::trajectory::{canonical_trajectory, interpolate_pose, TrajectoryKind, TrajectoryParams};

fn intr() -> Intrinsics<f64> {
    Intrinsics::new(90.0, 85.0, 31.5, 23.5, 64, 48).unwrap()
}

fn pose_strategy() -> impl Strategy<Value = Pose<f64>> {
    (prop::array::uniform3(-1.0f64..1.0), 0.0f64..3.1, prop::array::uniform3(-3.0f64..3.0)).prop_filter_map(
        "axis too short",
        |(a, angle, t)| {
            let axis = Vector3::from(a);
            (axis.norm() > 0.1).then(|| Pose::from_axis_angle(&axis.normalize(), angle, Vector3::from(t)))
        },
    )
}

fn image(seed: u64, w: usize, h: usize) -> RgbImage<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Raster::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()])
}

fn pose_close(a: &Pose<f64>, b: &Pose<f64>, tol: f64) -> bool {
    (a.rotation() - b.rotation()).abs().max() < tol && (a.translation() - b.translation()).abs().max() < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn project_inverts_back_project(u in 0.0f64..63.0, v in 0.0f64..47.0, d in 0.01f64..500.0) {
        let k = intr();
        let px = Pixel::new(u, v);
        let p = k.back_project(&px, d).unwrap();
        prop_assert!((p.z - d).abs() < 1e-12 * d.max(1.0));
        let back = k.project(&p).unwrap();
        prop_assert!(back.distance_squared(&px).sqrt() < 1e-9);
    }

    #[test]
    fn poses_form_a_group(a in pose_strategy(), b in pose_strategy(), c in pose_strategy()) {
        let id = Pose::identity();
        prop_assert!(pose_close(&a.compose(&id), &a, 1e-12));
        prop_assert!(pose_close(&a.compose(&a.inverse()), &id, 1e-12));
        prop_assert!(pose_close(&a.compose(&b).compose(&c), &a.compose(&b.compose(&c)), 1e-12));
        prop_assert!(a.compose(&b).orthonormality_residual() < 1e-12);
    }

    #[test]
    fn depth_alignment_is_affine_equivariant(seed in 0u64..10_000, a in 0.05f64..20.0, c in -10.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d1: Vec<f64> = (0..64).map(|_| rng.random_range(0.5..40.0)).collect();
        let d2: Vec<f64> = d1.iter().map(|d| 1.3 * d - 0.7 + rng.random_range(-2.0..2.0)).collect();
        let base = align_depth(&d1, &d2).unwrap();
        let moved = align_depth(&d1, &d2.iter().map(|d| a * d + c).collect::<Vec<_>>()).unwrap();
        let (ws, wb) = (a * base.scale, a * base.bias + c);
        prop_assert!((moved.scale - ws).abs() <= 1e-9 * (1.0 + ws.abs()));
        prop_assert!((moved.bias - wb).abs() <= 1e-9 * (1.0 + wb.abs()));
    }

    #[test]
    fn noiseless_pnp_is_exact_and_refinement_descends(seed in 0u64..10_000, truth in pose_strategy()) {
        let k = Intrinsics::new(400.0, 400.0, 319.5, 239.5, 640, 480).unwrap();
        let truth = Pose::from_axis_angle(&Vector3::y(), 0.2 * truth.rotation_angle() / 3.1, truth.translation() * 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut pts, mut px) = (Vec::new(), Vec::new());
        while pts.len() < 60 {
            let p = Vector3::new(rng.random_range(-4.0..4.0), rng.random_range(-3.0..3.0), rng.random_range(4.0..20.0));
            let q = truth.transform_point(&p);
            if q.z > 0.5 {
                pts.push(p);
                px.push(Pixel::new(k.fx * q.x / q.z + k.cx, k.fy * q.y / q.z + k.cy));
            }
        }
        let r = solve_pnp(&pts, &px, &k, &PnpOptions { seed, ..PnpOptions::default() }).unwrap();
        prop_assert!(r.reprojection_rms < 1e-9, "rms {}", r.reprojection_rms);
        for round in &r.cost_log {
            for w in round.windows(2) {
                prop_assert!(w[1] <= w[0], "cost rose {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn fused_points_reproject_to_their_pixels(seed in 0u64..1000, pose in pose_strategy(), stride in 1usize..4) {
        let k = intr();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let depth = DepthMap::from_fn(64, 48, |_, _| (rng.random::<f64>() > 0.2).then(|| rng.random_range(0.5..30.0)));
        let img = image(seed, 64, 48);
        let views = [View { image: &img, depth: &depth, intrinsics: &k, world_to_camera: &pose }];
        let cloud = fuse_point_clouds(&views, stride).unwrap();
        prop_assert!(!cloud.is_empty());
        for p in &cloud.points {
            let back = k.project(&pose.transform_point(&p.position)).unwrap();
            prop_assert!(back.distance_squared(&p.source_pixel).sqrt() < 1e-9);
        }
    }

    #[test]
    fn raising_thresholds_never_rescues_an_image(seed in 0u64..200, var in 0.0f64..50.0, lap in 0.0f64..400.0, dv in 0.0f64..100.0, dl in 0.0f64..500.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let images: Vec<LoadedImage> = (0..6)
            .map(|i| {
                let spread = rng.random_range(0u8..60);
                let smooth = rng.random_range(1usize..6);
                let base: [u8; 3] = [rng.random(), rng.random(), rng.random()];
                let image = Raster::from_fn(80, 72, |x, y| {
                    let t = (((x / smooth) * 7 + (y / smooth) * 13) % 61) as u8;
                    base.map(|b| b.wrapping_add(t % spread.max(1)))
                });
                LoadedImage { id: format!("img{i}"), image, file_bytes: 10_000 }
            })
            .collect();
        let lo = Thresholds { var_threshold: var, lap_var_threshold: lap, ..Thresholds::default() };
        let hi = Thresholds { var_threshold: var + dv, lap_var_threshold: lap + dl, ..lo };
        let a = filter_images(images.clone(), &lo);
        let b = filter_images(images, &hi);
        for (ra, rb) in a.iter().zip(&b) {
            prop_assert!(ra.kept() || !rb.kept(), "{} rejected at {:?} but kept when stricter", ra.image_id, ra.failing_gate());
        }
    }

    #[test]
    fn rendering_ignores_point_order_and_keeps_the_nearest(seed in 0u64..1000, radius in 0.5f64..2.5) {
        let k = Intrinsics::new(20.0, 20.0, 7.5, 5.5, 16, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<CloudPoint<f64>> = (0..40)
            .map(|i| {
                let z = rng.random_range(1.0..5.0);
                // coarse depths force exact ties between points
                let z = (z * 4.0f64).round() / 4.0;
                CloudPoint {
                    position: Vector3::new(rng.random_range(-2.0..2.0), rng.random_range(-1.5..1.5), z),
                    color: [rng.random(), rng.random(), rng.random()],
                    view_id: i % 2,
                    source_pixel: Pixel::new(0.0, 0.0),
                    cam_depth: z,
                    scale: None,
                }
            })
            .collect();
        let opts = RenderOptions { splat: Splat::Fixed(radius), ..RenderOptions::default() };
        let cloud = PointCloud { points: points.clone() };
        let a = render_view_sequential(&cloud, &Pose::identity(), &k, &opts).unwrap();
        let mut shuffled = points.clone();
        shuffled.reverse();
        shuffled.rotate_left(seed as usize % 40);
        let b = render_view_sequential(&PointCloud { points: shuffled }, &Pose::identity(), &k, &opts).unwrap();
        prop_assert_eq!(&a, &b);
        // brute force: the nearest point covering the pixel, where a splat covers the pixel
        // holding its projection and every centre within radius - 0.5 of it
        for y in 0..12 {
            for x in 0..16 {
                let want = points
                    .iter()
                    .filter_map(|p| {
                        let q = k.project(&p.position).ok()?;
                        let (du, dv) = (q.u - x as f64, q.v - y as f64);
                        let reach = radius - 0.5;
                        let home = (q.u + 0.5).floor() == x as f64 && (q.v + 0.5).floor() == y as f64;
                        let disc = reach > 0.0 && du * du + dv * dv <= reach * reach;
                        (home || disc).then_some(p.position.z)
                    })
                    .fold(None, |m: Option<f64>, z| Some(m.map_or(z, |m| m.min(z))));
                prop_assert_eq!(a.depth.get(x, y), want, "pixel ({}, {})", x, y);
            }
        }
    }

    #[test]
    fn normals_are_unit_length(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05), rng.random_range(2.0..9.0));
        let depth = DepthMap::from_fn(64, 48, |x, y| {
            let wobble = 0.1 * ((x as f64 * 0.3).sin() + (y as f64 * 0.2).cos());
            Some(c + a * x as f64 + b * y as f64 + wobble)
        });
        let n = normal_from_depth(&depth, &intr());
        for v in n.pixels().iter().flatten() {
            prop_assert!((v.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn image_metrics_are_symmetric(s1 in 0u64..1000, s2 in 0u64..1000) {
        let (a, b) = (image(s1, 24, 20), image(s2, 24, 20));
        prop_assert_eq!(psnr(&a, &b, 1.0).unwrap(), psnr(&b, &a, 1.0).unwrap());
        let o = SsimOptions::default();
        let (x, y) = (ssim(&a, &b, &o).unwrap(), ssim(&b, &a, &o).unwrap());
        prop_assert!((x - y).abs() < 1e-12);
        prop_assert!(ssim(&a, &a, &o).unwrap() == 1.0);
    }

    #[test]
    fn warp_values_are_non_negative(seed in 0u64..1000, shift in 0.0f64..3.0) {
        let k = intr();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poses: Vec<Pose<f64>> = (0..3)
            .map(|i| Pose::from_axis_angle(&Vector3::y(), 0.02 * i as f64, Vector3::new(0.1 * i as f64, 0.0, 0.0)))
            .collect();
        let depths: Vec<DepthMap<f64>> = (0..3)
            .map(|_| DepthMap::from_fn(64, 48, |_, _| Some(rng.random_range(4.0..6.0))))
            .collect();
        let frames: Vec<FrameGeometry<f64>> = depths
            .iter()
            .zip(&poses)
            .map(|(d, p)| {
                let g = FrameGeometry::from_depth(d, &k, p, 8);
                let grid = g.grid.iter().map(|q| Pixel::new(q.u + shift, q.v)).collect();
                FrameGeometry::new(g.points_cam, grid, k, *p).unwrap()
            })
            .collect();
        let r = warp_error(&frames, PairingPolicy::AllPairs, CrossTarget::RoundTrip(&depths)).unwrap();
        prop_assert!(r.self_avg >= 0.0 && r.cross_avg >= 0.0 && r.l2d >= 0.0);
        prop_assert!(r.pair_errors.iter().all(|p| p.value.mean_sq >= 0.0));
        prop_assert_eq!(r.self_avg == 0.0, shift == 0.0);
    }

    #[test]
    fn trajectory_keys_are_reproduced_exactly(kind in 0usize..6, extent in 0.05f64..2.0, n in 2usize..30) {
        let kind = TrajectoryKind::ALL[kind];
        let t = canonical_trajectory(kind, &TrajectoryParams::new(extent, n), &Pose::identity()).unwrap();
        for (i, p) in t.poses.iter().enumerate() {
            prop_assert!(p.orthonormality_residual() < 1e-9);
            prop_assert_eq!(interpolate_pose(&t, (i + 1) as f64).unwrap(), *p);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn terrain_is_a_pure_function_of_seed(seed in 0u64..1_000_000) {
        let params = TerrainParams { resolution: 65, ..TerrainParams::default() };
        let a = generate_terrain::<f64>(seed, &params);
        let b = generate_terrain::<f64>(seed, &params);
        prop_assert_eq!(a, b);
    }
}
