use std::fmt::Write as _;
use std::path::Path;

use super::{read_text, write_text, IntrinsicsSource, PipelineError, SceneManifest};
use crate::camera::format::{parse_cahvor, parse_intrinsics, write_intrinsics};
use crate::camera::{cahvor_to_pinhole, Intrinsics, Pose};
use crate::geometry::{
    align_depth, assign_gaussian_scales, fuse_point_clouds, solve_pnp, Correspondence, DepthAlignment, DepthMap,
    GeometryError, PnpOptions, PointCloud, View,
};
use crate::io::pfm::{read_depth, write_depth_pfm};
use crate::io::ply::write_ply;
use crate::io::text::{format_pose, parse_correspondences};
use crate::io::{read_rgb, IoError};
use crate::raster::RgbImage;

/// Everything a scene manifest points at, decoded.
#[derive(Debug, Clone)]
pub struct SceneInputs {
    pub id: String,
    pub left: RgbImage<f64>,
    pub right: RgbImage<f64>,
    pub intrinsics: Intrinsics<f64>,
    pub depth_left: DepthMap<f64>,
    pub depth_right: DepthMap<f64>,
    pub correspondences: Vec<Correspondence<f64>>,
}

/// Which view's depth the scale/bias regression adjusts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjustView {
    /// `s·d1 + b ≈ d2`; view 1 is rescaled.
    #[default]
    First,
    /// `s·d2 + b ≈ d1`; view 2 is rescaled.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    pub pnp: PnpOptions,
    pub adjust: AdjustView,
    pub fusion_stride: usize,
    /// Baselines below this fraction of the median point depth are degenerate.
    pub min_baseline_ratio: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            pnp: PnpOptions::default(),
            adjust: AdjustView::First,
            fusion_stride: 1,
            min_baseline_ratio: 1e-6,
        }
    }
}

/// A metric scene in the view-1 camera frame.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub id: String,
    pub cloud: PointCloud<f64>,
    /// View-1 camera → view-2 camera.
    pub relative_pose: Pose<f64>,
    pub inliers: usize,
    pub correspondences: usize,
    pub reprojection_rms: f64,
    pub pnp_iterations: usize,
    pub alignment: DepthAlignment<f64>,
    pub depth_left: DepthMap<f64>,
    pub depth_right: DepthMap<f64>,
    pub intrinsics: Intrinsics<f64>,
}

fn require(path: &Path) -> Result<(), PipelineError> {
    if path.exists() {
        Ok(())
    } else {
        Err(PipelineError::MissingInput { path: path.to_path_buf() })
    }
}

fn intrinsics(source: &IntrinsicsSource) -> Result<Intrinsics<f64>, PipelineError> {
    Ok(match source {
        IntrinsicsSource::Pinhole(p) => parse_intrinsics(&read_text(p)?)?,
        IntrinsicsSource::Cahvor(p) => cahvor_to_pinhole(&parse_cahvor(&read_text(p)?)?)?.intrinsics,
    })
}

/// Reads every artifact a scene manifest names; the first missing file is reported.
pub fn load_scene(m: &SceneManifest) -> Result<SceneInputs, PipelineError> {
    let intr_path = match &m.intrinsics {
        IntrinsicsSource::Pinhole(p) | IntrinsicsSource::Cahvor(p) => p,
    };
    for p in [&m.left, &m.right, intr_path, &m.depth_left, &m.depth_right, &m.correspondences] {
        require(p)?;
    }
    let corr_text = read_text(&m.correspondences)?;
    Ok(SceneInputs {
        id: m.id.clone(),
        left: read_rgb(&m.left)?,
        right: read_rgb(&m.right)?,
        intrinsics: intrinsics(&m.intrinsics)?,
        depth_left: read_depth(&m.depth_left)?,
        depth_right: read_depth(&m.depth_right)?,
        correspondences: parse_correspondences(&corr_text).map_err(|e: IoError| e.with_path(&m.correspondences))?,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Back-projects view-1 correspondences, solves PnP for the relative pose, aligns the two
/// depth maps, rescales the chosen view and fuses both views into one cloud with
/// per-point Gaussian scales. The world frame is the view-1 camera frame.
pub fn reconstruct(inputs: &SceneInputs, options: &ReconstructOptions) -> Result<Reconstruction, PipelineError> {
    let k = &inputs.intrinsics;
    for (name, d) in [("left", &inputs.depth_left), ("right", &inputs.depth_right)] {
        if d.width() != k.width as usize || d.height() != k.height as usize {
            return Err(GeometryError::ShapeMismatch(format!(
                "{name} depth {}x{} vs intrinsics {}x{}",
                d.width(),
                d.height(),
                k.width,
                k.height
            ))
            .into());
        }
    }
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    // view-1 depth and, where available, view-2 depth at each match
    let mut depths: Vec<(f64, Option<f64>)> = Vec::new();
    for c in &inputs.correspondences {
        let Some(z1) = inputs.depth_left.sample_inverse_bilinear(&c.p1) else { continue };
        let Ok(p) = k.back_project(&c.p1, z1) else { continue };
        p1.push(p);
        p2.push(c.p2);
        depths.push((z1, inputs.depth_right.sample_inverse_bilinear(&c.p2)));
    }
    let pnp = solve_pnp(&p1, &p2, k, &options.pnp)?;
    let baseline = pnp.pose.translation().norm();
    let scene_depth = median(p1.iter().map(|p| p[2]).collect());
    if !(baseline > options.min_baseline_ratio * scene_depth) {
        return Err(GeometryError::DegenerateConfiguration(format!(
            "baseline {baseline:.3e} m is negligible against scene depth {scene_depth:.3} m; metric scale is unobservable"
        ))
        .into());
    }
    // only matches that survived RANSAC enter the depth regression
    let inlier_pairs = depths
        .iter()
        .zip(&pnp.inliers)
        .filter_map(|(&(z1, z2), &inlier)| Some((z1, z2.filter(|_| inlier)?)));
    let (a, b): (Vec<f64>, Vec<f64>) = inlier_pairs.unzip();
    let (mut depth_left, mut depth_right) = (inputs.depth_left.clone(), inputs.depth_right.clone());
    let alignment = match options.adjust {
        AdjustView::First => {
            let al = align_depth(&a, &b)?;
            depth_left = depth_left.affine(al.scale, al.bias);
            al
        }
        AdjustView::Second => {
            let al = align_depth(&b, &a)?;
            depth_right = depth_right.affine(al.scale, al.bias);
            al
        }
    };
    let identity = Pose::identity();
    let views = [
        View {
            image: &inputs.left,
            depth: &depth_left,
            intrinsics: k,
            world_to_camera: &identity,
        },
        View {
            image: &inputs.right,
            depth: &depth_right,
            intrinsics: k,
            world_to_camera: &pnp.pose,
        },
    ];
    let mut cloud = fuse_point_clouds(&views, options.fusion_stride)?;
    assign_gaussian_scales(&mut cloud, &views);
    Ok(Reconstruction {
        id: inputs.id.clone(),
        cloud,
        relative_pose: pnp.pose,
        inliers: pnp.inlier_count(),
        correspondences: p1.len(),
        reprojection_rms: pnp.reprojection_rms,
        pnp_iterations: pnp.iterations,
        alignment,
        depth_left,
        depth_right,
        intrinsics: *k,
    })
}

/// Loads the manifest's artifacts and reconstructs.
pub fn run_reconstruct(m: &SceneManifest, options: &ReconstructOptions) -> Result<Reconstruction, PipelineError> {
    reconstruct(&load_scene(m)?, options)
}

/// Files written by [`write_reconstruction`], relative to its directory.
pub const RECONSTRUCTION_FILES: [&str; 5] = [
    "reconstruction.txt",
    "cloud.ply",
    "intrinsics.txt",
    "depth_left.pfm",
    "depth_right.pfm",
];

/// Writes the report, fused cloud, intrinsics and both (adjusted) depth maps into `dir`.
pub fn write_reconstruction(dir: &Path, r: &Reconstruction) -> Result<(), PipelineError> {
    let [report, cloud, intr, left, right] = RECONSTRUCTION_FILES.map(|f| dir.join(f));
    write_text(&report, &format_reconstruction(r))?;
    write_text(&cloud, &write_ply(&r.cloud))?;
    write_text(&intr, &write_intrinsics(&r.intrinsics))?;
    write_depth_pfm(&left, &r.depth_left)?;
    write_depth_pfm(&right, &r.depth_right)?;
    Ok(())
}

/// Key/value report of a reconstruction.
pub fn format_reconstruction(r: &Reconstruction) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scene {}", r.id);
    let _ = writeln!(s, "relative_pose {}", format_pose(&r.relative_pose));
    let _ = writeln!(s, "correspondences {}", r.correspondences);
    let _ = writeln!(s, "inliers {}", r.inliers);
    let _ = writeln!(s, "reprojection_rms {:e}", r.reprojection_rms);
    let _ = writeln!(s, "pnp_iterations {}", r.pnp_iterations);
    let _ = writeln!(s, "depth_scale {}", r.alignment.scale);
    let _ = writeln!(s, "depth_bias {}", r.alignment.bias);
    let _ = writeln!(s, "depth_residual_rms {:e}", r.alignment.residual_rms);
    let _ = writeln!(s, "depth_samples {}", r.alignment.sample_count);
    let _ = writeln!(s, "points {}", r.cloud.len());
    s
}
