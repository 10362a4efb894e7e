use std::path::{Path, PathBuf};

use super::{write_text, IntrinsicsSource, PipelineError, SceneManifest};
use crate::io::text::{write_correspondences, write_poses};
use crate::render::{normal_from_depth, write_sequence, Frame, RenderedSequence};
use crate::synthworld::{
    default_rig, generate_terrain, perturb_capture, simulate_stereo_capture, Perturbation, PerturbationRecord,
    StereoCapture, TerrainParams,
};
use crate::trajectory::{describe_motion, Trajectory, TrajectoryKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub seed: u64,
    /// Square image size in pixels.
    pub size: u32,
    pub baseline: f64,
    /// Correspondence grid stride in the left view.
    pub stride: usize,
    pub terrain: TerrainParams,
    pub perturbation: Option<Perturbation>,
    /// Scene id written into the manifest; defaults to `synth-<seed>`.
    pub id: Option<String>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            size: 256,
            baseline: 0.5,
            stride: 8,
            terrain: TerrainParams::default(),
            perturbation: None,
            id: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub manifest_path: PathBuf,
    /// Ground truth, before any perturbation.
    pub truth: StereoCapture<f64>,
    /// What was written.
    pub observed: StereoCapture<f64>,
    pub record: Option<PerturbationRecord>,
}

fn frame(image: &crate::raster::RgbImage<f64>, depth: &crate::geometry::DepthMap<f64>, pose: crate::camera::Pose<f64>, index: usize) -> Frame<f64> {
    let coverage = depth.raster().map(Option::is_some);
    Frame {
        rgb: image.clone(),
        depth: depth.clone(),
        coverage,
        pose,
        index,
    }
}

/// Simulates an oracle stereo capture and writes it as a two-frame sequence (left, right)
/// plus `scene.txt`, `correspondences.txt` and ground truth under `truth/`.
pub fn write_synthetic_scene(dir: &Path, options: &SynthOptions) -> Result<SynthOutput, PipelineError> {
    let terrain = generate_terrain::<f64>(options.seed, &options.terrain);
    let rig = default_rig(options.size, options.baseline);
    let truth = simulate_stereo_capture(&terrain, &rig, options.stride)?;
    let (observed, record) = match options.perturbation {
        Some(p) => {
            let (c, r) = perturb_capture(&truth, p, options.seed)?;
            (c, Some(r))
        }
        None => (truth.clone(), None),
    };
    let k = &observed.intrinsics;
    let trajectory = Trajectory {
        kind: TrajectoryKind::Truck,
        poses: vec![observed.left_pose.inverse(), observed.right_pose.inverse()],
        scale_factor: 1.0,
    };
    let seq = RenderedSequence {
        frames: vec![
            frame(&observed.left, &observed.left_depth, observed.left_pose, 0),
            frame(&observed.right, &observed.right_depth, observed.right_pose, 1),
        ],
        normals: vec![
            normal_from_depth(&observed.left_depth, k),
            normal_from_depth(&observed.right_depth, k),
        ],
        caption: describe_motion(&trajectory),
        trajectory,
    };
    let layout = write_sequence(dir, &seq, k)?;
    write_text(&dir.join("correspondences.txt"), &write_correspondences(&observed.correspondences))?;
    let truth_dir = dir.join("truth");
    write_text(&truth_dir.join("poses.txt"), &write_poses(&[truth.left_pose, truth.right_pose]))?;
    write_text(&truth_dir.join("relative_pose.txt"), &write_poses(&[truth.relative_pose()]))?;
    write_text(&truth_dir.join("correspondences.txt"), &write_correspondences(&truth.correspondences))?;
    if let Some(r) = &record {
        write_text(&truth_dir.join("perturbation.txt"), &r.to_string())?;
    }
    let rel = |p: PathBuf| p.strip_prefix(dir).map(Path::to_path_buf).unwrap_or(p);
    let manifest = SceneManifest {
        id: options.id.clone().unwrap_or_else(|| format!("synth-{}", options.seed)),
        left: rel(layout.frame(0)),
        right: rel(layout.frame(1)),
        intrinsics: IntrinsicsSource::Pinhole(rel(layout.intrinsics())),
        depth_left: rel(layout.depth(0)),
        depth_right: rel(layout.depth(1)),
        correspondences: "correspondences.txt".into(),
        exclusions: None,
        thresholds: Vec::new(),
    };
    let manifest_path = dir.join("scene.txt");
    write_text(&manifest_path, &manifest.to_text())?;
    Ok(SynthOutput {
        manifest_path,
        truth,
        observed,
        record,
    })
}
