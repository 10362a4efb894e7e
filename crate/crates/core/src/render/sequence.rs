use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{normal_from_depth, render_view, Frame, NormalMap, RenderError, RenderOptions};
use crate::camera::format::{parse_intrinsics, write_intrinsics};
use crate::camera::{Intrinsics, Pose};
use crate::geometry::{DepthMap, PointCloud};
use crate::io::pfm::{read_depth, write_depth_pfm, write_normals_pfm};
use crate::io::{read_rgb, write_png, IoError};
use crate::raster::RgbImage;
use crate::scalar::Real;
use crate::trajectory::{describe_motion, parse_trajectory, write_trajectory, Trajectory};

/// Frames along a trajectory with their normals and motion caption.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedSequence<T: Real> {
    pub frames: Vec<Frame<T>>,
    pub normals: Vec<NormalMap<T>>,
    pub trajectory: Trajectory<T>,
    pub caption: String,
}

/// Renders one frame per trajectory key; frames are independent and run in parallel.
pub fn render_sequence<T: Real>(
    cloud: &PointCloud<T>,
    traj: &Trajectory<T>,
    intr: &Intrinsics<T>,
    options: &RenderOptions<T>,
) -> Result<RenderedSequence<T>, RenderError> {
    if cloud.is_empty() {
        return Err(RenderError::EmptyCloud);
    }
    let rendered: Vec<(Frame<T>, NormalMap<T>)> = traj
        .world_to_camera()
        .par_iter()
        .enumerate()
        .map(|(index, pose)| {
            let mut frame = render_view(cloud, pose, intr, options).map_err(|e| RenderError::Frame {
                index,
                source: Box::new(e),
            })?;
            frame.index = index;
            let normals = normal_from_depth(&frame.depth, intr);
            Ok((frame, normals))
        })
        .collect::<Result<_, RenderError>>()?;
    let (frames, normals) = rendered.into_iter().unzip();
    Ok(RenderedSequence {
        frames,
        normals,
        trajectory: traj.clone(),
        caption: describe_motion(traj),
    })
}

/// Paths of the on-disk sequence layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceLayout {
    pub root: PathBuf,
}

impl SequenceLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn frames_dir(&self) -> PathBuf {
        self.root.join("frames")
    }

    pub fn depth_dir(&self) -> PathBuf {
        self.root.join("depth")
    }

    pub fn normals_dir(&self) -> PathBuf {
        self.root.join("normals")
    }

    pub fn frame(&self, i: usize) -> PathBuf {
        self.frames_dir().join(format!("{i:05}.png"))
    }

    pub fn depth(&self, i: usize) -> PathBuf {
        self.depth_dir().join(format!("{i:05}.pfm"))
    }

    pub fn normals(&self, i: usize) -> PathBuf {
        self.normals_dir().join(format!("{i:05}.pfm"))
    }

    /// Camera→world keys in trajectory format.
    pub fn poses(&self) -> PathBuf {
        self.root.join("poses.txt")
    }

    pub fn caption(&self) -> PathBuf {
        self.root.join("caption.txt")
    }

    pub fn intrinsics(&self) -> PathBuf {
        self.root.join("intrinsics.txt")
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|e| IoError::at(path, e))
}

fn create_dir(path: &Path) -> Result<(), IoError> {
    fs::create_dir_all(path).map_err(|e| IoError::at(path, e))
}

/// Writes `frames/%05d.png`, `depth/%05d.pfm`, `normals/%05d.pfm`, `poses.txt`,
/// `caption.txt` and `intrinsics.txt` under `root`.
pub fn write_sequence<T: Real>(
    root: &Path,
    seq: &RenderedSequence<T>,
    intr: &Intrinsics<T>,
) -> Result<SequenceLayout, RenderError> {
    let layout = SequenceLayout::new(root);
    for d in [layout.frames_dir(), layout.depth_dir(), layout.normals_dir()] {
        create_dir(&d)?;
    }
    seq.frames
        .par_iter()
        .zip(seq.normals.par_iter())
        .enumerate()
        .try_for_each(|(i, (frame, normals))| -> Result<(), IoError> {
            write_png(&layout.frame(i), &frame.rgb)?;
            write_depth_pfm(&layout.depth(i), &frame.depth)?;
            write_normals_pfm(&layout.normals(i), normals)
        })?;
    write_text(&layout.poses(), &write_trajectory(&seq.trajectory))?;
    write_text(&layout.caption(), &format!("{}\n", seq.caption))?;
    write_text(&layout.intrinsics(), &write_intrinsics(intr))?;
    Ok(layout)
}

/// Per-frame coverage of a sequence streamed to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamedSequence {
    pub layout: SequenceLayout,
    pub coverage: Vec<f64>,
    pub caption: String,
}

/// Renders and writes each frame as soon as it is produced, so only the frames in flight
/// are held in memory. Output is byte-identical to [`render_sequence`] + [`write_sequence`].
pub fn render_sequence_to_disk<T: Real>(
    root: &Path,
    cloud: &PointCloud<T>,
    traj: &Trajectory<T>,
    intr: &Intrinsics<T>,
    options: &RenderOptions<T>,
) -> Result<StreamedSequence, RenderError> {
    if cloud.is_empty() {
        return Err(RenderError::EmptyCloud);
    }
    let layout = SequenceLayout::new(root);
    for d in [layout.frames_dir(), layout.depth_dir(), layout.normals_dir()] {
        create_dir(&d)?;
    }
    let coverage = traj
        .world_to_camera()
        .par_iter()
        .enumerate()
        .map(|(i, pose)| -> Result<f64, RenderError> {
            let frame = render_view(cloud, pose, intr, options).map_err(|e| RenderError::Frame {
                index: i,
                source: Box::new(e),
            })?;
            write_png(&layout.frame(i), &frame.rgb)?;
            write_depth_pfm(&layout.depth(i), &frame.depth)?;
            write_normals_pfm(&layout.normals(i), &normal_from_depth(&frame.depth, intr))?;
            Ok(super::coverage_fraction(&frame))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let caption = describe_motion(traj);
    write_text(&layout.poses(), &write_trajectory(traj))?;
    write_text(&layout.caption(), &format!("{caption}\n"))?;
    write_text(&layout.intrinsics(), &write_intrinsics(intr))?;
    Ok(StreamedSequence {
        layout,
        coverage,
        caption,
    })
}

/// A sequence read back from disk: images, depth, world→camera poses and intrinsics.
#[derive(Debug, Clone)]
pub struct SequenceOnDisk<T: Real> {
    pub images: Vec<RgbImage<T>>,
    pub depths: Vec<DepthMap<T>>,
    pub world_to_camera: Vec<Pose<T>>,
    pub intrinsics: Intrinsics<T>,
    pub caption: Option<String>,
}

fn require(path: &Path) -> Result<(), RenderError> {
    if path.exists() {
        Ok(())
    } else {
        Err(RenderError::Layout(format!("missing {}", path.display())))
    }
}

/// Reads a sequence directory; the first missing artifact is reported as a layout error.
pub fn read_sequence<T: Real>(root: &Path) -> Result<SequenceOnDisk<T>, RenderError> {
    let layout = SequenceLayout::new(root);
    for p in [layout.poses(), layout.intrinsics(), layout.frames_dir(), layout.depth_dir()] {
        require(&p)?;
    }
    let text = |p: &Path| fs::read_to_string(p).map_err(|e| IoError::at(p, e));
    let traj = parse_trajectory::<T>(&text(&layout.poses())?)?;
    let intrinsics = parse_intrinsics::<T>(&text(&layout.intrinsics())?)?;
    let n = traj.len();
    for i in 0..n {
        require(&layout.frame(i))?;
        require(&layout.depth(i))?;
    }
    let images = (0..n)
        .into_par_iter()
        .map(|i| read_rgb(&layout.frame(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let depths = (0..n)
        .into_par_iter()
        .map(|i| read_depth(&layout.depth(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let caption = fs::read_to_string(layout.caption()).ok().map(|s| s.trim_end().to_string());
    Ok(SequenceOnDisk {
        images,
        depths,
        world_to_camera: traj.world_to_camera(),
        intrinsics,
        caption,
    })
}
