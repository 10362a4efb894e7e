//! Orchestration: manifests, reconstruction, dataset packaging and evaluation.

mod batch;
mod evaluate;
mod manifest;
mod reconstruct;
mod synth;

pub use batch::{
    default_extent, format_index, run_pipeline, PipelineOptions, PipelineOutcome, SceneRejection, SequenceRecord,
    INDEX_HEADER,
};
pub use evaluate::{format_metrics, run_evaluate, EvaluateOptions, MetricsReport, METRICS_HEADER};
pub use manifest::{BatchManifest, IntrinsicsSource, SceneManifest, TrajectorySpec, BATCH_HEADER, SCENE_HEADER};
pub use reconstruct::{
    format_reconstruction, load_scene, reconstruct, run_reconstruct, write_reconstruction, AdjustView,
    ReconstructOptions, Reconstruction, SceneInputs, RECONSTRUCTION_FILES,
};
pub use synth::{write_synthetic_scene, SynthOptions, SynthOutput};

use std::path::PathBuf;

use thiserror::Error;

use crate::camera::CameraError;
use crate::consistency::ConsistencyError;
use crate::geometry::GeometryError;
use crate::io::IoError;
use crate::render::RenderError;
use crate::synthworld::SynthError;
use crate::trajectory::TrajectoryError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing input: {}", path.display())]
    MissingInput { path: PathBuf },
    #[error("{}line {line}: {message}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Manifest {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },
    #[error("rejected by {gate}: {reason}")]
    Rejected { gate: String, reason: String },
    #[error("layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Render(RenderError),
    #[error(transparent)]
    Consistency(#[from] ConsistencyError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl From<RenderError> for PipelineError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Layout(m) => PipelineError::Layout(m),
            e => PipelineError::Render(e),
        }
    }
}

impl PipelineError {
    /// Short stage-like label used in rejection records.
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::MissingInput { .. } | PipelineError::Manifest { .. } | PipelineError::Io(_) => "input",
            PipelineError::Rejected { .. } => "filter",
            PipelineError::Geometry(_) | PipelineError::Camera(_) => "reconstruct",
            PipelineError::Render(_) | PipelineError::Trajectory(_) => "render",
            PipelineError::Consistency(_) | PipelineError::Layout(_) => "evaluate",
            PipelineError::Synth(_) => "synth",
        }
    }
}

pub(crate) fn read_text(path: &std::path::Path) -> Result<String, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::MissingInput { path: path.to_path_buf() });
    }
    std::fs::read_to_string(path).map_err(|e| IoError::at(path, e).into())
}

pub(crate) fn write_text(path: &std::path::Path, text: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| IoError::at(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| IoError::at(path, e).into())
}
