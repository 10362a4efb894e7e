use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manifest::thresholds_with;
use super::{
    format_metrics, format_reconstruction, load_scene, reconstruct, run_evaluate, write_text, BatchManifest,
    EvaluateOptions, PipelineError, ReconstructOptions, SceneInputs, SceneManifest, TrajectorySpec,
};
use crate::imgfilter::{dedup, filter_images, perceptual_hash, Gate, LoadedImage, Thresholds, Verdict};
use crate::io::{read_rgb8, IoError};
use crate::render::{render_sequence_to_disk, RenderOptions};
use crate::trajectory::{
    canonical_trajectory, depth_adaptive_scale, DepthStats, TrajectoryKind, TrajectoryParams, DEFAULT_REFERENCE_DEPTH,
};
use crate::camera::Pose;

pub const INDEX_HEADER: &str = "# stereoforge-index 1";

/// Default extent at the reference depth: metres for translations, radians for rotations.
pub fn default_extent(kind: TrajectoryKind) -> f64 {
    match kind {
        TrajectoryKind::Orbit | TrajectoryKind::Spiral => 0.25,
        TrajectoryKind::Pan => 0.2,
        TrajectoryKind::Dolly | TrajectoryKind::Truck => 2.0,
        TrajectoryKind::Boom => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub seed: u64,
    /// Scene-level worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
    pub reconstruct: ReconstructOptions,
    pub render: RenderOptions<f64>,
    pub reference_depth: f64,
    pub evaluate: EvaluateOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: None,
            reconstruct: ReconstructOptions::default(),
            render: RenderOptions::default(),
            reference_depth: DEFAULT_REFERENCE_DEPTH,
            evaluate: EvaluateOptions::default(),
        }
    }
}

/// One rendered sequence in the dataset index.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRecord {
    pub scene: String,
    pub kind: TrajectoryKind,
    pub frames: usize,
    /// Relative to the output root.
    pub path: PathBuf,
    pub scale_factor: f64,
    pub mean_coverage: f64,
    pub warp_l2d: f64,
    pub caption: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneRejection {
    pub scene: String,
    pub stage: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub records: Vec<SequenceRecord>,
    pub rejections: Vec<SceneRejection>,
    pub index_path: PathBuf,
}

impl PipelineOutcome {
    /// 0 when every scene succeeded, 2 when some did, 1 when none did.
    pub fn exit_code(&self) -> i32 {
        let ok: BTreeSet<&str> = self.records.iter().map(|r| r.scene.as_str()).collect();
        match (ok.is_empty(), self.rejections.is_empty()) {
            (false, true) => 0,
            (false, false) => 2,
            (true, _) => 1,
        }
    }
}

fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// `sequence` rows in scene/trajectory order, then `rejected` rows in manifest order.
pub fn format_index(outcome: &PipelineOutcome) -> String {
    let mut s = format!("{INDEX_HEADER}\n");
    s.push_str("# sequence\tscene\ttrajectory\tframes\tpath\tscale_factor\tmean_coverage\twarp_l2d\tcaption\n");
    s.push_str("# rejected\tscene\tstage\treason\n");
    for r in &outcome.records {
        let _ = writeln!(
            s,
            "sequence\t{}\t{}\t{}\t{}\t{:.9}\t{:.9}\t{:.9e}\t{}",
            r.scene,
            r.kind,
            r.frames,
            r.path.display(),
            r.scale_factor,
            r.mean_coverage,
            r.warp_l2d,
            clean(&r.caption)
        );
    }
    for r in &outcome.rejections {
        let _ = writeln!(s, "rejected\t{}\t{}\t{}", r.scene, r.stage, clean(&r.reason));
    }
    s
}

/// A scene that passed loading, with what the cross-scene dedup needs.
struct Loaded {
    manifest: SceneManifest,
    inputs: SceneInputs,
    left8: crate::imgfilter::Rgb8,
}

fn file_bytes(p: &Path) -> Result<u64, PipelineError> {
    Ok(std::fs::metadata(p).map_err(|e| IoError::at(p, e))?.len())
}

fn reject_from(verdict: &Verdict) -> Option<PipelineError> {
    match verdict {
        Verdict::Keep => None,
        Verdict::Reject { gate, reason } => Some(PipelineError::Rejected {
            gate: gate.name().to_string(),
            reason: reason.clone(),
        }),
    }
}

/// Loads a scene and runs the per-image gates on both views.
fn load_and_gate(m: &SceneManifest, base: Thresholds) -> Result<Loaded, PipelineError> {
    let inputs = load_scene(m)?;
    let t = thresholds_with(base, &m.thresholds);
    let exclusions: BTreeSet<String> = match &m.exclusions {
        Some(p) => super::read_text(p)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect(),
        None => BTreeSet::new(),
    };
    let mut left8 = None;
    for (view, path) in [("left", &m.left), ("right", &m.right)] {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if exclusions.contains(&name) || exclusions.contains(view) {
            return Err(PipelineError::Rejected {
                gate: Gate::Excluded.name().to_string(),
                reason: format!("{view} image listed in exclusion list"),
            });
        }
        let image = read_rgb8(path)?;
        let loaded = LoadedImage {
            id: format!("{}/{view}", m.id),
            image: image.clone(),
            file_bytes: file_bytes(path)?,
        };
        let report = filter_images(vec![loaded], &t).remove(0);
        if let Some(e) = reject_from(&report.verdict) {
            return Err(e);
        }
        if view == "left" {
            left8 = Some(image);
        }
    }
    Ok(Loaded {
        manifest: m.clone(),
        inputs,
        left8: left8.expect("left view gated"),
    })
}

fn render_scene(
    loaded: &Loaded,
    trajectories: &[TrajectorySpec],
    out: &Path,
    options: &PipelineOptions,
) -> Result<Vec<SequenceRecord>, PipelineError> {
    let id = &loaded.manifest.id;
    let scene_dir = out.join(id);
    let mut ro = options.reconstruct;
    ro.pnp.seed = options.seed;
    let rec = reconstruct(&loaded.inputs, &ro)?;
    write_text(&scene_dir.join("reconstruction.txt"), &format_reconstruction(&rec))?;
    let stats = DepthStats::from_depth(&rec.depth_left)
        .ok_or_else(|| PipelineError::Layout(format!("scene {id}: adjusted depth has no valid pixels")))?;
    let mut records = Vec::with_capacity(trajectories.len());
    for spec in trajectories {
        let extent = spec.extent.unwrap_or_else(|| default_extent(spec.kind));
        let params = TrajectoryParams::new(extent, spec.frames).with_pivot_depth(options.reference_depth);
        let canonical = canonical_trajectory(spec.kind, &params, &Pose::identity())?;
        let traj = depth_adaptive_scale(&canonical, &stats, options.reference_depth);
        let rel = PathBuf::from(id).join(spec.kind.name());
        let dir = out.join(&rel);
        let streamed = render_sequence_to_disk(&dir, &rec.cloud, &traj, &rec.intrinsics, &options.render)?;
        let metrics = run_evaluate(&dir, &options.evaluate)?;
        write_text(&dir.join("metrics.tsv"), &format_metrics(&metrics))?;
        records.push(SequenceRecord {
            scene: id.clone(),
            kind: spec.kind,
            frames: traj.len(),
            path: rel,
            scale_factor: traj.scale_factor,
            mean_coverage: streamed.coverage.iter().sum::<f64>() / streamed.coverage.len() as f64,
            warp_l2d: metrics.warp.l2d,
            caption: streamed.caption,
        });
    }
    Ok(records)
}

fn scene_label(path: &Path, index: usize) -> String {
    path.parent()
        .and_then(Path::file_name)
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("scene-{index}"))
}

/// Filters, reconstructs and renders every scene of the batch into `out/<scene>/<trajectory>/`,
/// evaluates each sequence and writes `out/index.tsv`. Scenes run on a bounded pool and fail
/// independently; a failed scene leaves no output directory.
pub fn run_pipeline(batch: &BatchManifest, out: &Path, options: &PipelineOptions) -> Result<PipelineOutcome, PipelineError> {
    if batch.trajectories.is_empty() {
        return Err(PipelineError::Manifest {
            path: None,
            line: 0,
            message: "batch lists no trajectories".into(),
        });
    }
    std::fs::create_dir_all(out).map_err(|e| IoError::at(out, e))?;
    let pool = match options.workers {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| PipelineError::Layout(format!("worker pool: {e}")))?,
        ),
        None => None,
    };
    let body = || run_batch(batch, out, options);
    match &pool {
        Some(p) => p.install(body),
        None => body(),
    }
}

fn run_batch(batch: &BatchManifest, out: &Path, options: &PipelineOptions) -> Result<PipelineOutcome, PipelineError> {
    let base = thresholds_with(Thresholds::default(), &batch.thresholds);
    // stage 1: manifests, inputs and per-image gates, in parallel
    let staged: Vec<(String, Result<Loaded, PipelineError>)> = batch
        .scenes
        .par_iter()
        .enumerate()
        .map(|(i, p)| match SceneManifest::load(p) {
            Ok(m) => (m.id.clone(), load_and_gate(&m, base)),
            Err(e) => (scene_label(p, i), Err(e)),
        })
        .collect();
    // stage 2: duplicate ids and cross-scene dedup on the left views, in manifest order
    let mut seen = BTreeSet::new();
    let mut outcomes: Vec<(String, Option<Result<Loaded, PipelineError>>)> = Vec::new();
    for (id, r) in staged {
        let r = match r {
            Ok(_) if !seen.insert(id.clone()) => Err(PipelineError::Manifest {
                path: None,
                line: 0,
                message: format!("duplicate scene id `{id}`"),
            }),
            r => r,
        };
        outcomes.push((id, Some(r)));
    }
    let survivors: Vec<usize> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, (_, r))| matches!(r, Some(Ok(_))))
        .map(|(i, _)| i)
        .collect();
    let mut hashes = Vec::new();
    let mut hashed = Vec::new();
    for &i in &survivors {
        let Some(Ok(l)) = &outcomes[i].1 else { unreachable!() };
        match perceptual_hash(&l.left8) {
            Ok(h) => {
                hashes.push(h);
                hashed.push(i);
            }
            Err(e) => {
                outcomes[i].1 = Some(Err(PipelineError::Rejected {
                    gate: Gate::Dedup.name().to_string(),
                    reason: e.to_string(),
                }))
            }
        }
    }
    let kept: BTreeSet<usize> = dedup(&hashes, base.max_hamming).into_iter().map(|j| hashed[j]).collect();
    for &i in &hashed {
        if !kept.contains(&i) {
            outcomes[i].1 = Some(Err(PipelineError::Rejected {
                gate: Gate::Dedup.name().to_string(),
                reason: "left view duplicates an earlier scene".into(),
            }));
        }
    }
    // stage 3: reconstruct, render and evaluate each surviving scene
    let results: Vec<(String, Result<Vec<SequenceRecord>, PipelineError>)> = outcomes
        .into_par_iter()
        .map(|(id, r)| {
            let r = r.expect("every scene has an outcome").and_then(|l| {
                let dir = out.join(&l.manifest.id);
                if dir.exists() {
                    std::fs::remove_dir_all(&dir).map_err(|e| IoError::at(&dir, e))?;
                }
                let res = render_scene(&l, &batch.trajectories, out, options);
                if res.is_err() {
                    let _ = std::fs::remove_dir_all(&dir);
                }
                res
            });
            (id, r)
        })
        .collect();
    let mut records = Vec::new();
    let mut rejections = Vec::new();
    for (scene, r) in results {
        match r {
            Ok(mut v) => records.append(&mut v),
            Err(e) => rejections.push(SceneRejection {
                scene,
                stage: e.stage().to_string(),
                reason: e.to_string(),
            }),
        }
    }
    let index_path = out.join("index.tsv");
    let outcome = PipelineOutcome {
        records,
        rejections,
        index_path: index_path.clone(),
    };
    write_text(&index_path, &format_index(&outcome))?;
    Ok(outcome)
}
