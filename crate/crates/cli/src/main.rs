use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use stereoforge::camera::format::{parse_cahvor, parse_intrinsics, write_cahvor, write_intrinsics};
use stereoforge::camera::{cahvor_to_pinhole, CahvorModel};
use stereoforge::consistency::PairingPolicy;
use stereoforge::imgfilter::{format_reports, run_filter_pipeline, FilterManifest, Thresholds};
use stereoforge::io::pfm::read_depth;
use stereoforge::io::ply::parse_ply;
use stereoforge::io::text::{format_pose, parse_poses};
use stereoforge::pipeline::{
    default_extent, format_index, format_metrics, run_evaluate, run_pipeline, run_reconstruct, write_reconstruction,
    write_synthetic_scene, AdjustView, BatchManifest, EvaluateOptions, PipelineOptions, ReconstructOptions,
    SceneManifest, SynthOptions,
};
use stereoforge::render::{render_sequence_to_disk, RenderOptions, Splat};
use stereoforge::synthworld::Perturbation;
use stereoforge::trajectory::{
    canonical_trajectory, depth_adaptive_scale, describe_motion, parse_trajectory, write_trajectory, DepthStats,
    TrajectoryKind, TrajectoryParams, DEFAULT_FRAMES, DEFAULT_REFERENCE_DEPTH,
};
use stereoforge::Pose64;

/// Stereo captures in, multi-view training sequences out.
#[derive(Debug, Parser)]
#[command(name = "stereoforge", version)]
struct Cli {
    /// Seed for every randomized stage.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gate a list of images and write a quality report.
    Filter(FilterArgs),
    /// Convert between CAHVOR and pinhole camera models.
    ConvertCamera(ConvertArgs),
    /// Estimate the relative pose of a stereo pair and fuse a point cloud.
    Reconstruct(ReconstructArgs),
    /// Generate a canonical camera trajectory.
    Trajectory(TrajectoryArgs),
    /// Render a point cloud along a trajectory.
    Render(RenderArgs),
    /// Measure warp error (and PSNR/SSIM against a reference) of a sequence.
    Evaluate(EvaluateArgs),
    /// Write a synthetic stereo scene with ground truth.
    Synth(SynthArgs),
    /// Run the full batch: filter, reconstruct, render and evaluate.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// One image path per line.
    #[arg(long)]
    manifest: PathBuf,
    /// Image ids to reject up front, one per line.
    #[arg(long)]
    exclude: Option<PathBuf>,
    #[arg(long)]
    min_dim: Option<u32>,
    #[arg(long)]
    min_bytes: Option<u64>,
    #[arg(long)]
    var_threshold: Option<f64>,
    #[arg(long)]
    max_hamming: Option<u32>,
    #[arg(long = "lap-var")]
    lap_var: Option<f64>,
    #[arg(long)]
    spike_bound: Option<f64>,
    #[arg(long)]
    entropy_min: Option<f64>,
    #[arg(long)]
    entropy_max: Option<f64>,
}

impl FilterArgs {
    fn thresholds(&self) -> Thresholds {
        let d = Thresholds::default();
        Thresholds {
            min_dim: self.min_dim.unwrap_or(d.min_dim),
            min_bytes: self.min_bytes.unwrap_or(d.min_bytes),
            var_threshold: self.var_threshold.unwrap_or(d.var_threshold),
            max_hamming: self.max_hamming.unwrap_or(d.max_hamming),
            lap_var_threshold: self.lap_var.unwrap_or(d.lap_var_threshold),
            spike_bound: self.spike_bound.unwrap_or(d.spike_bound),
            entropy_bounds: (
                self.entropy_min.unwrap_or(d.entropy_bounds.0),
                self.entropy_max.unwrap_or(d.entropy_bounds.1),
            ),
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
struct ConvertSource {
    /// CAHVOR model to convert to pinhole intrinsics and pose.
    #[arg(long)]
    cahvor: Option<PathBuf>,
    /// Pinhole intrinsics to convert to CAHVOR (needs `--pose`).
    #[arg(long, requires = "pose")]
    intrinsics: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[command(flatten)]
    source: ConvertSource,
    /// World-to-camera pose file (first line used).
    #[arg(long)]
    pose: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Adjust {
    /// Map view-1 depth onto view 2.
    First,
    /// Map view-2 depth onto view 1.
    Second,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    /// Scene manifest.
    #[arg(long)]
    scene: PathBuf,
    #[arg(long, value_enum, default_value_t = Adjust::First)]
    adjust: Adjust,
    /// RANSAC inlier threshold in pixels.
    #[arg(long, default_value_t = 2.0)]
    ransac_threshold: f64,
}

impl ReconstructArgs {
    fn options(&self, seed: u64) -> ReconstructOptions {
        let mut o = ReconstructOptions::default();
        o.pnp.ransac_threshold = self.ransac_threshold;
        o.pnp.seed = seed;
        o.adjust = match self.adjust {
            Adjust::First => AdjustView::First,
            Adjust::Second => AdjustView::Second,
        };
        o
    }
}

#[derive(Debug, Args)]
struct TrajectoryArgs {
    #[arg(long)]
    kind: TrajectoryKind,
    /// Metres for translations, radians for rotations; defaults per kind.
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_FRAMES)]
    frames: usize,
    /// Depth map whose median rescales the translations.
    #[arg(long)]
    depth_map: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_REFERENCE_DEPTH)]
    reference_depth: f64,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Point cloud (ASCII PLY as written by `reconstruct`).
    #[arg(long)]
    cloud: PathBuf,
    #[arg(long)]
    intrinsics: PathBuf,
    /// Trajectory file as written by `trajectory`.
    #[arg(long)]
    trajectory: PathBuf,
    /// `footprint` or a fixed radius in pixels.
    #[arg(long, default_value = "footprint")]
    splat: String,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Sequence directory.
    #[arg(long)]
    sequence: PathBuf,
    /// Ground-truth sequence for cross-view targets and PSNR/SSIM.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Pair every frame with every other one instead of neighbours only.
    #[arg(long)]
    all_pairs: bool,
    #[arg(long, default_value_t = 8)]
    stride: usize,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 256)]
    size: u32,
    #[arg(long, default_value_t = 0.5)]
    baseline: f64,
    /// Correspondence grid spacing in pixels.
    #[arg(long, default_value_t = 8)]
    stride: usize,
    /// Planted defect, e.g. `blur:3`, `grayscale`, `depth-affine:2,0.5`, `outliers:0.2`.
    #[arg(long)]
    perturb: Option<Perturbation>,
    /// Relief of the terrain in metres.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Scene id; defaults to `synth-<seed>`.
    #[arg(long)]
    id: Option<String>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Batch manifest.
    #[arg(long)]
    batch: PathBuf,
    #[arg(long, default_value_t = DEFAULT_REFERENCE_DEPTH)]
    reference_depth: f64,
}

fn out(cli: &Cli) -> Result<&Path> {
    cli.out.as_deref().ok_or_else(|| anyhow!("--out is required for this command"))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn parse_splat(s: &str) -> Result<Splat<f64>> {
    if s == "footprint" {
        return Ok(Splat::Footprint);
    }
    match s.parse::<f64>() {
        Ok(r) if r > 0.0 && r.is_finite() => Ok(Splat::Fixed(r)),
        _ => bail!("--splat expects `footprint` or a positive radius, got `{s}`"),
    }
}

fn filter(cli: &Cli, a: &FilterArgs) -> Result<ExitCode> {
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let mut m = FilterManifest::parse(&read(&a.manifest)?, base);
    if let Some(e) = &a.exclude {
        m = m.with_exclusions(&read(e)?);
    }
    m.thresholds = a.thresholds();
    let reports = run_filter_pipeline(&m);
    write(out(cli)?, &format_reports(&reports))?;
    let kept = reports.iter().filter(|r| r.kept()).count();
    eprintln!("kept {kept} of {} images", reports.len());
    Ok(ExitCode::SUCCESS)
}

fn convert(cli: &Cli, a: &ConvertArgs) -> Result<ExitCode> {
    let dir = out(cli)?;
    if let Some(path) = &a.source.cahvor {
        let model: CahvorModel<f64> = parse_cahvor(&read(path)?).with_context(|| path.display().to_string())?;
        let c = cahvor_to_pinhole(&model)?;
        write(&dir.join("intrinsics.txt"), &write_intrinsics(&c.intrinsics))?;
        write(&dir.join("pose.txt"), &format!("{}\n", format_pose(&c.pose)))?;
        let r = c.y_up_rotation;
        let rows: Vec<String> = (0..3).map(|i| format!("{} {} {}", r[(i, 0)], r[(i, 1)], r[(i, 2)])).collect();
        write(
            &dir.join("conversion.txt"),
            &format!(
                "orthogonality_residual {:e}\ny_up_rotation {}\nh_c {}\nv_c {}\nh_s {}\nv_s {}\n",
                c.orthogonality_residual,
                rows.join(" "),
                c.scalars.h_c,
                c.scalars.v_c,
                c.scalars.h_s,
                c.scalars.v_s
            ),
        )?;
    } else if let Some(path) = &a.source.intrinsics {
        let k = parse_intrinsics::<f64>(&read(path)?).with_context(|| path.display().to_string())?;
        let pose_path = a.pose.as_ref().ok_or_else(|| anyhow!("--intrinsics needs --pose"))?;
        let pose: Pose64 = *parse_poses(&read(pose_path)?)?
            .first()
            .ok_or_else(|| anyhow!("{}: no pose", pose_path.display()))?;
        write(&dir.join("camera.cahvor"), &write_cahvor(&CahvorModel::from_pinhole(&pose, &k)))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn reconstruct(cli: &Cli, a: &ReconstructArgs) -> Result<ExitCode> {
    let m = SceneManifest::load(&a.scene)?;
    let r = run_reconstruct(&m, &a.options(cli.seed))?;
    write_reconstruction(out(cli)?, &r)?;
    eprintln!("{}: {} of {} correspondences inlying, {} points", r.id, r.inliers, r.correspondences, r.cloud.len());
    Ok(ExitCode::SUCCESS)
}

fn trajectory(cli: &Cli, a: &TrajectoryArgs) -> Result<ExitCode> {
    let extent = a.extent.unwrap_or_else(|| default_extent(a.kind));
    let params = TrajectoryParams::new(extent, a.frames).with_pivot_depth(a.reference_depth);
    let mut traj = canonical_trajectory(a.kind, &params, &Pose64::identity())?;
    if let Some(path) = &a.depth_map {
        let depth = read_depth::<f64>(path)?;
        let stats = DepthStats::from_depth(&depth).ok_or_else(|| anyhow!("{}: no valid depth", path.display()))?;
        traj = depth_adaptive_scale(&traj, &stats, a.reference_depth);
    }
    let path = out(cli)?;
    write(path, &write_trajectory(&traj))?;
    write(&path.with_extension("caption.txt"), &format!("{}\n", describe_motion(&traj)))?;
    Ok(ExitCode::SUCCESS)
}

fn render(cli: &Cli, a: &RenderArgs) -> Result<ExitCode> {
    let cloud = parse_ply::<f64>(&read(&a.cloud)?).with_context(|| a.cloud.display().to_string())?;
    let k = parse_intrinsics::<f64>(&read(&a.intrinsics)?).with_context(|| a.intrinsics.display().to_string())?;
    let traj = parse_trajectory::<f64>(&read(&a.trajectory)?).with_context(|| a.trajectory.display().to_string())?;
    let options = RenderOptions {
        splat: parse_splat(&a.splat)?,
        ..RenderOptions::default()
    };
    let s = render_sequence_to_disk(out(cli)?, &cloud, &traj, &k, &options)?;
    let mean = s.coverage.iter().sum::<f64>() / s.coverage.len().max(1) as f64;
    eprintln!("{} frames, mean coverage {mean:.3}", s.coverage.len());
    Ok(ExitCode::SUCCESS)
}

fn evaluate(cli: &Cli, a: &EvaluateArgs) -> Result<ExitCode> {
    let options = EvaluateOptions {
        reference: a.reference.clone(),
        policy: if a.all_pairs { PairingPolicy::AllPairs } else { PairingPolicy::Consecutive },
        stride: a.stride,
    };
    let report = format_metrics(&run_evaluate(&a.sequence, &options)?);
    match &cli.out {
        Some(p) => write(p, &report)?,
        None => print!("{report}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<ExitCode> {
    let mut options = SynthOptions {
        seed: cli.seed,
        size: a.size,
        baseline: a.baseline,
        stride: a.stride,
        perturbation: a.perturb,
        id: a.id.clone(),
        ..SynthOptions::default()
    };
    if let Some(h) = a.amplitude {
        options.terrain.amplitude = h;
    }
    let s = write_synthetic_scene(out(cli)?, &options)?;
    eprintln!("wrote {}", s.manifest_path.display());
    Ok(ExitCode::SUCCESS)
}

fn pipeline(cli: &Cli, a: &PipelineArgs) -> Result<ExitCode> {
    let batch = BatchManifest::load(&a.batch)?;
    let options = PipelineOptions {
        seed: cli.seed,
        workers: cli.workers,
        reference_depth: a.reference_depth,
        ..PipelineOptions::default()
    };
    let outcome = run_pipeline(&batch, out(cli)?, &options)?;
    print!("{}", format_index(&outcome));
    for r in &outcome.rejections {
        eprintln!("rejected {} at {}: {}", r.scene, r.stage, r.reason);
    }
    Ok(ExitCode::from(outcome.exit_code() as u8))
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Filter(a) => filter(cli, a),
        Command::ConvertCamera(a) => convert(cli, a),
        Command::Reconstruct(a) => reconstruct(cli, a),
        Command::Trajectory(a) => trajectory(cli, a),
        Command::Render(a) => render(cli, a),
        Command::Evaluate(a) => evaluate(cli, a),
        Command::Synth(a) => synth(cli, a),
        Command::Pipeline(a) => pipeline(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
