use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::PipelineError;
use crate::consistency::{
    psnr, ssim, warp_error, CrossTarget, FrameGeometry, PairingPolicy, SsimOptions, WarpReport, DEFAULT_GRID_STRIDE,
};
use crate::render::{read_sequence, SequenceOnDisk};

pub const METRICS_HEADER: &str = "# stereoforge-metrics 1";

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOptions {
    /// Ground-truth sequence: supplies expected cross-view locations and reference frames
    /// for PSNR/SSIM. Without it, cross terms use the depth round trip.
    pub reference: Option<PathBuf>,
    pub policy: PairingPolicy,
    pub stride: usize,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        Self {
            reference: None,
            policy: PairingPolicy::Consecutive,
            stride: DEFAULT_GRID_STRIDE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub warp: WarpReport<f64>,
    pub cross_target: &'static str,
    /// Per frame, when a reference is given.
    pub psnr: Vec<Option<f64>>,
    pub ssim: Vec<Option<f64>>,
}

impl MetricsReport {
    pub fn mean_psnr(&self) -> Option<f64> {
        mean(&self.psnr)
    }

    pub fn mean_ssim(&self) -> Option<f64> {
        mean(&self.ssim)
    }
}

fn mean(v: &[Option<f64>]) -> Option<f64> {
    let x: Vec<f64> = v.iter().flatten().copied().collect();
    (!x.is_empty()).then(|| x.iter().sum::<f64>() / x.len() as f64)
}

fn geometry(seq: &SequenceOnDisk<f64>, stride: usize) -> Vec<FrameGeometry<f64>> {
    seq.depths
        .par_iter()
        .zip(seq.world_to_camera.par_iter())
        .map(|(d, p)| FrameGeometry::from_depth(d, &seq.intrinsics, p, stride))
        .collect()
}

/// Warp error of a sequence directory, plus PSNR/SSIM against a reference sequence.
pub fn run_evaluate(dir: &Path, options: &EvaluateOptions) -> Result<MetricsReport, PipelineError> {
    let seq = read_sequence::<f64>(dir)?;
    let frames = geometry(&seq, options.stride);
    let reference = options.reference.as_deref().map(read_sequence::<f64>).transpose()?;
    let Some(r) = reference else {
        let warp = warp_error(&frames, options.policy, CrossTarget::RoundTrip(&seq.depths))?;
        let n = frames.len();
        return Ok(MetricsReport {
            warp,
            cross_target: "round-trip",
            psnr: vec![None; n],
            ssim: vec![None; n],
        });
    };
    if r.images.len() != seq.images.len() {
        return Err(PipelineError::Layout(format!(
            "reference has {} frames, sequence has {}",
            r.images.len(),
            seq.images.len()
        )));
    }
    let ref_frames = geometry(&r, options.stride);
    let warp = warp_error(&frames, options.policy, CrossTarget::Reference(&ref_frames))?;
    let image_metrics: Vec<(Option<f64>, Option<f64>)> = seq
        .images
        .par_iter()
        .zip(r.images.par_iter())
        .map(|(a, b)| (psnr(a, b, 1.0).ok(), ssim(a, b, &SsimOptions::default()).ok()))
        .collect();
    let (psnr, ssim) = image_metrics.into_iter().unzip();
    Ok(MetricsReport {
        warp,
        cross_target: "reference",
        psnr,
        ssim,
    })
}

fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.9e}"),
        None => "-".into(),
    }
}

/// Tab-separated: one `frame` row per frame, one `pair` row per evaluated pair, one
/// `skipped` row per pair without usable points, then a `summary` row.
pub fn format_metrics(r: &MetricsReport) -> String {
    let mut s = format!("{METRICS_HEADER}\n");
    let _ = writeln!(s, "# policy {} cross {}", r.warp.policy.name(), r.cross_target);
    let _ = writeln!(s, "# frame\tindex\tl_self\tused\tbehind\tpsnr\tssim");
    let _ = writeln!(s, "# pair\ti\tk\tl_cross\tused\tbehind\tunmatched");
    for (i, e) in r.warp.self_errors.iter().enumerate() {
        let _ = writeln!(
            s,
            "frame\t{i}\t{:.9e}\t{}\t{}\t{}\t{}",
            e.mean_sq,
            e.used,
            e.behind_camera,
            opt(r.psnr.get(i).copied().flatten()),
            opt(r.ssim.get(i).copied().flatten())
        );
    }
    for p in &r.warp.pair_errors {
        let v = &p.value;
        let _ = writeln!(
            s,
            "pair\t{}\t{}\t{:.9e}\t{}\t{}\t{}",
            p.i, p.k, v.mean_sq, v.used, v.behind_camera, v.unmatched
        );
    }
    for (i, k) in &r.warp.skipped_pairs {
        let _ = writeln!(s, "skipped\t{i}\t{k}");
    }
    let _ = writeln!(
        s,
        "summary\tl_self_avg={:.9e}\tl_cross_avg={:.9e}\tl_2d={:.9e}\tpsnr={}\tssim={}",
        r.warp.self_avg,
        r.warp.cross_avg,
        r.warp.l2d,
        opt(r.mean_psnr()),
        opt(r.mean_ssim())
    );
    s
}
