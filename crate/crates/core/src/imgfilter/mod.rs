//! Image-quality gating: size, grayscale, near-duplicate, sharpness and histogram checks.
//!
//! Gates run in the fixed order size → grayscale → dedup → sharpness → histogram and
//! stop at the first failure. Dedup only sees images that passed the first two gates.

mod gates;

pub use gates::{
    channel_variance, dedup, grayscale_gate, histogram_gate, histogram_stats, laplacian_variance, luma8,
    luminance_histogram, perceptual_hash, sharpness_gate, size_gate, HistogramStats, PerceptualHash, Rgb8,
    Thresholds,
};

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("expected 3 channels, got {0}")]
    NotThreeChannel(usize),
    #[error("image too small ({width}x{height})")]
    TooSmall { width: usize, height: usize },
    #[error("decode error: {0}")]
    Decode(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gate {
    /// Unreadable or undecodable file.
    Read,
    /// Listed in the exclusion list.
    Excluded,
    Size,
    Grayscale,
    Dedup,
    Sharpness,
    Histogram,
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Read => "read",
            Gate::Excluded => "excluded",
            Gate::Size => "size",
            Gate::Grayscale => "grayscale",
            Gate::Dedup => "dedup",
            Gate::Sharpness => "sharpness",
            Gate::Histogram => "histogram",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateResult {
    pub gate: Gate,
    pub passed: bool,
    /// Named measurements, e.g. `("variance", 14450.0)`.
    pub statistics: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Keep,
    Reject { gate: Gate, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub image_id: String,
    pub gates: Vec<GateResult>,
    pub verdict: Verdict,
}

impl QualityReport {
    pub fn kept(&self) -> bool {
        self.verdict == Verdict::Keep
    }

    pub fn failing_gate(&self) -> Option<Gate> {
        match &self.verdict {
            Verdict::Keep => None,
            Verdict::Reject { gate, .. } => Some(*gate),
        }
    }

    fn push(&mut self, gate: Gate, passed: bool, statistics: Vec<(&'static str, f64)>) -> bool {
        if !passed {
            let detail: Vec<String> = statistics.iter().map(|(k, v)| format!("{k}={v}")).collect();
            self.verdict = Verdict::Reject {
                gate,
                reason: detail.join(","),
            };
        }
        self.gates.push(GateResult {
            gate,
            passed,
            statistics,
        });
        passed
    }

    fn reject(&mut self, gate: Gate, reason: String) {
        self.gates.push(GateResult {
            gate,
            passed: false,
            statistics: Vec::new(),
        });
        self.verdict = Verdict::Reject { gate, reason };
    }
}

/// Images to gate, in archival order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterManifest {
    pub images: Vec<PathBuf>,
    pub thresholds: Thresholds,
    /// Image ids (as listed) rejected up front.
    pub exclusions: BTreeSet<String>,
}

impl FilterManifest {
    /// One path per line, relative paths resolved against `base`; blank and `#` lines skipped.
    pub fn parse(text: &str, base: &Path) -> Self {
        let images = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let p = Path::new(l);
                if p.is_absolute() {
                    p.to_path_buf()
                } else {
                    base.join(p)
                }
            })
            .collect();
        Self {
            images,
            ..Default::default()
        }
    }

    /// Exclusion list: one image id per line.
    pub fn with_exclusions(mut self, text: &str) -> Self {
        self.exclusions = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect();
        self
    }
}

/// An image already in memory, with the byte size of its encoded file.
#[derive(Debug, Clone)]
pub struct LoadedImage {
    pub id: String,
    pub image: Rgb8,
    pub file_bytes: u64,
}

fn image_id(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load(path: &Path) -> Result<LoadedImage, FilterError> {
    let bytes = std::fs::metadata(path)
        .map_err(|e| FilterError::Io(format!("{}: {e}", path.display())))?
        .len();
    let image = crate::io::read_rgb8(path).map_err(|e| FilterError::Decode(e.to_string()))?;
    Ok(LoadedImage {
        id: image_id(path),
        image,
        file_bytes: bytes,
    })
}

/// Reads every listed image and gates it. I/O failures are recorded, never fatal.
pub fn run_filter_pipeline(manifest: &FilterManifest) -> Vec<QualityReport> {
    let loaded: Vec<Result<LoadedImage, (String, FilterError)>> = manifest
        .images
        .par_iter()
        .map(|p| load(p).map_err(|e| (image_id(p), e)))
        .collect();
    filter_loaded(loaded, &manifest.thresholds, &manifest.exclusions)
}

/// Gates images that are already decoded.
pub fn filter_images(images: Vec<LoadedImage>, thresholds: &Thresholds) -> Vec<QualityReport> {
    filter_loaded(images.into_iter().map(Ok).collect(), thresholds, &BTreeSet::new())
}

fn filter_loaded(
    loaded: Vec<Result<LoadedImage, (String, FilterError)>>,
    t: &Thresholds,
    exclusions: &BTreeSet<String>,
) -> Vec<QualityReport> {
    // size and grayscale, per image
    let mut staged: Vec<(QualityReport, Option<Rgb8>)> = loaded
        .into_par_iter()
        .map(|item| {
            let (id, img) = match item {
                Ok(l) => (l.id.clone(), Ok(l)),
                Err((id, e)) => (id, Err(e)),
            };
            let mut r = QualityReport {
                image_id: id,
                gates: Vec::new(),
                verdict: Verdict::Keep,
            };
            let img = match img {
                Ok(img) => img,
                Err(e) => {
                    r.reject(Gate::Read, e.to_string());
                    return (r, None);
                }
            };
            if exclusions.contains(&r.image_id) {
                r.reject(Gate::Excluded, "listed in exclusion list".into());
                return (r, None);
            }
            let (w, h) = (img.image.width() as u32, img.image.height() as u32);
            let ok = r.push(
                Gate::Size,
                size_gate(w, h, img.file_bytes, t.min_dim, t.min_bytes),
                vec![("min_dim", w.min(h) as f64), ("bytes", img.file_bytes as f64)],
            );
            if !ok {
                return (r, None);
            }
            let (pass, var) = grayscale_gate(&img.image, t.var_threshold);
            if !r.push(Gate::Grayscale, pass, vec![("variance", var)]) {
                return (r, None);
            }
            (r, Some(img.image))
        })
        .collect();

    // dedup is a sequential reduction over survivors in input order
    let mut kept: Vec<PerceptualHash> = Vec::new();
    for (r, img) in staged.iter_mut() {
        let Some(image) = img.as_ref() else { continue };
        match perceptual_hash(image) {
            Ok(h) => {
                let nearest = kept.iter().map(|k| k.distance(&h)).min();
                let pass = nearest.is_none_or(|d| d > t.max_hamming);
                let stats = vec![("nearest_hamming", nearest.map_or(64.0, |d| d as f64))];
                if r.push(Gate::Dedup, pass, stats) {
                    kept.push(h);
                } else {
                    *img = None;
                }
            }
            Err(e) => {
                r.reject(Gate::Dedup, e.to_string());
                *img = None;
            }
        }
    }

    staged
        .into_par_iter()
        .map(|(mut r, img)| {
            let Some(image) = img else { return r };
            match sharpness_gate(&image, t.lap_var_threshold) {
                Ok((pass, v)) => {
                    if !r.push(Gate::Sharpness, pass, vec![("laplacian_variance", v)]) {
                        return r;
                    }
                }
                Err(e) => {
                    r.reject(Gate::Sharpness, e.to_string());
                    return r;
                }
            }
            let (pass, s) = histogram_gate(&image, t.entropy_bounds, t.spike_bound);
            r.push(Gate::Histogram, pass, vec![("peak_fraction", s.peak_fraction), ("entropy", s.entropy)]);
            r
        })
        .collect()
}

pub const REPORT_HEADER: &str = "# image_id\tverdict\tfailing_gate\tgates";

/// Tab-separated report, one image per line:
/// `image_id <TAB> keep|reject <TAB> gate|- <TAB> gate:pass|fail[:k=v,...];...`
pub fn format_reports(reports: &[QualityReport]) -> String {
    let mut s = String::new();
    s.push_str(REPORT_HEADER);
    s.push('\n');
    for r in reports {
        let (verdict, gate) = match &r.verdict {
            Verdict::Keep => ("keep", "-".to_string()),
            Verdict::Reject { gate, .. } => ("reject", gate.to_string()),
        };
        let gates: Vec<String> = r
            .gates
            .iter()
            .map(|g| {
                let mut e = format!("{}:{}", g.gate, if g.passed { "pass" } else { "fail" });
                if !g.statistics.is_empty() {
                    let kv: Vec<String> = g.statistics.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    let _ = write!(e, ":{}", kv.join(","));
                }
                e
            })
            .collect();
        let _ = writeln!(s, "{}\t{verdict}\t{gate}\t{}", r.image_id, gates.join(";"));
    }
    s
}
