use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::PipelineError;
use crate::imgfilter::Thresholds;
use crate::trajectory::TrajectoryKind;

pub const SCENE_HEADER: &str = "stereoforge-scene 1";
pub const BATCH_HEADER: &str = "stereoforge-batch 1";

#[derive(Debug, Clone, PartialEq)]
pub enum IntrinsicsSource {
    Pinhole(PathBuf),
    Cahvor(PathBuf),
}

/// One stereo scene and its externally produced artifacts.
///
/// ```text
/// stereoforge-scene 1
/// id <scene id>
/// left <png>            right <png>
/// intrinsics <file>     | cahvor <file>      (exactly one)
/// depth_left <pfm>      depth_right <pfm>
/// correspondences <file>
/// exclude <file>        (optional, image ids)
/// threshold <name> <value>   (optional, repeatable)
/// ```
/// Relative paths resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneManifest {
    pub id: String,
    pub left: PathBuf,
    pub right: PathBuf,
    pub intrinsics: IntrinsicsSource,
    pub depth_left: PathBuf,
    pub depth_right: PathBuf,
    pub correspondences: PathBuf,
    pub exclusions: Option<PathBuf>,
    pub thresholds: Vec<(String, f64)>,
}

fn err(path: Option<&Path>, line: usize, message: impl Into<String>) -> PipelineError {
    PipelineError::Manifest {
        path: path.map(Path::to_path_buf),
        line,
        message: message.into(),
    }
}

/// Non-blank, non-comment lines split into key and remainder.
fn records(text: &str) -> impl Iterator<Item = (usize, &str, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            return None;
        }
        let (k, v) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        Some((i + 1, k, v.trim()))
    })
}

fn check_header(text: &str, header: &str, path: Option<&Path>) -> Result<(), PipelineError> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    match first {
        Some(h) if h == header => Ok(()),
        Some(h) if h.split_whitespace().next() == header.split_whitespace().next() => {
            Err(err(path, 1, format!("unsupported manifest version `{h}`")))
        }
        _ => Err(err(path, 1, format!("expected header `{header}`"))),
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn threshold(line: usize, v: &str, path: Option<&Path>) -> Result<(String, f64), PipelineError> {
    let mut f = v.split_whitespace();
    let (Some(name), Some(value), None) = (f.next(), f.next(), f.next()) else {
        return Err(err(path, line, "expected `threshold <name> <value>`"));
    };
    let value: f64 = value.parse().map_err(|_| err(path, line, format!("bad value `{value}`")))?;
    apply_threshold(&mut Thresholds::default(), name, value).map_err(|m| err(path, line, m))?;
    Ok((name.to_string(), value))
}

/// Sets one named threshold.
pub(crate) fn apply_threshold(t: &mut Thresholds, name: &str, value: f64) -> Result<(), String> {
    match name {
        "min_dim" => t.min_dim = value as u32,
        "min_bytes" => t.min_bytes = value as u64,
        "var_threshold" => t.var_threshold = value,
        "max_hamming" => t.max_hamming = value as u32,
        "lap_var_threshold" => t.lap_var_threshold = value,
        "spike_bound" => t.spike_bound = value,
        "entropy_min" => t.entropy_bounds.0 = value,
        "entropy_max" => t.entropy_bounds.1 = value,
        _ => return Err(format!("unknown threshold `{name}`")),
    }
    Ok(())
}

pub(crate) fn thresholds_with(base: Thresholds, overrides: &[(String, f64)]) -> Thresholds {
    let mut t = base;
    for (k, v) in overrides {
        let _ = apply_threshold(&mut t, k, *v);
    }
    t
}

impl SceneManifest {
    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        Self::parse_at(text, base, None)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = super::read_text(path)?;
        Self::parse_at(&text, path.parent().unwrap_or(Path::new(".")), Some(path))
    }

    fn parse_at(text: &str, base: &Path, path: Option<&Path>) -> Result<Self, PipelineError> {
        check_header(text, SCENE_HEADER, path)?;
        let mut id = None;
        let (mut left, mut right, mut dl, mut dr, mut corr, mut excl) = (None, None, None, None, None, None);
        let mut intr: Option<IntrinsicsSource> = None;
        let mut thresholds = Vec::new();
        for (line, k, v) in records(text).skip(1) {
            if v.is_empty() {
                return Err(err(path, line, format!("`{k}` needs a value")));
            }
            let slot = match k {
                "id" => &mut id,
                "left" => &mut left,
                "right" => &mut right,
                "depth_left" => &mut dl,
                "depth_right" => &mut dr,
                "correspondences" => &mut corr,
                "exclude" => &mut excl,
                "intrinsics" | "cahvor" => {
                    if intr.is_some() {
                        return Err(err(path, line, "exactly one of `intrinsics` or `cahvor` is allowed"));
                    }
                    let p = resolve(base, v);
                    intr = Some(if k == "cahvor" {
                        IntrinsicsSource::Cahvor(p)
                    } else {
                        IntrinsicsSource::Pinhole(p)
                    });
                    continue;
                }
                "threshold" => {
                    thresholds.push(threshold(line, v, path)?);
                    continue;
                }
                _ => return Err(err(path, line, format!("unknown key `{k}`"))),
            };
            if slot.is_some() {
                return Err(err(path, line, format!("duplicate key `{k}`")));
            }
            *slot = Some(v.to_string());
        }
        let need = |v: Option<String>, k: &str| v.ok_or_else(|| err(path, 0, format!("missing key `{k}`")));
        let id = need(id, "id")?;
        if id.contains(['/', '\\', '\t']) || id == "." || id == ".." {
            return Err(err(path, 0, format!("scene id `{id}` must be a plain name")));
        }
        Ok(Self {
            id,
            left: resolve(base, &need(left, "left")?),
            right: resolve(base, &need(right, "right")?),
            intrinsics: intr.ok_or_else(|| err(path, 0, "missing key `intrinsics` or `cahvor`"))?,
            depth_left: resolve(base, &need(dl, "depth_left")?),
            depth_right: resolve(base, &need(dr, "depth_right")?),
            correspondences: resolve(base, &need(corr, "correspondences")?),
            exclusions: excl.map(|e| resolve(base, &e)),
            thresholds,
        })
    }

    /// Serializes with paths exactly as stored.
    pub fn to_text(&self) -> String {
        let mut s = format!("{SCENE_HEADER}\n");
        let p = |p: &Path| p.display().to_string();
        let _ = writeln!(s, "id {}", self.id);
        let _ = writeln!(s, "left {}", p(&self.left));
        let _ = writeln!(s, "right {}", p(&self.right));
        match &self.intrinsics {
            IntrinsicsSource::Pinhole(f) => {
                let _ = writeln!(s, "intrinsics {}", p(f));
            }
            IntrinsicsSource::Cahvor(f) => {
                let _ = writeln!(s, "cahvor {}", p(f));
            }
        }
        let _ = writeln!(s, "depth_left {}", p(&self.depth_left));
        let _ = writeln!(s, "depth_right {}", p(&self.depth_right));
        let _ = writeln!(s, "correspondences {}", p(&self.correspondences));
        if let Some(e) = &self.exclusions {
            let _ = writeln!(s, "exclude {}", p(e));
        }
        for (k, v) in &self.thresholds {
            let _ = writeln!(s, "threshold {k} {v}");
        }
        s
    }
}

/// One trajectory to render per scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub frames: usize,
    /// Metres (or radians for angular kinds) at the reference depth; `None` uses the default.
    pub extent: Option<f64>,
}

impl std::str::FromStr for TrajectorySpec {
    type Err = String;

    /// `kind[:frames[:extent]]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut f = s.split(':');
        let kind: TrajectoryKind = f.next().unwrap_or("").parse().map_err(|e: crate::trajectory::TrajectoryError| e.to_string())?;
        let frames = match f.next() {
            Some(n) => n.parse().map_err(|_| format!("bad frame count `{n}`"))?,
            None => crate::trajectory::DEFAULT_FRAMES,
        };
        let extent = f.next().map(|e| e.parse().map_err(|_| format!("bad extent `{e}`"))).transpose()?;
        if f.next().is_some() {
            return Err(format!("expected kind[:frames[:extent]], got `{s}`"));
        }
        Ok(Self { kind, frames, extent })
    }
}

/// Scenes plus the trajectories rendered for each.
///
/// ```text
/// stereoforge-batch 1
/// scene <scene manifest>          (repeatable, processed in order)
/// trajectory <kind[:frames[:extent]]>   (repeatable)
/// threshold <name> <value>        (batch defaults; scenes may override)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct BatchManifest {
    pub scenes: Vec<PathBuf>,
    pub trajectories: Vec<TrajectorySpec>,
    pub thresholds: Vec<(String, f64)>,
}

impl BatchManifest {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = super::read_text(path)?;
        Self::parse_at(&text, path.parent().unwrap_or(Path::new(".")), Some(path))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        Self::parse_at(text, base, None)
    }

    fn parse_at(text: &str, base: &Path, path: Option<&Path>) -> Result<Self, PipelineError> {
        check_header(text, BATCH_HEADER, path)?;
        let mut b = BatchManifest {
            scenes: Vec::new(),
            trajectories: Vec::new(),
            thresholds: Vec::new(),
        };
        for (line, k, v) in records(text).skip(1) {
            match k {
                "scene" if !v.is_empty() => b.scenes.push(resolve(base, v)),
                "trajectory" => b.trajectories.push(v.parse().map_err(|m: String| err(path, line, m))?),
                "threshold" => b.thresholds.push(threshold(line, v, path)?),
                _ => return Err(err(path, line, format!("unexpected `{k}`"))),
            }
        }
        Ok(b)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{BATCH_HEADER}\n");
        for p in &self.scenes {
            let _ = writeln!(s, "scene {}", p.display());
        }
        for t in &self.trajectories {
            let _ = write!(s, "trajectory {}:{}", t.kind, t.frames);
            if let Some(e) = t.extent {
                let _ = write!(s, ":{e}");
            }
            s.push('\n');
        }
        for (k, v) in &self.thresholds {
            let _ = writeln!(s, "threshold {k} {v}");
        }
        s
    }
}
