use std::fmt;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{SynthError, StereoCapture};
use crate::camera::{Pixel, Pose};
use crate::raster::{gaussian_blur, luma, Raster, RgbImage};
use crate::scalar::{lit, to_f64, Real};

/// A planted defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// Gaussian blur of the image.
    Blur { sigma: f64 },
    /// Replace every channel by the luminance.
    Grayscale,
    /// Exact copy.
    Duplicate,
    /// Nearest-neighbour downscale to at most `size` pixels per side.
    Thumbnail { size: usize },
    /// Every pixel set to one grey level.
    Constant { value: f64 },
    /// Right-view depth `d ↦ scale·d + bias`.
    DepthAffine { scale: f64, bias: f64 },
    /// Right pose multiplied by a random rotation (radians) and translation (metres).
    PoseNoise { rotation_sigma: f64, translation_sigma: f64 },
    /// Fraction of correspondences whose right pixel is replaced by a uniform random one.
    Outliers { fraction: f64 },
}

impl Perturbation {
    pub fn name(&self) -> &'static str {
        match self {
            Perturbation::Blur { .. } => "blur",
            Perturbation::Grayscale => "grayscale",
            Perturbation::Duplicate => "duplicate",
            Perturbation::Thumbnail { .. } => "thumbnail",
            Perturbation::Constant { .. } => "constant",
            Perturbation::DepthAffine { .. } => "depth_affine",
            Perturbation::PoseNoise { .. } => "pose_noise",
            Perturbation::Outliers { .. } => "outliers",
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::BadSpec(format!("{}: {m}", self.name())));
        match *self {
            Perturbation::Blur { sigma } if !(sigma > 0.0 && sigma.is_finite()) => bad("sigma must be positive"),
            Perturbation::Thumbnail { size: 0 } => bad("size must be positive"),
            Perturbation::Constant { value } if !(0.0..=1.0).contains(&value) => bad("value outside [0, 1]"),
            Perturbation::DepthAffine { scale, bias } if !(scale > 0.0 && scale.is_finite() && bias.is_finite()) => {
                bad("scale must be positive and finite")
            }
            Perturbation::PoseNoise {
                rotation_sigma,
                translation_sigma,
            } if !(rotation_sigma >= 0.0 && translation_sigma >= 0.0) => bad("sigmas must be non-negative"),
            Perturbation::Outliers { fraction } if !(0.0..=1.0).contains(&fraction) => bad("fraction outside [0, 1]"),
            _ => Ok(()),
        }
    }
}

/// Parses `name[:p1[,p2]]`, e.g. `blur:2`, `grayscale`, `depth_affine:2,0.5`.
impl std::str::FromStr for Perturbation {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, args) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let nums: Vec<f64> = args
            .split(',')
            .filter(|a| !a.trim().is_empty())
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| SynthError::BadSpec(format!("bad parameters in `{s}`")))?;
        let want = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(SynthError::BadSpec(format!("`{name}` takes {n} parameter(s), got {}", nums.len())))
            }
        };
        let p = match name.replace('-', "_").as_str() {
            "blur" => want(1).map(|_| Perturbation::Blur { sigma: nums[0] }),
            "grayscale" => want(0).map(|_| Perturbation::Grayscale),
            "duplicate" => want(0).map(|_| Perturbation::Duplicate),
            "thumbnail" => want(1).map(|_| Perturbation::Thumbnail {
                size: nums[0].max(0.0) as usize,
            }),
            "constant" => want(1).map(|_| Perturbation::Constant { value: nums[0] }),
            "depth_affine" => want(2).map(|_| Perturbation::DepthAffine {
                scale: nums[0],
                bias: nums[1],
            }),
            "pose_noise" => want(2).map(|_| Perturbation::PoseNoise {
                rotation_sigma: nums[0],
                translation_sigma: nums[1],
            }),
            "outliers" => want(1).map(|_| Perturbation::Outliers { fraction: nums[0] }),
            _ => Err(SynthError::BadSpec(format!("unknown perturbation `{name}`"))),
        }?;
        p.validate()?;
        Ok(p)
    }
}

/// What was actually applied, for assertions.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationRecord {
    pub spec: Perturbation,
    pub seed: u64,
    /// Correspondence indices replaced by outliers, ascending.
    pub planted_indices: Vec<usize>,
    /// Right-pose error `noisy ∘ true⁻¹` for pose noise.
    pub pose_delta: Option<Pose<f64>>,
}

impl fmt::Display for PerturbationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind {}", self.spec.name())?;
        writeln!(f, "seed {}", self.seed)?;
        match self.spec {
            Perturbation::Blur { sigma } => writeln!(f, "sigma {sigma}")?,
            Perturbation::Thumbnail { size } => writeln!(f, "size {size}")?,
            Perturbation::Constant { value } => writeln!(f, "value {value}")?,
            Perturbation::DepthAffine { scale, bias } => writeln!(f, "scale {scale}\nbias {bias}")?,
            Perturbation::PoseNoise {
                rotation_sigma,
                translation_sigma,
            } => writeln!(f, "rotation_sigma {rotation_sigma}\ntranslation_sigma {translation_sigma}")?,
            Perturbation::Outliers { fraction } => writeln!(f, "fraction {fraction}")?,
            Perturbation::Grayscale | Perturbation::Duplicate => {}
        }
        if !self.planted_indices.is_empty() {
            let idx: Vec<String> = self.planted_indices.iter().map(|i| i.to_string()).collect();
            writeln!(f, "planted {}", idx.join(" "))?;
        }
        if let Some(p) = &self.pose_delta {
            writeln!(f, "pose_delta {}", crate::io::text::format_pose(p))?;
        }
        Ok(())
    }
}

fn record(spec: Perturbation, seed: u64) -> PerturbationRecord {
    PerturbationRecord {
        spec,
        seed,
        planted_indices: Vec::new(),
        pose_delta: None,
    }
}

/// Applies an image-level perturbation.
pub fn perturb_image<T: Real>(img: &RgbImage<T>, spec: Perturbation, seed: u64) -> Result<(RgbImage<T>, PerturbationRecord), SynthError> {
    spec.validate()?;
    let out = match spec {
        Perturbation::Blur { sigma } => gaussian_blur(img, sigma),
        Perturbation::Grayscale => img.map(|p| [luma(p); 3]),
        Perturbation::Duplicate => img.clone(),
        Perturbation::Thumbnail { size } => {
            let (w, h) = (img.width(), img.height());
            let f = (size as f64 / w.max(h) as f64).min(1.0);
            let (tw, th) = (((w as f64 * f).round() as usize).max(1), ((h as f64 * f).round() as usize).max(1));
            Raster::from_fn(tw, th, |x, y| *img.get(x * w / tw, y * h / th))
        }
        Perturbation::Constant { value } => Raster::filled(img.width(), img.height(), [lit::<T>(value); 3]),
        other => {
            return Err(SynthError::BadSpec(format!("{} does not apply to an image", other.name())));
        }
    };
    Ok((out, record(spec, seed)))
}

/// Minimum distance between a planted outlier and the true match, pixels.
pub const OUTLIER_MIN_OFFSET: f64 = 20.0;

/// Applies a geometry-level perturbation; image-level ones act on the left image.
pub fn perturb_capture<T: Real>(cap: &StereoCapture<T>, spec: Perturbation, seed: u64) -> Result<(StereoCapture<T>, PerturbationRecord), SynthError> {
    spec.validate()?;
    let mut out = cap.clone();
    let mut rec = record(spec, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec {
        Perturbation::DepthAffine { scale, bias } => {
            out.right_depth = cap.right_depth.affine(lit(scale), lit(bias));
        }
        Perturbation::PoseNoise {
            rotation_sigma,
            translation_sigma,
        } => {
            let mut gauss = |s: f64| -> Vector3<f64> {
                if s == 0.0 {
                    return Vector3::zeros();
                }
                let n = Normal::new(0.0, s).expect("finite sigma");
                Vector3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng))
            };
            let omega = gauss(rotation_sigma);
            let t = gauss(translation_sigma);
            let delta = Pose::from_rotation_vector(&omega, t);
            out.right_pose = delta.cast::<T>().compose(&cap.right_pose);
            rec.pose_delta = Some(delta);
        }
        Perturbation::Outliers { fraction } => {
            let n = cap.correspondences.len();
            let k = (fraction * n as f64).round() as usize;
            let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
            idx.sort_unstable();
            let (w, h) = (cap.intrinsics.width as f64, cap.intrinsics.height as f64);
            for &i in &idx {
                let truth = cap.correspondences[i].p2;
                let p = loop {
                    let u = rng.random_range(0.0..w - 1.0);
                    let v = rng.random_range(0.0..h - 1.0);
                    let (du, dv) = (u - to_f64(truth.u), v - to_f64(truth.v));
                    if (du * du + dv * dv).sqrt() >= OUTLIER_MIN_OFFSET {
                        break Pixel::new(lit(u), lit(v));
                    }
                };
                out.correspondences[i].p2 = p;
            }
            rec.planted_indices = idx;
        }
        image_level => {
            let (img, r) = perturb_image(&cap.left, image_level, seed)?;
            out.left = img;
            rec = r;
        }
    }
    Ok((out, rec))
}
