//! File formats: PFM/raw depth, PNG images, ASCII PLY clouds and line-oriented text records.

pub mod pfm;
pub mod ply;
pub mod text;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::raster::{Raster, RgbImage};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{}{message}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Format {
        path: Option<PathBuf>,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl IoError {
    pub fn format(message: impl Into<String>) -> Self {
        IoError::Format {
            path: None,
            message: message.into(),
        }
    }

    pub fn at(path: &Path, source: std::io::Error) -> Self {
        IoError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn with_path(self, path: &Path) -> Self {
        match self {
            IoError::Format { message, .. } => IoError::Format {
                path: Some(path.to_path_buf()),
                message,
            },
            IoError::Io(source) => IoError::File {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        }
    }
}

/// Decodes any supported image file to 8-bit RGB.
pub fn read_rgb8(path: &Path) -> Result<Raster<[u8; 3]>, IoError> {
    let img = image::open(path).map_err(|source| IoError::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb.pixels().map(|p| p.0).collect();
    Ok(Raster::from_vec(w as usize, h as usize, data))
}

pub fn read_rgb<T: Real>(path: &Path) -> Result<RgbImage<T>, IoError> {
    Ok(read_rgb8(path)?.to_real())
}

pub fn encode_png(img: &Raster<[u8; 3]>) -> Result<Vec<u8>, IoError> {
    let flat: Vec<u8> = img.pixels().iter().flat_map(|p| *p).collect();
    let buf = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, flat)
        .ok_or_else(|| IoError::format("image buffer size mismatch"))?;
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| IoError::format(format!("png encode: {e}")))?;
    Ok(out.into_inner())
}

pub fn write_png8(path: &Path, img: &Raster<[u8; 3]>) -> Result<(), IoError> {
    std::fs::write(path, encode_png(img)?).map_err(|e| IoError::at(path, e))
}

pub fn write_png<T: Real>(path: &Path, img: &RgbImage<T>) -> Result<(), IoError> {
    write_png8(path, &img.to_u8())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let img = Raster::from_fn(5, 4, |x, y| [(x * 40) as u8, (y * 60) as u8, 7]);
        let p = dir.path().join("a.png");
        write_png8(&p, &img).unwrap();
        assert_eq!(read_rgb8(&p).unwrap(), img);
    }

    #[test]
    fn missing_image_reports_path() {
        let err = read_rgb8(Path::new("/nonexistent/x.png")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.png"));
    }
}
