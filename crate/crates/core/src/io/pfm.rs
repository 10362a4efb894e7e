//! Portable float map (PFM) and raw float32 rasters.
//!
//! PFM layout: an ASCII header `Pf` (one channel) or `PF` (three channels), then
//! `<width> <height>`, then a scale whose sign gives the byte order (negative =
//! little-endian). Pixel rows follow bottom-to-top as 32-bit floats. This
//! module always writes little-endian with scale `-1`.
//!
//! Raw depth: `<name>` holds `width*height` float32 values top-to-bottom, and
//! `<name>.hdr` holds `width W`, `height H` and `byte_order little|big` lines.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::Vector3;

use super::IoError;
use crate::geometry::DepthMap;
use crate::raster::Raster;
use crate::scalar::{lit, to_f64, Real};

/// Decoded float raster, rows top-to-bottom, channels interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatRaster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

pub fn encode_pfm(img: &FloatRaster) -> Vec<u8> {
    assert!(img.channels == 1 || img.channels == 3);
    assert_eq!(img.data.len(), img.width * img.height * img.channels);
    let tag = if img.channels == 1 { "Pf" } else { "PF" };
    let mut out = format!("{tag}\n{} {}\n-1.0\n", img.width, img.height).into_bytes();
    let row = img.width * img.channels;
    for y in (0..img.height).rev() {
        for v in &img.data[y * row..(y + 1) * row] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn header_token(reader: &mut impl BufRead) -> Result<String, IoError> {
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(IoError::format("truncated PFM header"));
        }
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            return Ok(t.to_string());
        }
    }
}

pub fn decode_pfm(bytes: &[u8]) -> Result<FloatRaster, IoError> {
    let mut reader = BufReader::new(bytes);
    let channels = match header_token(&mut reader)?.as_str() {
        "Pf" => 1,
        "PF" => 3,
        other => return Err(IoError::format(format!("bad PFM magic `{other}`"))),
    };
    let dims = header_token(&mut reader)?;
    let mut it = dims.split_whitespace();
    let parse_dim = |s: Option<&str>| -> Result<usize, IoError> {
        s.and_then(|s| s.parse().ok())
            .ok_or_else(|| IoError::format(format!("bad PFM dimensions `{dims}`")))
    };
    let width = parse_dim(it.next())?;
    let height = parse_dim(it.next())?;
    let scale: f32 = header_token(&mut reader)?
        .parse()
        .map_err(|_| IoError::format("bad PFM scale"))?;
    if scale == 0.0 {
        return Err(IoError::format("PFM scale must be non-zero"));
    }
    let little = scale < 0.0;
    let row = width * channels;
    let mut payload = Vec::new();
    reader.read_to_end(&mut payload)?;
    if payload.len() < width * height * channels * 4 {
        return Err(IoError::format(format!(
            "PFM payload has {} bytes, expected {}",
            payload.len(),
            width * height * channels * 4
        )));
    }
    let mut data = vec![0f32; row * height];
    for (i, chunk) in payload.chunks_exact(4).take(row * height).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        };
        let file_row = i / row;
        let y = height - 1 - file_row;
        data[y * row + i % row] = v;
    }
    Ok(FloatRaster {
        width,
        height,
        channels,
        data,
    })
}

/// Invalid depth is stored as `0`.
pub fn depth_to_float<T: Real>(depth: &DepthMap<T>) -> FloatRaster {
    FloatRaster {
        width: depth.width(),
        height: depth.height(),
        channels: 1,
        data: depth
            .raster()
            .pixels()
            .iter()
            .map(|d| d.map_or(0.0, |d| to_f64(d) as f32))
            .collect(),
    }
}

pub fn depth_from_float<T: Real>(img: &FloatRaster) -> Result<DepthMap<T>, IoError> {
    if img.channels != 1 {
        return Err(IoError::format("depth PFM must have one channel"));
    }
    Ok(DepthMap::from_values(
        img.width,
        img.height,
        img.data.iter().map(|v| lit::<T>(*v as f64)).collect(),
    ))
}

/// Invalid normals are stored as `(0, 0, 0)`.
pub fn normals_to_float<T: Real>(normals: &Raster<Option<Vector3<T>>>) -> FloatRaster {
    let mut data = Vec::with_capacity(normals.len() * 3);
    for n in normals.pixels() {
        match n {
            Some(n) => data.extend(n.iter().map(|c| to_f64(*c) as f32)),
            None => data.extend([0.0; 3]),
        }
    }
    FloatRaster {
        width: normals.width(),
        height: normals.height(),
        channels: 3,
        data,
    }
}

pub fn normals_from_float<T: Real>(img: &FloatRaster) -> Result<Raster<Option<Vector3<T>>>, IoError> {
    if img.channels != 3 {
        return Err(IoError::format("normal PFM must have three channels"));
    }
    let px = img
        .data
        .chunks_exact(3)
        .map(|c| {
            let v = Vector3::new(lit::<T>(c[0] as f64), lit(c[1] as f64), lit(c[2] as f64));
            (v.norm_squared() > T::zero()).then_some(v)
        })
        .collect();
    Ok(Raster::from_vec(img.width, img.height, px))
}

pub fn write_depth_pfm<T: Real>(path: &Path, depth: &DepthMap<T>) -> Result<(), IoError> {
    let mut f = fs::File::create(path).map_err(|e| IoError::at(path, e))?;
    f.write_all(&encode_pfm(&depth_to_float(depth)))
        .map_err(|e| IoError::at(path, e))
}

pub fn write_normals_pfm<T: Real>(path: &Path, normals: &Raster<Option<Vector3<T>>>) -> Result<(), IoError> {
    let mut f = fs::File::create(path).map_err(|e| IoError::at(path, e))?;
    f.write_all(&encode_pfm(&normals_to_float(normals)))
        .map_err(|e| IoError::at(path, e))
}

/// Reads a depth map from PFM, or from raw float32 when a `.hdr` sidecar exists.
pub fn read_depth<T: Real>(path: &Path) -> Result<DepthMap<T>, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::at(path, e))?;
    let sidecar = {
        let mut s = path.as_os_str().to_owned();
        s.push(".hdr");
        std::path::PathBuf::from(s)
    };
    let img = if bytes.starts_with(b"Pf") || bytes.starts_with(b"PF") {
        decode_pfm(&bytes).map_err(|e| e.with_path(path))?
    } else if sidecar.exists() {
        let hdr = fs::read_to_string(&sidecar).map_err(|e| IoError::at(&sidecar, e))?;
        decode_raw(&bytes, &hdr).map_err(|e| e.with_path(path))?
    } else {
        return Err(IoError::format("not a PFM file and no .hdr sidecar").with_path(path));
    };
    depth_from_float(&img).map_err(|e| e.with_path(path))
}

pub fn read_normals_pfm<T: Real>(path: &Path) -> Result<Raster<Option<Vector3<T>>>, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::at(path, e))?;
    normals_from_float(&decode_pfm(&bytes).map_err(|e| e.with_path(path))?)
}

fn decode_raw(bytes: &[u8], header: &str) -> Result<FloatRaster, IoError> {
    let mut width = None;
    let mut height = None;
    let mut little = true;
    for line in header.lines() {
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some("width"), Some(v)) => width = v.parse().ok(),
            (Some("height"), Some(v)) => height = v.parse().ok(),
            (Some("byte_order"), Some("little")) => little = true,
            (Some("byte_order"), Some("big")) => little = false,
            (Some(k), _) if !k.starts_with('#') => {
                return Err(IoError::format(format!("bad raw header line `{line}`")))
            }
            _ => {}
        }
    }
    let (width, height): (usize, usize) = width
        .zip(height)
        .ok_or_else(|| IoError::format("raw header needs width and height"))?;
    if bytes.len() != width * height * 4 {
        return Err(IoError::format(format!(
            "raw payload has {} bytes, expected {}",
            bytes.len(),
            width * height * 4
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| {
            let b = [c[0], c[1], c[2], c[3]];
            if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();
    Ok(FloatRaster {
        width,
        height,
        channels: 1,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pfm_roundtrip_and_orientation() {
        let img = FloatRaster {
            width: 3,
            height: 2,
            channels: 1,
            data: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        };
        let bytes = encode_pfm(&img);
        assert!(bytes.starts_with(b"Pf\n3 2\n-1.0\n"));
        // first stored row is the bottom image row
        let payload = &bytes[12..];
        assert_eq!(f32::from_le_bytes(payload[0..4].try_into().unwrap()), 4.0);
        assert_eq!(decode_pfm(&bytes).unwrap(), img);
    }

    #[test]
    fn big_endian_pfm() {
        let mut bytes = b"PF\n1 1\n1.0\n".to_vec();
        for v in [0.5f32, -1.0, 2.0] {
            bytes.extend_from_slice(&v.to_be_bytes());
        }
        let img = decode_pfm(&bytes).unwrap();
        assert_eq!(img.data, vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn truncated_payload() {
        let bytes = b"Pf\n2 2\n-1\n\0\0\0\0".to_vec();
        assert!(decode_pfm(&bytes).is_err());
        assert!(decode_pfm(b"P6\n1 1\n255\n").is_err());
    }

    #[test]
    fn depth_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut d = DepthMap::from_fn(4, 3, |x, y| Some(1.0 + x as f64 * 0.5 + y as f64));
        d.set(2, 1, None);
        let p = dir.path().join("d.pfm");
        write_depth_pfm(&p, &d).unwrap();
        let back: DepthMap<f64> = read_depth(&p).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn raw_depth_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.raw");
        let mut bytes = Vec::new();
        for v in [1.0f32, 2.0, 0.0, 4.0] {
            bytes.extend_from_slice(&v.to_be_bytes());
        }
        fs::write(&p, bytes).unwrap();
        fs::write(dir.path().join("d.raw.hdr"), "width 2\nheight 2\nbyte_order big\n").unwrap();
        let d: DepthMap<f64> = read_depth(&p).unwrap();
        assert_eq!(d.get(1, 0), Some(2.0));
        assert_eq!(d.get(0, 1), None);
        assert_eq!(d.get(1, 1), Some(4.0));
    }
}
