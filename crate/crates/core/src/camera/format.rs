//! Key-value text format for camera models, one model per file.
//!
//! ```text
//! # pinhole                  # CAHVOR
//! fx 800                     C 0 0 0
//! fy 800                     A 0 0 1
//! cx 320                     H 800 0 320
//! cy 240                     V 0 800 240
//! width 640                  O 0 0 1
//! height 480                 R 0 0 0
//! k0 0                       pixel_size 1
//! k1 0                       width 640      (optional)
//! k2 0                       height 480     (optional)
//! pixel_size 1
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Values are written with
//! the shortest decimal representation that parses back to the same number, so
//! writing a parsed file reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::Vector3;

use super::{CahvorModel, CameraError, Intrinsics};
use crate::scalar::Real;

const INTRINSICS_KEYS: [&str; 10] = [
    "fx",
    "fy",
    "cx",
    "cy",
    "width",
    "height",
    "k0",
    "k1",
    "k2",
    "pixel_size",
];
const CAHVOR_KEYS: [&str; 9] = ["C", "A", "H", "V", "O", "R", "pixel_size", "width", "height"];

fn parse_fields<'a>(
    text: &'a str,
    allowed: &[&str],
) -> Result<BTreeMap<&'a str, (usize, Vec<&'a str>)>, CameraError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        if !allowed.contains(&key) {
            return Err(CameraError::Parse {
                line: i + 1,
                message: format!("unknown key `{key}`"),
            });
        }
        if out.insert(key, (i + 1, parts.collect())).is_some() {
            return Err(CameraError::Parse {
                line: i + 1,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(out)
}

fn scalar<T: Real>(
    fields: &BTreeMap<&str, (usize, Vec<&str>)>,
    key: &str,
    default: Option<T>,
) -> Result<T, CameraError> {
    match fields.get(key) {
        Some((line, vals)) => {
            if vals.len() != 1 {
                return Err(CameraError::Parse {
                    line: *line,
                    message: format!("`{key}` expects one value"),
                });
            }
            vals[0].parse::<T>().map_err(|_| CameraError::Parse {
                line: *line,
                message: format!("bad number `{}`", vals[0]),
            })
        }
        None => default.ok_or_else(|| CameraError::MissingKey(key.to_string())),
    }
}

fn integer(
    fields: &BTreeMap<&str, (usize, Vec<&str>)>,
    key: &str,
) -> Result<Option<u32>, CameraError> {
    match fields.get(key) {
        Some((line, vals)) if vals.len() == 1 => {
            vals[0].parse::<u32>().map(Some).map_err(|_| CameraError::Parse {
                line: *line,
                message: format!("bad integer `{}`", vals[0]),
            })
        }
        Some((line, _)) => Err(CameraError::Parse {
            line: *line,
            message: format!("`{key}` expects one value"),
        }),
        None => Ok(None),
    }
}

fn vector<T: Real>(
    fields: &BTreeMap<&str, (usize, Vec<&str>)>,
    key: &str,
) -> Result<Vector3<T>, CameraError> {
    let (line, vals) = fields
        .get(key)
        .ok_or_else(|| CameraError::MissingKey(key.to_string()))?;
    if vals.len() != 3 {
        return Err(CameraError::Parse {
            line: *line,
            message: format!("`{key}` expects three values"),
        });
    }
    let mut v = Vector3::zeros();
    for (i, s) in vals.iter().enumerate() {
        v[i] = s.parse::<T>().map_err(|_| CameraError::Parse {
            line: *line,
            message: format!("bad number `{s}`"),
        })?;
    }
    Ok(v)
}

pub fn parse_intrinsics<T: Real>(text: &str) -> Result<Intrinsics<T>, CameraError> {
    let f = parse_fields(text, &INTRINSICS_KEYS)?;
    let dim = |k: &str| integer(&f, k)?.ok_or_else(|| CameraError::MissingKey(k.to_string()));
    Intrinsics {
        fx: scalar(&f, "fx", None)?,
        fy: scalar(&f, "fy", None)?,
        cx: scalar(&f, "cx", None)?,
        cy: scalar(&f, "cy", None)?,
        width: dim("width")?,
        height: dim("height")?,
        k: [
            scalar(&f, "k0", Some(T::zero()))?,
            scalar(&f, "k1", Some(T::zero()))?,
            scalar(&f, "k2", Some(T::zero()))?,
        ],
        pixel_size: scalar(&f, "pixel_size", Some(T::one()))?,
    }
    .validated()
}

pub fn write_intrinsics<T: Real>(k: &Intrinsics<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "fx {}", k.fx);
    let _ = writeln!(s, "fy {}", k.fy);
    let _ = writeln!(s, "cx {}", k.cx);
    let _ = writeln!(s, "cy {}", k.cy);
    let _ = writeln!(s, "width {}", k.width);
    let _ = writeln!(s, "height {}", k.height);
    let _ = writeln!(s, "k0 {}", k.k[0]);
    let _ = writeln!(s, "k1 {}", k.k[1]);
    let _ = writeln!(s, "k2 {}", k.k[2]);
    let _ = writeln!(s, "pixel_size {}", k.pixel_size);
    s
}

pub fn parse_cahvor<T: Real>(text: &str) -> Result<CahvorModel<T>, CameraError> {
    let f = parse_fields(text, &CAHVOR_KEYS)?;
    Ok(CahvorModel {
        c: vector(&f, "C")?,
        a: vector(&f, "A")?,
        h: vector(&f, "H")?,
        v: vector(&f, "V")?,
        o: vector(&f, "O")?,
        r: vector(&f, "R")?,
        pixel_size: scalar(&f, "pixel_size", Some(T::one()))?,
        width: integer(&f, "width")?,
        height: integer(&f, "height")?,
    })
}

pub fn write_cahvor<T: Real>(m: &CahvorModel<T>) -> String {
    let mut s = String::new();
    for (key, v) in [("C", m.c), ("A", m.a), ("H", m.h), ("V", m.v), ("O", m.o), ("R", m.r)] {
        let _ = writeln!(s, "{key} {} {} {}", v[0], v[1], v[2]);
    }
    let _ = writeln!(s, "pixel_size {}", m.pixel_size);
    if let Some(w) = m.width {
        let _ = writeln!(s, "width {w}");
    }
    if let Some(h) = m.height {
        let _ = writeln!(s, "height {h}");
    }
    s
}
