//! ASCII PLY point clouds.
//!
//! One `vertex` element with properties `x y z red green blue view u v cam_depth scale`.
//! Colours are floats in `[0, 1]`; a missing Gaussian scale is written as `nan`.
//! Values use the shortest round-trip decimal form, so write → read is exact.

use std::fmt::Write as _;

use nalgebra::Vector3;

use super::IoError;
use crate::camera::Pixel;
use crate::geometry::{CloudPoint, PointCloud};
use crate::scalar::Real;

const PROPERTIES: [(&str, &str); 11] = [
    ("double", "x"),
    ("double", "y"),
    ("double", "z"),
    ("double", "red"),
    ("double", "green"),
    ("double", "blue"),
    ("uint", "view"),
    ("double", "u"),
    ("double", "v"),
    ("double", "cam_depth"),
    ("double", "scale"),
];

pub fn write_ply<T: Real>(cloud: &PointCloud<T>) -> String {
    let mut s = format!("ply\nformat ascii 1.0\nelement vertex {}\n", cloud.len());
    for (ty, name) in PROPERTIES {
        let _ = writeln!(s, "property {ty} {name}");
    }
    s.push_str("end_header\n");
    for p in &cloud.points {
        let scale = p.scale.map(|v| v.to_string()).unwrap_or_else(|| "nan".into());
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {} {} {} {}",
            p.position.x,
            p.position.y,
            p.position.z,
            p.color[0],
            p.color[1],
            p.color[2],
            p.view_id,
            p.source_pixel.u,
            p.source_pixel.v,
            p.cam_depth,
            scale
        );
    }
    s
}

pub fn parse_ply<T: Real>(text: &str) -> Result<PointCloud<T>, IoError> {
    let bad = |line: usize, m: &str| IoError::format(format!("line {line}: {m}"));
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut count = None;
    let mut props = Vec::new();
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(bad(1, "missing `ply` magic")),
    }
    loop {
        let (n, l) = lines.next().ok_or_else(|| IoError::format("unterminated header"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        match f.as_slice() {
            ["end_header"] => break,
            ["format", "ascii", _] | ["comment", ..] | [] => {}
            ["format", other, ..] => return Err(bad(n, &format!("unsupported format `{other}`"))),
            ["element", "vertex", c] => count = Some(c.parse::<usize>().map_err(|_| bad(n, "bad vertex count"))?),
            ["property", _, name] => props.push(name.to_string()),
            _ => return Err(bad(n, &format!("unexpected header line `{l}`"))),
        }
    }
    let expected: Vec<&str> = PROPERTIES.iter().map(|p| p.1).collect();
    if props != expected {
        return Err(IoError::format(format!("expected properties {}", expected.join(" "))));
    }
    let count = count.ok_or_else(|| IoError::format("missing vertex element"))?;
    let mut points = Vec::with_capacity(count);
    for (n, l) in lines.filter(|(_, l)| !l.is_empty()) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != PROPERTIES.len() {
            return Err(bad(n, &format!("expected {} values", PROPERTIES.len())));
        }
        let num = |i: usize| f[i].parse::<T>().map_err(|_| bad(n, &format!("bad number `{}`", f[i])));
        let scale = num(10)?;
        points.push(CloudPoint {
            position: Vector3::new(num(0)?, num(1)?, num(2)?),
            color: [num(3)?, num(4)?, num(5)?],
            view_id: f[6].parse().map_err(|_| bad(n, "bad view id"))?,
            source_pixel: Pixel::new(num(7)?, num(8)?),
            cam_depth: num(9)?,
            scale: scale.is_finite().then_some(scale),
        });
    }
    if points.len() != count {
        return Err(IoError::format(format!("header declares {count} vertices, found {}", points.len())));
    }
    Ok(PointCloud { points })
}
