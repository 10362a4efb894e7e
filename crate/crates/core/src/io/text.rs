//! Line-oriented text records.
//!
//! * Pose file: one pose per line, twelve decimals forming the row-major 3×4 `[R | t]`.
//! * Correspondence file: one match per line, `u1 v1 u2 v2 [w]`.
//!
//! Blank lines and `#` comments are skipped.

use std::fmt::Write as _;

use super::IoError;
use crate::camera::{Pixel, Pose};
use crate::geometry::Correspondence;
use crate::scalar::Real;

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        (!t.is_empty() && !t.starts_with('#')).then(|| (i + 1, t.split_whitespace().collect()))
    })
}

fn number<T: Real>(line: usize, s: &str) -> Result<T, IoError> {
    s.parse::<T>()
        .map_err(|_| IoError::format(format!("line {line}: bad number `{s}`")))
}

pub fn format_pose<T: Real>(pose: &Pose<T>) -> String {
    pose.to_row_major()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_pose_line<T: Real>(line: usize, fields: &[&str]) -> Result<Pose<T>, IoError> {
    if fields.len() != 12 {
        return Err(IoError::format(format!(
            "line {line}: expected 12 values, got {}",
            fields.len()
        )));
    }
    let mut v = [T::zero(); 12];
    for (dst, s) in v.iter_mut().zip(fields) {
        *dst = number(line, s)?;
    }
    Pose::from_row_major(&v).map_err(|e| IoError::format(format!("line {line}: {e}")))
}

pub fn write_poses<T: Real>(poses: &[Pose<T>]) -> String {
    let mut s = String::new();
    for p in poses {
        let _ = writeln!(s, "{}", format_pose(p));
    }
    s
}

pub fn parse_poses<T: Real>(text: &str) -> Result<Vec<Pose<T>>, IoError> {
    records(text)
        .map(|(line, fields)| parse_pose_line(line, &fields))
        .collect()
}

pub fn write_correspondences<T: Real>(matches: &[Correspondence<T>]) -> String {
    let mut s = String::new();
    for m in matches {
        let _ = write!(s, "{} {} {} {}", m.p1.u, m.p1.v, m.p2.u, m.p2.v);
        if let Some(w) = m.weight {
            let _ = write!(s, " {w}");
        }
        s.push('\n');
    }
    s
}

pub fn parse_correspondences<T: Real>(text: &str) -> Result<Vec<Correspondence<T>>, IoError> {
    records(text)
        .map(|(line, f)| {
            if f.len() != 4 && f.len() != 5 {
                return Err(IoError::format(format!(
                    "line {line}: expected `u1 v1 u2 v2 [w]`"
                )));
            }
            Ok(Correspondence {
                p1: Pixel::new(number(line, f[0])?, number(line, f[1])?),
                p2: Pixel::new(number(line, f[2])?, number(line, f[3])?),
                weight: f.get(4).map(|s| number(line, s)).transpose()?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn pose_file_roundtrip() {
        let poses = vec![
            Pose::identity(),
            Pose::from_rotation_vector(&Vector3::new(0.1, 0.2, -0.3), Vector3::new(1.5, -2.0, 0.25)),
        ];
        let text = write_poses(&poses);
        let back: Vec<Pose<f64>> = parse_poses(&text).unwrap();
        assert_eq!(back, poses);
        assert_eq!(write_poses(&back), text);
    }

    #[test]
    fn pose_errors() {
        assert!(parse_poses::<f64>("1 0 0 0\n").is_err());
        assert!(parse_poses::<f64>("1 0 0 0 0 -1 0 0 0 0 1 0\n").is_err());
    }

    #[test]
    fn correspondences_roundtrip() {
        let text = "# matches\n1 2 3 4\n5.5 6 7 8 0.25\n";
        let m: Vec<Correspondence<f64>> = parse_correspondences(text).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[1].weight, Some(0.25));
        assert_eq!(write_correspondences(&m), "1 2 3 4\n5.5 6 7 8 0.25\n");
        assert!(parse_correspondences::<f64>("1 2 3\n").is_err());
    }
}
