use std::fmt::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

/// Whitespace-separated text, one point per line; columns past the third
/// are ignored, as are blank lines and `#` comments.
pub(super) fn parse(path: &Path, bytes: &[u8]) -> Result<Vec<Point3>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        location: format!("byte {}", e.valid_up_to()),
        message: "file is not valid UTF-8 text".into(),
    })?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fail = |message: String| Error::Format {
            path: path.to_path_buf(),
            location: format!("line {}", lineno + 1),
            message,
        };
        let mut fields = line.split_whitespace();
        let mut c = [0.0; 3];
        for slot in c.iter_mut() {
            let tok = fields
                .next()
                .ok_or_else(|| fail("expected three coordinates".into()))?;
            *slot = tok
                .parse()
                .map_err(|_| fail(format!("`{tok}` is not a number")))?;
        }
        points.push(Point3::new(c[0], c[1], c[2]));
    }
    Ok(points)
}

pub(super) fn encode(cloud: &PointCloud, colors: Option<&[[u8; 3]]>) -> Vec<u8> {
    let mut out = String::new();
    for (i, p) in cloud.iter().enumerate() {
        write!(out, "{} {} {}", p.x, p.y, p.z).unwrap();
        if let Some(c) = colors {
            write!(out, " {} {} {}", c[i][0], c[i][1], c[i][2]).unwrap();
        }
        out.push('\n');
    }
    out.into_bytes()
}
