//! Point cloud files (XYZ text, ASCII and binary little-endian PLY) and
//! editing mask files.

mod mask;
mod ply;
mod xyz;

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

pub use mask::{parse_mask, read_mask, MaskEntry, MaskSpace, MaskSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    Xyz,
    PlyAscii,
    PlyBinaryLe,
}

impl CloudFormat {
    /// Guess from the file extension; `.ply` means binary little-endian.
    pub fn from_extension(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "xyz" | "txt" => Some(CloudFormat::Xyz),
            "ply" => Some(CloudFormat::PlyBinaryLe),
            _ => None,
        }
    }
}

impl FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xyz" => Ok(CloudFormat::Xyz),
            "ply-ascii" => Ok(CloudFormat::PlyAscii),
            "ply-binary-le" | "ply" => Ok(CloudFormat::PlyBinaryLe),
            _ => Err(Error::invalid(format!(
                "unknown format `{s}` (expected xyz, ply-ascii or ply-binary-le)"
            ))),
        }
    }
}

/// Reads a point cloud. With `format == None` the content decides: files
/// starting with `ply` are parsed as PLY (either encoding), anything else as XYZ.
pub fn read_cloud(path: impl AsRef<Path>, format: Option<CloudFormat>) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let is_ply = bytes.starts_with(b"ply");
    let points = match format {
        Some(CloudFormat::Xyz) => xyz::parse(path, &bytes)?,
        Some(CloudFormat::PlyAscii) | Some(CloudFormat::PlyBinaryLe) => {
            ply::parse(path, &bytes, format)?
        }
        None if is_ply => ply::parse(path, &bytes, None)?,
        None => xyz::parse(path, &bytes)?,
    };
    if points.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    PointCloud::new(points).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        location: "vertex data".into(),
        message: e.to_string(),
    })
}

/// Writes a point cloud, optionally with per-point RGB colors.
pub fn write_cloud(
    cloud: &PointCloud,
    path: impl AsRef<Path>,
    format: CloudFormat,
    colors: Option<&[[u8; 3]]>,
) -> Result<()> {
    let path = path.as_ref();
    if let Some(c) = colors {
        if c.len() != cloud.len() {
            return Err(Error::invalid(format!(
                "{} colors for {} points",
                c.len(),
                cloud.len()
            )));
        }
    }
    let bytes = encode_cloud(cloud, format, colors);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// The exact bytes [`write_cloud`] produces.
pub fn encode_cloud(
    cloud: &PointCloud,
    format: CloudFormat,
    colors: Option<&[[u8; 3]]>,
) -> Vec<u8> {
    match format {
        CloudFormat::Xyz => xyz::encode(cloud, colors),
        CloudFormat::PlyAscii => ply::encode(cloud, colors, false),
        CloudFormat::PlyBinaryLe => ply::encode(cloud, colors, true),
    }
}

/// Per-vertex colors stored in a PLY file, if it has red/green/blue.
pub fn read_colors(path: impl AsRef<Path>) -> Result<Option<Vec<[u8; 3]>>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    ply::parse_colors(path, &bytes)
}
