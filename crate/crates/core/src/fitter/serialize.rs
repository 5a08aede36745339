//! Binary container for representations and the JSON sidecar for fits.
//!
//! Layout, all little-endian:
//!
//! | bytes   | content                                        |
//! |---------|------------------------------------------------|
//! | 8       | magic `CSPHERE\0`                              |
//! | 4       | version (u32)                                  |
//! | 8       | point count `n` (u64)                          |
//! | 4       | coarsest stage index `K` (u32)                 |
//! | 8       | template radius (f64)                          |
//! | 24 n    | template coordinates, x y z per point (f64)    |
//! | 24 n    | offset field `D^k` for k = 0..=K, same layout  |

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CloudSphereRep, FitConfig, History, OffsetField};
use crate::error::{Error, Result};
use crate::geometry::{Point3, SphereTemplate, Transform};

pub const REP_MAGIC: [u8; 8] = *b"CSPHERE\0";
pub const REP_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 4 + 8;

fn put_points(out: &mut Vec<u8>, points: &[Point3]) {
    for p in points {
        for c in p.iter() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "representation truncated at byte {} (need {len} more)",
                    self.pos
                ))
            })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn points(&mut self, n: usize) -> Result<Vec<Point3>> {
        (0..n)
            .map(|_| Ok(Point3::new(self.f64()?, self.f64()?, self.f64()?)))
            .collect()
    }
}

impl CloudSphereRep {
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len();
        let mut out = Vec::with_capacity(HEADER_LEN + 24 * n * (1 + self.stage_count()));
        out.extend_from_slice(&REP_MAGIC);
        out.extend_from_slice(&REP_VERSION.to_le_bytes());
        out.extend_from_slice(&(n as u64).to_le_bytes());
        out.extend_from_slice(&(self.coarsest_stage() as u32).to_le_bytes());
        out.extend_from_slice(&self.template().radius().to_le_bytes());
        put_points(&mut out, self.template().points());
        for field in self.offsets() {
            put_points(&mut out, field.as_slice());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != REP_MAGIC {
            return Err(Error::invalid("not a representation file (bad magic)"));
        }
        let version = r.u32()?;
        if version != REP_VERSION {
            return Err(Error::invalid(format!(
                "unsupported representation version {version}"
            )));
        }
        let n = usize::try_from(r.u64()?).map_err(|_| Error::invalid("point count overflows"))?;
        let k = r.u32()? as usize;
        let radius = r.f64()?;
        let expected = n
            .checked_mul(24 * (k + 2))
            .and_then(|b| b.checked_add(HEADER_LEN))
            .ok_or_else(|| Error::invalid("header sizes overflow"))?;
        if bytes.len() != expected {
            return Err(Error::invalid(format!(
                "representation of {n} points and {} stages needs {expected} bytes, file has {}",
                k + 1,
                bytes.len()
            )));
        }
        let template = SphereTemplate::from_points(r.points(n)?, radius)?;
        let offsets = (0..=k)
            .map(|_| r.points(n).map(OffsetField))
            .collect::<Result<Vec<_>>>()?;
        CloudSphereRep::new(template, offsets)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Everything about a fit that is not the representation itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSidecar {
    pub config: FitConfig,
    /// Raw-to-normalized transform of the fitted target, when known.
    pub transform: Option<Transform>,
    pub history: History,
}

impl FitSidecar {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).expect("sidecar serializes");
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }
}
