//! Mask files: one entry per line.
//!
//! ```text
//! # comment
//! 17                 # template index
//! 18 0.5             # template index with a soft weight
//! box -1 0 -1 1 1 1            # template-space box
//! box -1 0 -1 1 1 1 recon      # box over a reconstruction
//! ```

use std::path::Path;

use crate::correspond::RegionMask;
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, PointCloud, SphereTemplate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskSpace {
    Template,
    Recon,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MaskEntry {
    Index { index: usize, weight: Option<f64> },
    Box { region: Aabb, space: MaskSpace },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MaskSpec {
    pub entries: Vec<MaskEntry>,
}

impl MaskSpec {
    pub fn uses_recon_space(&self) -> bool {
        self.entries.iter().any(|e| {
            matches!(
                e,
                MaskEntry::Box {
                    space: MaskSpace::Recon,
                    ..
                }
            )
        })
    }

    /// Builds the mask; `recon` is required only for reconstruction-space boxes.
    pub fn resolve(
        &self,
        template: &SphereTemplate,
        recon: Option<&PointCloud>,
    ) -> Result<RegionMask> {
        let n = template.len();
        let mut weights = vec![0.0f64; n];
        let mut soft = false;
        for entry in &self.entries {
            match entry {
                MaskEntry::Index { index, weight } => {
                    let slot = weights.get_mut(*index).ok_or_else(|| {
                        Error::invalid(format!("mask index {index} out of range for {n} points"))
                    })?;
                    soft |= weight.is_some();
                    *slot = slot.max(weight.unwrap_or(1.0));
                }
                MaskEntry::Box { region, space } => {
                    let cloud = match space {
                        MaskSpace::Template => template.cloud(),
                        MaskSpace::Recon => recon.ok_or_else(|| {
                            Error::invalid("a reconstruction-space box needs a reconstruction")
                        })?,
                    };
                    if cloud.len() != n {
                        return Err(Error::invalid(
                            "reconstruction size differs from template size",
                        ));
                    }
                    for (w, p) in weights.iter_mut().zip(cloud.iter()) {
                        if region.contains(p) {
                            *w = 1.0;
                        }
                    }
                }
            }
        }
        if soft {
            RegionMask::from_weights(weights)
        } else {
            Ok(RegionMask {
                selected: weights.iter().map(|&w| w > 0.0).collect(),
                soft_weights: None,
            })
        }
    }
}

pub fn parse_mask(path: &Path, text: &str) -> Result<MaskSpec> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| Error::Format {
            path: path.to_path_buf(),
            location: format!("line {}", lineno + 1),
            message: msg,
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| fail(format!("`{s}` is not a number")))
        };
        if words[0] == "box" {
            if words.len() != 7 && words.len() != 8 {
                return Err(fail(
                    "box needs six coordinates and an optional space".into(),
                ));
            }
            let c: Vec<f64> = words[1..7].iter().map(|w| num(w)).collect::<Result<_>>()?;
            let region = Aabb::new(Point3::new(c[0], c[1], c[2]), Point3::new(c[3], c[4], c[5]));
            if (0..3).any(|a| region.min[a] > region.max[a]) {
                return Err(fail("box min exceeds max".into()));
            }
            let space = match words.get(7) {
                None | Some(&"template") => MaskSpace::Template,
                Some(&"recon") => MaskSpace::Recon,
                Some(other) => return Err(fail(format!("unknown box space `{other}`"))),
            };
            entries.push(MaskEntry::Box { region, space });
        } else {
            if words.len() > 2 {
                return Err(fail("expected an index and an optional weight".into()));
            }
            let index = words[0]
                .parse::<usize>()
                .map_err(|_| fail(format!("`{}` is not an index", words[0])))?;
            let weight = words.get(1).map(|w| num(w)).transpose()?;
            if let Some(w) = weight {
                if !(0.0..=1.0).contains(&w) {
                    return Err(fail(format!("weight {w} outside [0, 1]")));
                }
            }
            entries.push(MaskEntry::Index { index, weight });
        }
    }
    Ok(MaskSpec { entries })
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<MaskSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mask(path, &text)
}
