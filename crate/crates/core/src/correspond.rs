//! Template-indexed correspondence, color transfer and offset blending.
//!
//! All representations fitted with the same template share point indices:
//! point `i` of any reconstruction grew out of template point `i`. Editing
//! therefore reduces to mixing offset fields index by index.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitter::{CloudSphereRep, OffsetField, RegGraph};
use crate::geometry::{Aabb, Point3, PointCloud, SphereTemplate};
use crate::metrics::pairwise_sum;

/// Per-template-point selection weights for editing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionMask {
    pub selected: Vec<bool>,
    /// Overrides `selected` when present; values in `[0, 1]`.
    pub soft_weights: Option<Vec<f64>>,
}

impl RegionMask {
    pub fn empty(n: usize) -> Self {
        Self {
            selected: vec![false; n],
            soft_weights: None,
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            selected: vec![true; n],
            soft_weights: None,
        }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = Self::empty(n);
        for &i in indices {
            *mask.selected.get_mut(i).ok_or_else(|| {
                Error::invalid(format!("mask index {i} out of range for {n} points"))
            })? = true;
        }
        Ok(mask)
    }

    /// Selects the points of `cloud` (template or reconstruction) inside `region`.
    pub fn from_box(cloud: &PointCloud, region: &Aabb) -> Self {
        Self {
            selected: cloud.iter().map(|p| region.contains(p)).collect(),
            soft_weights: None,
        }
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::invalid("soft mask weights must lie in [0, 1]"));
        }
        Ok(Self {
            selected: weights.iter().map(|&w| w > 0.0).collect(),
            soft_weights: Some(weights),
        })
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        match &self.soft_weights {
            Some(w) => w[i],
            None => self.selected[i] as u8 as f64,
        }
    }

    pub fn union(&self, other: &RegionMask) -> Result<RegionMask> {
        if self.len() != other.len() {
            return Err(Error::invalid("cannot combine masks of different lengths"));
        }
        let weights: Vec<f64> = (0..self.len())
            .map(|i| self.weight(i).max(other.weight(i)))
            .collect();
        if self.soft_weights.is_none() && other.soft_weights.is_none() {
            Ok(Self {
                selected: weights.iter().map(|&w| w > 0.0).collect(),
                soft_weights: None,
            })
        } else {
            Self::from_weights(weights)
        }
    }

    /// Softens the boundary with `passes` rounds of weighted one-ring
    /// averaging over the template graph.
    pub fn smoothed(&self, graph: &RegGraph, passes: usize) -> Result<RegionMask> {
        if graph.len() != self.len() {
            return Err(Error::invalid("mask and graph sizes differ"));
        }
        let mut w: Vec<f64> = (0..self.len()).map(|i| self.weight(i)).collect();
        for _ in 0..passes {
            w = (0..w.len())
                .map(|i| {
                    let (num, den) = graph
                        .neighbors(i)
                        .fold((w[i], 1.0), |(num, den), (j, omega)| {
                            (num + omega * w[j], den + omega)
                        });
                    (num / den).clamp(0.0, 1.0)
                })
                .collect();
        }
        Self::from_weights(w)
    }
}

/// The identity index map between template and reconstruction, with the
/// displacement of every point.
#[derive(Clone, Debug, PartialEq)]
pub struct Correspondence {
    displacements: Vec<Point3>,
}

impl Correspondence {
    /// Reconstruction index matched with template index `i`.
    pub fn partner(&self, i: usize) -> usize {
        i
    }

    pub fn displacements(&self) -> &[Point3] {
        &self.displacements
    }

    pub fn len(&self) -> usize {
        self.displacements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.displacements.is_empty()
    }

    /// Mean displacement length.
    pub fn shift(&self) -> f64 {
        let d: Vec<f64> = self.displacements.iter().map(|v| v.norm()).collect();
        pairwise_sum(&d) / d.len() as f64
    }

    /// Applies the displacements to the template.
    pub fn recompose(&self, template: &SphereTemplate) -> Result<PointCloud> {
        if template.len() != self.len() {
            return Err(Error::invalid(
                "template size differs from correspondence size",
            ));
        }
        PointCloud::new(
            template
                .points()
                .iter()
                .zip(&self.displacements)
                .map(|(q, d)| q + d)
                .collect(),
        )
    }
}

pub fn correspondence(rep: &CloudSphereRep) -> Correspondence {
    let recon = rep.reconstruct(0).expect("stage 0 always exists");
    Correspondence {
        displacements: recon
            .iter()
            .zip(rep.template().points())
            .map(|(r, q)| r - q)
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["x", "y", "z"][self.index()]
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            _ => Err(Error::invalid(format!("unknown axis `{s}`"))),
        }
    }
}

/// Ramp value in `[0, 1]` of every template point along `axis`: the minimum
/// coordinate maps to 0 and the maximum to 1.
pub fn color_ramp(template: &SphereTemplate, axis: Axis) -> Vec<f64> {
    let a = axis.index();
    let (lo, hi) = template
        .points()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[a]), hi.max(p[a]))
        });
    let span = hi - lo;
    template
        .points()
        .iter()
        .map(|p| if span > 0.0 { (p[a] - lo) / span } else { 0.0 })
        .collect()
}

/// Blue, cyan, green, yellow, red at ramp values 0, .25, .5, .75, 1.
pub fn colormap(t: f64) -> [u8; 3] {
    const STOPS: [[f64; 3]; 5] = [
        [0.0, 0.0, 1.0],
        [0.0, 1.0, 1.0],
        [0.0, 1.0, 0.0],
        [1.0, 1.0, 0.0],
        [1.0, 0.0, 0.0],
    ];
    let t = t.clamp(0.0, 1.0) * 4.0;
    let i = (t.floor() as usize).min(3);
    let f = t - i as f64;
    let mut rgb = [0u8; 3];
    for c in 0..3 {
        let v = STOPS[i][c] * (1.0 - f) + STOPS[i + 1][c] * f;
        rgb[c] = (v * 255.0).round() as u8;
    }
    rgb
}

/// Per-point colors of the template along `axis`. Because reconstructions
/// share template indices, the same vector colors any of them.
pub fn color_code(template: &SphereTemplate, axis: Axis) -> Vec<[u8; 3]> {
    color_ramp(template, axis)
        .into_iter()
        .map(colormap)
        .collect()
}

/// Representation whose stage `k in stages` offsets are
/// `(1 - t w_i) d_i(source) + t w_i d_i(target)`; other stages keep the source.
pub fn blend_rep(
    source: &CloudSphereRep,
    target: &CloudSphereRep,
    mask: &RegionMask,
    t: f64,
    stages: &[usize],
) -> Result<CloudSphereRep> {
    if !source.shares_template(target) {
        return Err(Error::invalid(
            "source and target were fitted with different templates",
        ));
    }
    if mask.len() != source.len() {
        return Err(Error::invalid(format!(
            "mask covers {} points, template has {}",
            mask.len(),
            source.len()
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("blend factor {t} outside [0, 1]")));
    }
    let mut offsets: Vec<OffsetField> = source.offsets().to_vec();
    for &k in stages {
        source.check_stage(k)?;
        target.check_stage(k)?;
        let (src, dst) = (&source.offsets()[k].0, &target.offsets()[k].0);
        for (i, d) in offsets[k].0.iter_mut().enumerate() {
            let w = t * mask.weight(i);
            *d = src[i] * (1.0 - w) + dst[i] * w;
        }
    }
    CloudSphereRep::new(source.template().clone(), offsets)
}

/// Stage-0 reconstruction of [`blend_rep`].
pub fn blend_offsets(
    source: &CloudSphereRep,
    target: &CloudSphereRep,
    mask: &RegionMask,
    t: f64,
    stages: &[usize],
) -> Result<PointCloud> {
    blend_rep(source, target, mask, t, stages)?.reconstruct(0)
}

/// Transfers the donor's masked region into every representation, over all
/// stages the two share.
pub fn co_edit(
    reps: &[CloudSphereRep],
    donor: &CloudSphereRep,
    mask: &RegionMask,
    t: f64,
) -> Result<Vec<PointCloud>> {
    reps.par_iter()
        .map(|rep| {
            let stages: Vec<usize> = (0..rep.stage_count().min(donor.stage_count())).collect();
            blend_offsets(rep, donor, mask, t, &stages)
        })
        .collect()
}
