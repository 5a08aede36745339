use serde::{Deserialize, Serialize};

use super::{farthest_point_sampling_with_distances, gaussian_splatter, PointCloud};
use crate::error::{Error, Result};

pub const DEFAULT_SIGMA_FACTOR: f64 = 0.25;

/// Multi-resolution supervision targets. Level 0 is the input cloud, level
/// `k >= 1` is an FPS abstraction to `centroid_counts[k]` centroids splatted
/// back to the input cardinality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbstractionPyramid {
    levels: Vec<PointCloud>,
    centroid_counts: Vec<usize>,
    sigma_per_level: Vec<f64>,
}

impl AbstractionPyramid {
    pub fn levels(&self) -> &[PointCloud] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> Option<&PointCloud> {
        self.levels.get(k)
    }

    /// `N^0..N^K`; `N^0` equals the cloud size.
    pub fn centroid_counts(&self) -> &[usize] {
        &self.centroid_counts
    }

    /// Splat sigma per level; 0 for level 0.
    pub fn sigma_per_level(&self) -> &[f64] {
        &self.sigma_per_level
    }

    /// Number of abstraction levels above the input, i.e. `K`.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn cardinality(&self) -> usize {
        self.levels[0].len()
    }
}

fn level_seed(seed: u64, level: usize) -> u64 {
    seed ^ (level as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Builds the pyramid from a normalized cloud.
///
/// `centroid_counts` lists `N^1..N^K` (strictly decreasing, each dividing the
/// cloud size). Each level runs FPS from index 0 on the input and splats with
/// `sigma = sigma_factor * spacing`, where spacing is the smallest pairwise
/// distance among the selected centroids.
pub fn build_pyramid(
    cloud: &PointCloud,
    centroid_counts: &[usize],
    sigma_factor: f64,
    seed: u64,
) -> Result<AbstractionPyramid> {
    let n = cloud.len();
    if !(sigma_factor > 0.0) || !sigma_factor.is_finite() {
        return Err(Error::invalid(format!(
            "sigma factor must be positive, got {sigma_factor}"
        )));
    }
    let mut previous = n;
    for (i, &c) in centroid_counts.iter().enumerate() {
        if c == 0 || c >= previous {
            return Err(Error::invalid(format!(
                "centroid counts must be strictly decreasing and below {n}, got {centroid_counts:?}"
            )));
        }
        if !n.is_multiple_of(c) {
            return Err(Error::invalid(format!(
                "level {} count {c} does not divide {n}",
                i + 1
            )));
        }
        previous = c;
    }

    let mut levels = vec![cloud.clone()];
    let mut counts = vec![n];
    let mut sigmas = vec![0.0];
    for (i, &count) in centroid_counts.iter().enumerate() {
        let level = i + 1;
        // one extra pick yields the coverage radius for the single-centroid case
        let probe = (count + 1).min(n);
        let (idx, dist) = farthest_point_sampling_with_distances(cloud, probe, 0)?;
        let spacing = if count >= 2 { dist[count - 1] } else { dist[1] };
        let sigma = sigma_factor * spacing;
        if !(sigma > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "level {level} centroids have zero spacing (duplicate points)"
            )));
        }
        let centroids = PointCloud::new(idx[..count].iter().map(|&j| cloud[j]).collect())?;
        let splatted = gaussian_splatter(&centroids, n, sigma, level_seed(seed, level))?;
        debug_assert_eq!(splatted.len(), n);
        levels.push(splatted);
        counts.push(count);
        sigmas.push(sigma);
    }
    Ok(AbstractionPyramid {
        levels,
        centroid_counts: counts,
        sigma_per_level: sigmas,
    })
}
