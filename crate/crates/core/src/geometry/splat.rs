use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Point3, PointCloud};
use crate::error::{Error, Result};

/// Replaces every centroid by `n_total / |centroids|` samples of an isotropic
/// Gaussian centered on it. Samples of one centroid are contiguous in the
/// output, in centroid order.
pub fn gaussian_splatter(
    centroids: &PointCloud,
    n_total: usize,
    sigma: f64,
    seed: u64,
) -> Result<PointCloud> {
    let m = centroids.len();
    if n_total < m || !n_total.is_multiple_of(m) {
        return Err(Error::invalid(format!(
            "{n_total} points cannot be split evenly over {m} centroids"
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!(
            "splat sigma must be positive, got {sigma}"
        )));
    }
    let per = n_total / m;
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_total);
    for c in centroids {
        for _ in 0..per {
            let jitter = Point3::new(
                normal.sample(&mut rng),
                normal.sample(&mut rng),
                normal.sample(&mut rng),
            );
            out.push(c + jitter);
        }
    }
    PointCloud::new(out)
}
