use serde::{Deserialize, Serialize};

use super::{Point3, PointCloud};
use crate::error::{Error, Result};

/// The fixed spherical cloud every shape is deformed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereTemplate {
    cloud: PointCloud,
    radius: f64,
}

impl SphereTemplate {
    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn points(&self) -> &[Point3] {
        self.cloud.points()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Rebuilds a template from stored coordinates, e.g. when deserializing.
    /// Every point must lie on the sphere of the given radius.
    pub fn from_points(points: Vec<Point3>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!(
                "template radius must be positive, got {radius}"
            )));
        }
        let cloud = PointCloud::new(points)?;
        if let Some(i) = cloud.iter().position(|q| (q.norm() - radius).abs() > 1e-9) {
            return Err(Error::invalid(format!(
                "template point {i} is not on the sphere"
            )));
        }
        Ok(Self { cloud, radius })
    }
}

/// Places `n` points on a sphere with the golden-spiral (Fibonacci) lattice.
///
/// Point `i` sits at height `z = r (1 - (2i + 1) / n)` and longitude
/// `i * golden_angle`, which gives near-uniform density and is fully
/// deterministic.
pub fn generate_sphere_template(n: usize, radius: f64) -> Result<SphereTemplate> {
    if n < 4 {
        return Err(Error::invalid(format!(
            "template needs at least 4 points, got {n}"
        )));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid(format!(
            "template radius must be positive, got {radius}"
        )));
    }
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let points = (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let ring = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            let unit = Point3::new(ring * phi.cos(), ring * phi.sin(), z);
            // renormalize so rounding in sin/cos cannot push points off the sphere
            unit / unit.norm() * radius
        })
        .collect();
    Ok(SphereTemplate {
        cloud: PointCloud::new(points)?,
        radius,
    })
}
