use serde::{Deserialize, Serialize};

use super::{Point3, PointCloud};
use crate::error::{Error, Result};

/// Maps raw coordinates into normalized ones: `normalized = (p + translation) * scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub translation: Point3,
    pub scale: f64,
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            translation: Point3::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        (p + self.translation) * self.scale
    }

    pub fn invert(&self, p: &Point3) -> Point3 {
        p / self.scale - self.translation
    }

    pub fn invert_cloud(&self, cloud: &PointCloud) -> PointCloud {
        PointCloud::new(cloud.iter().map(|p| self.invert(p)).collect())
            .expect("inverse transform of a valid cloud is valid")
    }
}

/// Centers the cloud on its centroid and scales it so the farthest point has
/// norm 1, matching the unit template radius.
pub fn normalize_cloud(cloud: &PointCloud) -> Result<(PointCloud, Transform)> {
    let centroid = cloud.centroid();
    let radius = cloud
        .iter()
        .map(|p| (p - centroid).norm())
        .fold(0.0, f64::max);
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let transform = Transform {
        translation: -centroid,
        scale: 1.0 / radius,
    };
    let points = cloud.iter().map(|p| transform.apply(p)).collect();
    Ok((PointCloud::new(points)?, transform))
}

/// Tolerance on the centroid offset accepted as "centered".
pub const CENTROID_TOLERANCE: f64 = 1e-2;
/// Tolerance on `|max norm - 1|`.
pub const SCALE_TOLERANCE: f64 = 1e-6;

/// True when the cloud is (approximately) centered with max norm 1.
pub fn is_normalized(cloud: &PointCloud) -> bool {
    cloud.centroid().norm() <= CENTROID_TOLERANCE
        && (cloud.max_norm() - 1.0).abs() <= SCALE_TOLERANCE
}
