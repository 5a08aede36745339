//! Point-cloud types and the preprocessing that feeds the fitter: template
//! generation, normalization, farthest point sampling, Gaussian splatting,
//! the abstraction pyramid and solid voxelization.

mod fps;
mod normalize;
mod pyramid;
pub mod shapes;
mod splat;
mod template;
mod voxel;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fps::{farthest_point_sampling, farthest_point_sampling_with_distances};
pub use normalize::{is_normalized, normalize_cloud, Transform};
pub use pyramid::{build_pyramid, AbstractionPyramid, DEFAULT_SIGMA_FACTOR};
pub use splat::gaussian_splatter;
pub use template::{generate_sphere_template, SphereTemplate};
pub use voxel::{exterior, voxelize_solid, voxelize_surface, VoxelGrid};

pub type Point3 = Vector3<f64>;

/// Ordered, non-empty list of finite points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Point3>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point cloud must not be empty"));
        }
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        Ok(Self { points })
    }

    pub fn from_xyz(coords: &[[f64; 3]]) -> Result<Self> {
        Self::new(
            coords
                .iter()
                .map(|c| Point3::new(c[0], c[1], c[2]))
                .collect(),
        )
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point3> {
        self.points.iter()
    }

    pub fn centroid(&self) -> Point3 {
        let sum = self.points.iter().fold(Point3::zeros(), |acc, p| acc + p);
        sum / self.points.len() as f64
    }

    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn bounds(&self) -> Aabb {
        let mut min = self.points[0];
        let mut max = self.points[0];
        for p in &self.points[1..] {
            min = min.inf(p);
            max = max.sup(p);
        }
        Aabb { min, max }
    }

    pub fn translated(&self, offset: &Point3) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| p + offset).collect(),
        }
    }
}

impl std::ops::Index<usize> for PointCloud {
    type Output = Point3;

    fn index(&self, i: usize) -> &Point3 {
        &self.points[i]
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a Point3;
    type IntoIter = std::slice::Iter<'a, Point3>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn extent(&self) -> Point3 {
        self.max - self.min
    }

    pub fn is_degenerate(&self) -> bool {
        (0..3).any(|a| !(self.max[a] > self.min[a]))
    }

    /// Cube sharing this box's center whose edge is the largest extent,
    /// enlarged on every side so a `resolution`-cell grid over it leaves
    /// one empty cell of padding around the original box.
    pub fn padded_cube(&self, resolution: usize) -> Aabb {
        let center = (self.min + self.max) * 0.5;
        let mut edge = self.extent().max();
        if !(edge > 0.0) {
            edge = 1.0;
        }
        let cell = edge / (resolution.saturating_sub(2).max(1)) as f64;
        let half = Point3::repeat(0.5 * edge + cell);
        Aabb {
            min: center - half,
            max: center + half,
        }
    }
}
