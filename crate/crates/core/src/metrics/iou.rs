use crate::error::Result;
use crate::geometry::{voxelize_solid, Aabb, PointCloud};

/// Shared grid bounds for comparing two clouds: a cube around the union
/// bounding box with one cell of padding on every side.
pub fn iou_bounds(p: &PointCloud, q: &PointCloud, resolution: usize) -> Aabb {
    p.bounds().union(&q.bounds()).padded_cube(resolution)
}

/// Intersection over union of the solid voxelizations of two clouds on a
/// common grid.
pub fn iou_solid(p: &PointCloud, q: &PointCloud, resolution: usize) -> Result<f64> {
    let bounds = iou_bounds(p, q, resolution);
    let a = voxelize_solid(p, resolution, bounds)?;
    let b = voxelize_solid(q, resolution, bounds)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.occupancy().iter().zip(b.occupancy()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}
