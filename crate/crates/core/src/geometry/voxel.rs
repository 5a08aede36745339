use super::{Aabb, Point3, PointCloud};
use crate::error::{Error, Result};

/// Dense cubic occupancy grid, `resolution` cells per axis, x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    resolution: usize,
    bounds: Aabb,
    occupancy: Vec<bool>,
}

impl VoxelGrid {
    pub fn new(resolution: usize, bounds: Aabb) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::invalid("voxel resolution must be positive"));
        }
        if bounds.is_degenerate() {
            return Err(Error::invalid(format!(
                "degenerate voxel bounds {bounds:?}"
            )));
        }
        Ok(Self {
            resolution,
            bounds,
            occupancy: vec![false; resolution * resolution * resolution],
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.resolution + j) * self.resolution + i
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let r = self.resolution;
        [idx % r, (idx / r) % r, idx / (r * r)]
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.occupancy[self.index(i, j, k)]
    }

    /// Cell containing `p`, or `None` outside the bounds. Points on the max
    /// face fall in the last cell.
    pub fn cell_of(&self, p: &Point3) -> Option<[usize; 3]> {
        if !self.bounds.contains(p) {
            return None;
        }
        let ext = self.bounds.extent();
        let r = self.resolution;
        let mut cell = [0; 3];
        for a in 0..3 {
            let t = (p[a] - self.bounds.min[a]) / ext[a] * r as f64;
            cell[a] = (t.floor() as usize).min(r - 1);
        }
        Some(cell)
    }

    pub fn set(&mut self, cell: [usize; 3]) {
        let idx = self.index(cell[0], cell[1], cell[2]);
        self.occupancy[idx] = true;
    }
}

/// Marks every cell holding at least one point.
pub fn voxelize_surface(cloud: &PointCloud, resolution: usize, bounds: Aabb) -> Result<VoxelGrid> {
    let mut grid = VoxelGrid::new(resolution, bounds)?;
    for (i, p) in cloud.iter().enumerate() {
        let cell = grid.cell_of(p).ok_or_else(|| {
            Error::invalid(format!("point {i} {p:?} lies outside the voxel bounds"))
        })?;
        grid.set(cell);
    }
    Ok(grid)
}

/// Empty cells reachable from the grid boundary through face-adjacent empty cells.
pub fn exterior(surface: &VoxelGrid) -> Vec<bool> {
    let r = surface.resolution;
    let occ = &surface.occupancy;
    let mut outside = vec![false; occ.len()];
    let mut stack = Vec::new();
    for idx in 0..occ.len() {
        let [i, j, k] = surface.coords(idx);
        let on_boundary = [i, j, k].iter().any(|&c| c == 0 || c == r - 1);
        if on_boundary && !occ[idx] {
            outside[idx] = true;
            stack.push(idx);
        }
    }
    while let Some(idx) = stack.pop() {
        let [i, j, k] = surface.coords(idx);
        let c = [i as isize, j as isize, k as isize];
        for (axis, step) in [(0, -1), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)] {
            let mut n = c;
            n[axis] += step;
            if n.iter().any(|&v| v < 0 || v >= r as isize) {
                continue;
            }
            let nidx = surface.index(n[0] as usize, n[1] as usize, n[2] as usize);
            if !occ[nidx] && !outside[nidx] {
                outside[nidx] = true;
                stack.push(nidx);
            }
        }
    }
    outside
}

/// Solid occupancy: every cell that is not exterior to the point surface.
pub fn voxelize_solid(cloud: &PointCloud, resolution: usize, bounds: Aabb) -> Result<VoxelGrid> {
    if resolution < 4 {
        return Err(Error::invalid(format!(
            "voxel resolution must be at least 4, got {resolution}"
        )));
    }
    let mut grid = voxelize_surface(cloud, resolution, bounds)?;
    let outside = exterior(&grid);
    for (cell, out) in grid.occupancy.iter_mut().zip(outside) {
        *cell = !out;
    }
    Ok(grid)
}
