use std::collections::BTreeMap;

use super::pairwise_sum;
use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud, SphereTemplate, VoxelGrid};

pub const DEFAULT_SPREAD_RESOLUTION: usize = 8;

fn check_paired(template: &SphereTemplate, recon: &PointCloud) -> Result<()> {
    if template.len() != recon.len() {
        return Err(Error::invalid(format!(
            "template has {} points but reconstruction has {}",
            template.len(),
            recon.len()
        )));
    }
    Ok(())
}

/// Mean over template voxel cells (holding at least two points) of the trace
/// of the covariance of the corresponding reconstructed points.
///
/// Low values mean points that start close on the template stay close in
/// the reconstruction.
pub fn spread(
    template: &SphereTemplate,
    recon: &PointCloud,
    grid_resolution: usize,
) -> Result<f64> {
    check_paired(template, recon)?;
    let grid = VoxelGrid::new(grid_resolution, template.cloud().bounds())?;
    let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, q) in template.points().iter().enumerate() {
        let c = grid
            .cell_of(q)
            .expect("template points lie inside their own bounds");
        cells
            .entry(grid.index(c[0], c[1], c[2]))
            .or_default()
            .push(i);
    }
    let traces: Vec<f64> = cells
        .values()
        .filter(|members| members.len() >= 2)
        .map(|members| {
            let m = members.len() as f64;
            let mean = members
                .iter()
                .fold(Point3::zeros(), |acc, &i| acc + recon[i])
                / m;
            members
                .iter()
                .map(|&i| (recon[i] - mean).norm_squared())
                .sum::<f64>()
                / m
        })
        .collect();
    if traces.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "no template cell at resolution {grid_resolution} holds two points"
        )));
    }
    Ok(pairwise_sum(&traces) / traces.len() as f64)
}

/// Mean Euclidean displacement of each reconstructed point from its template point.
pub fn shift(template: &SphereTemplate, recon: &PointCloud) -> Result<f64> {
    check_paired(template, recon)?;
    let d: Vec<f64> = template
        .points()
        .iter()
        .zip(recon.points())
        .map(|(t, r)| (r - t).norm())
        .collect();
    Ok(pairwise_sum(&d) / d.len() as f64)
}
