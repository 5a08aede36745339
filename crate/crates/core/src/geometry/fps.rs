use super::PointCloud;
use crate::error::{Error, Result};

/// Greedy farthest point sampling.
///
/// Starts from `start_index`, then repeatedly selects the point whose
/// distance to the already-selected set is largest. Ties go to the lowest
/// index, so the result is a deterministic function of the inputs.
pub fn farthest_point_sampling(
    cloud: &PointCloud,
    m: usize,
    start_index: usize,
) -> Result<Vec<usize>> {
    farthest_point_sampling_with_distances(cloud, m, start_index).map(|(idx, _)| idx)
}

/// Same as [`farthest_point_sampling`], also returning each selected point's
/// distance to the selected set at the moment it was picked. The first entry
/// is `+inf`; the rest are non-increasing.
pub fn farthest_point_sampling_with_distances(
    cloud: &PointCloud,
    m: usize,
    start_index: usize,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let n = cloud.len();
    if m == 0 || m > n {
        return Err(Error::invalid(format!("cannot sample {m} of {n} points")));
    }
    if start_index >= n {
        return Err(Error::invalid(format!(
            "start index {start_index} out of range for {n} points"
        )));
    }
    let pts = cloud.points();
    // squared distance of every point to the selected set
    let mut nearest = vec![f64::INFINITY; n];
    let mut selected = Vec::with_capacity(m);
    let mut distances = Vec::with_capacity(m);
    let mut current = start_index;
    let mut current_d2 = f64::INFINITY;
    for _ in 0..m {
        selected.push(current);
        distances.push(current_d2.sqrt());
        nearest[current] = -1.0;
        let anchor = pts[current];
        let mut best = usize::MAX;
        let mut best_d2 = -1.0;
        for (i, p) in pts.iter().enumerate() {
            if nearest[i] < 0.0 {
                continue;
            }
            let d2 = (p - anchor).norm_squared();
            if d2 < nearest[i] {
                nearest[i] = d2;
            }
            if nearest[i] > best_d2 {
                best_d2 = nearest[i];
                best = i;
            }
        }
        current = best;
        current_d2 = best_d2;
    }
    Ok((selected, distances))
}
