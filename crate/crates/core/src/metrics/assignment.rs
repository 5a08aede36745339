use super::pairwise_sum;
use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Largest cloud size `emd` solves exactly by default.
pub const EMD_EXACT_CAP: usize = 4096;

/// Minimum-cost perfect matching on an `n x n` cost function by the
/// shortest augmenting path method with dual potentials (Hungarian /
/// Jonker-Volgenant family), `O(n^3)`.
///
/// Returns `assignment[row] = column`. Costs are evaluated on demand so no
/// `n x n` matrix is stored.
pub fn min_cost_assignment<F>(n: usize, cost: F) -> Vec<usize>
where
    F: Fn(usize, usize) -> f64,
{
    // 1-based arrays with column 0 as the virtual source, as in the classic
    // formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_to = vec![f64::INFINITY; n + 1];
    let mut used = vec![false; n + 1];

    for row in 1..=n {
        row_of[0] = row;
        let mut col0 = 0usize;
        min_to.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[col0] = true;
            let r0 = row_of[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost(r0 - 1, col - 1) - u[r0] - v[col];
                if reduced < min_to[col] {
                    min_to[col] = reduced;
                    way[col] = col0;
                }
                if min_to[col] < delta {
                    delta = min_to[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[row_of[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_to[col] -= delta;
                }
            }
            col0 = col1;
            if row_of[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            row_of[col0] = row_of[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for col in 1..=n {
        if row_of[col] > 0 {
            assignment[row_of[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Earth mover distance between equal-size clouds: the mean Euclidean
/// distance under the optimal bijection.
pub fn emd(p: &PointCloud, q: &PointCloud) -> Result<f64> {
    emd_with_cap(p, q, EMD_EXACT_CAP)
}

pub fn emd_with_cap(p: &PointCloud, q: &PointCloud, cap: usize) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "emd needs equal cardinalities, got {} and {}",
            p.len(),
            q.len()
        )));
    }
    let n = p.len();
    if n > cap {
        return Err(Error::UnsupportedSize {
            size: n,
            limit: cap,
        });
    }
    let (pp, qp) = (p.points(), q.points());
    let matching = min_cost_assignment(n, |i, j| (pp[i] - qp[j]).norm());
    let dists: Vec<f64> = matching
        .iter()
        .enumerate()
        .map(|(i, &j)| (pp[i] - qp[j]).norm())
        .collect();
    Ok(pairwise_sum(&dists) / n as f64)
}
