use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{Point3, PointCloud};
use crate::spatial::NearestNeighbors;

/// Sum by a fixed balanced binary tree, so the result does not depend on
/// how the terms were produced (sequentially or in parallel).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// For each query point, the index and squared distance of its nearest
/// neighbor in `index`.
pub fn nearest_assignments(queries: &[Point3], index: &NearestNeighbors) -> Vec<(usize, f64)> {
    queries.par_iter().map(|q| index.nearest(q)).collect()
}

/// Mean squared nearest-neighbor distance from `from` into `to`.
fn directional(from: &[Point3], to: &NearestNeighbors) -> f64 {
    let d2: Vec<f64> = nearest_assignments(from, to)
        .into_iter()
        .map(|(_, d)| d)
        .collect();
    pairwise_sum(&d2) / from.len() as f64
}

/// Chamfer distance with per-cloud normalization:
/// `mean_p min_q |p - q|^2 + mean_q min_p |q - p|^2`.
pub fn chamfer(p: &PointCloud, q: &PointCloud) -> Result<f64> {
    let p_index = NearestNeighbors::new(p.points());
    let q_index = NearestNeighbors::new(q.points());
    Ok(chamfer_with_index(
        p.points(),
        &p_index,
        q.points(),
        &q_index,
    ))
}

/// Chamfer distance when spatial indices already exist for both sides.
pub fn chamfer_with_index(
    p: &[Point3],
    p_index: &NearestNeighbors,
    q: &[Point3],
    q_index: &NearestNeighbors,
) -> f64 {
    let forward = directional(p, q_index);
    let backward = directional(q, p_index);
    forward + backward
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cloud(c: &[[f64; 3]]) -> PointCloud {
        PointCloud::from_xyz(c).unwrap()
    }

    #[test]
    fn identical_clouds_have_zero_distance() {
        let p = cloud(&[[0.0, 1.0, 2.0], [3.0, -1.0, 0.5], [0.2, 0.2, 0.2]]);
        assert_eq!(chamfer(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_cases() {
        let a = cloud(&[[0.0, 0.0, 0.0]]);
        let b = cloud(&[[1.0, 0.0, 0.0]]);
        assert_eq!(chamfer(&a, &b).unwrap(), 2.0);
        let two = cloud(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        assert_eq!(chamfer(&two, &a).unwrap(), 0.5);
        assert_eq!(chamfer(&a, &two).unwrap(), 0.5);
    }

    #[test]
    fn pairwise_sum_is_exact_on_small_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    proptest! {
        #[test]
        fn symmetric_and_non_negative(
            a in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..700),
            b in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..700),
        ) {
            let (p, q) = (cloud(&a), cloud(&b));
            let pq = chamfer(&p, &q).unwrap();
            let qp = chamfer(&q, &p).unwrap();
            prop_assert_eq!(pq.to_bits(), qp.to_bits());
            prop_assert!(pq >= 0.0);
        }

        #[test]
        fn zero_iff_mutual_coverage(a in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..40)) {
            // a subset of a cloud, extended with duplicates of members, covers it both ways
            let p = cloud(&a);
            let mut b = a.clone();
            b.reverse();
            b.push(a[0]);
            prop_assert_eq!(chamfer(&p, &cloud(&b)).unwrap(), 0.0);
            let mut c = a.clone();
            c.push([5.0, 5.0, 5.0]);
            prop_assert!(chamfer(&p, &cloud(&c)).unwrap() > 0.0);
        }
    }
}
