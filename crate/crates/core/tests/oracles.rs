mod common;

use cloudsphere::fitter::{
    grad_total_loss, loss_cd_stage, loss_reg_stage, total_loss, CloudSphereRep, LossWeights,
    RegGraph,
};
use cloudsphere::geometry::{build_pyramid, generate_sphere_template};
use cloudsphere::metrics::{chamfer, emd, emd_with_cap};
use cloudsphere::{Error, Point3, PointCloud};
use common::*;
use proptest::prelude::*;

#[test]
fn gradient_matches_central_differences() {
    let report = (0..3u64)
        .map(|s| check_gradient(&gradient_instance(s)))
        .fold(GradReport::default(), GradReport::merge);
    assert!(report.pass_fraction() >= 0.99, "{report:?}");
}

#[test]
fn gradient_vanishes_at_exact_fit() {
    let template = generate_sphere_template(64, 1.0).unwrap();
    let pyramid = build_pyramid(template.cloud(), &[], 0.25, 0).unwrap();
    let rep = CloudSphereRep::zeros(template.clone(), 1).unwrap();
    let graph = RegGraph::build(&template, 8).unwrap();
    let grad = grad_total_loss(&rep, &pyramid, &LossWeights::defaults(1), &graph).unwrap();
    assert!(grad[0].0.iter().all(|g| g.amax() < 1e-9));
}

#[test]
fn zero_offsets_give_weighted_template_chamfer() {
    let mut r = rng(5);
    let target = cloudsphere::geometry::normalize_cloud(&random_cloud(&mut r, 128, 1.0))
        .unwrap()
        .0;
    let pyramid = build_pyramid(&target, &[32, 8], 0.25, 1).unwrap();
    let template = generate_sphere_template(128, 1.0).unwrap();
    let rep = CloudSphereRep::zeros(template.clone(), 3).unwrap();
    let weights = LossWeights::defaults(3);
    let graph = RegGraph::build(&template, 8).unwrap();
    let expected: f64 = (0..3)
        .map(|k| weights.alpha[k] * chamfer(template.cloud(), pyramid.level(k).unwrap()).unwrap())
        .sum();
    let got = total_loss(&rep, &pyramid, &weights, &graph).unwrap();
    assert!((got - expected).abs() < 1e-12);
    let cd0 = loss_cd_stage(&rep, &pyramid, 0).unwrap();
    assert!((cd0 - chamfer(template.cloud(), &target).unwrap()).abs() < 1e-12);
}

#[test]
fn full_graph_matches_double_sum() {
    let mut r = rng(9);
    for n in 4..=6 {
        let template = generate_sphere_template(n, 1.0).unwrap();
        let rep =
            CloudSphereRep::new(template.clone(), vec![random_field(&mut r, n, 0.5)]).unwrap();
        let graph = RegGraph::build(&template, n - 1).unwrap();
        let want = brute_force_reg(template.points(), rep.offsets()[0].as_slice());
        assert!((loss_reg_stage(&rep, &graph, 0).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn emd_cap_and_size_errors() {
    let mut r = rng(1);
    let p = random_cloud(&mut r, 10, 1.0);
    let q = random_cloud(&mut r, 9, 1.0);
    assert!(matches!(emd(&p, &q), Err(Error::InvalidArgument(_))));
    let q = random_cloud(&mut r, 10, 1.0);
    assert!(matches!(
        emd_with_cap(&p, &q, 8),
        Err(Error::UnsupportedSize { .. })
    ));
}

#[test]
fn emd_of_translated_copy_is_translation_length() {
    let mut r = rng(4);
    let p = random_cloud(&mut r, 50, 1.0);
    let t = Point3::new(0.01, 0.0, 0.0);
    let q = PointCloud::new(p.iter().map(|x| x + t).collect()).unwrap();
    assert!((emd(&p, &q).unwrap() - 0.01).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn emd_equals_brute_force(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let p = random_cloud(&mut r, n, 1.0);
        let q = random_cloud(&mut r, n, 1.0);
        prop_assert!((emd(&p, &q).unwrap() - brute_force_emd(&p, &q)).abs() <= 1e-10);
    }

    #[test]
    fn emd_bounds_chamfer_free_distances(seed in any::<u64>(), n in 2usize..40) {
        let mut r = rng(seed);
        let p = random_cloud(&mut r, n, 1.0);
        let q = random_cloud(&mut r, n, 1.0);
        let e = emd(&p, &q).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert!((e - emd(&q, &p).unwrap()).abs() < 1e-12);
    }
}
