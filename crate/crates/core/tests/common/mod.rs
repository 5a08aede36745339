#![allow(dead_code, clippy::needless_range_loop)]

use cloudsphere::fitter::{
    grad_total_loss, total_loss, CloudSphereRep, LossWeights, OffsetField, RegGraph,
};
use cloudsphere::geometry::{
    build_pyramid, generate_sphere_template, normalize_cloud, AbstractionPyramid,
};
use cloudsphere::spatial::NearestNeighbors;
use cloudsphere::{Point3, PointCloud};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const FD_STEP: f64 = 1e-5;
pub const TIE_MARGIN: f64 = 1e-6;
pub const REL_TOL: f64 = 1e-4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> PointCloud {
    let pts = (0..n)
        .map(|_| {
            Point3::new(
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
            )
        })
        .collect();
    PointCloud::new(pts).unwrap()
}

pub fn random_field(rng: &mut ChaCha8Rng, n: usize, sd: f64) -> OffsetField {
    let normal = Normal::new(0.0, sd).unwrap();
    OffsetField(
        (0..n)
            .map(|_| Point3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng)))
            .collect(),
    )
}

/// Minimum mean matched distance over every bijection.
pub fn brute_force_emd(p: &PointCloud, q: &PointCloud) -> f64 {
    let n = p.len();
    (0..n)
        .permutations(n)
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(i, &j)| (p[i] - q[j]).norm())
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
        / n as f64
}

/// Full ordered double sum of the smoothness penalty over all template pairs.
pub fn brute_force_reg(template: &[Point3], d: &[Point3]) -> f64 {
    let mut total = 0.0;
    for i in 0..d.len() {
        for j in 0..d.len() {
            if i != j {
                total += (-(template[i] - template[j]).norm()).exp() * (d[i] - d[j]).norm();
            }
        }
    }
    total
}

pub struct GradInstance {
    pub rep: CloudSphereRep,
    pub pyramid: AbstractionPyramid,
    pub weights: LossWeights,
    pub graph: RegGraph,
}

/// Random 64-point instance with two abstraction levels and nonzero
/// smoothness weights on every stage.
pub fn gradient_instance(seed: u64) -> GradInstance {
    let mut r = rng(seed);
    let n = 64;
    let (target, _) = normalize_cloud(&random_cloud(&mut r, n, 1.0)).unwrap();
    let pyramid = build_pyramid(&target, &[16, 4], 0.25, seed).unwrap();
    let template = generate_sphere_template(n, 1.0).unwrap();
    let fields = (0..3).map(|_| random_field(&mut r, n, 0.1)).collect();
    let rep = CloudSphereRep::new(template.clone(), fields).unwrap();
    let alpha = (0..3).map(|_| r.random_range(0.1..1.0)).collect();
    let beta = (0..3).map(|_| r.random_range(0.01..0.5)).collect();
    GradInstance {
        rep,
        pyramid,
        weights: LossWeights::new(alpha, beta).unwrap(),
        graph: RegGraph::build(&template, 8).unwrap(),
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GradReport {
    pub checked: usize,
    pub passed: usize,
    pub excluded: usize,
    pub worst: f64,
}

impl GradReport {
    pub fn merge(self, other: GradReport) -> GradReport {
        GradReport {
            checked: self.checked + other.checked,
            passed: self.passed + other.passed,
            excluded: self.excluded + other.excluded,
            worst: self.worst.max(other.worst),
        }
    }

    pub fn pass_fraction(&self) -> f64 {
        self.passed as f64 / self.checked.max(1) as f64
    }
}

fn two_nearest(index: &NearestNeighbors, q: &Point3) -> [(usize, f64); 2] {
    let nn = index.k_nearest(q, 2);
    [(nn[0].0, nn[0].1.sqrt()), (nn[1].0, nn[1].1.sqrt())]
}

/// Points whose nearest-neighbor assignment at some stage `<= m` is within
/// the tie margin, or whose offsets sit near a smoothness kink.
fn near_ties(inst: &GradInstance) -> Vec<Vec<bool>> {
    let stages = inst.rep.stage_count();
    let n = inst.rep.len();
    let mut tied_at = vec![vec![false; n]; stages];
    for j in 0..stages {
        let recon = inst.rep.reconstruct(j).unwrap();
        let target = inst.pyramid.level(j).unwrap();
        let recon_index = NearestNeighbors::new(recon.points());
        let target_index = NearestNeighbors::new(target.points());
        for (i, q) in recon.iter().enumerate() {
            let [a, b] = two_nearest(&target_index, q);
            if b.1 - a.1 < TIE_MARGIN {
                tied_at[j][i] = true;
            }
        }
        for p in target.iter() {
            let [a, b] = two_nearest(&recon_index, p);
            if b.1 - a.1 < TIE_MARGIN {
                tied_at[j][a.0] = true;
                tied_at[j][b.0] = true;
            }
        }
        let d = inst.rep.offsets()[j].as_slice();
        for i in 0..n {
            if inst
                .graph
                .neighbors(i)
                .any(|(k, _)| (d[i] - d[k]).norm() < TIE_MARGIN)
            {
                tied_at[j][i] = true;
            }
        }
    }
    (0..stages)
        .map(|m| (0..n).map(|i| (0..=m).any(|j| tied_at[j][i])).collect())
        .collect()
}

/// Compares the analytic gradient with central differences on every
/// coordinate of every stage.
pub fn check_gradient(inst: &GradInstance) -> GradReport {
    let analytic = grad_total_loss(&inst.rep, &inst.pyramid, &inst.weights, &inst.graph).unwrap();
    let excluded = near_ties(inst);
    let loss =
        |rep: &CloudSphereRep| total_loss(rep, &inst.pyramid, &inst.weights, &inst.graph).unwrap();
    let mut report = GradReport::default();
    for m in 0..inst.rep.stage_count() {
        for i in 0..inst.rep.len() {
            if excluded[m][i] {
                report.excluded += 3;
                continue;
            }
            for a in 0..3 {
                let shifted = |delta: f64| {
                    let mut field = inst.rep.offsets()[m].clone();
                    field.0[i][a] += delta;
                    inst.rep.with_offset(m, field).unwrap()
                };
                let fd = (loss(&shifted(FD_STEP)) - loss(&shifted(-FD_STEP))) / (2.0 * FD_STEP);
                let g = analytic[m].0[i][a];
                let scale = g.abs().max(fd.abs());
                let rel = if scale < 1e-10 {
                    0.0
                } else {
                    (g - fd).abs() / scale
                };
                report.checked += 1;
                report.worst = report.worst.max(rel);
                if rel < REL_TOL {
                    report.passed += 1;
                }
            }
        }
    }
    report
}
