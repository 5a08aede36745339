//! Synthetic test targets sampled uniformly over their surfaces.

use std::f64::consts::TAU;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Aabb, Point3, PointCloud};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    CubeShell,
    Torus,
    Cylinder,
    LBracket,
    Chair,
    ArmChair,
}

impl Shape {
    pub const ALL: [Shape; 7] = [
        Shape::Sphere,
        Shape::CubeShell,
        Shape::Torus,
        Shape::Cylinder,
        Shape::LBracket,
        Shape::Chair,
        Shape::ArmChair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Sphere => "sphere",
            Shape::CubeShell => "cube",
            Shape::Torus => "torus",
            Shape::Cylinder => "cylinder",
            Shape::LBracket => "lbracket",
            Shape::Chair => "chair",
            Shape::ArmChair => "armchair",
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown shape `{s}`")))
    }
}

/// Samples `n` points on the surface of `shape`.
pub fn sample(shape: Shape, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::invalid("cannot sample zero points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = match shape {
        Shape::Sphere => (0..n).map(|_| unit_direction(&mut rng)).collect(),
        Shape::CubeShell => {
            sample_boxes(&[cube(Point3::zeros(), Point3::repeat(0.5))], n, &mut rng)
        }
        Shape::Torus => sample_torus(1.0, 0.35, n, &mut rng),
        Shape::Cylinder => sample_cylinder(0.5, 1.5, n, &mut rng),
        Shape::LBracket => sample_boxes(
            &[
                cube(Point3::new(0.0, -0.4, 0.0), Point3::new(0.8, 0.1, 0.3)),
                cube(Point3::new(-0.7, 0.3, 0.0), Point3::new(0.1, 0.6, 0.3)),
            ],
            n,
            &mut rng,
        ),
        Shape::Chair => sample_boxes(&chair_parts(false, 0.9), n, &mut rng),
        Shape::ArmChair => sample_boxes(&chair_parts(true, 0.9), n, &mut rng),
    };
    PointCloud::new(points)
}

/// Chair variants used for editing experiments: seat, backrest of the given
/// height, four legs and optionally two arm rests.
pub fn sample_chair(arms: bool, back_height: f64, n: usize, seed: u64) -> Result<PointCloud> {
    if !(back_height > 0.0) {
        return Err(Error::invalid("back height must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointCloud::new(sample_boxes(&chair_parts(arms, back_height), n, &mut rng))
}

/// Axis-aligned region of the arm rests of a chair from [`sample_chair`],
/// in raw (unnormalized) coordinates.
pub fn chair_arm_region() -> Aabb {
    Aabb::new(Point3::new(-0.6, 0.1, -0.35), Point3::new(0.6, 0.55, 0.35))
}

fn cube(center: Point3, half: Point3) -> Aabb {
    Aabb::new(center - half, center + half)
}

fn chair_parts(arms: bool, back_height: f64) -> Vec<Aabb> {
    let mut parts = vec![
        // seat
        cube(Point3::new(0.0, 0.0, 0.0), Point3::new(0.45, 0.05, 0.45)),
        // back
        cube(
            Point3::new(0.0, 0.05 + back_height / 2.0, -0.42),
            Point3::new(0.45, back_height / 2.0, 0.03),
        ),
    ];
    for (x, z) in [(-0.4, -0.4), (0.4, -0.4), (-0.4, 0.4), (0.4, 0.4)] {
        parts.push(cube(Point3::new(x, -0.4, z), Point3::new(0.04, 0.35, 0.04)));
    }
    if arms {
        for x in [-0.42, 0.42] {
            parts.push(cube(
                Point3::new(x, 0.35, 0.0),
                Point3::new(0.04, 0.03, 0.3),
            ));
            parts.push(cube(
                Point3::new(x, 0.2, 0.27),
                Point3::new(0.03, 0.15, 0.03),
            ));
        }
    }
    parts
}

fn unit_direction(rng: &mut ChaCha8Rng) -> Point3 {
    loop {
        let p = Point3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let norm = p.norm();
        if norm > 1e-6 && norm <= 1.0 {
            return p / norm;
        }
    }
}

fn box_area(b: &Aabb) -> f64 {
    let e = b.extent();
    2.0 * (e.x * e.y + e.y * e.z + e.x * e.z)
}

/// Uniform samples on the outer surface of a union of boxes; points buried
/// inside another box are rejected.
fn sample_boxes(boxes: &[Aabb], n: usize, rng: &mut ChaCha8Rng) -> Vec<Point3> {
    let areas: Vec<f64> = boxes.iter().map(box_area).collect();
    let total: f64 = areas.iter().sum();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut pick = rng.random_range(0.0..total);
        let mut b = &boxes[boxes.len() - 1];
        for (candidate, area) in boxes.iter().zip(&areas) {
            if pick < *area {
                b = candidate;
                break;
            }
            pick -= area;
        }
        let p = sample_box_surface(b, rng);
        let buried = boxes
            .iter()
            .any(|o| !std::ptr::eq(o, b) && (0..3).all(|a| p[a] > o.min[a] && p[a] < o.max[a]));
        if !buried {
            out.push(p);
        }
    }
    out
}

fn sample_box_surface(b: &Aabb, rng: &mut ChaCha8Rng) -> Point3 {
    let e = b.extent();
    let faces = [
        e.y * e.z,
        e.y * e.z,
        e.x * e.z,
        e.x * e.z,
        e.x * e.y,
        e.x * e.y,
    ];
    let total: f64 = faces.iter().sum();
    let mut pick = rng.random_range(0.0..total);
    let mut face = 5;
    for (i, area) in faces.iter().enumerate() {
        if pick < *area {
            face = i;
            break;
        }
        pick -= area;
    }
    let mut p = Point3::new(
        rng.random_range(b.min.x..=b.max.x),
        rng.random_range(b.min.y..=b.max.y),
        rng.random_range(b.min.z..=b.max.z),
    );
    let axis = face / 2;
    p[axis] = if face % 2 == 0 {
        b.min[axis]
    } else {
        b.max[axis]
    };
    p
}

fn sample_torus(major: f64, minor: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point3> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = rng.random_range(0.0..TAU);
        let v = rng.random_range(0.0..TAU);
        // area element is proportional to (major + minor cos v)
        let w = rng.random_range(0.0..major + minor);
        if w > major + minor * v.cos() {
            continue;
        }
        let ring = major + minor * v.cos();
        out.push(Point3::new(ring * u.cos(), ring * u.sin(), minor * v.sin()));
    }
    out
}

fn sample_cylinder(radius: f64, height: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point3> {
    let side = TAU * radius * height;
    let cap = std::f64::consts::PI * radius * radius;
    (0..n)
        .map(|_| {
            let pick = rng.random_range(0.0..side + 2.0 * cap);
            let theta = rng.random_range(0.0..TAU);
            if pick < side {
                let z = rng.random_range(-height / 2.0..=height / 2.0);
                Point3::new(radius * theta.cos(), radius * theta.sin(), z)
            } else {
                let r = radius * rng.random_range(0.0f64..=1.0).sqrt();
                let z = if pick < side + cap {
                    -height / 2.0
                } else {
                    height / 2.0
                };
                Point3::new(r * theta.cos(), r * theta.sin(), z)
            }
        })
        .collect()
}
