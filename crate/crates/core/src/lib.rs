//! Point clouds represented as a fixed spherical template plus a cascade of
//! per-stage offset fields.
//!
//! A shape `S` with `n` points is encoded as `S = T + D^K + ... + D^0`, where
//! `T` is a deterministic unit sphere of `n` points and each `D^k` moves every
//! template point. Larger `k` is coarser. The offsets are fitted directly by
//! coarse-to-fine gradient descent against a pyramid of progressively
//! abstracted versions of the target (farthest point sampling followed by
//! Gaussian splatting), using per-stage Chamfer losses and a distance-weighted
//! smoothness penalty on each offset field.
//!
//! Because every shape is the same template moved point-wise, index `i` of any
//! reconstruction corresponds to template point `i`. The [`correspond`] module
//! uses this for color transfer, geometry transfer and co-editing.
//!
//! ```no_run
//! use cloudsphere::geometry::shapes::{self, Shape};
//! use cloudsphere::fitter::{fit, FitConfig};
//! use cloudsphere::metrics::chamfer;
//!
//! let raw = shapes::sample(Shape::CubeShell, 4096, 7).unwrap();
//! let (target, _) = cloudsphere::geometry::normalize_cloud(&raw).unwrap();
//! let result = fit(&target, &FitConfig::default()).unwrap();
//! let recon = result.rep.reconstruct(0).unwrap();
//! println!("CD x1000 = {}", 1000.0 * chamfer(&recon, &target).unwrap());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod correspond;
pub mod error;
pub mod fitter;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod spatial;

pub use error::{Error, Result};
pub use geometry::{Point3, PointCloud, SphereTemplate};
