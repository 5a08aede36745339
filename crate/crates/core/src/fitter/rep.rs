use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud, SphereTemplate};

/// Per-point displacements of one stage, in template order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetField(pub Vec<Point3>);

impl OffsetField {
    pub fn zeros(n: usize) -> Self {
        OffsetField(vec![Point3::zeros(); n])
    }

    pub fn uniform(n: usize, d: Point3) -> Self {
        OffsetField(vec![d; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Point3] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|d| d.iter().all(|c| c.is_finite()))
    }
}

/// A shape as a template plus one offset field per stage.
///
/// `offsets[k]` is `D^k`; stage `K = stage_count() - 1` is the coarsest.
/// The stage-`k` reconstruction is `R^k = T + D^K + ... + D^k`, accumulated
/// from the coarse end.
#[derive(Clone, Debug, PartialEq)]
pub struct CloudSphereRep {
    template: SphereTemplate,
    offsets: Vec<OffsetField>,
}

impl CloudSphereRep {
    pub fn new(template: SphereTemplate, offsets: Vec<OffsetField>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::invalid("a representation needs at least one stage"));
        }
        for (k, d) in offsets.iter().enumerate() {
            if d.len() != template.len() {
                return Err(Error::invalid(format!(
                    "offset field {k} has {} entries, template has {}",
                    d.len(),
                    template.len()
                )));
            }
            if !d.is_finite() {
                return Err(Error::invalid(format!("offset field {k} is not finite")));
            }
        }
        Ok(Self { template, offsets })
    }

    /// All offsets zero: every stage reconstructs the template.
    pub fn zeros(template: SphereTemplate, stage_count: usize) -> Result<Self> {
        let n = template.len();
        Self::new(template, vec![OffsetField::zeros(n); stage_count])
    }

    pub fn template(&self) -> &SphereTemplate {
        &self.template
    }

    pub fn offsets(&self) -> &[OffsetField] {
        &self.offsets
    }

    pub fn offset(&self, k: usize) -> Option<&OffsetField> {
        self.offsets.get(k)
    }

    pub(crate) fn offsets_mut(&mut self) -> &mut [OffsetField] {
        &mut self.offsets
    }

    pub fn stage_count(&self) -> usize {
        self.offsets.len()
    }

    /// Index of the coarsest stage, `K`.
    pub fn coarsest_stage(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn len(&self) -> usize {
        self.template.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn check_stage(&self, k: usize) -> Result<()> {
        if k >= self.stage_count() {
            return Err(Error::invalid(format!(
                "stage {k} out of range 0..={}",
                self.coarsest_stage()
            )));
        }
        Ok(())
    }

    /// Reconstructions `R^K, R^{K-1}, ..., R^{down_to}`, coarsest first.
    pub(crate) fn cascade(&self, down_to: usize) -> Vec<Vec<Point3>> {
        let mut current: Vec<Point3> = self.template.points().to_vec();
        let mut out = Vec::with_capacity(self.stage_count() - down_to);
        for k in (down_to..self.stage_count()).rev() {
            for (p, d) in current.iter_mut().zip(&self.offsets[k].0) {
                *p += d;
            }
            out.push(current.clone());
        }
        out
    }

    /// `R^{down_to} = T + sum_{m >= down_to} D^m`.
    pub fn reconstruct(&self, down_to: usize) -> Result<PointCloud> {
        self.check_stage(down_to)?;
        let mut current: Vec<Point3> = self.template.points().to_vec();
        for k in (down_to..self.stage_count()).rev() {
            for (p, d) in current.iter_mut().zip(&self.offsets[k].0) {
                *p += d;
            }
        }
        PointCloud::new(current)
    }

    /// Copy with stage `k` replaced.
    pub fn with_offset(&self, k: usize, field: OffsetField) -> Result<Self> {
        self.check_stage(k)?;
        let mut offsets = self.offsets.clone();
        offsets[k] = field;
        Self::new(self.template.clone(), offsets)
    }

    /// True when both representations use bit-identical templates.
    pub fn shares_template(&self, other: &CloudSphereRep) -> bool {
        self.template.radius() == other.template.radius()
            && self.template.len() == other.template.len()
            && self
                .template
                .points()
                .iter()
                .zip(other.template.points())
                .all(|(a, b)| a == b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_sphere_template;
    use proptest::prelude::*;

    #[test]
    fn zero_offsets_reproduce_template() {
        let t = generate_sphere_template(50, 1.0).unwrap();
        let rep = CloudSphereRep::zeros(t.clone(), 3).unwrap();
        for k in 0..3 {
            assert_eq!(rep.reconstruct(k).unwrap(), *t.cloud());
        }
    }

    #[test]
    fn single_uniform_stage_translates() {
        let t = generate_sphere_template(20, 1.0).unwrap();
        let u = Point3::new(0.5, 0.0, 0.0);
        let rep = CloudSphereRep::new(t.clone(), vec![OffsetField::uniform(20, u)]).unwrap();
        assert_eq!(rep.reconstruct(0).unwrap(), t.cloud().translated(&u));
    }

    #[test]
    fn two_stage_hand_computation() {
        let t = generate_sphere_template(4, 1.0).unwrap();
        let u: Vec<Point3> = (0..4)
            .map(|i| Point3::new(i as f64 * 0.25, 0.0, -0.5))
            .collect();
        let v: Vec<Point3> = (0..4)
            .map(|i| Point3::new(0.0, 0.125 * i as f64, 0.25))
            .collect();
        let rep = CloudSphereRep::new(
            t.clone(),
            vec![OffsetField(v.clone()), OffsetField(u.clone())],
        )
        .unwrap();
        let r1 = rep.reconstruct(1).unwrap();
        let r0 = rep.reconstruct(0).unwrap();
        for i in 0..4 {
            assert_eq!(r1[i], t.points()[i] + u[i]);
            assert_eq!(r0[i], t.points()[i] + u[i] + v[i]);
        }
        assert!(rep.reconstruct(2).is_err());
    }

    #[test]
    fn construction_is_validated() {
        let t = generate_sphere_template(8, 1.0).unwrap();
        assert!(CloudSphereRep::new(t.clone(), vec![]).is_err());
        assert!(CloudSphereRep::new(t.clone(), vec![OffsetField::zeros(7)]).is_err());
        let mut bad = OffsetField::zeros(8);
        bad.0[3].x = f64::NAN;
        assert!(CloudSphereRep::new(t, vec![bad]).is_err());
    }

    proptest! {
        #[test]
        fn residual_decomposition(
            seed_offsets in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 3 * 16),
        ) {
            let t = generate_sphere_template(16, 1.0).unwrap();
            let fields: Vec<OffsetField> = seed_offsets
                .chunks(16)
                .map(|c| OffsetField(c.iter().map(|a| Point3::new(a[0], a[1], a[2])).collect()))
                .collect();
            let rep = CloudSphereRep::new(t, fields).unwrap();
            for k in 0..2 {
                let fine = rep.reconstruct(k).unwrap();
                let coarse = rep.reconstruct(k + 1).unwrap();
                for i in 0..16 {
                    let diff = fine[i] - coarse[i] - rep.offset(k).unwrap().0[i];
                    prop_assert!(diff.amax() <= 1e-12);
                }
            }
            // the cascade agrees with per-stage reconstruction bit for bit
            let cascade = rep.cascade(0);
            for (pos, k) in (0..3).rev().enumerate() {
                let recon = rep.reconstruct(k).unwrap();
                prop_assert_eq!(&cascade[pos], recon.points());
            }
        }
    }
}
