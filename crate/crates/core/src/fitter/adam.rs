use super::OffsetField;
use crate::geometry::Point3;

/// Adaptive moment estimation over a set of offset fields, with bias
/// correction. Moments are kept per field so individual stages can be
/// frozen.
#[derive(Clone, Debug)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    first: Vec<Vec<Point3>>,
    second: Vec<Vec<Point3>>,
    steps: i32,
}

impl Adam {
    pub fn new(shape: &[OffsetField], beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros: Vec<Vec<Point3>> = shape
            .iter()
            .map(|f| vec![Point3::zeros(); f.len()])
            .collect();
        Self {
            beta1,
            beta2,
            epsilon,
            first: zeros.clone(),
            second: zeros,
            steps: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.steps
    }

    /// One update with learning rate `lr`; fields with `live[k] == false`
    /// are left untouched.
    pub fn step(
        &mut self,
        params: &mut [OffsetField],
        grads: &[OffsetField],
        live: &[bool],
        lr: f64,
    ) {
        self.steps += 1;
        let c1 = 1.0 - self.beta1.powi(self.steps);
        let c2 = 1.0 - self.beta2.powi(self.steps);
        for k in 0..params.len() {
            if !live[k] {
                continue;
            }
            let (m, v) = (&mut self.first[k], &mut self.second[k]);
            for ((p, g), (mi, vi)) in params[k]
                .0
                .iter_mut()
                .zip(&grads[k].0)
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *mi = *mi * self.beta1 + g * (1.0 - self.beta1);
                *vi = *vi * self.beta2 + g.component_mul(g) * (1.0 - self.beta2);
                for a in 0..3 {
                    let m_hat = mi[a] / c1;
                    let v_hat = vi[a] / c2;
                    p[a] -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut params = vec![OffsetField(vec![Point3::new(1.0, -2.0, 0.0)])];
        let grads = vec![OffsetField(vec![Point3::new(3.0, -0.5, 0.0)])];
        let mut adam = Adam::new(&params, 0.9, 0.999, 1e-8);
        adam.step(&mut params, &grads, &[true], 0.1);
        // bias-corrected first step is lr * sign(g) for nonzero g
        assert!((params[0].0[0].x - 0.9).abs() < 1e-7);
        assert!((params[0].0[0].y + 1.9).abs() < 1e-7);
        assert_eq!(params[0].0[0].z, 0.0);
    }

    #[test]
    fn frozen_fields_do_not_move() {
        let mut params = vec![OffsetField::zeros(3), OffsetField::zeros(3)];
        let grads = vec![OffsetField::uniform(3, Point3::repeat(1.0)); 2];
        let mut adam = Adam::new(&params, 0.9, 0.999, 1e-8);
        adam.step(&mut params, &grads, &[false, true], 0.01);
        assert_eq!(params[0], OffsetField::zeros(3));
        assert!(params[1].0.iter().all(|p| p.x < 0.0));
    }

    #[test]
    fn minimizes_a_quadratic() {
        let target = Point3::new(0.3, -0.7, 1.1);
        let mut params = vec![OffsetField::zeros(1)];
        let mut adam = Adam::new(&params, 0.9, 0.999, 1e-8);
        for _ in 0..2000 {
            let g = vec![OffsetField(vec![(params[0].0[0] - target) * 2.0])];
            adam.step(&mut params, &g, &[true], 0.01);
        }
        assert!((params[0].0[0] - target).norm() < 1e-3);
    }
}
