use serde::{Deserialize, Serialize};

use super::{Adam, CloudSphereRep, LossWeights, Objective, RegGraph, DEFAULT_K_REG};
use crate::error::{Error, Result};
use crate::geometry::{
    build_pyramid, generate_sphere_template, is_normalized, PointCloud, DEFAULT_SIGMA_FACTOR,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleMode {
    /// Coarsest stage alone, then each finer stage in turn on top of the
    /// fitted coarser ones, then a joint phase over all stages.
    SequentialThenJoint,
    /// A single phase with every stage live.
    JointOnly,
}

/// Learning-rate schedule within a phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LrSchedule {
    Constant,
    /// Cosine decay from the step size to `final_factor * step size`.
    Cosine {
        final_factor: f64,
    },
}

impl LrSchedule {
    fn rate(&self, base: f64, iteration: usize, total: usize) -> f64 {
        match *self {
            LrSchedule::Constant => base,
            LrSchedule::Cosine { final_factor } => {
                let t = if total > 1 {
                    iteration as f64 / (total - 1) as f64
                } else {
                    1.0
                };
                let w = 0.5 * (1.0 + (std::f64::consts::PI * t).cos());
                base * (final_factor + (1.0 - final_factor) * w)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Centroid counts `N^1..N^K` of the abstraction levels, fine to coarse.
    pub centroid_counts: Vec<usize>,
    pub sigma_factor: f64,
    /// `None` selects the standard weights truncated to the stage count.
    pub weights: Option<LossWeights>,
    pub k_reg: usize,
    pub phase_iterations: usize,
    pub joint_iterations: usize,
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub phase_lr: LrSchedule,
    pub joint_lr: LrSchedule,
    pub seed: u64,
    pub schedule: ScheduleMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            centroid_counts: vec![1024, 256, 64, 16],
            sigma_factor: DEFAULT_SIGMA_FACTOR,
            weights: None,
            k_reg: DEFAULT_K_REG,
            phase_iterations: 500,
            joint_iterations: 500,
            step_size: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            phase_lr: LrSchedule::Constant,
            joint_lr: LrSchedule::Cosine { final_factor: 0.05 },
            seed: 0,
            schedule: ScheduleMode::SequentialThenJoint,
        }
    }
}

impl FitConfig {
    pub fn stage_count(&self) -> usize {
        self.centroid_counts.len() + 1
    }

    pub fn resolved_weights(&self) -> LossWeights {
        self.weights
            .clone()
            .unwrap_or_else(|| LossWeights::defaults(self.stage_count()))
    }

    pub fn validate(&self) -> Result<()> {
        let weights = self.resolved_weights();
        LossWeights::new(weights.alpha.clone(), weights.beta.clone())?;
        if weights.stage_count() != self.stage_count() {
            return Err(Error::invalid(format!(
                "{} centroid levels need {} stage weights, got {}",
                self.centroid_counts.len(),
                self.stage_count(),
                weights.stage_count()
            )));
        }
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::invalid(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || !(self.epsilon > 0.0)
        {
            return Err(Error::invalid(
                "optimizer moments must lie in [0, 1) with positive epsilon",
            ));
        }
        for schedule in [self.phase_lr, self.joint_lr] {
            if let LrSchedule::Cosine { final_factor } = schedule {
                if !(0.0..=1.0).contains(&final_factor) {
                    return Err(Error::invalid(format!(
                        "cosine final factor {final_factor} outside [0, 1]"
                    )));
                }
            }
        }
        if self.k_reg == 0 {
            return Err(Error::invalid("k_reg must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Sequential phase moving `D^k` alone against the loss terms of
    /// stages `>= k`; coarser stages stay at their fitted values.
    Stage(usize),
    Joint,
}

/// Objective and per-stage terms at one iteration, before the update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub phase: Phase,
    pub iteration: usize,
    pub learning_rate: f64,
    pub objective: f64,
    pub stage_cd: Vec<Option<f64>>,
    pub stage_reg: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub phase: Phase,
    pub initial_objective: f64,
    /// Objective of the kept (best seen) iterate.
    pub final_objective: f64,
    pub best_iteration: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub records: Vec<IterationRecord>,
    pub phases: Vec<PhaseSummary>,
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub rep: CloudSphereRep,
    pub history: History,
}

struct PhasePlan {
    phase: Phase,
    live: Vec<bool>,
    terms: Vec<bool>,
    iterations: usize,
    lr: LrSchedule,
}

fn plan(config: &FitConfig) -> Vec<PhasePlan> {
    let stages = config.stage_count();
    let mut phases = Vec::new();
    if config.schedule == ScheduleMode::SequentialThenJoint {
        for k in (0..stages).rev() {
            phases.push(PhasePlan {
                phase: Phase::Stage(k),
                live: (0..stages).map(|m| m == k).collect(),
                terms: (0..stages).map(|m| m >= k).collect(),
                iterations: config.phase_iterations,
                lr: config.phase_lr,
            });
        }
    }
    phases.push(PhasePlan {
        phase: Phase::Joint,
        live: vec![true; stages],
        terms: vec![true; stages],
        iterations: config.joint_iterations,
        lr: config.joint_lr,
    });
    phases
}

/// Fits offset fields deforming a unit sphere template onto `target`.
///
/// The target must already be normalized (centered, max norm 1). The
/// template has as many points as the target and all offsets start at zero.
/// Each phase optimizes the live stages against their own loss terms with
/// Adam and keeps the best iterate it has seen, so a phase never ends worse
/// than it started.
pub fn fit(target: &PointCloud, config: &FitConfig) -> Result<FitOutcome> {
    config.validate()?;
    if !is_normalized(target) {
        return Err(Error::invalid(
            "target must be normalized (centroid at origin, max norm 1); see normalize_cloud",
        ));
    }
    let n = target.len();
    let template = generate_sphere_template(n, 1.0)?;
    let pyramid = build_pyramid(
        target,
        &config.centroid_counts,
        config.sigma_factor,
        config.seed,
    )?;
    let weights = config.resolved_weights();
    let graph = RegGraph::build(&template, config.k_reg)?;
    let objective = Objective::new(&pyramid, &weights, &graph);
    let mut rep = CloudSphereRep::zeros(template, config.stage_count())?;
    objective.check(&rep)?;

    let mut history = History::default();
    for step in plan(config) {
        let terms = &step.terms;
        let mut adam = Adam::new(rep.offsets(), config.beta1, config.beta2, config.epsilon);
        let mut best_rep = rep.clone();
        let mut best_value = f64::INFINITY;
        let mut best_iteration = 0;
        let mut initial = None;
        for it in 0..=step.iterations {
            // the extra pass scores the last update without stepping again
            let last = it == step.iterations;
            let eval = objective.evaluate(&rep, terms, !last);
            let lr = step.lr.rate(config.step_size, it, step.iterations);
            if !eval.objective.is_finite() {
                return Err(Error::OptimizationFailure {
                    reason: format!(
                        "objective became {} in {:?} at iteration {it}",
                        eval.objective, step.phase
                    ),
                    history: Box::new(history),
                });
            }
            initial.get_or_insert(eval.objective);
            if eval.objective < best_value {
                best_value = eval.objective;
                best_rep = rep.clone();
                best_iteration = it;
            }
            history.records.push(IterationRecord {
                phase: step.phase,
                iteration: it,
                learning_rate: if last { 0.0 } else { lr },
                objective: eval.objective,
                stage_cd: eval.stage_cd,
                stage_reg: eval.stage_reg,
            });
            if let Some(grad) = eval.gradient {
                adam.step(rep.offsets_mut(), &grad, &step.live, lr);
            }
        }
        rep = best_rep;
        history.phases.push(PhaseSummary {
            phase: step.phase,
            initial_objective: initial.unwrap_or(best_value),
            final_objective: best_value,
            best_iteration,
        });
    }
    Ok(FitOutcome { rep, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_orders_phases_coarse_to_fine() {
        let config = FitConfig {
            centroid_counts: vec![64, 16],
            ..FitConfig::default()
        };
        let phases: Vec<Phase> = plan(&config).iter().map(|p| p.phase).collect();
        assert_eq!(
            phases,
            vec![
                Phase::Stage(2),
                Phase::Stage(1),
                Phase::Stage(0),
                Phase::Joint
            ]
        );
        assert_eq!(plan(&config)[1].live, vec![false, true, false]);
        assert_eq!(plan(&config)[1].terms, vec![false, true, true]);
        let joint = FitConfig {
            schedule: ScheduleMode::JointOnly,
            ..config
        };
        assert_eq!(plan(&joint).len(), 1);
    }

    #[test]
    fn cosine_schedule_endpoints() {
        let s = LrSchedule::Cosine { final_factor: 0.1 };
        assert!((s.rate(1.0, 0, 11) - 1.0).abs() < 1e-15);
        assert!((s.rate(1.0, 10, 11) - 0.1).abs() < 1e-15);
        assert_eq!(LrSchedule::Constant.rate(0.5, 3, 10), 0.5);
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig::default().validate().is_ok());
        let bad = FitConfig {
            weights: Some(LossWeights::defaults(3)),
            ..FitConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = FitConfig {
            step_size: 0.0,
            ..FitConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rejects_unnormalized_target() {
        let cloud = PointCloud::from_xyz(&[
            [5.0, 0.0, 0.0],
            [6.0, 0.0, 0.0],
            [5.0, 1.0, 0.0],
            [5.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(matches!(
            fit(&cloud, &FitConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
