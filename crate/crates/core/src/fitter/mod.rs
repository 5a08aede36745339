//! The template-plus-offsets representation and its direct coarse-to-fine
//! optimization.

mod adam;
mod fit;
mod loss;
mod rep;
mod serialize;

pub use adam::Adam;
pub use fit::{
    fit, FitConfig, FitOutcome, History, IterationRecord, LrSchedule, Phase, PhaseSummary,
    ScheduleMode,
};
pub use loss::{
    grad_total_loss, loss_cd_stage, loss_reg_stage, total_loss, Evaluation, LossWeights, Objective,
    RegGraph, DEFAULT_K_REG, REG_EPSILON,
};
pub use rep::{CloudSphereRep, OffsetField};
pub use serialize::{FitSidecar, REP_MAGIC, REP_VERSION};
