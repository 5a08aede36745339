//! Shape similarity and correspondence quality measures.

mod assignment;
mod chamfer;
mod correspondence;
mod iou;
mod report;

pub use assignment::{emd, emd_with_cap, min_cost_assignment, EMD_EXACT_CAP};
pub use chamfer::{chamfer, chamfer_with_index, nearest_assignments, pairwise_sum};
pub use correspondence::{shift, spread, DEFAULT_SPREAD_RESOLUTION};
pub use iou::{iou_bounds, iou_solid};
pub use report::{MetricSelection, MetricsReport};
