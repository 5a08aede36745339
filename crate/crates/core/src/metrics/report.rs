use serde::{Deserialize, Serialize};

use super::{chamfer, emd, iou_solid, shift, spread, DEFAULT_SPREAD_RESOLUTION};
use crate::error::{Error, Result};
use crate::geometry::{PointCloud, SphereTemplate};

/// Which metrics to compute and at what grid resolutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSelection {
    pub cd: bool,
    pub emd: bool,
    pub iou: bool,
    pub spread: bool,
    pub shift: bool,
    pub iou_resolution: usize,
    pub spread_resolution: usize,
}

impl Default for MetricSelection {
    fn default() -> Self {
        Self {
            cd: true,
            emd: true,
            iou: true,
            spread: true,
            shift: true,
            iou_resolution: 32,
            spread_resolution: DEFAULT_SPREAD_RESOLUTION,
        }
    }
}

/// Scores for one template / target / reconstruction triple, in reporting
/// units: CD x1000, EMD x100. Metrics that were not computed are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub cd: Option<f64>,
    pub emd: Option<f64>,
    pub iou: Option<f64>,
    pub spread: Option<f64>,
    pub shift: Option<f64>,
}

pub const CD_SCALE: f64 = 1000.0;
pub const EMD_SCALE: f64 = 100.0;

impl MetricsReport {
    pub fn compute(
        template: &SphereTemplate,
        target: &PointCloud,
        recon: &PointCloud,
        selection: &MetricSelection,
    ) -> Result<Self> {
        let mut report = MetricsReport::default();
        if selection.cd {
            report.cd = Some(CD_SCALE * chamfer(recon, target)?);
        }
        if selection.emd {
            report.emd = Some(EMD_SCALE * emd(recon, target)?);
        }
        if selection.iou {
            report.iou = Some(iou_solid(recon, target, selection.iou_resolution)?);
        }
        if selection.spread {
            report.spread = Some(spread(template, recon, selection.spread_resolution)?);
        }
        if selection.shift {
            report.shift = Some(shift(template, recon)?);
        }
        report.validate()?;
        Ok(report)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in self.fields() {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::DegenerateInput(format!("{name} evaluated to {v}")));
                }
            }
        }
        if let Some(iou) = self.iou {
            if iou > 1.0 {
                return Err(Error::DegenerateInput(format!("iou evaluated to {iou}")));
            }
        }
        Ok(())
    }

    fn fields(&self) -> [(&'static str, Option<f64>); 5] {
        [
            ("cd", self.cd),
            ("emd", self.emd),
            ("iou", self.iou),
            ("spread", self.spread),
            ("shift", self.shift),
        ]
    }

    pub fn csv_header() -> &'static str {
        "cd_x1000,emd_x100,iou,spread,shift"
    }

    /// One CSV row in header order; uncomputed metrics are empty fields.
    pub fn csv_row(&self) -> String {
        self.fields()
            .iter()
            .map(|(_, v)| v.map(|x| format!("{x:.6}")).unwrap_or_default())
            .collect::<Vec<_>>()
            .join(",")
    }
}
