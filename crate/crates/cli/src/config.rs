//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::Path;

use cloudsphere::fitter::{FitConfig, LossWeights, LrSchedule, ScheduleMode};
use cloudsphere::io::CloudFormat;
use cloudsphere::metrics::MetricSelection;
use cloudsphere::{Error, Result};

pub const DEFAULT_POINTS: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub fit: FitConfig,
    pub points: usize,
    pub format: CloudFormat,
    pub metrics: MetricSelection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            points: DEFAULT_POINTS,
            format: CloudFormat::PlyBinaryLe,
            metrics: MetricSelection::default(),
        }
    }
}

fn invalid(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::invalid(if line == 0 {
        msg.to_string()
    } else {
        format!("config line {line}: {msg}")
    })
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| invalid(line, format!("`{key}` expects a number, got `{value}`")))
}

fn parse_list(key: &str, value: &str, line: usize) -> Result<Vec<f64>> {
    if value.trim().is_empty() || value.trim() == "none" {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| parse_num(key, v.trim(), line))
        .collect()
}

/// Centroid counts in any order, or `none`; returned fine to coarse.
pub fn parse_stages(value: &str) -> Result<Vec<usize>> {
    let mut counts: Vec<usize> = parse_list("stages", value, 0)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(format!(
                    "stage size {v} is not a positive integer"
                )))
            }
        })
        .collect::<Result<_>>()?;
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts.dedup();
    Ok(counts)
}

fn parse_lr(value: &str, line: usize) -> Result<LrSchedule> {
    match value.split_once(':') {
        None if value == "constant" => Ok(LrSchedule::Constant),
        Some(("cosine", f)) => Ok(LrSchedule::Cosine {
            final_factor: parse_num("cosine", f, line)?,
        }),
        _ => Err(invalid(
            line,
            format!("learning-rate schedule `{value}` is not `constant` or `cosine:<factor>`"),
        )),
    }
}

fn lr_text(lr: LrSchedule) -> String {
    match lr {
        LrSchedule::Constant => "constant".into(),
        LrSchedule::Cosine { final_factor } => format!("cosine:{final_factor}"),
    }
}

fn join<T: ToString>(values: &[T]) -> String {
    if values.is_empty() {
        "none".into()
    } else {
        values
            .iter()
            .map(T::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let value = value.trim();
        let fit = &mut self.fit;
        match key {
            "points" => self.points = parse_num(key, value, line)?,
            "stages" => fit.centroid_counts = parse_stages(value).map_err(|e| invalid(line, e))?,
            "sigma_factor" => fit.sigma_factor = parse_num(key, value, line)?,
            "alpha" | "beta" => {
                let list = parse_list(key, value, line)?;
                let mut w = fit
                    .weights
                    .clone()
                    .unwrap_or_else(|| LossWeights::defaults(fit.stage_count()));
                if key == "alpha" {
                    w.alpha = list;
                } else {
                    w.beta = list;
                }
                fit.weights = Some(w);
            }
            "k_reg" => fit.k_reg = parse_num(key, value, line)?,
            "phase_iterations" => fit.phase_iterations = parse_num(key, value, line)?,
            "joint_iterations" => fit.joint_iterations = parse_num(key, value, line)?,
            "step_size" => fit.step_size = parse_num(key, value, line)?,
            "adam_beta1" => fit.beta1 = parse_num(key, value, line)?,
            "adam_beta2" => fit.beta2 = parse_num(key, value, line)?,
            "adam_epsilon" => fit.epsilon = parse_num(key, value, line)?,
            "phase_lr" => fit.phase_lr = parse_lr(value, line)?,
            "joint_lr" => fit.joint_lr = parse_lr(value, line)?,
            "seed" => fit.seed = parse_num(key, value, line)?,
            "schedule" => {
                fit.schedule = match value {
                    "sequential-then-joint" => ScheduleMode::SequentialThenJoint,
                    "joint-only" => ScheduleMode::JointOnly,
                    _ => return Err(invalid(line, format!("unknown schedule `{value}`"))),
                }
            }
            "format" => self.format = value.parse().map_err(|e| invalid(line, e))?,
            "grid_res" => self.metrics.iou_resolution = parse_num(key, value, line)?,
            "spread_res" => self.metrics.spread_resolution = parse_num(key, value, line)?,
            "metrics" => {
                let names: Vec<&str> = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .collect();
                for name in &names {
                    if !["cd", "emd", "iou", "spread", "shift"].contains(name) {
                        return Err(invalid(line, format!("unknown metric `{name}`")));
                    }
                }
                let m = &mut self.metrics;
                m.cd = names.contains(&"cd");
                m.emd = names.contains(&"emd");
                m.iou = names.contains(&"iou");
                m.spread = names.contains(&"spread");
                m.shift = names.contains(&"shift");
            }
            _ => return Err(invalid(line, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(i + 1, format!("expected `key = value`, got `{line}`")))?;
            config.set(key.trim(), value, i + 1)?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::InvalidArgument(msg) => {
                Error::InvalidArgument(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    /// Every key, in a form [`RunConfig::parse`] reads back to an equal value.
    pub fn to_text(&self) -> String {
        let f = &self.fit;
        let w = f.resolved_weights();
        let m = &self.metrics;
        let metrics: Vec<&str> = [
            ("cd", m.cd),
            ("emd", m.emd),
            ("iou", m.iou),
            ("spread", m.spread),
            ("shift", m.shift),
        ]
        .iter()
        .filter(|(_, on)| *on)
        .map(|(n, _)| *n)
        .collect();
        let format = match self.format {
            CloudFormat::Xyz => "xyz",
            CloudFormat::PlyAscii => "ply-ascii",
            CloudFormat::PlyBinaryLe => "ply-binary-le",
        };
        let schedule = match f.schedule {
            ScheduleMode::SequentialThenJoint => "sequential-then-joint",
            ScheduleMode::JointOnly => "joint-only",
        };
        let mut out = String::new();
        let mut put = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        put("points", self.points.to_string());
        put("stages", join(&f.centroid_counts));
        put("sigma_factor", f.sigma_factor.to_string());
        put("alpha", join(&w.alpha));
        put("beta", join(&w.beta));
        put("k_reg", f.k_reg.to_string());
        put("phase_iterations", f.phase_iterations.to_string());
        put("joint_iterations", f.joint_iterations.to_string());
        put("step_size", f.step_size.to_string());
        put("adam_beta1", f.beta1.to_string());
        put("adam_beta2", f.beta2.to_string());
        put("adam_epsilon", f.epsilon.to_string());
        put("phase_lr", lr_text(f.phase_lr));
        put("joint_lr", lr_text(f.joint_lr));
        put("seed", f.seed.to_string());
        put("schedule", schedule.into());
        put("format", format.into());
        put("grid_res", m.iou_resolution.to_string());
        put("spread_res", m.spread_resolution.to_string());
        put("metrics", metrics.join(","));
        out
    }
}
