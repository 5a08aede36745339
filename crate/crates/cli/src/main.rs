//! `cloudsphere` command-line interface.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cloudsphere::correspond::Axis;
use cloudsphere::{Error, Result};

use config::{parse_stages, RunConfig};

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// `key = value` configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Centroid counts of the abstraction levels, e.g. `16,64,256,1024` or `none`.
    #[arg(long, global = true)]
    stages: Option<String>,
    /// Point count for templates, generated shapes and resampled inputs.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Output cloud format: xyz, ply-ascii or ply-binary-le.
    #[arg(long, global = true)]
    format: Option<String>,
    /// IoU voxel resolution.
    #[arg(long = "grid-res", global = true)]
    grid_res: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut run = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            run.fit.seed = seed;
        }
        if let Some(stages) = &self.stages {
            run.fit.centroid_counts = parse_stages(stages)?;
        }
        if let Some(points) = self.points {
            run.points = points;
        }
        if let Some(format) = &self.format {
            run.format = format.parse()?;
        }
        if let Some(res) = self.grid_res {
            run.metrics.iou_resolution = res;
        }
        if run.points == 0 {
            return Err(Error::invalid("--points must be positive"));
        }
        run.fit.validate()?;
        Ok(run)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the sphere template.
    Template {
        #[arg(long)]
        output: PathBuf,
    },
    /// Write every abstraction level of a target.
    Preprocess {
        /// Cloud file or `shape:<name>`.
        #[arg(long)]
        input: String,
        /// Output directory.
        #[arg(long)]
        output: PathBuf,
    },
    /// Fit a representation to a target.
    Fit {
        /// Cloud file or `shape:<name>`.
        #[arg(long)]
        input: String,
        /// Output directory.
        #[arg(long)]
        output: PathBuf,
    },
    /// Score a fitted representation against a target.
    Eval {
        /// Representation file.
        #[arg(long)]
        input: PathBuf,
        /// Cloud file or `shape:<name>`.
        #[arg(long)]
        target: String,
        /// Directory for metrics.json and metrics.csv.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write correspondence-colored template and reconstruction clouds.
    Correspond {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Single axis (x, y or z); all three by default.
        #[arg(long)]
        axis: Option<String>,
    },
    /// Blend a donor's masked region into one or more representations.
    Edit {
        /// Representation to edit; repeat to co-edit several.
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        donor: PathBuf,
        /// Mask file; the whole shape when omitted.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Blend factor in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Output cloud, or a directory when several inputs are given.
        #[arg(long)]
        output: PathBuf,
    },
    /// Fit one target with several stage sets and tabulate the final CD.
    Ablate {
        /// Cloud file or `shape:<name>`.
        #[arg(long)]
        input: String,
        /// CSV output path; the table is always printed.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Stage set such as `16,256` or `none`; repeatable.
        #[arg(long = "set")]
        sets: Vec<String>,
    },
}

#[derive(Parser)]
#[command(
    name = "cloudsphere",
    version,
    about = "Fit, evaluate and edit point clouds as a deformed sphere template"
)]
struct Root {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("CLOUDSPHERE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            Error::invalid(format!(
                "CLOUDSPHERE_THREADS must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::invalid(format!("cannot configure thread pool: {e}")))
}

fn run(root: Root) -> Result<()> {
    configure_threads()?;
    let run = root.common.resolve()?;
    match root.command {
        Command::Template { output } => commands::template(&run, &output),
        Command::Preprocess { input, output } => commands::preprocess(&run, &input, &output),
        Command::Fit { input, output } => commands::fit_command(&run, &input, &output),
        Command::Eval {
            input,
            target,
            output,
        } => commands::eval(&run, &input, &target, output.as_deref()),
        Command::Correspond {
            input,
            output,
            axis,
        } => {
            let axis = axis.map(|a| a.parse::<Axis>()).transpose()?;
            commands::correspond(&run, &input, &output, axis)
        }
        Command::Edit {
            input,
            donor,
            mask,
            t,
            output,
        } => commands::edit(&run, &input, &donor, mask.as_deref(), t, &output),
        Command::Ablate {
            input,
            output,
            sets,
        } => {
            let sets = if sets.is_empty() {
                commands::DEFAULT_ABLATION
                    .iter()
                    .map(|s| s.to_vec())
                    .collect()
            } else {
                sets.iter()
                    .map(|s| parse_stages(s))
                    .collect::<Result<_>>()?
            };
            commands::ablate(&run, &input, output.as_deref(), sets)
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::OptimizationFailure { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let root = Root::parse();
    match run(root) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
