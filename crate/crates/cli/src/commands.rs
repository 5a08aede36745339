use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cloudsphere::correspond::{co_edit, color_code, Axis, RegionMask};
use cloudsphere::fitter::{fit, CloudSphereRep, FitConfig, FitSidecar, History, Phase};
use cloudsphere::geometry::shapes::{self, Shape};
use cloudsphere::geometry::{
    build_pyramid, farthest_point_sampling, generate_sphere_template, is_normalized,
    normalize_cloud, Transform,
};
use cloudsphere::io::{read_cloud, read_mask, write_cloud, CloudFormat};
use cloudsphere::metrics::{chamfer, MetricsReport};
use cloudsphere::{Error, PointCloud, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn extension(format: CloudFormat) -> &'static str {
    match format {
        CloudFormat::Xyz => "xyz",
        _ => "ply",
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{} does not exist or is not a file",
            path.display()
        )))
    }
}

/// Loads `shape:<name>` or a cloud file, resampled by farthest point
/// sampling to the configured size when the file is larger.
pub fn load_input(spec: &str, run: &RunConfig) -> Result<PointCloud> {
    if let Some(name) = spec.strip_prefix("shape:") {
        let shape: Shape = name.parse()?;
        return shapes::sample(shape, run.points, run.fit.seed);
    }
    let path = Path::new(spec);
    require_file(path)?;
    let cloud = read_cloud(path, None)?;
    if cloud.len() > run.points {
        let keep = farthest_point_sampling(&cloud, run.points, 0)?;
        return PointCloud::new(keep.into_iter().map(|i| cloud[i]).collect());
    }
    if cloud.len() < run.points {
        eprintln!(
            "note: {} has {} points, fewer than {}; using all of them",
            path.display(),
            cloud.len(),
            run.points
        );
    }
    Ok(cloud)
}

fn normalized_input(spec: &str, run: &RunConfig) -> Result<(PointCloud, Transform)> {
    normalize_cloud(&load_input(spec, run)?)
}

fn load_rep(path: &Path) -> Result<CloudSphereRep> {
    require_file(path)?;
    CloudSphereRep::load(path)
}

pub fn template(run: &RunConfig, output: &Path) -> Result<()> {
    let template = generate_sphere_template(run.points, 1.0)?;
    write_cloud(template.cloud(), output, run.format, None)?;
    println!(
        "wrote {}-point template to {}",
        run.points,
        output.display()
    );
    Ok(())
}

pub fn preprocess(run: &RunConfig, input: &str, output: &Path) -> Result<()> {
    let (target, _) = normalized_input(input, run)?;
    let pyramid = build_pyramid(
        &target,
        &run.fit.centroid_counts,
        run.fit.sigma_factor,
        run.fit.seed,
    )?;
    ensure_dir(output)?;
    for (k, level) in pyramid.levels().iter().enumerate() {
        let path = output.join(format!("level_{k}.{}", extension(run.format)));
        write_cloud(level, &path, run.format, None)?;
        println!(
            "level {k}: {} centroids, sigma {:.6}, {}",
            pyramid.centroid_counts()[k],
            pyramid.sigma_per_level()[k],
            path.display()
        );
    }
    Ok(())
}

fn phase_label(phase: Phase) -> String {
    match phase {
        Phase::Stage(k) => format!("stage{k}"),
        Phase::Joint => "joint".into(),
    }
}

fn history_csv(history: &History, stages: usize) -> String {
    let mut out = String::from("phase,iteration,learning_rate,objective");
    for k in 0..stages {
        write!(out, ",cd_{k}").unwrap();
    }
    for k in 0..stages {
        write!(out, ",reg_{k}").unwrap();
    }
    out.push('\n');
    let cell = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in &history.records {
        write!(
            out,
            "{},{},{:e},{:e}",
            phase_label(r.phase),
            r.iteration,
            r.learning_rate,
            r.objective
        )
        .unwrap();
        for v in r.stage_cd.iter().chain(&r.stage_reg) {
            write!(out, ",{}", cell(*v)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn fit_command(run: &RunConfig, input: &str, output: &Path) -> Result<()> {
    let (target, transform) = normalized_input(input, run)?;
    let result = fit(&target, &run.fit)?;
    ensure_dir(output)?;
    let rep = &result.rep;
    rep.save(output.join("rep.csph"))?;
    FitSidecar {
        config: run.fit.clone(),
        transform: Some(transform),
        history: result.history.clone(),
    }
    .save(output.join("rep.json"))?;
    write_text(&output.join("config.txt"), &run.to_text())?;
    write_text(
        &output.join("history.csv"),
        &history_csv(&result.history, rep.stage_count()),
    )?;
    let ext = extension(run.format);
    write_cloud(
        &target,
        output.join(format!("target.{ext}")),
        run.format,
        None,
    )?;
    for k in 0..rep.stage_count() {
        write_cloud(
            &rep.reconstruct(k)?,
            output.join(format!("recon_stage{k}.{ext}")),
            run.format,
            None,
        )?;
    }
    let cd = chamfer(&rep.reconstruct(0)?, &target)?;
    println!(
        "fitted {} points over {} stages; CD x1000 = {:.6}",
        rep.len(),
        rep.stage_count(),
        1000.0 * cd
    );
    println!("outputs in {}", output.display());
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    representation: String,
    target: &'a str,
    points: usize,
    metrics: &'a MetricsReport,
    selection: &'a cloudsphere::metrics::MetricSelection,
}

pub fn eval(
    run: &RunConfig,
    rep_path: &Path,
    target_spec: &str,
    output: Option<&Path>,
) -> Result<()> {
    let rep = load_rep(rep_path)?;
    let run = RunConfig {
        points: rep.len(),
        ..run.clone()
    };
    let mut target = load_input(target_spec, &run)?;
    if !is_normalized(&target) {
        target = normalize_cloud(&target)?.0;
    }
    let recon = rep.reconstruct(0)?;
    let report = MetricsReport::compute(rep.template(), &target, &recon, &run.metrics)?;
    let csv = format!("{}\n{}\n", MetricsReport::csv_header(), report.csv_row());
    let json = serde_json::to_string_pretty(&EvalOutput {
        representation: rep_path.display().to_string(),
        target: target_spec,
        points: rep.len(),
        metrics: &report,
        selection: &run.metrics,
    })
    .expect("report serializes");
    print!("{csv}");
    if let Some(dir) = output {
        ensure_dir(dir)?;
        write_text(&dir.join("metrics.csv"), &csv)?;
        write_text(&dir.join("metrics.json"), &(json + "\n"))?;
    }
    Ok(())
}

pub fn correspond(
    run: &RunConfig,
    rep_path: &Path,
    output: &Path,
    axis: Option<Axis>,
) -> Result<()> {
    if run.format == CloudFormat::Xyz {
        return Err(Error::invalid("colored output needs a PLY format"));
    }
    let rep = load_rep(rep_path)?;
    let recon = rep.reconstruct(0)?;
    ensure_dir(output)?;
    let axes = axis.map(|a| vec![a]).unwrap_or_else(|| Axis::ALL.to_vec());
    for a in axes {
        let colors = color_code(rep.template(), a);
        let name = a.name();
        write_cloud(
            rep.template().cloud(),
            output.join(format!("template_{name}.ply")),
            run.format,
            Some(&colors),
        )?;
        write_cloud(
            &recon,
            output.join(format!("recon_{name}.ply")),
            run.format,
            Some(&colors),
        )?;
        println!("axis {name}: template_{name}.ply, recon_{name}.ply");
    }
    Ok(())
}

pub fn edit(
    run: &RunConfig,
    inputs: &[PathBuf],
    donor: &Path,
    mask: Option<&Path>,
    t: f64,
    output: &Path,
) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::invalid(
            "edit needs at least one --input representation",
        ));
    }
    let donor = load_rep(donor)?;
    let reps: Vec<CloudSphereRep> = inputs.iter().map(|p| load_rep(p)).collect::<Result<_>>()?;
    let mask = match mask {
        Some(path) => {
            require_file(path)?;
            let spec = read_mask(path)?;
            let recon = if spec.uses_recon_space() {
                Some(reps[0].reconstruct(0)?)
            } else {
                None
            };
            spec.resolve(reps[0].template(), recon.as_ref())?
        }
        None => RegionMask::full(donor.len()),
    };
    let edited = co_edit(&reps, &donor, &mask, t)?;
    if edited.len() == 1 {
        write_cloud(&edited[0], output, run.format, None)?;
        println!("wrote {}", output.display());
    } else {
        ensure_dir(output)?;
        for (i, cloud) in edited.iter().enumerate() {
            let path = output.join(format!("edited_{i}.{}", extension(run.format)));
            write_cloud(cloud, &path, run.format, None)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

pub const DEFAULT_ABLATION: [&[usize]; 4] = [&[], &[16], &[256, 16], &[1024, 256, 64, 16]];

fn stage_label(counts: &[usize]) -> String {
    if counts.is_empty() {
        "none".into()
    } else {
        counts
            .iter()
            .rev()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(";")
    }
}

pub fn ablate(
    run: &RunConfig,
    input: &str,
    output: Option<&Path>,
    sets: Vec<Vec<usize>>,
) -> Result<()> {
    let (target, _) = normalized_input(input, run)?;
    let rows: Vec<(String, usize, f64)> = sets
        .par_iter()
        .map(|counts| {
            let config = FitConfig {
                centroid_counts: counts.clone(),
                weights: None,
                ..run.fit.clone()
            };
            let recon = fit(&target, &config)?.rep.reconstruct(0)?;
            Ok((
                stage_label(counts),
                counts.len(),
                1000.0 * chamfer(&recon, &target)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("stages,levels,cd_x1000\n");
    for (label, levels, cd) in &rows {
        writeln!(csv, "{label},{levels},{cd:.6}").unwrap();
    }
    print!("{csv}");
    if let Some(path) = output {
        write_text(path, &csv)?;
    }
    Ok(())
}
