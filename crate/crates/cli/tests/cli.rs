use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cloudsphere::fitter::CloudSphereRep;
use cloudsphere::io::{read_cloud, read_colors};
use cloudsphere::metrics::{chamfer, emd, iou_solid, shift, spread};

const QUICK: &str = "phase_iterations = 15\njoint_iterations = 15\nstages = 16\n";

fn cloudsphere(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cloudsphere"))
        .args(args)
        .current_dir(dir)
        .env_remove("CLOUDSPHERE_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = cloudsphere(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn workspace() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("quick.txt"), QUICK).unwrap();
    let path = dir.path().to_path_buf();
    (dir, path)
}

#[test]
fn template_has_requested_size() {
    let (_tmp, dir) = workspace();
    ok(&["template", "--points", "300", "--output", "t.ply"], &dir);
    assert_eq!(read_cloud(dir.join("t.ply"), None).unwrap().len(), 300);
    ok(
        &[
            "template", "--points", "10", "--format", "xyz", "--output", "t.xyz",
        ],
        &dir,
    );
    assert_eq!(read_cloud(dir.join("t.xyz"), None).unwrap().len(), 10);
}

#[test]
fn preprocess_writes_every_level() {
    let (_tmp, dir) = workspace();
    let out = ok(
        &[
            "preprocess",
            "--input",
            "shape:cylinder",
            "--points",
            "256",
            "--stages",
            "64,16",
            "--output",
            "pyr",
        ],
        &dir,
    );
    assert_eq!(out.lines().count(), 3);
    for k in 0..3 {
        assert_eq!(
            read_cloud(dir.join(format!("pyr/level_{k}.ply")), None)
                .unwrap()
                .len(),
            256
        );
    }
}

#[test]
fn fit_is_deterministic_and_config_echo_reproduces_it() {
    let (_tmp, dir) = workspace();
    let args = [
        "fit",
        "--input",
        "shape:torus",
        "--points",
        "256",
        "--config",
        "quick.txt",
        "--seed",
        "4",
    ];
    ok(&[&args[..], &["--output", "a"]].concat(), &dir);
    ok(&[&args[..], &["--output", "b"]].concat(), &dir);
    let a = fs::read(dir.join("a/rep.csph")).unwrap();
    assert_eq!(a, fs::read(dir.join("b/rep.csph")).unwrap());
    ok(
        &[
            "fit",
            "--input",
            "shape:torus",
            "--config",
            "a/config.txt",
            "--output",
            "c",
        ],
        &dir,
    );
    assert_eq!(a, fs::read(dir.join("c/rep.csph")).unwrap());
    for k in 0..2 {
        assert!(dir.join(format!("a/recon_stage{k}.ply")).is_file());
    }
    let history = fs::read_to_string(dir.join("a/history.csv")).unwrap();
    assert_eq!(history.lines().count(), 1 + 3 * 16);
}

#[test]
fn eval_matches_library_metrics() {
    let (_tmp, dir) = workspace();
    ok(
        &[
            "fit",
            "--input",
            "shape:cube",
            "--points",
            "256",
            "--config",
            "quick.txt",
            "--output",
            "f",
        ],
        &dir,
    );
    let out = ok(
        &[
            "eval",
            "--input",
            "f/rep.csph",
            "--target",
            "f/target.ply",
            "--output",
            "ev",
        ],
        &dir,
    );
    assert_eq!(
        out.lines().next().unwrap(),
        "cd_x1000,emd_x100,iou,spread,shift"
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("ev/metrics.json")).unwrap()).unwrap();
    let rep = CloudSphereRep::load(dir.join("f/rep.csph")).unwrap();
    let target = read_cloud(dir.join("f/target.ply"), None).unwrap();
    let recon = rep.reconstruct(0).unwrap();
    let m = &json["metrics"];
    let close = |key: &str, want: f64| {
        let got = m[key].as_f64().unwrap();
        assert!(
            (got - want).abs() <= 1e-12 * want.abs().max(1.0),
            "{key}: {got} vs {want}"
        );
    };
    close("cd", 1000.0 * chamfer(&recon, &target).unwrap());
    close("emd", 100.0 * emd(&recon, &target).unwrap());
    close("iou", iou_solid(&recon, &target, 32).unwrap());
    close("spread", spread(rep.template(), &recon, 8).unwrap());
    close("shift", shift(rep.template(), &recon).unwrap());
}

#[test]
fn eval_of_exact_reconstruction() {
    let (_tmp, dir) = workspace();
    ok(&["template", "--points", "256", "--output", "t.ply"], &dir);
    fs::write(
        dir.join("self.txt"),
        "stages = none\nschedule = joint-only\njoint_iterations = 20\n",
    )
    .unwrap();
    ok(
        &[
            "fit", "--input", "t.ply", "--points", "256", "--config", "self.txt", "--output", "f",
        ],
        &dir,
    );
    let out = ok(
        &[
            "eval",
            "--input",
            "f/rep.csph",
            "--target",
            "t.ply",
            "--grid-res",
            "24",
        ],
        &dir,
    );
    let row: Vec<f64> = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(row[0] < 1e-6, "{out}");
    assert_eq!(row[2], 1.0);
}

#[test]
fn correspond_colors_every_point() {
    let (_tmp, dir) = workspace();
    ok(
        &[
            "fit",
            "--input",
            "shape:lbracket",
            "--points",
            "256",
            "--config",
            "quick.txt",
            "--output",
            "f",
        ],
        &dir,
    );
    ok(
        &[
            "correspond",
            "--input",
            "f/rep.csph",
            "--output",
            "c",
            "--format",
            "ply-ascii",
        ],
        &dir,
    );
    for axis in ["x", "y", "z"] {
        for kind in ["template", "recon"] {
            let path = dir.join(format!("c/{kind}_{axis}.ply"));
            let colors = read_colors(&path).unwrap().unwrap();
            assert_eq!(colors.len(), read_cloud(&path, None).unwrap().len());
        }
    }
    let bad = cloudsphere(
        &[
            "correspond",
            "--input",
            "f/rep.csph",
            "--output",
            "c2",
            "--format",
            "xyz",
        ],
        &dir,
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn edit_endpoints_and_co_edit() {
    let (_tmp, dir) = workspace();
    ok(
        &[
            "fit",
            "--input",
            "shape:chair",
            "--points",
            "256",
            "--config",
            "quick.txt",
            "--output",
            "a",
        ],
        &dir,
    );
    ok(
        &[
            "fit",
            "--input",
            "shape:armchair",
            "--points",
            "256",
            "--config",
            "quick.txt",
            "--output",
            "b",
        ],
        &dir,
    );
    fs::write(dir.join("mask.txt"), "box -2 0 -2 2 2 2 recon\n").unwrap();
    ok(
        &[
            "edit",
            "--input",
            "a/rep.csph",
            "--donor",
            "b/rep.csph",
            "--mask",
            "mask.txt",
            "--t",
            "0",
            "--output",
            "e0.ply",
        ],
        &dir,
    );
    let a = CloudSphereRep::load(dir.join("a/rep.csph")).unwrap();
    let b = CloudSphereRep::load(dir.join("b/rep.csph")).unwrap();
    assert_eq!(
        read_cloud(dir.join("e0.ply"), None).unwrap(),
        a.reconstruct(0).unwrap()
    );
    ok(
        &[
            "edit",
            "--input",
            "a/rep.csph",
            "--donor",
            "b/rep.csph",
            "--output",
            "e1.ply",
        ],
        &dir,
    );
    assert_eq!(
        read_cloud(dir.join("e1.ply"), None).unwrap(),
        b.reconstruct(0).unwrap()
    );
    ok(
        &[
            "edit",
            "--input",
            "a/rep.csph",
            "--input",
            "b/rep.csph",
            "--donor",
            "b/rep.csph",
            "--mask",
            "mask.txt",
            "--t",
            "0.5",
            "--output",
            "many",
        ],
        &dir,
    );
    assert!(dir.join("many/edited_0.ply").is_file() && dir.join("many/edited_1.ply").is_file());
    let bad_t = cloudsphere(
        &[
            "edit",
            "--input",
            "a/rep.csph",
            "--donor",
            "b/rep.csph",
            "--t",
            "2",
            "--output",
            "x.ply",
        ],
        &dir,
    );
    assert_eq!(bad_t.status.code(), Some(2));
}

#[test]
fn ablate_tabulates_each_stage_set() {
    let (_tmp, dir) = workspace();
    let out = ok(
        &[
            "ablate",
            "--input",
            "shape:torus",
            "--points",
            "256",
            "--config",
            "quick.txt",
            "--set",
            "none",
            "--set",
            "16",
            "--set",
            "16,64",
            "--output",
            "ab.csv",
        ],
        &dir,
    );
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "stages,levels,cd_x1000");
    assert_eq!(
        &lines[1..]
            .iter()
            .map(|l| l.split(',').next().unwrap())
            .collect::<Vec<_>>(),
        &["none", "16", "16;64"]
    );
    assert_eq!(fs::read_to_string(dir.join("ab.csv")).unwrap(), out);
}

#[test]
fn failures_use_documented_exit_codes() {
    let (_tmp, dir) = workspace();
    let missing = cloudsphere(&["fit", "--input", "nothing.ply", "--output", "x"], &dir);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nothing.ply"));
    fs::write(dir.join("typo.txt"), "phase_iteratons = 5\n").unwrap();
    let typo = cloudsphere(
        &[
            "fit",
            "--input",
            "shape:torus",
            "--config",
            "typo.txt",
            "--output",
            "x",
        ],
        &dir,
    );
    assert_eq!(typo.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&typo.stderr).contains("phase_iteratons"));
    fs::write(
        dir.join("wild.txt"),
        "stages = none\nstep_size = 1e300\nphase_iterations = 2\njoint_iterations = 2\n",
    )
    .unwrap();
    let diverge = cloudsphere(
        &[
            "fit",
            "--input",
            "shape:torus",
            "--points",
            "64",
            "--config",
            "wild.txt",
            "--output",
            "x",
        ],
        &dir,
    );
    assert_eq!(diverge.status.code(), Some(3));
    let threads = Command::new(env!("CARGO_BIN_EXE_cloudsphere"))
        .args(["template", "--points", "8", "--output", "t.ply"])
        .current_dir(&dir)
        .env("CLOUDSPHERE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
    let two = Command::new(env!("CARGO_BIN_EXE_cloudsphere"))
        .args(["template", "--points", "8", "--output", "t.ply"])
        .current_dir(&dir)
        .env("CLOUDSPHERE_THREADS", "2")
        .output()
        .unwrap();
    assert!(two.status.success());
}
