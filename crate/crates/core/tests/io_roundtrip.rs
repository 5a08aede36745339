mod common;

use cloudsphere::correspond::{color_code, Axis};
use cloudsphere::fitter::{fit, CloudSphereRep, FitConfig, FitSidecar};
use cloudsphere::geometry::shapes::{self, Shape};
use cloudsphere::geometry::{generate_sphere_template, normalize_cloud};
use cloudsphere::io::{read_cloud, read_colors, read_mask, write_cloud, CloudFormat};
use cloudsphere::Error;
use common::*;

#[test]
fn clouds_round_trip_in_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = random_cloud(&mut rng(3), 200, 2.0);
    for (name, format) in [
        ("a.xyz", CloudFormat::Xyz),
        ("b.ply", CloudFormat::PlyAscii),
        ("c.ply", CloudFormat::PlyBinaryLe),
    ] {
        let path = dir.path().join(name);
        write_cloud(&cloud, &path, format, None).unwrap();
        assert_eq!(read_cloud(&path, None).unwrap(), cloud, "{name}");
    }
}

#[test]
fn colors_survive_ply() {
    let dir = tempfile::tempdir().unwrap();
    let template = generate_sphere_template(64, 1.0).unwrap();
    let colors = color_code(&template, Axis::Z);
    for format in [CloudFormat::PlyAscii, CloudFormat::PlyBinaryLe] {
        let path = dir.path().join("colored.ply");
        write_cloud(template.cloud(), &path, format, Some(&colors)).unwrap();
        assert_eq!(read_colors(&path).unwrap().unwrap(), colors);
        assert_eq!(read_cloud(&path, None).unwrap(), *template.cloud());
    }
}

#[test]
fn malformed_files_name_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.xyz");
    std::fs::write(&path, "0 0 0\n1 2\n").unwrap();
    let err = read_cloud(&path, None).unwrap_err();
    assert!(matches!(err, Error::Format { .. }));
    assert!(err.to_string().contains("line 2"), "{err}");
    let empty = dir.path().join("empty.xyz");
    std::fs::write(&empty, "# nothing\n").unwrap();
    assert!(read_cloud(&empty, None).is_err());
    assert!(matches!(
        read_cloud(dir.path().join("missing.xyz"), None),
        Err(Error::Io { .. })
    ));
}

#[test]
fn representation_and_sidecar_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (target, transform) =
        normalize_cloud(&shapes::sample(Shape::Cylinder, 256, 1).unwrap()).unwrap();
    let config = FitConfig {
        centroid_counts: vec![16],
        phase_iterations: 10,
        joint_iterations: 10,
        ..FitConfig::default()
    };
    let out = fit(&target, &config).unwrap();
    let rep_path = dir.path().join("shape.csph");
    out.rep.save(&rep_path).unwrap();
    assert_eq!(CloudSphereRep::load(&rep_path).unwrap(), out.rep);
    let sidecar = FitSidecar {
        config,
        transform: Some(transform),
        history: out.history,
    };
    let side_path = dir.path().join("shape.json");
    sidecar.save(&side_path).unwrap();
    assert_eq!(FitSidecar::load(&side_path).unwrap(), sidecar);

    let mut bytes = out.rep.to_bytes();
    bytes[0] = b'X';
    assert!(CloudSphereRep::from_bytes(&bytes).is_err());
    let bytes = out.rep.to_bytes();
    assert!(CloudSphereRep::from_bytes(&bytes[..bytes.len() - 3]).is_err());
}

#[test]
fn mask_files_resolve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mask.txt");
    std::fs::write(&path, "# top cap\nbox -2 -2 0.8 2 2 2\n3 0.5\n").unwrap();
    let template = generate_sphere_template(300, 1.0).unwrap();
    let mask = read_mask(&path).unwrap().resolve(&template, None).unwrap();
    assert_eq!(
        mask.weight(3),
        if template.points()[3].z >= 0.8 {
            1.0
        } else {
            0.5
        }
    );
    let top = template.points().iter().filter(|q| q.z >= 0.8).count();
    assert!(mask.selected.iter().filter(|&&s| s).count() >= top);
}
