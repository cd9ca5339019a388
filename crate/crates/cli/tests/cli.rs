//! Integration tests driving the `viewcut` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use viewcut_core::geom::{PointCloud, Vec3};
use viewcut_core::ply;
use viewcut_core::render::{read_idm, read_pfm, EMPTY_ID};
use viewcut_core::visibility::read_labels;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_viewcut"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Generate a small sphere dataset once per temp dir.
fn gen_sphere(dir: &Path, points: usize) -> PathBuf {
    let ds = dir.join("ds");
    let out = run(&[
        "gen-dataset",
        "--scene",
        "sphere",
        "--points",
        &points.to_string(),
        "--out-dir",
        ds.to_str().unwrap(),
    ]);
    assert_ok(&out);
    ds
}

#[test]
fn sample_views_spherical_count() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = gen_sphere(tmp.path(), 500);
    let views = tmp.path().join("views.json");
    let out = run(&[
        "sample-views",
        "--input",
        ds.join("cloud.ply").to_str().unwrap(),
        "--pattern",
        "spherical",
        "--n-az",
        "8",
        "--n-el",
        "3",
        "--out",
        views.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&views).unwrap()).unwrap();
    assert_eq!(json["views"].as_array().unwrap().len(), 24);
}

#[test]
fn render_single_point_cloud() {
    let tmp = tempfile::tempdir().unwrap();
    let cloud_path = tmp.path().join("one.ply");
    ply::write_point_cloud(
        &cloud_path,
        &PointCloud::from_positions(vec![Vec3::ZERO]),
        false,
    )
    .unwrap();
    let views_path = tmp.path().join("views.json");
    std::fs::write(
        &views_path,
        r#"{"views":[{"eye":[0,0,-2],"target":[0,0,0],"up":[0,1,0],
            "fx":221.7,"fy":221.7,"cx":128.0,"cy":128.0,"width":256,"height":256}]}"#,
    )
    .unwrap();
    let out_dir = tmp.path().join("render");
    let out = run(&[
        "render",
        "--input",
        cloud_path.to_str().unwrap(),
        "--views",
        views_path.to_str().unwrap(),
        "--splat-radius",
        "0",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let depth = read_pfm(&out_dir.join("view_0/pt_depth.pfm")).unwrap();
    let finite = depth.data.iter().filter(|d| **d < f32::MAX).count();
    assert_eq!(finite, 1, "exactly one finite pixel");
}

#[test]
fn estimate_visibility_oracle_requires_gt() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = gen_sphere(tmp.path(), 500);
    let out = run(&[
        "estimate-visibility",
        "--input",
        ds.join("cloud.ply").to_str().unwrap(),
        "--views",
        ds.join("views.json").to_str().unwrap(),
        "--estimator",
        "oracle",
        "--out-dir",
        tmp.path().join("labels").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("oracle requires ground truth"));
}

#[test]
fn estimate_visibility_writes_labels() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = gen_sphere(tmp.path(), 800);
    let labels_dir = tmp.path().join("labels");
    let out = run(&[
        "estimate-visibility",
        "--input",
        ds.join("cloud.ply").to_str().unwrap(),
        "--views",
        ds.join("views.json").to_str().unwrap(),
        "--estimator",
        "hpr",
        "--out-dir",
        labels_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let l = read_labels(&labels_dir.join("labels_0.json")).unwrap();
    assert!(!l.visible.is_empty());
}

#[test]
fn reconstruct_missing_input_names_path() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.ply");
    let out = run(&[
        "reconstruct",
        "--input",
        missing.to_str().unwrap(),
        "--out",
        tmp.path().join("m.ply").to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("nope.ply"), "message must name the path");
}

#[test]
fn reconstruct_collinear_exits_degenerate() {
    let tmp = tempfile::tempdir().unwrap();
    let cloud_path = tmp.path().join("line.ply");
    ply::write_point_cloud(
        &cloud_path,
        &PointCloud::from_positions(
            (0..50).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect(),
        ),
        false,
    )
    .unwrap();
    let out = run(&[
        "reconstruct",
        "--input",
        cloud_path.to_str().unwrap(),
        "--estimator",
        "hpr",
        "--out",
        tmp.path().join("m.ply").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn reconstruct_smoke_report_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = gen_sphere(tmp.path(), 1200);
    let mesh1 = tmp.path().join("m1.ply");
    let mesh2 = tmp.path().join("m2.ply");
    let report = tmp.path().join("report.json");
    let base = |mesh: &Path, rep: Option<&Path>, threads: &str| {
        let mut args = vec![
            "reconstruct".to_string(),
            "--input".into(),
            ds.join("cloud.ply").display().to_string(),
            "--out".into(),
            mesh.display().to_string(),
            "--estimator".into(),
            "oracle".into(),
            "--gt-mesh".into(),
            ds.join("gt_mesh.ply").display().to_string(),
            "--threads".into(),
            threads.into(),
        ];
        if let Some(r) = rep {
            args.push("--report".into());
            args.push(r.display().to_string());
        }
        let out = bin().args(&args).output().unwrap();
        assert_ok(&out);
    };
    base(&mesh1, Some(&report), "2");
    base(&mesh2, None, "4");

    // report lists the four pipeline stage timings
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let stages = json["report"]["stage_seconds"].as_array().unwrap();
    assert_eq!(stages.len(), 4);
    let names: Vec<&str> = stages.iter().map(|s| s[0].as_str().unwrap()).collect();
    assert_eq!(
        names,
        ["view_sampling", "rendering", "visibility", "reconstruction"]
    );

    // identical config => byte-identical output, regardless of thread count
    let b1 = std::fs::read(&mesh1).unwrap();
    let b2 = std::fs::read(&mesh2).unwrap();
    assert!(!b1.is_empty());
    assert_eq!(b1, b2, "output must be deterministic and thread-invariant");
}

#[test]
fn reconstruct_config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = gen_sphere(tmp.path(), 800);
    let cfg_path = tmp.path().join("config.json");
    std::fs::write(
        &cfg_path,
        r#"{"estimator":"hpr","recon":{"lambda_avw":0.0,"lambda_ql":1.0,"sigma":0.01,"alpha_max":1.0}}"#,
    )
    .unwrap();
    let mesh = tmp.path().join("m.ply");
    let out = run(&[
        "reconstruct",
        "--input",
        ds.join("cloud.ply").to_str().unwrap(),
        "--config",
        cfg_path.to_str().unwrap(),
        "--lambda-avw",
        "1.0",
        "--out",
        mesh.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(json["config"]["estimator"], "hpr");
    assert_eq!(json["config"]["recon"]["lambda_avw"], 1.0);
}

#[test]
fn eval_self_and_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = gen_sphere(tmp.path(), 500);
    let gt = ds.join("gt_mesh.ply");
    let out = run(&[
        "eval",
        "--mesh",
        gt.to_str().unwrap(),
        "--gt",
        gt.to_str().unwrap(),
        "--n",
        "20000",
    ]);
    assert_ok(&out);
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    for key in ["chamfer", "precision", "recall", "fscore", "K", "T"] {
        assert!(json.get(key).is_some(), "missing key {key}");
    }
    assert!(json["fscore"].as_f64().unwrap() >= 0.99);
    assert!(json["chamfer"].as_f64().unwrap() <= 1.05);
}

#[test]
fn eval_empty_mesh_guard() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = gen_sphere(tmp.path(), 500);
    let empty = tmp.path().join("empty.ply");
    // vertices but no triangles
    ply::write_mesh(
        &empty,
        &viewcut_core::geom::TriangleMesh {
            vertices: vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)],
            triangles: vec![],
        },
        false,
    )
    .unwrap();
    let out = run(&[
        "eval",
        "--mesh",
        empty.to_str().unwrap(),
        "--gt",
        ds.join("gt_mesh.ply").to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("empty mesh"));
}

#[test]
fn gen_dataset_layout_and_label_property() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = gen_sphere(tmp.path(), 1000);
    // 26 view directories with the five per-view files
    let view_dirs: Vec<_> = std::fs::read_dir(&ds)
        .unwrap()
        .filter_map(|e| {
            let e = e.unwrap();
            let name = e.file_name().into_string().unwrap();
            name.starts_with("view_").then_some(e.path())
        })
        .collect();
    assert_eq!(view_dirs.len(), 26);
    for dir in &view_dirs {
        for f in [
            "pt_depth.pfm",
            "pt_id.idm",
            "mask.pgm",
            "gt_depth.pfm",
            "labels.json",
        ] {
            assert!(dir.join(f).exists(), "{} missing {f}", dir.display());
        }
    }

    // defining property re-checked from the files: every visible point has
    // a covering pixel with |pt_depth - gt_depth| < epsilon
    let epsilon = 0.05f32;
    for dir in view_dirs.iter().take(4) {
        let depth = read_pfm(&dir.join("pt_depth.pfm")).unwrap();
        let gt_depth = read_pfm(&dir.join("gt_depth.pfm")).unwrap();
        let ids = read_idm(&dir.join("pt_id.idm")).unwrap();
        let labels = read_labels(&dir.join("labels.json")).unwrap();
        assert!(labels.is_consistent());
        // labels round-trip through JSON identically
        let tmp_labels = dir.join("labels_rt.json");
        viewcut_core::visibility::write_labels(&tmp_labels, &labels).unwrap();
        assert_eq!(read_labels(&tmp_labels).unwrap(), labels);

        for &p in &labels.visible {
            let ok = ids
                .data
                .iter()
                .enumerate()
                .filter(|(_, &id)| id == p)
                .any(|(i, _)| {
                    gt_depth.data[i] < f32::MAX
                        && (depth.data[i] - gt_depth.data[i]).abs() < epsilon
                });
            assert!(ok, "visible point {p} violates the depth rule");
        }
        // and no rendered id is unlabeled
        for &id in ids.data.iter().filter(|&&id| id != EMPTY_ID) {
            assert!(labels.visible.contains(&id) || labels.occluded.contains(&id));
        }
    }
}
