use std::path::Path;
use std::process::{Command, Output};

use graspgeom::config::Tolerances;
use graspgeom::geom::{Frame, PinholeCamera, Pixel, RigidTransform, UnitVec3, Vec3};
use graspgeom::pose::{recover_pose, GraspMono, GraspSE3};

fn graspgeom(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graspgeom")).current_dir(dir).args(args).output().unwrap()
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) {
    std::fs::write(path, serde_json::to_string(v).unwrap()).unwrap();
}

fn setup(dir: &Path) -> (PinholeCamera, RigidTransform, Vec<GraspMono>) {
    let cam = PinholeCamera::new(600.0, 600.0, 320.0, 240.0, 640, 480).unwrap();
    let base_from_cam =
        RigidTransform::look_at(Vec3::new(0.3, -0.2, 0.5), Vec3::zeros(), Vec3::z(), Frame::camera(), Frame::base()).unwrap();
    let tol = Tolerances::default();
    // Axes are chosen in the base frame so the dihedral angles are feasible.
    let cam_from_base = base_from_cam.inverse();
    let grasps: Vec<GraspMono> = [(300.5, 200.0, 0.55, 0.04, 1.2, [0.6, 0.8, 0.0]), (350.0, 260.25, 0.6, 0.07, 2.0, [0.8, 0.0, -0.6])]
        .into_iter()
        .map(|(u, v, d, w, phi, n)| {
            let n_x = UnitVec3::new(cam_from_base.transform_vector(&Vec3::from(n))).unwrap();
            GraspMono::new(Pixel::new(u, v), d, w, phi, n_x, &tol).unwrap()
        })
        .collect();
    write_json(&dir.join("camera.json"), &cam);
    write_json(&dir.join("ext.json"), &base_from_cam);
    let lines: Vec<String> = grasps.iter().map(|g| serde_json::to_string(g).unwrap()).collect();
    std::fs::write(dir.join("grasps.jsonl"), lines.join("\n") + "\n").unwrap();
    (cam, base_from_cam, grasps)
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Vec<T> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn recover_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let (cam, ext, grasps) = setup(dir.path());
    let out = graspgeom(dir.path(), &["recover", "--in", "grasps.jsonl", "--camera", "camera.json", "--extrinsics", "ext.json", "--out", "poses.jsonl"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let poses: Vec<GraspSE3> = read_jsonl(&dir.path().join("poses.jsonl"));
    assert_eq!(poses.len(), grasps.len());
    for (g, p) in grasps.iter().zip(&poses) {
        let expected = recover_pose(g, &cam, &ext, &Tolerances::default()).unwrap();
        assert!((expected.translation() - p.translation()).norm() < 1e-12);
        assert!((expected.rotation() - p.rotation()).abs().max() < 1e-12);
    }
    assert!(dir.path().join("poses.jsonl.manifest.json").exists());
}

#[test]
fn convert_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, grasps) = setup(dir.path());
    let c = |args: &[&str]| {
        let out = graspgeom(dir.path(), args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    c(&["convert", "--from", "mono", "--to", "l2g", "--in", "grasps.jsonl", "--camera", "camera.json", "--out", "l2g.jsonl"]);
    c(&["convert", "--from", "l2g", "--to", "contactnet", "--in", "l2g.jsonl", "--camera", "camera.json", "--extrinsics", "ext.json", "--out", "cn.jsonl"]);
    c(&["convert", "--from", "contactnet", "--to", "mono", "--in", "cn.jsonl", "--camera", "camera.json", "--extrinsics", "ext.json", "--out", "back.jsonl"]);
    let back: Vec<GraspMono> = read_jsonl(&dir.path().join("back.jsonl"));
    for (a, b) in grasps.iter().zip(&back) {
        assert!((a.p.u - b.p.u).abs() < 1e-9 && (a.p.v - b.p.v).abs() < 1e-9);
        assert!((a.d - b.d).abs() < 1e-12 && (a.w - b.w).abs() < 1e-12 && (a.phi - b.phi).abs() < 1e-9);
        assert!((a.n_x.into_inner() - b.n_x.into_inner()).norm() < 1e-9);
    }
}

#[test]
fn contactnet_without_extrinsics_is_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = graspgeom(dir.path(), &["convert", "--from", "mono", "--to", "contactnet", "--in", "grasps.jsonl", "--camera", "camera.json", "--out", "cn.jsonl"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("cn.jsonl").exists());
}

#[test]
fn missing_input_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = graspgeom(dir.path(), &["sample-grasps", "--mesh", "nowhere/thing.obj", "--out", "g.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere/thing.obj"));
}

#[test]
fn bad_usage_is_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(graspgeom(dir.path(), &["frobnicate"]).status.code(), Some(3));
    assert_eq!(graspgeom(dir.path(), &["sample-grasps", "--mesh", "m.obj"]).status.code(), Some(3));
}

#[test]
fn selfcheck_passes_and_fails_on_tight_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let out = graspgeom(dir.path(), &["selfcheck"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS pose-residual"));

    write_json(&dir.path().join("tight.json"), &serde_json::json!({ "tolerances": Tolerances::uniform(1e-15) }));
    let out = graspgeom(dir.path(), &["--config", "tight.json", "selfcheck"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = graspgeom(dir.path(), &["--dry-run", "recover", "--in", "grasps.jsonl", "--camera", "camera.json", "--extrinsics", "ext.json", "--out", "poses.jsonl"]);
    assert!(out.status.success());
    assert!(!dir.path().join("poses.jsonl").exists());
    assert!(!dir.path().join("poses.jsonl.manifest.json").exists());
}

#[test]
fn sample_grasps_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = graspgeom::geom::TriangleMesh::cuboid(Vec3::new(0.02, 0.03, 0.025));
    graspgeom::geom::mesh_io::write_obj(&mesh, &dir.path().join("box.obj")).unwrap();
    for (seed, out) in [("7", "a.jsonl"), ("7", "b.jsonl"), ("8", "c.jsonl")] {
        let o = graspgeom(dir.path(), &["--seed", seed, "sample-grasps", "--mesh", "box.obj", "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert!(!read("a.jsonl").is_empty());
    assert_eq!(read("a.jsonl"), read("b.jsonl"));
    assert_ne!(read("a.jsonl"), read("c.jsonl"));
    let manifest: serde_json::Value = serde_json::from_slice(&read("a.jsonl.manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert!(manifest["inputs"].as_object().unwrap().values().all(|h| h.as_str().unwrap().len() == 64));
}
