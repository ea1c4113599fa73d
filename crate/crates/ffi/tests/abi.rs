use std::ffi::{c_char, CStr, CString};
use std::ptr;

use graspgeom_ffi::*;

fn camera() -> *mut GgCamera {
    let mut cam = ptr::null_mut();
    assert_eq!(unsafe { gg_camera_new(1000.0, 1000.0, 640.0, 480.0, 1280, 960, &mut cam) }, GgStatus::Ok);
    cam
}

fn identity() -> GgTransform {
    GgTransform { rotation: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], translation: [0.0; 3] }
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { gg_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn close(a: &[f64], b: &[f64], eps: f64) {
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < eps, "{a:?} vs {b:?}");
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(gg_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn recover_pose_by_hand() {
    let cam = camera();
    let g = GgMono { u: 1640.0, v: 480.0, d: 1.0, w: 0.04, phi: std::f64::consts::FRAC_PI_2, nx: [-1.0, 0.0, 0.0] };
    let mut pose = GgPose { rotation: [0.0; 9], translation: [0.0; 3] };
    assert_eq!(unsafe { gg_recover_pose(cam, &g, &identity(), &mut pose) }, GgStatus::Ok);
    close(&pose.rotation, &[-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0], 1e-15);
    close(&pose.translation, &[0.98, 0.0, 1.0], 1e-15);
    unsafe { gg_camera_free(cam) };
}

#[test]
fn mono_l2g_round_trip() {
    let cam = camera();
    let g = GgMono { u: 700.5, v: 410.25, d: 0.6, w: 0.05, phi: 1.1, nx: [0.6, 0.0, 0.8] };
    let mut l = GgL2G { p1: [0.0; 3], p2: [0.0; 3], phi: 0.0 };
    let mut back = GgMono { u: 0.0, v: 0.0, d: 0.0, w: 0.0, phi: 0.0, nx: [0.0; 3] };
    unsafe {
        assert_eq!(gg_mono_to_l2g(cam, &g, &mut l), GgStatus::Ok);
        assert_eq!(gg_l2g_to_mono(cam, &l, &mut back), GgStatus::Ok);
        gg_camera_free(cam);
    }
    close(&[back.u, back.v, back.d, back.w, back.phi], &[g.u, g.v, g.d, g.w, g.phi], 1e-9);
    close(&back.nx, &g.nx, 1e-12);
}

#[test]
fn mono_contactnet_round_trip() {
    let cam = camera();
    // Camera looking straight down from 0.5 m above the base origin.
    let t = GgTransform { rotation: [1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0], translation: [0.0, 0.0, 0.5] };
    let g = GgMono { u: 620.0, v: 500.0, d: 0.45, w: 0.03, phi: 0.9, nx: [0.8, 0.6, 0.0] };
    let mut c = GgContactNet { p1: [0.0; 3], nx: [0.0; 3], nz: [0.0; 3], w: 0.0 };
    let mut back = GgMono { u: 0.0, v: 0.0, d: 0.0, w: 0.0, phi: 0.0, nx: [0.0; 3] };
    unsafe {
        assert_eq!(gg_mono_to_contactnet(cam, &g, &t, &mut c), GgStatus::Ok);
        assert_eq!(gg_contactnet_to_mono(cam, &c, &t, &mut back), GgStatus::Ok);
        gg_camera_free(cam);
    }
    close(&[back.u, back.v, back.d, back.w, back.phi], &[g.u, g.v, g.d, g.w, g.phi], 1e-9);
}

#[test]
fn invalid_grasp_reports_error() {
    let cam = camera();
    let g = GgMono { u: 1.0, v: 2.0, d: -0.5, w: 0.05, phi: 1.0, nx: [1.0, 0.0, 0.0] };
    let mut pose = GgPose { rotation: [0.0; 9], translation: [0.0; 3] };
    assert_eq!(unsafe { gg_recover_pose(cam, &g, &identity(), &mut pose) }, GgStatus::Geometry);
    assert!(!last_error().is_empty());
    unsafe { gg_camera_free(cam) };
}

#[test]
fn null_pointers_are_rejected() {
    let mut ny = [0.0; 3];
    assert_eq!(unsafe { gg_solve_ny(ptr::null(), 1.0, &mut ny) }, GgStatus::NullPointer);
    assert!(last_error().contains("null"));
    assert_eq!(unsafe { gg_camera_new(1.0, 1.0, 0.0, 0.0, 1, 1, ptr::null_mut()) }, GgStatus::NullPointer);
    assert_eq!(unsafe { gg_mesh_face_count(ptr::null()) }, 0);
    unsafe {
        gg_camera_free(ptr::null_mut());
        gg_mesh_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates() {
    let mut ny = [0.0; 3];
    unsafe { gg_solve_ny(ptr::null(), 1.0, &mut ny) };
    let mut buf = [1 as c_char; 5];
    let n = unsafe { gg_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 4);
    assert_eq!(buf[4], 0);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes().len(), 4);
}

#[test]
fn camera_project_backproject() {
    let cam = camera();
    let mut p = [0.0; 3];
    let mut uv = [0.0; 2];
    unsafe {
        assert_eq!(gg_camera_backproject(cam, 700.0, 300.0, 0.8, &mut p), GgStatus::Ok);
        assert_eq!(gg_camera_project(cam, &p, &mut uv), GgStatus::Ok);
        assert_eq!(gg_camera_project(cam, &[0.0, 0.0, -1.0], &mut uv), GgStatus::Geometry);
        gg_camera_free(cam);
    }
    close(&p[2..], &[0.8], 1e-15);
    let mut bad = ptr::null_mut();
    assert_ne!(unsafe { gg_camera_new(-1.0, 1.0, 0.0, 0.0, 10, 10, &mut bad) }, GgStatus::Ok);
    assert!(bad.is_null());
}

#[test]
fn solve_ny_is_orthogonal_and_faces_down() {
    let nx = [0.6, 0.0, 0.8];
    let mut ny = [0.0; 3];
    assert_eq!(unsafe { gg_solve_ny(&nx, 1.2, &mut ny) }, GgStatus::Ok);
    let dot: f64 = nx.iter().zip(&ny).map(|(a, b)| a * b).sum();
    assert!(dot.abs() < 1e-12);
    // n_z = n_x x n_y must point toward the platform.
    let nz2 = nx[0] * ny[1] - nx[1] * ny[0];
    assert!(nz2 <= 1e-12);
}

#[test]
fn sphere_raycast_and_force_closure() {
    let mesh = gg_mesh_icosphere(0.03, 3);
    assert!(!mesh.is_null());
    assert_eq!(unsafe { gg_mesh_face_count(mesh) }, 1280);
    let mut hit = GgRayHit { point: [0.0; 3], distance: 0.0, face: 0 };
    let mut found = false;
    unsafe {
        assert_eq!(gg_mesh_raycast(mesh, &[0.0, 0.0, -1.0], &[0.0, 0.0, 2.0], 0.0, &mut hit, &mut found), GgStatus::Ok);
        assert!(found);
        assert!((hit.distance - 0.97).abs() < 1e-3);
        assert_eq!(gg_mesh_raycast(mesh, &[1.0, 0.0, -1.0], &[0.0, 0.0, 1.0], 0.0, &mut hit, &mut found), GgStatus::Ok);
        assert!(!found);
        assert_ne!(gg_mesh_raycast(mesh, &[0.0; 3], &[0.0; 3], 0.0, &mut hit, &mut found), GgStatus::Ok);
        gg_mesh_free(mesh);
    }
    assert!(gg_mesh_icosphere(-1.0, 2).is_null());

    let mut closed = false;
    let (p1, p2) = ([0.03, 0.0, 0.0], [-0.03, 0.0, 0.0]);
    unsafe {
        assert_eq!(gg_force_closure(&p1, &[1.0, 0.0, 0.0], &p2, &[-1.0, 0.0, 0.0], 0.4, &mut closed), GgStatus::Ok);
        assert!(closed);
        assert_eq!(gg_force_closure(&p1, &[0.0, 1.0, 0.0], &p2, &[-1.0, 0.0, 0.0], 0.4, &mut closed), GgStatus::Ok);
        assert!(!closed);
    }
}

#[test]
fn mesh_load_errors() {
    let mut mesh = ptr::null_mut();
    let path = CString::new("/nonexistent/mesh.obj").unwrap();
    assert_eq!(unsafe { gg_mesh_load(path.as_ptr(), &mut mesh) }, GgStatus::Io);
    assert!(last_error().contains("/nonexistent/mesh.obj"));
    assert!(mesh.is_null());

    let dir = std::env::temp_dir().join(format!("gg-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("tri.obj");
    std::fs::write(&file, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
    let path = CString::new(file.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { gg_mesh_load(path.as_ptr(), &mut mesh) }, GgStatus::Ok);
    assert_eq!(unsafe { gg_mesh_face_count(mesh) }, 1);
    unsafe { gg_mesh_free(mesh) };
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn header_is_current() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/graspgeom.h")).unwrap();
    for name in [
        "gg_version",
        "gg_last_error_message",
        "gg_camera_new",
        "gg_recover_pose",
        "gg_mono_to_l2g",
        "gg_contactnet_to_mono",
        "gg_mesh_raycast",
        "gg_force_closure",
        "typedef struct GgCamera GgCamera",
        "GG_STATUS_GEOMETRY = 5",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_smoke_program() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    // tests/abi-<hash> lives in target/<profile>/deps.
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libgraspgeom_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::temp_dir().join(format!("gg-smoke-{}", std::process::id()));
    let status = std::process::Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    std::fs::remove_file(&exe).ok();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("graspgeom "));
}
