#![allow(dead_code)]

use std::path::{Path, PathBuf};

use graspgeom::annotation::{BackgroundEntry, ObjectEntry, SceneConfig, ViewEntry};
use graspgeom::geom::{depth_io, mesh_io, render, Frame, PinholeCamera, RigidTransform, TriangleMesh, UnitVec3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    Sphere,
    Cube,
    Composite,
}

pub fn camera() -> PinholeCamera {
    PinholeCamera::new(360.0, 360.0, 160.0, 120.0, 320, 240).unwrap()
}

fn yawed(name: &str, yaw: f64, t: Vec3) -> RigidTransform {
    RigidTransform::from_axis_angle(&UnitVec3::z_axis(), yaw, t, Frame::object(name), Frame::base())
}

fn view(eye: Vec3, target: Vec3, i: usize) -> ViewEntry {
    let base_from_cam = RigidTransform::look_at(eye, target, Vec3::z(), Frame::camera(), Frame::base()).unwrap();
    ViewEntry {
        camera: camera(),
        cam_from_base: base_from_cam.inverse(),
        depth: PathBuf::from(format!("view_{i}.gdf")),
        rgb: Some(PathBuf::from(format!("view_{i}.png"))),
    }
}

/// Writes meshes and `scene.json` into `dir`; renders depth and RGB when
/// `render` is set. Returns the scene path.
pub fn write_scene(dir: &Path, kind: SceneKind, render: bool) -> PathBuf {
    let table = TriangleMesh::cuboid(Vec3::new(0.4, 0.4, 0.01));
    mesh_io::write_obj(&table, &dir.join("table.obj")).unwrap();
    let background = vec![BackgroundEntry {
        mesh: "table.obj".into(),
        base_from_obj: RigidTransform::from_translation(Vec3::new(0.0, 0.0, -0.01), Frame::new("table"), Frame::base()),
    }];
    let mut objects = Vec::new();
    let mut add = |name: &str, mesh: TriangleMesh, pose: RigidTransform| {
        let file = format!("{name}.obj");
        mesh_io::write_obj(&mesh, &dir.join(&file)).unwrap();
        objects.push(ObjectEntry { name: name.into(), mesh: file.into(), base_from_obj: pose });
    };
    let target = match kind {
        SceneKind::Sphere => {
            add("ball", TriangleMesh::icosphere(0.03, 3), yawed("ball", 0.3, Vec3::new(0.0, 0.0, 0.03)));
            Vec3::new(0.0, 0.0, 0.03)
        }
        SceneKind::Cube => {
            add("cube", TriangleMesh::cuboid(Vec3::repeat(0.025)), yawed("cube", 0.4, Vec3::new(0.0, 0.0, 0.025)));
            Vec3::new(0.0, 0.0, 0.025)
        }
        SceneKind::Composite => {
            add("ball", TriangleMesh::icosphere(0.03, 3), yawed("ball", 0.0, Vec3::new(-0.07, 0.02, 0.03)));
            add("cube", TriangleMesh::cuboid(Vec3::repeat(0.025)), yawed("cube", 0.9, Vec3::new(0.05, -0.03, 0.025)));
            add(
                "bar",
                TriangleMesh::cuboid(Vec3::new(0.015, 0.045, 0.02)),
                yawed("bar", -0.3, Vec3::new(0.0, 0.08, 0.02)),
            );
            Vec3::new(0.0, 0.02, 0.02)
        }
    };
    let views = vec![
        view(Vec3::new(0.3, 0.1, 0.35), target, 0),
        view(Vec3::new(-0.2, -0.3, 0.3), target, 1),
        view(Vec3::new(0.05, 0.02, 0.45), target, 2),
    ];
    let cfg = SceneConfig { objects, background, views };
    let path = dir.join("scene.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    if render {
        render_scene(&path);
    }
    path
}

pub fn render_scene(path: &Path) {
    let cfg = SceneConfig::read(path).unwrap();
    let root = path.parent().unwrap();
    let scene = cfg.load(root, depth_io::DEFAULT_PNG_SCALE).unwrap();
    let world = scene.world_mesh().unwrap();
    for (entry, v) in cfg.views.iter().zip(&scene.views) {
        let r = render::render_view(&world, &v.camera, &v.cam_from_base).unwrap();
        depth_io::write_f32(&r.depth, &root.join(&entry.depth)).unwrap();
        r.rgb.save(root.join(entry.rgb.as_ref().unwrap())).unwrap();
    }
}
