//! View-level annotation: mesh grasps are carried into each camera,
//! filtered by collision and visibility, and recorded as keypoints with
//! their monocular grasp parameters.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Tolerances, PLATFORM_NORMAL};
use crate::error::{Error, Result};
use crate::geom::{
    mesh_io, DepthMap, Frame, NormalMap, PinholeCamera, Pixel, PixelIndex, RigidTransform, SurfaceCloud, TriangleMesh,
    UnitVec3, Vec3,
};
use crate::pose::{solve_ny, GraspMono, GraspSE3};
use crate::sampling::{collision_check, AntipodalGrasp, GripperModel};

/// On-disk scene description. Asset paths are relative to the scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub objects: Vec<ObjectEntry>,
    #[serde(default)]
    pub background: Vec<BackgroundEntry>,
    pub views: Vec<ViewEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEntry {
    pub name: String,
    pub mesh: PathBuf,
    #[serde(rename = "T_base_obj")]
    pub base_from_obj: RigidTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundEntry {
    pub mesh: PathBuf,
    #[serde(rename = "T_base_obj")]
    pub base_from_obj: RigidTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewEntry {
    pub camera: PinholeCamera,
    #[serde(rename = "T_cam_base")]
    pub cam_from_base: RigidTransform,
    pub depth: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rgb: Option<PathBuf>,
}

impl SceneConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        cfg.check_frames()?;
        Ok(cfg)
    }

    fn check_frames(&self) -> Result<()> {
        let base = Frame::base();
        let expect = |t: &RigidTransform, from: Option<Frame>, to: &Frame| -> Result<()> {
            if t.to_frame() != to {
                return Err(Error::FrameMismatch { expected: to.clone(), found: t.to_frame().clone() });
            }
            match from {
                Some(f) => t.expect_from(&f),
                None => Ok(()),
            }
        };
        for o in &self.objects {
            expect(&o.base_from_obj, Some(Frame::object(&o.name)), &base)?;
        }
        for b in &self.background {
            expect(&b.base_from_obj, None, &base)?;
        }
        for v in &self.views {
            expect(&v.cam_from_base, Some(base.clone()), &Frame::camera())?;
        }
        Ok(())
    }

    /// Loads meshes and whatever depth maps exist; a missing depth file is
    /// reported when that view is annotated.
    pub fn load(&self, root: &Path, png_scale: f64) -> Result<Scene> {
        let objects = self
            .objects
            .iter()
            .map(|o| {
                Ok(SceneObject {
                    name: o.name.clone(),
                    mesh: mesh_io::load_mesh(&root.join(&o.mesh))?,
                    base_from_obj: o.base_from_obj.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let background = self
            .background
            .iter()
            .map(|b| Ok(mesh_io::load_mesh(&root.join(&b.mesh))?.transformed(&b.base_from_obj)))
            .collect::<Result<Vec<_>>>()?;
        let views = self
            .views
            .iter()
            .map(|v| {
                let path = root.join(&v.depth);
                let depth = if path.exists() {
                    let d = crate::geom::depth_io::load_depth(&path, png_scale)?;
                    d.check_camera(&v.camera)?;
                    Some(d)
                } else {
                    None
                };
                Ok(View { camera: v.camera, cam_from_base: v.cam_from_base.clone(), depth })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Scene { objects, background, views })
    }
}

#[derive(Debug, Clone)]
pub struct SceneObject {
    pub name: String,
    /// Mesh in its own frame.
    pub mesh: TriangleMesh,
    pub base_from_obj: RigidTransform,
}

#[derive(Debug, Clone)]
pub struct View {
    pub camera: PinholeCamera,
    pub cam_from_base: RigidTransform,
    pub depth: Option<DepthMap>,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
    /// Background meshes, already in the base frame.
    pub background: Vec<TriangleMesh>,
    pub views: Vec<View>,
}

impl Scene {
    /// Every mesh of the scene in the base frame.
    pub fn world_mesh(&self) -> Result<TriangleMesh> {
        let mut parts: Vec<TriangleMesh> = self.background.clone();
        parts.extend(self.objects.iter().map(|o| o.mesh.transformed(&o.base_from_obj)));
        TriangleMesh::merge(&parts)
    }

    /// Obstacles for grasps on object `index`: background plus the other
    /// objects, in the base frame.
    pub fn obstacles(&self, index: usize) -> Vec<TriangleMesh> {
        let mut out = self.background.clone();
        for (i, o) in self.objects.iter().enumerate() {
            if i != index {
                out.push(o.mesh.transformed(&o.base_from_obj));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationConfig {
    pub gripper: GripperModel,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GraspId {
    pub object: String,
    pub grasp: usize,
    pub phi: usize,
}

/// One keypoint and its grasp. `u`, `v` are the exact projection of the
/// visible contact; `keypoint` is its nearest surface pixel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub view: usize,
    pub grasp_id: GraspId,
    #[serde(rename = "G_cam")]
    pub pose: GraspSE3,
    pub keypoint: PixelIndex,
    pub u: f64,
    pub v: f64,
    pub d: f64,
    pub w: f64,
    pub phi: f64,
    pub nx: UnitVec3,
}

impl Annotation {
    pub fn mono(&self) -> GraspMono {
        GraspMono { p: Pixel::new(self.u, self.v), d: self.d, w: self.w, phi: self.phi, n_x: self.nx }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationStats {
    pub candidates: usize,
    pub collided: usize,
    pub invisible: usize,
    pub not_representable: usize,
    pub emitted: usize,
}

#[derive(Debug, Clone)]
enum Outcome {
    Collided,
    Invisible,
    NotRepresentable,
    Emitted(Box<Annotation>),
}

/// Object-frame pose of grasp `g` at dihedral angle `phi`: centered
/// between the contacts, `n_x` from `p1` to `p2`, approach toward `-z`.
pub fn grasp_pose(g: &AntipodalGrasp, phi: f64, frame: Frame, tol: &Tolerances) -> Result<GraspSE3> {
    let n_x = g.axis().ok_or(Error::DegenerateContactPair(g.w))?;
    let n_y = solve_ny(&n_x, phi, tol)?.selected();
    let n_z = UnitVec3::normalize(n_x.cross(&n_y)).ok_or(Error::DegenerateAxis)?;
    GraspSE3::from_axes(&n_x, &n_y, &n_z, (g.p1 + g.p2) * 0.5, frame)
}

/// Carries object-frame poses into the camera: `(T_cam_base T_base_obj) G`.
pub fn grasps_to_camera(
    grasps: &[GraspSE3],
    base_from_obj: &RigidTransform,
    cam_from_base: &RigidTransform,
) -> Result<Vec<GraspSE3>> {
    let cam_from_obj = cam_from_base.compose(base_from_obj)?;
    grasps.iter().map(|g| g.transformed(&cam_from_obj)).collect()
}

struct ViewContext<'a> {
    view: &'a View,
    cloud: SurfaceCloud,
    base_from_cam: RigidTransform,
    tol: &'a Tolerances,
    gripper: &'a GripperModel,
}

impl ViewContext<'_> {
    fn evaluate(
        &self,
        obj: &SceneObject,
        obstacles: &[TriangleMesh],
        g: &AntipodalGrasp,
        phi: f64,
        id: GraspId,
        view_index: usize,
    ) -> Outcome {
        let Ok(g_obj) = grasp_pose(g, phi, Frame::object(&obj.name), self.tol) else {
            return Outcome::NotRepresentable;
        };
        let Ok(g_base) = g_obj.transformed(&obj.base_from_obj) else {
            return Outcome::NotRepresentable;
        };
        if !collision_check(&g_base, g.w, self.gripper, obstacles) {
            return Outcome::Collided;
        }
        let Ok(g_cam) = g_base.transformed(&self.view.cam_from_base) else {
            return Outcome::NotRepresentable;
        };
        let (c1, c2) = g_cam.contacts(g.w);
        let probe = |c: &Vec3| {
            let (px, _, dist) = self.cloud.nearest(c);
            (c.z > 0.0 && dist <= self.tol.visibility).then_some((px, dist))
        };
        let (pose, endpoint, keypoint) = match (probe(&c1), probe(&c2)) {
            (Some((k1, d1)), Some((_, d2))) if d1 <= d2 => (g_cam, c1, k1),
            (Some((k1, _)), None) => (g_cam, c1, k1),
            (_, Some((k2, _))) => (g_cam.jaw_swapped(), c2, k2),
            (None, None) => return Outcome::Invisible,
        };
        let Ok(pose_base) = pose.transformed(&self.base_from_cam) else {
            return Outcome::NotRepresentable;
        };
        let n = Vec3::from(PLATFORM_NORMAL);
        if pose_base.n_z().dot(&n) > self.tol.platform {
            return Outcome::NotRepresentable;
        }
        let phi = pose_base.n_y().dot(&n).clamp(-1.0, 1.0).acos();
        let Ok(p) = self.view.camera.project(&endpoint) else {
            return Outcome::NotRepresentable;
        };
        let Ok(mono) = GraspMono::new(p, endpoint.z, g.w, phi, pose.n_x(), self.tol) else {
            return Outcome::NotRepresentable;
        };
        Outcome::Emitted(Box::new(Annotation {
            view: view_index,
            grasp_id: id,
            pose,
            keypoint,
            u: mono.p.u,
            v: mono.p.v,
            d: mono.d,
            w: mono.w,
            phi: mono.phi,
            nx: mono.n_x,
        }))
    }
}

/// Annotates one view. `grasps[i]` are the object-frame grasps of
/// `scene.objects[i]`. Records come out sorted by grasp id.
pub fn annotate_view(
    scene: &Scene,
    view_index: usize,
    grasps: &[Vec<AntipodalGrasp>],
    cfg: &AnnotationConfig,
    tol: &Tolerances,
) -> Result<(Vec<Annotation>, AnnotationStats)> {
    let view = scene.views.get(view_index).ok_or(Error::MissingDepth(view_index))?;
    let depth = view.depth.as_ref().ok_or(Error::MissingDepth(view_index))?;
    if grasps.len() != scene.objects.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} grasp lists for {} objects",
            grasps.len(),
            scene.objects.len()
        )));
    }
    let ctx = ViewContext {
        view,
        cloud: SurfaceCloud::new(depth, &view.camera)?,
        base_from_cam: view.cam_from_base.inverse(),
        tol,
        gripper: &cfg.gripper,
    };
    let mut stats = AnnotationStats::default();
    let mut out = Vec::new();
    for (oi, (obj, list)) in scene.objects.iter().zip(grasps).enumerate() {
        let obstacles = scene.obstacles(oi);
        let jobs: Vec<(usize, usize, f64)> = list
            .iter()
            .enumerate()
            .flat_map(|(gi, g)| g.phi_samples.iter().enumerate().map(move |(k, &phi)| (gi, k, phi)))
            .collect();
        let outcomes: Vec<Outcome> = jobs
            .par_iter()
            .map(|&(gi, k, phi)| {
                let id = GraspId { object: obj.name.clone(), grasp: gi, phi: k };
                ctx.evaluate(obj, &obstacles, &list[gi], phi, id, view_index)
            })
            .collect();
        stats.candidates += outcomes.len();
        for o in outcomes {
            match o {
                Outcome::Collided => stats.collided += 1,
                Outcome::Invisible => stats.invisible += 1,
                Outcome::NotRepresentable => stats.not_representable += 1,
                Outcome::Emitted(a) => {
                    stats.emitted += 1;
                    out.push(*a);
                }
            }
        }
    }
    out.sort_by(|a, b| a.grasp_id.cmp(&b.grasp_id));
    Ok((out, stats))
}

/// Mean pairwise cosine similarity of the valid normals in the window of
/// half-size `radius` around `p`, mapped to `[0, 1]`.
pub fn normal_consistency(normals: &NormalMap, p: PixelIndex, radius: usize) -> Result<f64> {
    if p.u >= normals.width() + radius || p.v >= normals.height() + radius {
        return Err(Error::EmptyWindow);
    }
    let (u0, u1) = (p.u.saturating_sub(radius), (p.u + radius).min(normals.width().saturating_sub(1)));
    let (v0, v1) = (p.v.saturating_sub(radius), (p.v + radius).min(normals.height().saturating_sub(1)));
    let mut sum = Vec3::zeros();
    let mut count = 0usize;
    for v in v0..=v1 {
        for u in u0..=u1 {
            if let Some(n) = normals.get(u, v) {
                sum += n.into_inner();
                count += 1;
            }
        }
    }
    match count {
        0 => Err(Error::EmptyWindow),
        1 => Ok(1.0),
        c => {
            let c = c as f64;
            let mean_cos = (sum.norm_squared() - c) / (c * (c - 1.0));
            Ok(((mean_cos + 1.0) / 2.0).clamp(0.0, 1.0))
        }
    }
}
