//! Ray-cast rendering of depth, normals and a shaded image; the synthetic
//! pixel-exact depth source for scenes built from meshes.

use image::RgbImage;
use rayon::prelude::*;

use super::{DepthMap, NormalMap, PinholeCamera, PixelIndex, RigidTransform, TriangleMesh, UnitVec3, Vec3};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct RenderedView {
    pub depth: DepthMap,
    /// Camera-frame surface normals (interpolated where the mesh has vertex
    /// normals), facing the camera.
    pub normals: NormalMap,
    pub rgb: RgbImage,
}

/// Renders `scene` (world coordinates) as seen through `cam` posed by
/// `cam_from_world`.
pub fn render_view(scene: &TriangleMesh, cam: &PinholeCamera, cam_from_world: &RigidTransform) -> Result<RenderedView> {
    let local = scene.transformed(cam_from_world);
    let (w, h) = (cam.width, cam.height);
    let rows: Vec<Vec<(f64, Option<UnitVec3>)>> = (0..h)
        .into_par_iter()
        .map(|v| {
            (0..w)
                .map(|u| {
                    let ray = cam
                        .backproject(PixelIndex::new(u, v).to_pixel(), 1.0)
                        .expect("unit depth is positive");
                    let dir = UnitVec3::normalize(ray).expect("nonzero ray");
                    match local.raycast(&Vec3::zeros(), &dir, 0.0) {
                        Some(hit) if hit.point.z > 0.0 => {
                            let mut n = local.normal_at(hit.face, hit.barycentric);
                            if n.dot(&dir) > 0.0 {
                                n = -n;
                            }
                            (hit.point.z, Some(n))
                        }
                        _ => (0.0, None),
                    }
                })
                .collect()
        })
        .collect();
    let mut depth = Vec::with_capacity(w * h);
    let mut normals = Vec::with_capacity(w * h);
    let mut rgb = RgbImage::new(w as u32, h as u32);
    for (v, row) in rows.into_iter().enumerate() {
        for (u, (d, n)) in row.into_iter().enumerate() {
            depth.push(d);
            normals.push(n);
            let px = match n {
                Some(n) => {
                    let shade = 0.3 + 0.7 * (-n.z).clamp(0.0, 1.0);
                    let c = |x: f64| ((0.5 + 0.5 * x) * shade * 255.0).round() as u8;
                    [c(n.x), c(n.y), c(-n.z)]
                }
                None => [20, 20, 20],
            };
            rgb.put_pixel(u as u32, v as u32, image::Rgb(px));
        }
    }
    Ok(RenderedView {
        depth: DepthMap::new(w, h, depth)?,
        normals: NormalMap::new(w, h, normals)?,
        rgb,
    })
}
