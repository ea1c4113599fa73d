use rayon::prelude::*;

use crate::error::Result;
use crate::geom::{DepthMap, NormalMap, PinholeCamera, UnitVec3};

/// Normals from central differences of the back-projected points,
/// oriented toward the camera. Border pixels and pixels with a missing
/// 4-neighbor are invalid.
pub fn normals_from_depth(depth: &DepthMap, cam: &PinholeCamera) -> Result<NormalMap> {
    depth.check_camera(cam)?;
    let (w, h) = (depth.width(), depth.height());
    let data: Vec<Option<UnitVec3>> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (u, v) = (i % w, i / w);
            if u == 0 || v == 0 || u + 1 >= w || v + 1 >= h {
                return None;
            }
            let p = depth.point(u, v, cam)?;
            let tu = depth.point(u + 1, v, cam)? - depth.point(u - 1, v, cam)?;
            let tv = depth.point(u, v + 1, cam)? - depth.point(u, v - 1, cam)?;
            let n = UnitVec3::normalize(tu.cross(&tv))?;
            Some(if n.dot(&p) > 0.0 { -n } else { n })
        })
        .collect();
    NormalMap::new(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Pixel, Vec3};

    fn cam() -> PinholeCamera {
        PinholeCamera::new(100.0, 100.0, 32.0, 24.0, 64, 48).unwrap()
    }

    fn plane_depth(cam: &PinholeCamera, n: Vec3, offset: f64) -> DepthMap {
        // plane n . X = offset, X = d * ray
        let mut data = Vec::new();
        for v in 0..cam.height {
            for u in 0..cam.width {
                let ray = cam.backproject(Pixel::new(u as f64, v as f64), 1.0).unwrap();
                data.push(offset / n.dot(&ray));
            }
        }
        DepthMap::new(cam.width, cam.height, data).unwrap()
    }

    fn angle(a: &Vec3, b: &Vec3) -> f64 {
        a.cross(b).norm().atan2(a.dot(b))
    }

    #[test]
    fn fronto_plane() {
        let c = cam();
        let m = normals_from_depth(&plane_depth(&c, Vec3::z(), 1.0), &c).unwrap();
        for v in 1..47 {
            for u in 1..63 {
                assert!(angle(&m.get(u, v).unwrap(), &-Vec3::z()) < 1e-9);
            }
        }
        assert!(m.get(0, 5).is_none() && m.get(63, 5).is_none());
    }

    #[test]
    fn tilted_plane() {
        let c = cam();
        let n = Vec3::new(0.0, 1.0, 1.0).normalize();
        let m = normals_from_depth(&plane_depth(&c, n, 0.7), &c).unwrap();
        let expected = -n;
        for v in 1..47 {
            for u in 1..63 {
                let got = m.get(u, v).unwrap();
                assert!(angle(&got, &expected) < 1e-3);
                assert!((got.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn holes_invalidate_neighbors() {
        let c = cam();
        let d = plane_depth(&c, Vec3::z(), 1.0);
        let mut data = d.data().to_vec();
        data[10 * 64 + 10] = 0.0;
        let m = normals_from_depth(&DepthMap::new(64, 48, data).unwrap(), &c).unwrap();
        assert!(m.get(10, 10).is_none() && m.get(11, 10).is_none() && m.get(10, 9).is_none());
        assert!(m.get(11, 11).is_some());
    }
}
