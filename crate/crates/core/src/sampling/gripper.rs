//! Parallel-jaw gripper as three oriented boxes and a separating-axis
//! box/triangle test.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::geom::{TriangleMesh, Vec3};
use crate::pose::GraspSE3;

/// Dimensions in meters. In the grasp frame (x closing, z approach, origin
/// midway between the contacts) each finger spans `z in [-L/2, L/2]` outside
/// the stroke, and the palm bar sits behind the fingers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GripperModel {
    pub finger_length: f64,
    pub finger_thickness: f64,
    pub finger_width: f64,
    pub palm_depth: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        Self {
            finger_length: 0.045,
            finger_thickness: 0.01,
            finger_width: 0.02,
            palm_depth: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Vec3,
    /// Columns are the box axes.
    pub axes: Matrix3<f64>,
    pub half_extents: Vec3,
}

impl OrientedBox {
    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            let s = Vec3::new(
                if i & 1 == 0 { -1.0 } else { 1.0 },
                if i & 2 == 0 { -1.0 } else { 1.0 },
                if i & 4 == 0 { -1.0 } else { 1.0 },
            );
            *c = self.center + self.axes * s.component_mul(&self.half_extents);
        }
        out
    }

    fn aabb(&self) -> (Vec3, Vec3) {
        let r = self.axes.abs() * self.half_extents;
        (self.center - r, self.center + r)
    }
}

impl GripperModel {
    /// Left finger, right finger, palm, in the pose's frame.
    pub fn boxes(&self, pose: &GraspSE3, w: f64) -> [OrientedBox; 3] {
        let (l, t, wd, d) = (self.finger_length, self.finger_thickness, self.finger_width, self.palm_depth);
        let local = [
            (Vec3::new(-(w + t) / 2.0, 0.0, 0.0), Vec3::new(t / 2.0, wd / 2.0, l / 2.0)),
            (Vec3::new((w + t) / 2.0, 0.0, 0.0), Vec3::new(t / 2.0, wd / 2.0, l / 2.0)),
            (Vec3::new(0.0, 0.0, -(l + d) / 2.0), Vec3::new(w / 2.0 + t, wd / 2.0, d / 2.0)),
        ];
        local.map(|(c, h)| OrientedBox {
            center: pose.translation() + pose.rotation() * c,
            axes: *pose.rotation(),
            half_extents: h,
        })
    }
}

/// Separating-axis test on the 13 candidate axes (3 box faces, the
/// triangle normal, 9 edge cross products). Touching counts as overlap.
pub fn box_triangle_overlap(b: &OrientedBox, tri: &[Vec3; 3]) -> bool {
    let v = tri.map(|p| b.axes.transpose() * (p - b.center));
    let h = b.half_extents;
    let separated = |a: Vec3| -> bool {
        if a.norm_squared() < 1e-24 {
            return false;
        }
        let p = [v[0].dot(&a), v[1].dot(&a), v[2].dot(&a)];
        let r = h.x * a.x.abs() + h.y * a.y.abs() + h.z * a.z.abs();
        p.iter().cloned().fold(f64::INFINITY, f64::min) > r || p.iter().cloned().fold(f64::NEG_INFINITY, f64::max) < -r
    };
    for k in 0..3 {
        let lo = v.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = v.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        if lo > h[k] || hi < -h[k] {
            return false;
        }
    }
    let f = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
    if separated(f[0].cross(&f[1])) {
        return false;
    }
    for e in [Vec3::x(), Vec3::y(), Vec3::z()] {
        for edge in &f {
            if separated(e.cross(edge)) {
                return false;
            }
        }
    }
    true
}

/// True iff no gripper box intersects any triangle of `scene` (all in the
/// pose's frame).
pub fn collision_check(pose: &GraspSE3, w: f64, gripper: &GripperModel, scene: &[TriangleMesh]) -> bool {
    let boxes = gripper.boxes(pose, w);
    let bounds = boxes.map(|b| b.aabb());
    for mesh in scene {
        for f in 0..mesh.len() {
            let tri = mesh.triangle(f);
            let lo = tri[0].inf(&tri[1]).inf(&tri[2]);
            let hi = tri[0].sup(&tri[1]).sup(&tri[2]);
            for (b, (blo, bhi)) in boxes.iter().zip(&bounds) {
                let disjoint = (0..3).any(|k| lo[k] > bhi[k] || hi[k] < blo[k]);
                if !disjoint && box_triangle_overlap(b, &tri) {
                    return false;
                }
            }
        }
    }
    true
}
