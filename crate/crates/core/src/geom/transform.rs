use std::fmt;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{UnitVec3, Vec3};
use crate::error::{Error, Result};

/// Name of a coordinate frame. Frames are compared by exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frame(String);

impl Frame {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn base() -> Self {
        Self::new("base")
    }

    pub fn camera() -> Self {
        Self::new("camera")
    }

    pub fn object(name: &str) -> Self {
        Self(format!("object:{name}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Proper rigid motion mapping coordinates in `from` into `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vec3,
    from: Frame,
    to: Frame,
}

pub(crate) fn check_rotation(r: &Matrix3<f64>, tol: f64) -> Result<()> {
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::NotRotation("non-finite entry".into()));
    }
    let err = (r.transpose() * r - Matrix3::identity()).abs().max();
    if err > tol {
        return Err(Error::NotRotation(format!("|R^T R - I| = {err:e}")));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > tol {
        return Err(Error::NotRotation(format!("det = {det}")));
    }
    Ok(())
}

impl RigidTransform {
    pub fn new(rotation: Matrix3<f64>, translation: Vec3, from: Frame, to: Frame) -> Result<Self> {
        Self::new_with_tol(rotation, translation, from, to, crate::config::Tolerances::default().rotation)
    }

    pub fn new_with_tol(
        rotation: Matrix3<f64>,
        translation: Vec3,
        from: Frame,
        to: Frame,
        tol: f64,
    ) -> Result<Self> {
        check_rotation(&rotation, tol)?;
        if translation.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotRotation("non-finite translation".into()));
        }
        Ok(Self {
            rotation,
            translation,
            from,
            to,
        })
    }

    pub fn identity(from: Frame, to: Frame) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
            from,
            to,
        }
    }

    pub fn from_translation(translation: Vec3, from: Frame, to: Frame) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
            from,
            to,
        }
    }

    /// Rotation of `angle` radians about `axis` followed by a translation.
    pub fn from_axis_angle(axis: &UnitVec3, angle: f64, translation: Vec3, from: Frame, to: Frame) -> Self {
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(axis.into_inner()), angle);
        Self {
            rotation: *rot.matrix(),
            translation,
            from,
            to,
        }
    }

    /// Camera pose (camera -> `world`) looking from `eye` at `target`, with
    /// image "down" as close as possible to `-up`.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3, camera: Frame, world: Frame) -> Result<Self> {
        let forward = UnitVec3::normalize(target - eye)
            .ok_or_else(|| Error::InvalidCamera("eye and target coincide".into()))?;
        let down = -up + forward.dot(&up) * forward.into_inner();
        if down.norm() < 1e-9 {
            return Err(Error::InvalidCamera("viewing direction parallel to up".into()));
        }
        let down = UnitVec3::normalize(down).expect("nonzero");
        let right = down.cross(&forward);
        let rotation = Matrix3::from_columns(&[right, down.into_inner(), forward.into_inner()]);
        Self::new(rotation, eye, camera, world)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn from_frame(&self) -> &Frame {
        &self.from
    }

    pub fn to_frame(&self) -> &Frame {
        &self.to
    }

    /// Same motion with relabeled frames.
    pub fn relabel(&self, from: Frame, to: Frame) -> Self {
        Self {
            from,
            to,
            ..self.clone()
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn transform_unit(&self, v: &UnitVec3) -> UnitVec3 {
        v.rotated(&self.rotation)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            translation: -(rt * self.translation),
            rotation: rt,
            from: self.to.clone(),
            to: self.from.clone(),
        }
    }

    /// `self * rhs`: applies `rhs` first. Requires `rhs.to == self.from`.
    pub fn compose(&self, rhs: &RigidTransform) -> Result<Self> {
        if rhs.to != self.from {
            return Err(Error::FrameMismatch {
                expected: self.from.clone(),
                found: rhs.to.clone(),
            });
        }
        Ok(Self {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation * rhs.translation + self.translation,
            from: rhs.from.clone(),
            to: self.to.clone(),
        })
    }

    pub fn expect_from(&self, frame: &Frame) -> Result<()> {
        if &self.from != frame {
            return Err(Error::FrameMismatch {
                expected: frame.clone(),
                found: self.from.clone(),
            });
        }
        Ok(())
    }

    /// Row-major 3x3 rotation.
    pub fn rotation_row_major(&self) -> [f64; 9] {
        row_major(&self.rotation)
    }
}

pub(crate) fn row_major(m: &Matrix3<f64>) -> [f64; 9] {
    [
        m[(0, 0)],
        m[(0, 1)],
        m[(0, 2)],
        m[(1, 0)],
        m[(1, 1)],
        m[(1, 2)],
        m[(2, 0)],
        m[(2, 1)],
        m[(2, 2)],
    ]
}

pub(crate) fn from_row_major(r: &[f64; 9]) -> Matrix3<f64> {
    Matrix3::from_row_slice(r)
}

/// JSON form: `{"R": [9 row-major], "t": [3], "from": ..., "to": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TransformRecord {
    #[serde(rename = "R")]
    rotation: [f64; 9],
    t: [f64; 3],
    from: Frame,
    to: Frame,
}

impl Serialize for RigidTransform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TransformRecord {
            rotation: row_major(&self.rotation),
            t: self.translation.into(),
            from: self.from.clone(),
            to: self.to.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RigidTransform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = TransformRecord::deserialize(d)?;
        // Inputs are often written with a handful of digits; accept 1e-6.
        RigidTransform::new_with_tol(
            from_row_major(&rec.rotation),
            Vec3::from(rec.t),
            rec.from,
            rec.to,
            1e-6,
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn frames() -> (Frame, Frame, Frame, Frame) {
        (Frame::new("a"), Frame::new("b"), Frame::new("c"), Frame::new("d"))
    }

    fn arb_transform(from: Frame, to: Frame) -> impl Strategy<Value = RigidTransform> {
        (
            prop::array::uniform3(-1.0f64..1.0),
            -3.0f64..3.0,
            prop::array::uniform3(-2.0f64..2.0),
        )
            .prop_filter_map("zero axis", move |(axis, angle, t)| {
                let axis = UnitVec3::normalize(Vec3::from(axis))?;
                Some(RigidTransform::from_axis_angle(&axis, angle, Vec3::from(t), from.clone(), to.clone()))
            })
    }

    proptest! {
        #[test]
        fn composition_is_associative(
            t1 in arb_transform(Frame::new("c"), Frame::new("d")),
            t2 in arb_transform(Frame::new("b"), Frame::new("c")),
            t3 in arb_transform(Frame::new("a"), Frame::new("b")),
            p in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let left = t1.compose(&t2).unwrap().compose(&t3).unwrap();
            let right = t1.compose(&t2.compose(&t3).unwrap()).unwrap();
            prop_assert!((left.rotation() - right.rotation()).abs().max() < 1e-9);
            let p = Vec3::from(p);
            prop_assert!((left.transform_point(&p) - right.transform_point(&p)).norm() < 1e-9);
        }

        #[test]
        fn inverse_composes_to_identity(t in arb_transform(Frame::new("a"), Frame::new("b"))) {
            let id = t.compose(&t.inverse()).unwrap();
            prop_assert!((id.rotation() - Matrix3::identity()).abs().max() < 1e-9);
            prop_assert!(id.translation().norm() < 1e-9);
            prop_assert_eq!(id.from_frame(), &Frame::new("b"));
        }
    }

    #[test]
    fn compose_rejects_mismatched_frames() {
        let (a, b, c, d) = frames();
        let t1 = RigidTransform::identity(c, d);
        let t2 = RigidTransform::identity(a, b);
        assert!(matches!(t1.compose(&t2), Err(Error::FrameMismatch { .. })));
    }

    #[test]
    fn rejects_reflection() {
        let m = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(RigidTransform::new(m, Vec3::zeros(), Frame::base(), Frame::camera()).is_err());
    }

    #[test]
    fn look_at_points_z_forward() {
        let t = RigidTransform::look_at(
            Vec3::new(0.0, -1.0, 1.0),
            Vec3::zeros(),
            Vec3::z(),
            Frame::camera(),
            Frame::base(),
        )
        .unwrap();
        let f = t.transform_vector(&Vec3::z());
        assert_relative_eq!(f, Vec3::new(0.0, 1.0, -1.0).normalize(), epsilon = 1e-12);
        // image down has a negative world-z component
        assert!(t.transform_vector(&Vec3::y()).z < 0.0);
    }

    #[test]
    fn json_round_trip() {
        let axis = UnitVec3::normalize(Vec3::new(1.0, 2.0, 3.0)).unwrap();
        let t = RigidTransform::from_axis_angle(&axis, 0.7, Vec3::new(1.0, 2.0, 3.0), Frame::camera(), Frame::base());
        let s = serde_json::to_string(&t).unwrap();
        let back: RigidTransform = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
    }
}
