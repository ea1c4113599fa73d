use std::ops::{Deref, Neg};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::config::UNIT_NORM_TOL;
use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// A direction whose norm is 1 to within [`UNIT_NORM_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub fn new(v: Vec3) -> Result<Self> {
        Self::new_with_tol(v, UNIT_NORM_TOL)
    }

    pub fn new_with_tol(v: Vec3, tol: f64) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > tol || !n.is_finite() {
            return Err(Error::NotUnit(n));
        }
        Ok(Self(v))
    }

    /// Rescales `v` to unit length; `None` for zero or non-finite input.
    pub fn normalize(v: Vec3) -> Option<Self> {
        let n = v.norm();
        (n > 0.0 && n.is_finite()).then(|| Self(v / n))
    }

    pub fn x_axis() -> Self {
        Self(Vec3::x())
    }

    pub fn y_axis() -> Self {
        Self(Vec3::y())
    }

    pub fn z_axis() -> Self {
        Self(Vec3::z())
    }

    pub fn into_inner(self) -> Vec3 {
        self.0
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    /// Rotates the direction; the result stays unit length for a rotation.
    pub fn rotated(&self, rotation: &Matrix3<f64>) -> Self {
        Self(rotation * self.0)
    }
}

impl Deref for UnitVec3 {
    type Target = Vec3;

    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;

    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

impl TryFrom<[f64; 3]> for UnitVec3 {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(Vec3::from(v))
    }
}

impl From<UnitVec3> for [f64; 3] {
    fn from(v: UnitVec3) -> [f64; 3] {
        v.0.into()
    }
}

/// Continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pixel {
    pub u: f64,
    pub v: f64,
}

impl Pixel {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

/// Integer pixel on the image grid; `u` is the column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelIndex {
    pub u: usize,
    pub v: usize,
}

impl PixelIndex {
    pub fn new(u: usize, v: usize) -> Self {
        Self { u, v }
    }

    pub fn to_pixel(self) -> Pixel {
        Pixel::new(self.u as f64, self.v as f64)
    }
}

/// Geodesic angle between two rotations, accurate near zero.
pub fn rotation_distance(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let chord = (a - b).norm() / (2.0 * std::f64::consts::SQRT_2);
    2.0 * chord.min(1.0).asin()
}
