use serde::{Deserialize, Serialize};

use super::{Pixel, Vec3};
use crate::error::{Error, Result};

/// Distortion-free pinhole intrinsics. JSON: `{fx, fy, cx, cy, width, height}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinholeCamera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraRecord {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
}

impl<'de> Deserialize<'de> for PinholeCamera {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CameraRecord::deserialize(d)?;
        PinholeCamera::new(r.fx, r.fy, r.cx, r.cy, r.width, r.height).map_err(serde::de::Error::custom)
    }
}

impl PinholeCamera {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(Error::InvalidCamera(format!("focal lengths must be positive (fx={fx}, fy={fy})")));
        }
        if !(0.0..width as f64).contains(&cx) || !(0.0..height as f64).contains(&cy) {
            return Err(Error::InvalidCamera(format!(
                "principal point ({cx}, {cy}) outside {width}x{height} image"
            )));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Perspective projection of a camera-frame point. No bounds clamping.
    pub fn project(&self, p: &Vec3) -> Result<Pixel> {
        if !(p.z > 0.0) {
            return Err(Error::NonPositiveDepth(p.z));
        }
        Ok(Pixel::new(self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }

    /// Camera-frame point at depth `depth` along the ray through `p`.
    pub fn backproject(&self, p: Pixel, depth: f64) -> Result<Vec3> {
        if !(depth > 0.0) {
            return Err(Error::NonPositiveDepth(depth));
        }
        Ok(Vec3::new(
            (p.u - self.cx) / self.fx * depth,
            (p.v - self.cy) / self.fy * depth,
            depth,
        ))
    }

    /// Whether continuous coordinates land on a pixel of the image.
    pub fn contains(&self, p: Pixel) -> bool {
        p.u > -0.5 && p.v > -0.5 && p.u < self.width as f64 - 0.5 && p.v < self.height as f64 - 0.5
    }

    /// Same camera with pixel grid and intrinsics scaled by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(
            self.fx * k,
            self.fy * k,
            self.cx * k,
            self.cy * k,
            ((self.width as f64) * k).ceil() as usize,
            ((self.height as f64) * k).ceil() as usize,
        )
    }
}
