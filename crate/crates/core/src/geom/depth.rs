use super::kdtree::KdTree;
use super::{PinholeCamera, PixelIndex, UnitVec3, Vec3};
use crate::error::{Error, Result};

/// Per-pixel metric depth along the optical axis; 0 marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DepthMap {
    /// Row-major data. Negative or non-finite entries are rejected.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} depth values for a {width}x{height} map",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::DimensionMismatch(format!("invalid depth value {bad}")));
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Depth at a pixel, `None` where invalid or out of bounds.
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        if u >= self.width || v >= self.height {
            return None;
        }
        let d = self.data[v * self.width + u];
        (d > 0.0).then_some(d)
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|d| **d > 0.0).count()
    }

    pub fn check_camera(&self, cam: &PinholeCamera) -> Result<()> {
        if cam.width != self.width || cam.height != self.height {
            return Err(Error::DimensionMismatch(format!(
                "depth map {}x{} vs camera {}x{}",
                self.width, self.height, cam.width, cam.height
            )));
        }
        Ok(())
    }

    /// Camera-frame point of a valid pixel.
    pub fn point(&self, u: usize, v: usize, cam: &PinholeCamera) -> Option<Vec3> {
        let d = self.get(u, v)?;
        cam.backproject(PixelIndex::new(u, v).to_pixel(), d).ok()
    }
}

/// Per-pixel unit normals; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap {
    width: usize,
    height: usize,
    data: Vec<Option<UnitVec3>>,
}

impl NormalMap {
    pub fn new(width: usize, height: usize, data: Vec<Option<UnitVec3>>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} normals for a {width}x{height} map",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn constant(width: usize, height: usize, n: UnitVec3) -> Self {
        Self {
            width,
            height,
            data: vec![Some(n); width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, u: usize, v: usize) -> Option<UnitVec3> {
        if u >= self.width || v >= self.height {
            return None;
        }
        self.data[v * self.width + u]
    }

    pub fn data(&self) -> &[Option<UnitVec3>] {
        &self.data
    }
}

/// Point cloud of every valid depth pixel, indexed for nearest queries.
#[derive(Debug)]
pub struct SurfaceCloud {
    width: usize,
    tree: KdTree,
}

impl SurfaceCloud {
    pub fn new(depth: &DepthMap, cam: &PinholeCamera) -> Result<Self> {
        depth.check_camera(cam)?;
        let points = cloud_points(depth, cam);
        if points.is_empty() {
            return Err(Error::EmptyDepthMap);
        }
        Ok(Self {
            width: depth.width,
            tree: KdTree::new(points),
        })
    }

    /// Nearest surface pixel, its 3D point and the Euclidean distance to `p`.
    pub fn nearest(&self, p: &Vec3) -> (PixelIndex, Vec3, f64) {
        let (key, q, d2) = self.tree.nearest(p).expect("cloud is nonempty");
        (PixelIndex::new(key % self.width, key / self.width), q, d2.sqrt())
    }
}

fn cloud_points(depth: &DepthMap, cam: &PinholeCamera) -> Vec<(Vec3, usize)> {
    let mut out = Vec::with_capacity(depth.valid_count());
    for v in 0..depth.height {
        for u in 0..depth.width {
            if let Some(p) = depth.point(u, v, cam) {
                out.push((p, v * depth.width + u));
            }
        }
    }
    out
}

/// Pixel whose back-projected depth point is closest to the camera-frame
/// point `p`; ties go to the earliest pixel in row-major order.
pub fn nearest_surface_pixel(p: &Vec3, depth: &DepthMap, cam: &PinholeCamera) -> Result<PixelIndex> {
    Ok(SurfaceCloud::new(depth, cam)?.nearest(p).0)
}

/// Linear scan over every valid pixel; the definition the indexed query
/// must reproduce.
pub fn nearest_surface_pixel_exhaustive(p: &Vec3, depth: &DepthMap, cam: &PinholeCamera) -> Result<PixelIndex> {
    depth.check_camera(cam)?;
    let mut best: Option<(f64, usize)> = None;
    for (q, key) in cloud_points(depth, cam) {
        let d2 = (p - q).norm_squared();
        if best.is_none_or(|(bd, _)| d2 < bd) {
            best = Some((d2, key));
        }
    }
    let (_, key) = best.ok_or(Error::EmptyDepthMap)?;
    Ok(PixelIndex::new(key % depth.width, key / depth.width))
}
