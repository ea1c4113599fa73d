//! Network inputs and targets: keypoint heatmaps, RGB + normal crops,
//! RoI-aligned crops and normal maps from depth.

mod normals;
mod roi;

pub use normals::normals_from_depth;
pub use roi::{roi_align, ROI_SIZE};

use std::path::Path;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{NormalMap, Pixel, PixelIndex};

pub const CHANNELS: usize = 6;
pub const CHANNEL_ORDER: [&str; CHANNELS] = ["Rn", "Gn", "Bn", "nx", "ny", "nz"];
pub const DEFAULT_SIGMA: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub width: usize,
    pub height: usize,
    /// Row-major values in `[0, 1]`.
    pub values: Vec<f64>,
}

impl Heatmap {
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[v * self.width + u]
    }
}

/// Max-composed unnormalized Gaussians, one per keypoint.
pub fn make_heatmap(keypoints: &[Pixel], width: usize, height: usize, sigma: f64) -> Result<Heatmap> {
    if !(sigma > 0.0) {
        return Err(Error::Config(format!("heatmap sigma must be positive, got {sigma}")));
    }
    let mut values = vec![0.0; width * height];
    let denom = 2.0 * sigma * sigma;
    for k in keypoints {
        for v in 0..height {
            let dv = v as f64 - k.v;
            for u in 0..width {
                let du = u as f64 - k.u;
                let g = (-(du * du + dv * dv) / denom).exp();
                let slot = &mut values[v * width + u];
                if g > *slot {
                    *slot = g;
                }
            }
        }
    }
    Ok(Heatmap { width, height, values })
}

/// `height x width x 6` tensor in HWC order.
#[derive(Debug, Clone, PartialEq)]
pub struct CropTensor {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
    pub keypoint: PixelIndex,
    pub r: usize,
}

impl CropTensor {
    pub fn at(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[(row * self.width + col) * CHANNELS + ch]
    }
}

/// Crops the `(2r+1)^2` window around `p`, clipped to the image. RGB is
/// standardized per channel over the crop; normals follow as channels
/// 3..6, zero where missing.
pub fn crop_pair(rgb: &RgbImage, normals: &NormalMap, p: PixelIndex, r: usize) -> Result<CropTensor> {
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    if normals.width() != w || normals.height() != h {
        return Err(Error::DimensionMismatch(format!(
            "image {w}x{h} vs normal map {}x{}",
            normals.width(),
            normals.height()
        )));
    }
    if r == 0 || w == 0 || h == 0 || p.u >= w + r || p.v >= h + r {
        return Err(Error::DegenerateWindow);
    }
    let (u0, u1) = (p.u.saturating_sub(r), (p.u + r).min(w - 1));
    let (v0, v1) = (p.v.saturating_sub(r), (p.v + r).min(h - 1));
    if u0 > u1 || v0 > v1 {
        return Err(Error::DegenerateWindow);
    }
    let (cw, ch) = (u1 - u0 + 1, v1 - v0 + 1);
    let n = (cw * ch) as f64;
    let mut stats = [(0.0f64, 0.0f64); 3];
    for v in v0..=v1 {
        for u in u0..=u1 {
            let px = rgb.get_pixel(u as u32, v as u32).0;
            for c in 0..3 {
                stats[c].0 += px[c] as f64;
            }
        }
    }
    let mean = stats.map(|(s, _)| s / n);
    for v in v0..=v1 {
        for u in u0..=u1 {
            let px = rgb.get_pixel(u as u32, v as u32).0;
            for c in 0..3 {
                let d = px[c] as f64 - mean[c];
                stats[c].1 += d * d;
            }
        }
    }
    let std = stats.map(|(_, s)| (s / n).sqrt());
    let mut data = Vec::with_capacity(cw * ch * CHANNELS);
    for v in v0..=v1 {
        for u in u0..=u1 {
            let px = rgb.get_pixel(u as u32, v as u32).0;
            for c in 0..3 {
                data.push(if std[c] > 1e-12 { (px[c] as f64 - mean[c]) / std[c] } else { 0.0 });
            }
            match normals.get(u, v) {
                Some(nv) => data.extend_from_slice(nv.as_vec().as_slice()),
                None => data.extend_from_slice(&[0.0; 3]),
            }
        }
    }
    Ok(CropTensor { height: ch, width: cw, data, keypoint: p, r })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorSidecar {
    pub shape: Vec<usize>,
    pub channel_order: Vec<String>,
    pub keypoint: [usize; 2],
    pub r: usize,
}

fn f32_bytes(values: impl Iterator<Item = f64>) -> Vec<u8> {
    values.flat_map(|x| (x as f32).to_le_bytes()).collect()
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.f32` (little-endian) and `<stem>.json`.
pub fn write_crop(t: &CropTensor, dir: &Path, stem: &str) -> Result<()> {
    write(&dir.join(format!("{stem}.f32")), &f32_bytes(t.data.iter().copied()))?;
    let sidecar = TensorSidecar {
        shape: vec![t.height, t.width, CHANNELS],
        channel_order: CHANNEL_ORDER.iter().map(|s| s.to_string()).collect(),
        keypoint: [t.keypoint.u, t.keypoint.v],
        r: t.r,
    };
    write(&dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&sidecar)?.as_bytes())
}

/// Reads a tensor written by [`write_crop`].
pub fn read_crop(dir: &Path, stem: &str) -> Result<CropTensor> {
    let meta_path = dir.join(format!("{stem}.json"));
    let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: TensorSidecar = serde_json::from_str(&text).map_err(|e| Error::format(&meta_path, e.to_string()))?;
    let raw_path = dir.join(format!("{stem}.f32"));
    let bytes = std::fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    let expected: usize = meta.shape.iter().product::<usize>() * 4;
    if meta.shape.len() != 3 || meta.shape[2] != CHANNELS || bytes.len() != expected {
        return Err(Error::format(&raw_path, format!("{} bytes do not match shape {:?}", bytes.len(), meta.shape)));
    }
    Ok(CropTensor {
        height: meta.shape[0],
        width: meta.shape[1],
        data: bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect(),
        keypoint: PixelIndex::new(meta.keypoint[0], meta.keypoint[1]),
        r: meta.r,
    })
}

/// Writes `<stem>.f32` and a `{shape: [h, w]}` sidecar.
pub fn write_heatmap(hm: &Heatmap, dir: &Path, stem: &str) -> Result<()> {
    write(&dir.join(format!("{stem}.f32")), &f32_bytes(hm.values.iter().copied()))?;
    let meta = serde_json::json!({ "shape": [hm.height, hm.width] });
    write(&dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?.as_bytes())
}
