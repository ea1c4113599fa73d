//! Depth map files.
//!
//! Two encodings are supported:
//! - 16-bit grayscale PNG, `meters = value * scale` (default scale 1e-4,
//!   i.e. one unit is 0.1 mm); value 0 is missing.
//! - Raw float: a 16-byte header `{magic "GGDM", width u32, height u32,
//!   reserved u32}` followed by `width * height` little-endian `f32` meters
//!   in row-major order.

use std::path::Path;

use image::{ImageBuffer, Luma};

use super::DepthMap;
use crate::error::{Error, Result};

pub const DEPTH_MAGIC: [u8; 4] = *b"GGDM";
pub const DEFAULT_PNG_SCALE: f64 = 1e-4;

/// Loads a depth map, choosing the decoder from the extension
/// (`.png` or anything else for the raw float format).
pub fn load_depth(path: &Path, png_scale: f64) -> Result<DepthMap> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("png") => read_png16(path, png_scale),
        _ => read_f32(path),
    }
}

pub fn read_f32(path: &Path) -> Result<DepthMap> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_f32(&bytes).map_err(|m| Error::format(path, m))
}

pub fn decode_f32(bytes: &[u8]) -> std::result::Result<DepthMap, String> {
    if bytes.len() < 16 || bytes[..4] != DEPTH_MAGIC {
        return Err("not a raw depth file (bad magic)".into());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (w, h) = (word(4), word(8));
    let expected = w.checked_mul(h).and_then(|n| n.checked_mul(4)).ok_or("size overflow")?;
    if bytes.len() - 16 != expected {
        return Err(format!("payload is {} bytes, expected {expected} for {w}x{h}", bytes.len() - 16));
    }
    let data = bytes[16..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .map(|d| if d.is_finite() && d > 0.0 { d } else { 0.0 })
        .collect();
    DepthMap::new(w, h, data).map_err(|e| e.to_string())
}

pub fn encode_f32(depth: &DepthMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * depth.data().len());
    out.extend_from_slice(&DEPTH_MAGIC);
    out.extend_from_slice(&(depth.width() as u32).to_le_bytes());
    out.extend_from_slice(&(depth.height() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for d in depth.data() {
        out.extend_from_slice(&(*d as f32).to_le_bytes());
    }
    out
}

pub fn write_f32(depth: &DepthMap, path: &Path) -> Result<()> {
    std::fs::write(path, encode_f32(depth)).map_err(|e| Error::io(path, e))
}

pub fn read_png16(path: &Path, scale: f64) -> Result<DepthMap> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    })?;
    let img = match img {
        image::DynamicImage::ImageLuma16(i) => i,
        _ => return Err(Error::format(path, "depth PNG must be 16-bit grayscale")),
    };
    let (w, h) = img.dimensions();
    let data = img.into_raw().into_iter().map(|v| v as f64 * scale).collect();
    DepthMap::new(w as usize, h as usize, data)
}

pub fn write_png16(depth: &DepthMap, path: &Path, scale: f64) -> Result<()> {
    let mut saturated = 0usize;
    let raw: Vec<u16> = depth
        .data()
        .iter()
        .map(|d| {
            let q = (d / scale).round();
            if q > u16::MAX as f64 {
                saturated += 1;
                u16::MAX
            } else {
                q as u16
            }
        })
        .collect();
    if saturated > 0 {
        log::warn!("{}: {saturated} depth values saturated", path.display());
    }
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(depth.width() as u32, depth.height() as u32, raw).expect("sized buffer");
    img.save(path).map_err(|e| Error::format(path, e.to_string()))
}
