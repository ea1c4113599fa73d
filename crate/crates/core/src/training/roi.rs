use super::{CropTensor, CHANNELS};

pub const ROI_SIZE: usize = 112;

/// Bilinear value of channel `c` at continuous `(x, y)`, pixel centers on
/// integers, clamped to the tensor.
fn bilinear(t: &CropTensor, x: f64, y: f64, c: usize) -> f64 {
    let x = x.clamp(0.0, (t.width - 1) as f64);
    let y = y.clamp(0.0, (t.height - 1) as f64);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(t.width - 1), (y0 + 1).min(t.height - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let top = t.at(y0, x0, c) * (1.0 - fx) + t.at(y0, x1, c) * fx;
    let bottom = t.at(y1, x0, c) * (1.0 - fx) + t.at(y1, x1, c) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Resamples the whole tensor to `out x out`. Each output cell averages a
/// `ratio_y x ratio_x` grid of bilinear samples at the centers of its
/// sub-cells, with `ratio = max(1, ceil(in / out))` per axis, so an
/// `out x out` input maps to itself.
pub fn roi_align(t: &CropTensor, out: usize) -> CropTensor {
    assert!(t.width > 0 && t.height > 0 && out > 0, "empty tensor");
    let ratio_x = t.width.div_ceil(out).max(1);
    let ratio_y = t.height.div_ceil(out).max(1);
    let bin_x = t.width as f64 / out as f64;
    let bin_y = t.height as f64 / out as f64;
    let mut data = Vec::with_capacity(out * out * CHANNELS);
    let norm = (ratio_x * ratio_y) as f64;
    for i in 0..out {
        for j in 0..out {
            let mut acc = [0.0; CHANNELS];
            for sy in 0..ratio_y {
                let y = (i as f64 + (sy as f64 + 0.5) / ratio_y as f64) * bin_y - 0.5;
                for sx in 0..ratio_x {
                    let x = (j as f64 + (sx as f64 + 0.5) / ratio_x as f64) * bin_x - 0.5;
                    for (c, a) in acc.iter_mut().enumerate() {
                        *a += bilinear(t, x, y, c);
                    }
                }
            }
            data.extend(acc.iter().map(|a| a / norm));
        }
    }
    CropTensor {
        height: out,
        width: out,
        data,
        keypoint: t.keypoint,
        r: t.r,
    }
}
