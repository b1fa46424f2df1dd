//! Spatial filters: Sobel gradient magnitude and K x K box smoothing.
//!
//! Both filters use replicate padding and produce same-size outputs. The box
//! filter is backed by a summed-area table so its cost per pixel is constant
//! in the kernel size; the dense sliding-window equivalent lives in the test
//! suite as the oracle it is checked against.

use crate::error::{Error, Result};
use crate::raster::{EdgeMap, GrayImage, Raster};

/// Sobel gradient magnitude, `sqrt(gx^2 + gy^2)`, with the unnormalized
/// 3x3 kernels (weights +-1, +-2) and replicate padding.
///
/// The taps are combined as left/right and top/bottom differences, so images
/// that differ by a representable constant offset produce bit-identical maps.
pub fn sobel_magnitude(img: &GrayImage) -> EdgeMap {
    let width = img.width();
    let height = img.height();
    let src = img.data();
    let mut out = vec![0.0f64; width * height];

    let row = |y: usize| &src[y * width..(y + 1) * width];

    for y in 0..height {
        let above = row(y.saturating_sub(1));
        let here = row(y);
        let below = row(if y + 1 < height { y + 1 } else { y });
        let dst = &mut out[y * width..(y + 1) * width];
        for x in 0..width {
            let xl = x.saturating_sub(1);
            let xr = if x + 1 < width { x + 1 } else { x };
            let gx = (above[xr] - above[xl])
                + 2.0 * (here[xr] - here[xl])
                + (below[xr] - below[xl]);
            let gy = (below[xl] - above[xl])
                + 2.0 * (below[x] - above[x])
                + (below[xr] - above[xr]);
            dst[x] = (gx * gx + gy * gy).sqrt();
        }
    }

    EdgeMap::from_raster_unchecked(
        Raster::from_vec(width, height, out).expect("output sized from input"),
    )
}

/// Mean over the K x K window anchored at offsets `[-K/2, K - 1 - K/2]` in
/// each axis (top-left-biased center for even K), replicate padding,
/// same-size output.
///
/// Runs on a summed-area table built over the padded extent, so one output
/// pixel costs four table lookups regardless of `kernel_size`.
pub fn box_smooth(src: &Raster, kernel_size: usize) -> Result<Raster> {
    if kernel_size == 0 {
        return Err(Error::InvalidConfig(
            "kernel_size must be >= 1".to_string(),
        ));
    }
    let width = src.width();
    let height = src.height();
    if src.is_empty() {
        return Ok(src.clone());
    }
    if kernel_size == 1 {
        return Ok(src.clone());
    }

    let pad_before = kernel_size / 2;
    // pad_after = kernel_size - 1 - pad_before, folded into the padded extent.
    let padded_w = width + kernel_size - 1;
    let padded_h = height + kernel_size - 1;

    // sat[(y, x)] = sum of padded pixels above and left of (x, y); one extra
    // row/column of zeros keeps the rectangle-sum expression branch-free.
    let sat_w = padded_w + 1;
    let mut sat = vec![0.0f64; sat_w * (padded_h + 1)];
    for py in 0..padded_h {
        let sy = py.saturating_sub(pad_before).min(height - 1);
        let src_row = src.row(sy);
        let mut running = 0.0f64;
        let (prev, cur) = sat.split_at_mut((py + 1) * sat_w);
        let prev_row = &prev[py * sat_w..];
        let cur_row = &mut cur[..sat_w];
        for px in 0..padded_w {
            let sx = px.saturating_sub(pad_before).min(width - 1);
            running += src_row[sx];
            cur_row[px + 1] = prev_row[px + 1] + running;
        }
    }

    let inv_area = 1.0 / (kernel_size * kernel_size) as f64;
    let mut out = vec![0.0f64; width * height];
    for y in 0..height {
        let top = &sat[y * sat_w..y * sat_w + sat_w];
        let bottom = &sat[(y + kernel_size) * sat_w..(y + kernel_size) * sat_w + sat_w];
        let dst = &mut out[y * width..(y + 1) * width];
        for x in 0..width {
            let sum = bottom[x + kernel_size] - bottom[x] - top[x + kernel_size] + top[x];
            dst[x] = sum * inv_area;
        }
    }

    Raster::from_vec(width, height, out)
}
