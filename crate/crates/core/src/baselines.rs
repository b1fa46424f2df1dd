//! L1, L2 and SSIM comparison baselines, reported alongside the structure
//! discrepancy so the measures can be judged side by side on the same data.
//!
//! All three run on the same grayscale conversion as the main measure, so a
//! comparison isolates the measure rather than the preprocessing.

use crate::error::{Error, Result};
use crate::raster::{check_dims, GrayImage, Raster};

/// SSIM uses the canonical constants: 11x11 Gaussian window with sigma 1.5,
/// K1 = 0.01 and K2 = 0.03 on the unit dynamic range.
pub const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineScores {
    /// Mean absolute difference.
    pub l1: f64,
    /// Root mean squared difference.
    pub l2: f64,
    /// Mean local structural similarity.
    pub ssim: f64,
}

/// Mean absolute pixel difference.
pub fn l1_score(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_dims((a.width(), a.height()), (b.width(), b.height()))?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (x - y).abs())
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// Root mean squared pixel difference.
pub fn l2_score(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_dims((a.width(), a.height()), (b.width(), b.height()))?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum();
    Ok((sum / a.data().len() as f64).sqrt())
}

/// Mean SSIM over all fully interior 11x11 Gaussian windows.
pub fn ssim_score(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_dims((a.width(), a.height()), (b.width(), b.height()))?;
    let (width, height) = (a.width(), a.height());
    if width < SSIM_WINDOW || height < SSIM_WINDOW {
        return Err(Error::ImageTooSmall {
            width,
            height,
            min: SSIM_WINDOW,
        });
    }

    let kernel = gaussian_kernel();
    let blur = |r: &Raster| separable_filter(r, &kernel);

    let ra = a.raster();
    let rb = b.raster();
    let mu_a = blur(ra);
    let mu_b = blur(rb);
    let aa = blur(&ra.zip_map(ra, |x, y| x * y)?);
    let bb = blur(&rb.zip_map(rb, |x, y| x * y)?);
    let ab = blur(&ra.zip_map(rb, |x, y| x * y)?);

    // Windows centered at margin..dim-margin never touch replicated borders,
    // so the mean runs over exactly the valid-window region.
    let margin = SSIM_WINDOW / 2;
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for y in margin..height - margin {
        for x in margin..width - margin {
            let ma = mu_a.get(x, y);
            let mb = mu_b.get(x, y);
            let var_a = aa.get(x, y) - ma * ma;
            let var_b = bb.get(x, y) - mb * mb;
            let cov = ab.get(x, y) - ma * mb;
            let num = (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2);
            let den = (ma * ma + mb * mb + SSIM_C1) * (var_a + var_b + SSIM_C2);
            sum += num / den;
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

/// All three baselines in one call.
pub fn baseline_scores(a: &GrayImage, b: &GrayImage) -> Result<BaselineScores> {
    Ok(BaselineScores {
        l1: l1_score(a, b)?,
        l2: l2_score(a, b)?,
        ssim: ssim_score(a, b)?,
    })
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut kernel = [0.0; SSIM_WINDOW];
    let center = (SSIM_WINDOW / 2) as f64;
    let denom = 2.0 * SSIM_SIGMA * SSIM_SIGMA;
    let mut sum = 0.0;
    for (i, k) in kernel.iter_mut().enumerate() {
        let d = i as f64 - center;
        *k = (-d * d / denom).exp();
        sum += *k;
    }
    for k in &mut kernel {
        *k /= sum;
    }
    kernel
}

/// Separable convolution with replicate padding; same-size output.
fn separable_filter(src: &Raster, kernel: &[f64; SSIM_WINDOW]) -> Raster {
    let width = src.width();
    let height = src.height();
    let radius = SSIM_WINDOW / 2;
    let data = src.data();

    // Horizontal pass.
    let mut tmp = vec![0.0f64; width * height];
    for y in 0..height {
        let row = &data[y * width..(y + 1) * width];
        let dst = &mut tmp[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (i, &k) in kernel.iter().enumerate() {
                let sx = (x + i).saturating_sub(radius).min(width - 1);
                acc += k * row[sx];
            }
            dst[x] = acc;
        }
    }

    // Vertical pass.
    let mut out = vec![0.0f64; width * height];
    for y in 0..height {
        let dst = &mut out[y * width..(y + 1) * width];
        for (i, &k) in kernel.iter().enumerate() {
            let sy = (y + i).saturating_sub(radius).min(height - 1);
            let srow = &tmp[sy * width..(sy + 1) * width];
            for x in 0..width {
                dst[x] += k * srow[x];
            }
        }
    }

    Raster::from_vec(width, height, out).expect("output sized from input")
}
