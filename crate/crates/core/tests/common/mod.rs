//! Shared test fixtures: a dense straight-line reference implementation of
//! the measure, an independent sort-based quantile rule, AUROC, and image
//! generators. Everything here is written directly from the definitions and
//! stays independent of the optimized code paths it checks.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdscreen::measure::SdConfig;
use sdscreen::raster::{GrayImage, Raster};

/// Replicate-clamped pixel fetch.
fn at(data: &[f64], width: usize, height: usize, x: isize, y: isize) -> f64 {
    let cx = x.clamp(0, width as isize - 1) as usize;
    let cy = y.clamp(0, height as isize - 1) as usize;
    data[cy * width + cx]
}

/// Dense 3x3 Sobel magnitude with the kernels written out literally.
pub fn naive_sobel(img: &GrayImage) -> Raster {
    let width = img.width();
    let height = img.height();
    let data = img.data();
    let mut out = vec![0.0f64; width * height];
    const GX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    const GY: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
    for y in 0..height as isize {
        for x in 0..width as isize {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for ky in 0..3isize {
                for kx in 0..3isize {
                    let v = at(data, width, height, x + kx - 1, y + ky - 1);
                    gx += GX[ky as usize][kx as usize] * v;
                    gy += GY[ky as usize][kx as usize] * v;
                }
            }
            out[y as usize * width + x as usize] = (gx * gx + gy * gy).sqrt();
        }
    }
    Raster::from_vec(width, height, out).unwrap()
}

/// Dense O(W*H*K^2) sliding-window mean: window offsets `[-K/2, K-1-K/2]`,
/// replicate padding.
pub fn naive_box_smooth(src: &Raster, kernel_size: usize) -> Raster {
    assert!(kernel_size >= 1);
    let width = src.width();
    let height = src.height();
    let data = src.data();
    let lo = (kernel_size / 2) as isize;
    let hi = kernel_size as isize - 1 - lo;
    let mut out = vec![0.0f64; width * height];
    for y in 0..height as isize {
        for x in 0..width as isize {
            let mut sum = 0.0;
            for dy in -lo..=hi {
                for dx in -lo..=hi {
                    sum += at(data, width, height, x + dx, y + dy);
                }
            }
            out[y as usize * width + x as usize] = sum / (kernel_size * kernel_size) as f64;
        }
    }
    Raster::from_vec(width, height, out).unwrap()
}

/// Dense reference for the whole per-pixel measure, composed stage by stage
/// exactly as defined.
pub fn naive_sd_map(a: &GrayImage, b: &GrayImage, cfg: &SdConfig) -> Raster {
    assert_eq!((a.width(), a.height()), (b.width(), b.height()));
    let width = a.width();
    let height = a.height();
    let k = cfg.kernel_size;
    let m = cfg.m_threshold;
    let p = cfg.p_threshold;

    let sa = naive_box_smooth(&naive_sobel(a), k);
    let sb = naive_box_smooth(&naive_sobel(b), k);
    let abs_diff = Raster::from_vec(
        width,
        height,
        a.data()
            .iter()
            .zip(b.data())
            .map(|(&x, &y)| (x - y).abs())
            .collect(),
    )
    .unwrap();
    let smoothed_diff = naive_box_smooth(&abs_diff, k);

    let mut out = vec![0.0f64; width * height];
    for i in 0..out.len() {
        let sxa = sa.data()[i];
        let sxb = sb.data()[i];
        let textured = |s: f64| {
            if cfg.clamp_structure {
                (s / m).min(1.0)
            } else {
                s / m
            }
        };
        let ls_ab = textured(sxb) * (1.0 - sxa / m).max(0.0);
        let ls_ba = textured(sxa) * (1.0 - sxb / m).max(0.0);
        let raw = ls_ab.max(ls_ba);
        let mask = (smoothed_diff.data()[i] / p * std::f64::consts::PI).tanh();
        out[i] = cfg.scale * mask * (1.0 + raw).ln();
    }
    Raster::from_vec(width, height, out).unwrap()
}

/// Aggregations computed from the dense map by first principles: max by
/// scan, mean by sum, p99 by full sort plus interpolation.
pub fn naive_aggregations(map: &Raster) -> (f64, f64, f64) {
    let data = map.data();
    let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    let p99 = quantile_oracle(data, 0.99);
    (max, mean, p99)
}

/// Sort-based type-7 quantile, straight from the textbook definition.
pub fn quantile_oracle(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Probability that a random positive outranks a random negative, with ties
/// counted half (rank-sum form).
pub fn auroc(positives: &[f64], negatives: &[f64]) -> f64 {
    assert!(!positives.is_empty() && !negatives.is_empty());
    let mut wins = 0.0f64;
    for &p in positives {
        for &n in negatives {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    wins / (positives.len() as f64 * negatives.len() as f64)
}

/// Uniform-noise image in [0, 1].
pub fn random_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height)
        .map(|_| rng.gen_range(0.0..=1.0))
        .collect();
    GrayImage::from_vec(width, height, data).unwrap()
}

/// Mixed-texture image: smooth blobs plus optional sharp noise patches, the
/// regime mix that exercises every branch of the measure.
pub fn varied_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.5f64; width * height];

    // Low-frequency waves.
    let fx = rng.gen_range(0.5..3.0) * std::f64::consts::TAU / width as f64;
    let fy = rng.gen_range(0.5..3.0) * std::f64::consts::TAU / height as f64;
    let amp = rng.gen_range(0.05..0.15);
    for y in 0..height {
        for x in 0..width {
            data[y * width + x] += amp * ((x as f64 * fx).sin() + (y as f64 * fy).cos()) / 2.0;
        }
    }

    // A couple of noise patches with varying strength.
    for _ in 0..rng.gen_range(1..4) {
        let pw = rng.gen_range(width / 8..width / 2);
        let ph = rng.gen_range(height / 8..height / 2);
        let px = rng.gen_range(0..width - pw);
        let py = rng.gen_range(0..height - ph);
        let strength = rng.gen_range(0.05..0.35);
        for y in py..py + ph {
            for x in px..px + pw {
                data[y * width + x] += rng.gen_range(-strength..strength);
            }
        }
    }

    let data = data.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    GrayImage::from_vec(width, height, data).unwrap()
}

/// A pair with a random local modification, spanning flat, mid and fully
/// textured regimes on both sides.
pub fn varied_pair(width: usize, height: usize, seed: u64) -> (GrayImage, GrayImage) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b9).wrapping_add(1));
    let a = varied_image(width, height, seed);
    let mut data = a.data().to_vec();

    // Local edit: flatten or renoise a window.
    let pw = rng.gen_range(width / 6..width / 2);
    let ph = rng.gen_range(height / 6..height / 2);
    let px = rng.gen_range(0..width - pw);
    let py = rng.gen_range(0..height - ph);
    let flatten = rng.gen_bool(0.5);
    let level: f64 = rng.gen_range(0.3..0.7);
    for y in py..py + ph {
        for x in px..px + pw {
            let v = &mut data[y * width + x];
            if flatten {
                *v = level;
            } else {
                *v = (level + rng.gen_range(-0.3..0.3)).clamp(0.0, 1.0);
            }
        }
    }

    // Mild global shift with headroom.
    let delta = rng.gen_range(-0.05..0.05);
    for v in &mut data {
        *v = (*v + delta).clamp(0.0, 1.0);
    }
    let b = GrayImage::from_vec(width, height, data).unwrap();
    (a, b)
}
