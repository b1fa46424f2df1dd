//! Pair discovery, scoring, and deterministic parallel batch execution.
//!
//! The unit of work is a pre-extracted tile pair: the original image and its
//! normalized counterpart, matched by filename stem. Scoring is a pure
//! function of the two decoded images and the config, so batches can fan out
//! to any number of workers and still produce byte-identical output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::baseline_scores;
use crate::error::{Error, Result};
use crate::measure::{aggregate, sd_map, Aggregation, SdConfig};
use crate::raster::{to_grayscale, GrayImage, RgbImage};

/// One discovered original/processed pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairRecord {
    /// Shared filename stem of the two files.
    pub pair_id: String,
    pub path_original: PathBuf,
    pub path_processed: PathBuf,
}

/// Scores for one pair: the three structure-discrepancy aggregations plus
/// the L1/L2/SSIM baselines, and the config digest they were computed under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub pair_id: String,
    pub sd_max: f64,
    pub sd_mean: f64,
    pub sd_p99: f64,
    pub l1: f64,
    pub l2: f64,
    pub ssim: f64,
    pub width: usize,
    pub height: usize,
    pub config_digest: String,
}

/// A decoded tile, kept in color when the file had color.
#[derive(Clone, Debug)]
pub enum DecodedImage {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl DecodedImage {
    pub fn to_gray(&self) -> GrayImage {
        match self {
            DecodedImage::Gray(g) => g.clone(),
            DecodedImage::Rgb(rgb) => to_grayscale(rgb),
        }
    }

    /// RGB view for rendering; grayscale replicates across channels.
    pub fn to_rgb(&self) -> RgbImage {
        match self {
            DecodedImage::Gray(g) => RgbImage::from_gray(g),
            DecodedImage::Rgb(rgb) => rgb.clone(),
        }
    }

    pub fn dimensions(&self) -> (usize, usize) {
        match self {
            DecodedImage::Gray(g) => (g.width(), g.height()),
            DecodedImage::Rgb(rgb) => (rgb.width(), rgb.height()),
        }
    }
}

/// Decodes an 8- or 16-bit grayscale or RGB raster (PNG or TIFF), normalizing
/// intensities to `[0, 1]` (8-bit: v/255, 16-bit: v/65535). Alpha channels
/// are dropped.
pub fn decode_image(path: &Path) -> Result<DecodedImage> {
    let dynamic = image::open(path).map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })?;
    let (width, height) = (dynamic.width() as usize, dynamic.height() as usize);
    let gray8 = |data: &[u8]| -> Vec<f64> { data.iter().map(|&v| v as f64 / 255.0).collect() };
    let gray16 =
        |data: &[u16]| -> Vec<f64> { data.iter().map(|&v| v as f64 / 65535.0).collect() };

    use image::DynamicImage as D;
    let decoded = match dynamic {
        D::ImageLuma8(buf) => DecodedImage::Gray(GrayImage::from_vec(
            width,
            height,
            gray8(buf.as_raw()),
        )?),
        D::ImageLuma16(buf) => DecodedImage::Gray(GrayImage::from_vec(
            width,
            height,
            gray16(buf.as_raw()),
        )?),
        D::ImageLumaA8(buf) => {
            let data = buf.as_raw().chunks_exact(2).map(|px| px[0] as f64 / 255.0);
            DecodedImage::Gray(GrayImage::from_vec(width, height, data.collect())?)
        }
        D::ImageLumaA16(buf) => {
            let data = buf
                .as_raw()
                .chunks_exact(2)
                .map(|px| px[0] as f64 / 65535.0);
            DecodedImage::Gray(GrayImage::from_vec(width, height, data.collect())?)
        }
        D::ImageRgb8(buf) => DecodedImage::Rgb(rgb_from_channels(
            width,
            height,
            buf.as_raw(),
            3,
            255.0,
        )?),
        D::ImageRgba8(buf) => DecodedImage::Rgb(rgb_from_channels(
            width,
            height,
            buf.as_raw(),
            4,
            255.0,
        )?),
        D::ImageRgb16(buf) => DecodedImage::Rgb(rgb16_from_channels(
            width,
            height,
            buf.as_raw(),
            3,
        )?),
        D::ImageRgba16(buf) => DecodedImage::Rgb(rgb16_from_channels(
            width,
            height,
            buf.as_raw(),
            4,
        )?),
        _ => {
            return Err(Error::UnsupportedPixelFormat {
                path: path.to_path_buf(),
            })
        }
    };
    Ok(decoded)
}

fn rgb_from_channels(
    width: usize,
    height: usize,
    raw: &[u8],
    stride: usize,
    denom: f64,
) -> Result<RgbImage> {
    let data = raw
        .chunks_exact(stride)
        .map(|px| {
            [
                px[0] as f64 / denom,
                px[1] as f64 / denom,
                px[2] as f64 / denom,
            ]
        })
        .collect();
    RgbImage::from_vec(width, height, data)
}

fn rgb16_from_channels(
    width: usize,
    height: usize,
    raw: &[u16],
    stride: usize,
) -> Result<RgbImage> {
    let data = raw
        .chunks_exact(stride)
        .map(|px| {
            [
                px[0] as f64 / 65535.0,
                px[1] as f64 / 65535.0,
                px[2] as f64 / 65535.0,
            ]
        })
        .collect();
    RgbImage::from_vec(width, height, data)
}

/// Writes a grayscale image as 16-bit (format from the file extension).
pub fn save_gray16(img: &GrayImage, path: &Path) -> Result<()> {
    let raw: Vec<u16> = img
        .data()
        .iter()
        .map(|&v| (v * 65535.0).round() as u16)
        .collect();
    let buf = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(
        img.width() as u32,
        img.height() as u32,
        raw,
    )
    .expect("buffer sized from image");
    buf.save(path).map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes an RGB image as 8-bit (format from the file extension).
pub fn save_rgb8(img: &RgbImage, path: &Path) -> Result<()> {
    let mut raw = Vec::with_capacity(img.data().len() * 3);
    for px in img.data() {
        for &v in px {
            raw.push((v * 255.0).round() as u8);
        }
    }
    let buf = image::ImageBuffer::<image::Rgb<u8>, _>::from_raw(
        img.width() as u32,
        img.height() as u32,
        raw,
    )
    .expect("buffer sized from image");
    buf.save(path).map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })
}

fn is_raster_ext(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            let e = e.to_ascii_lowercase();
            e == "png" || e == "tif" || e == "tiff"
        })
        .unwrap_or(false)
}

fn list_images(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::DirectoryUnreadable {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut map = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::DirectoryUnreadable {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if !path.is_file() || !is_raster_ext(&path) {
            continue;
        }
        let stem = match path.file_stem().and_then(|s| s.to_str()) {
            Some(s) => s.to_string(),
            None => continue,
        };
        if map.insert(stem.clone(), path).is_some() {
            return Err(Error::DuplicateStem {
                stem,
                dir: dir.to_path_buf(),
            });
        }
    }
    Ok(map)
}

/// Matches raster files in the two directories by filename stem. Every file
/// must have a partner; orphans on either side fail the discovery rather
/// than being silently dropped. Pairs come back sorted by `pair_id`.
pub fn discover_pairs(dir_original: &Path, dir_processed: &Path) -> Result<Vec<PairRecord>> {
    let originals = list_images(dir_original)?;
    let mut processed = list_images(dir_processed)?;

    let mut pairs = Vec::new();
    let mut orphans = Vec::new();
    for (stem, path_original) in originals {
        match processed.remove(&stem) {
            Some(path_processed) => pairs.push(PairRecord {
                pair_id: stem,
                path_original,
                path_processed,
            }),
            None => orphans.push(path_original.display().to_string()),
        }
    }
    for (_, path) in processed {
        orphans.push(path.display().to_string());
    }
    if !orphans.is_empty() {
        orphans.sort();
        return Err(Error::UnmatchedFiles { orphans });
    }
    Ok(pairs)
}

/// Scores a decoded pair of grayscale images.
pub fn score_images(
    pair_id: &str,
    original: &GrayImage,
    processed: &GrayImage,
    cfg: &SdConfig,
) -> Result<PairScore> {
    let map = sd_map(original, processed, cfg)?;
    let baselines = baseline_scores(original, processed)?;
    Ok(PairScore {
        pair_id: pair_id.to_string(),
        sd_max: aggregate(&map, Aggregation::Max)?,
        sd_mean: aggregate(&map, Aggregation::Mean)?,
        sd_p99: aggregate(&map, Aggregation::P99)?,
        l1: baselines.l1,
        l2: baselines.l2,
        ssim: baselines.ssim,
        width: original.width(),
        height: original.height(),
        config_digest: cfg.digest(),
    })
}

/// Decodes and scores one discovered pair.
pub fn score_pair(rec: &PairRecord, cfg: &SdConfig) -> Result<PairScore> {
    let original = decode_image(&rec.path_original)?;
    let processed = decode_image(&rec.path_processed)?;
    let (ow, oh) = original.dimensions();
    let (pw, ph) = processed.dimensions();
    if (ow, oh) != (pw, ph) {
        return Err(Error::DimensionMismatch {
            expected_width: ow,
            expected_height: oh,
            width: pw,
            height: ph,
        });
    }
    score_images(&rec.pair_id, &original.to_gray(), &processed.to_gray(), cfg)
}

/// Outcome slot for one batch entry; order matches the input pair list.
#[derive(Debug)]
pub struct BatchItem {
    pub pair_id: String,
    pub result: Result<PairScore>,
}

/// Scores every pair on a bounded worker pool. Output order equals input
/// order regardless of `parallelism`; a failing pair produces an error entry
/// in its slot without aborting the rest.
pub fn run_batch(
    pairs: &[PairRecord],
    cfg: &SdConfig,
    parallelism: usize,
) -> Result<Vec<BatchItem>> {
    if parallelism < 1 {
        return Err(Error::InvalidConfig(
            "parallelism must be >= 1".to_string(),
        ));
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    let items = pool.install(|| {
        pairs
            .par_iter()
            .map(|rec| BatchItem {
                pair_id: rec.pair_id.clone(),
                result: score_pair(rec, cfg),
            })
            .collect()
    });
    Ok(items)
}
