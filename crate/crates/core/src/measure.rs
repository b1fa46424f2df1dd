//! The structure discrepancy measure.
//!
//! Given two grayscale images A and B, the measure flags places where one
//! image carries texture that the other lacks, gated by a smoothed
//! intensity-difference mask so that identical images always score zero:
//!
//! 1. `S(X)` = Sobel gradient magnitude of X, box-smoothed over K x K.
//! 2. `less_struct(X, Y) = S(Y)/M * max(0, 1 - S(X)/M)` — large where Y is
//!    textured (relative to the soft threshold M) and X is flat.
//! 3. `SD_raw = max(less_struct(A, B), less_struct(B, A))`.
//! 4. `mask = tanh(|A - B| / P * pi)` on the box-smoothed absolute
//!    difference, saturating once the smoothed difference passes the soft
//!    threshold P.
//! 5. `SD = scale * mask * ln(1 + SD_raw)` — log compression shortens the
//!    tail, the scale factor (default 100) keeps values readable.
//!
//! Smoothing is applied to `S(A)`, `S(B)` and `|A - B|` individually before
//! any ratio, max, tanh or log.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::filter::{box_smooth, sobel_magnitude};
use crate::raster::{check_dims, GrayImage, Raster, SdMap};
use crate::stats::quantile_type7;

/// Base of the logarithm in the final compression step.
///
/// Only the natural log is defined; the enum exists so serialized configs
/// and reports state the base explicitly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
}

impl std::fmt::Display for LogBase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LogBase::Natural => write!(f, "natural"),
        }
    }
}

/// How a per-pixel map collapses to one number per image pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Hallucinations are spatially local; the max does not dilute them.
    #[default]
    Max,
    Mean,
    P99,
}

impl std::fmt::Display for Aggregation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Aggregation::Max => write!(f, "max"),
            Aggregation::Mean => write!(f, "mean"),
            Aggregation::P99 => write!(f, "p99"),
        }
    }
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Aggregation::Max),
            "mean" => Ok(Aggregation::Mean),
            "p99" => Ok(Aggregation::P99),
            other => Err(Error::InvalidConfig(format!(
                "unknown aggregation '{other}' (expected max, mean or p99)"
            ))),
        }
    }
}

/// Parameters of the measure. Pixel intensities are fixed to `[0, 1]`, so
/// `m_threshold` and `p_threshold` are scanner-bit-depth independent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdConfig {
    /// Soft threshold on smoothed Sobel magnitudes above which a pixel
    /// counts as fully textured.
    pub m_threshold: f64,
    /// Soft threshold on smoothed grayscale differences at which the mask
    /// saturates toward 1.
    pub p_threshold: f64,
    /// Side length of the smoothing kernel applied to `S(A)`, `S(B)` and
    /// `|A - B|`.
    pub kernel_size: usize,
    /// Saturate `S(Y)/M` at 1. Off by default: the unclamped form is the
    /// literal definition, which only clamps the `S(X)` term.
    pub clamp_structure: bool,
    /// Scale factor on the final map.
    pub scale: f64,
    pub log_base: LogBase,
    /// Default statistic for reports; per-pair records always carry max,
    /// mean and p99 regardless.
    pub aggregation: Aggregation,
}

impl Default for SdConfig {
    fn default() -> Self {
        Self {
            m_threshold: 0.2,
            p_threshold: 0.1,
            kernel_size: 32,
            clamp_structure: false,
            scale: 100.0,
            log_base: LogBase::Natural,
            aggregation: Aggregation::Max,
        }
    }
}

impl SdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m_threshold > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "m_threshold must be > 0, got {}",
                self.m_threshold
            )));
        }
        if !(self.p_threshold > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "p_threshold must be > 0, got {}",
                self.p_threshold
            )));
        }
        if self.kernel_size < 1 {
            return Err(Error::InvalidConfig(
                "kernel_size must be >= 1".to_string(),
            ));
        }
        if !(self.scale > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scale must be > 0, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    /// Short stable identifier of this parameter set, recorded with every
    /// exported score so populations from different runs are never mixed
    /// silently.
    pub fn digest(&self) -> String {
        let canonical = format!(
            "m={};p={};k={};clamp={};scale={};log={};agg={}",
            self.m_threshold,
            self.p_threshold,
            self.kernel_size,
            self.clamp_structure,
            self.scale,
            self.log_base,
            self.aggregation
        );
        let hash = Sha256::digest(canonical.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in &hash[..8] {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

/// `S(Y)/M * max(0, 1 - S(X)/M)` per pixel over smoothed edge maps.
///
/// With `clamp_structure` the first factor saturates at 1, which bounds
/// `SD_raw` by 1 and the final map by `scale * ln 2`.
pub fn less_struct(sx: &Raster, sy: &Raster, m: f64, clamp_structure: bool) -> Result<Raster> {
    if !(m > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "structure threshold must be > 0, got {m}"
        )));
    }
    sx.zip_map(sy, |x, y| {
        let textured = if clamp_structure {
            (y / m).min(1.0)
        } else {
            y / m
        };
        textured * (1.0 - x / m).max(0.0)
    })
}

/// Pointwise `max` of the two one-sided comparisons.
pub fn structure_discrepancy_raw(ls_ab: &Raster, ls_ba: &Raster) -> Result<Raster> {
    ls_ab.zip_map(ls_ba, f64::max)
}

/// `tanh(box_smooth(|a - b|, K) / p * pi)` per pixel; values in `[0, 1)`.
pub fn diff_mask(a: &GrayImage, b: &GrayImage, p: f64, kernel_size: usize) -> Result<Raster> {
    if !(p > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "difference threshold must be > 0, got {p}"
        )));
    }
    let abs_diff = a.raster().zip_map(b.raster(), |x, y| (x - y).abs())?;
    let smoothed = clamp_nonneg(box_smooth(&abs_diff, kernel_size)?);
    Ok(smoothed.map(|d| (d / p * std::f64::consts::PI).tanh()))
}

/// Integral-image differencing leaves (-1e-13)-scale dust where an exact sum
/// of nonnegative values would be zero; smoothed edge maps and smoothed
/// absolute differences are nonnegative by definition, so floor them.
fn clamp_nonneg(mut raster: Raster) -> Raster {
    for v in raster.data_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    raster
}

/// Full per-pixel structure discrepancy map between an original and a
/// processed image.
pub fn sd_map(a: &GrayImage, b: &GrayImage, cfg: &SdConfig) -> Result<SdMap> {
    cfg.validate()?;
    check_dims((a.width(), a.height()), (b.width(), b.height()))?;

    let sa = clamp_nonneg(box_smooth(sobel_magnitude(a).raster(), cfg.kernel_size)?);
    let sb = clamp_nonneg(box_smooth(sobel_magnitude(b).raster(), cfg.kernel_size)?);
    let ls_ab = less_struct(&sa, &sb, cfg.m_threshold, cfg.clamp_structure)?;
    let ls_ba = less_struct(&sb, &sa, cfg.m_threshold, cfg.clamp_structure)?;
    let raw = structure_discrepancy_raw(&ls_ab, &ls_ba)?;
    let mask = diff_mask(a, b, cfg.p_threshold, cfg.kernel_size)?;

    let scale = cfg.scale;
    let combined = mask.zip_map(&raw, |m, r| scale * m * r.ln_1p())?;
    Ok(SdMap::from_raster_unchecked(combined))
}

/// Collapses a map to a scalar. Deterministic: sums run in row-major order,
/// and the 99th percentile interpolates linearly between order statistics.
pub fn aggregate(map: &SdMap, mode: Aggregation) -> Result<f64> {
    let data = map.data();
    if data.is_empty() {
        return Err(Error::EmptyMap);
    }
    Ok(match mode {
        Aggregation::Max => data.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregation::Mean => data.iter().sum::<f64>() / data.len() as f64,
        Aggregation::P99 => {
            let mut scratch = data.to_vec();
            quantile_type7(&mut scratch, 0.99)
        }
    })
}
