//! C ABI over the screening toolkit: opaque handles, status codes, no
//! panics across the boundary.
//!
//! Ownership rules are the usual ones: every `*_new`/`*_load`/`*_compute`
//! output must be released with the matching `*_free`; `sds_map_data`
//! borrows from the map and is valid until `sds_map_free`.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sdscreen::measure::{aggregate, sd_map, Aggregation, SdConfig};
use sdscreen::pipeline::{decode_image, score_images};
use sdscreen::raster::{GrayImage, RgbImage, SdMap};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    ImageTooSmall = 4,
    ValueOutOfRange = 5,
    DecodeFailed = 6,
    IoFailed = 7,
    InvalidUtf8 = 8,
    EmptyInput = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Aggregation selector for [`sds_map_aggregate`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdsAggregation {
    Max = 0,
    Mean = 1,
    P99 = 2,
}

/// Flat result record for one scored pair.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SdsPairScore {
    pub sd_max: f64,
    pub sd_mean: f64,
    pub sd_p99: f64,
    pub l1: f64,
    pub l2: f64,
    pub ssim: f64,
    pub width: usize,
    pub height: usize,
}

/// Opaque measure configuration handle.
pub struct SdsConfig {
    inner: SdConfig,
}

/// Opaque grayscale image handle (intensities in [0, 1]).
pub struct SdsImage {
    inner: GrayImage,
}

/// Opaque per-pixel discrepancy map handle.
pub struct SdsMap {
    inner: SdMap,
}

fn status_of(err: &sdscreen::Error) -> SdsStatus {
    use sdscreen::Error as E;
    match err {
        E::DimensionMismatch { .. } => SdsStatus::DimensionMismatch,
        E::ImageTooSmall { .. } => SdsStatus::ImageTooSmall,
        E::PixelOutOfRange { .. } | E::NegativeValue { .. } | E::ValueOverflow { .. } => {
            SdsStatus::ValueOutOfRange
        }
        E::Decode { .. } | E::UnsupportedPixelFormat { .. } => SdsStatus::DecodeFailed,
        E::Io { .. } | E::DirectoryUnreadable { .. } => SdsStatus::IoFailed,
        E::EmptyImage | E::EmptyMap | E::EmptyInput => SdsStatus::EmptyInput,
        _ => SdsStatus::InvalidArgument,
    }
}

/// Runs `f` with panics converted to [`SdsStatus::Panic`].
fn guarded(f: impl FnOnce() -> SdsStatus) -> SdsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => SdsStatus::Panic,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sds_status_message(status: SdsStatus) -> *const c_char {
    let msg: &'static str = match status {
        SdsStatus::Ok => "ok\0",
        SdsStatus::NullPointer => "null pointer argument\0",
        SdsStatus::InvalidArgument => "invalid argument\0",
        SdsStatus::DimensionMismatch => "images have different dimensions\0",
        SdsStatus::ImageTooSmall => "image too small for the operation\0",
        SdsStatus::ValueOutOfRange => "pixel value outside [0, 1]\0",
        SdsStatus::DecodeFailed => "cannot decode image\0",
        SdsStatus::IoFailed => "i/o error\0",
        SdsStatus::InvalidUtf8 => "string is not valid UTF-8\0",
        SdsStatus::EmptyInput => "empty input\0",
        SdsStatus::BufferTooSmall => "output buffer too small\0",
        SdsStatus::Panic => "internal panic\0",
    };
    msg.as_ptr() as *const c_char
}

/// New configuration with the stock defaults (M=0.2, P=0.1, K=32,
/// unclamped, scale 100, natural log, max aggregation).
#[no_mangle]
pub extern "C" fn sds_config_new() -> *mut SdsConfig {
    Box::into_raw(Box::new(SdsConfig {
        inner: SdConfig::default(),
    }))
}

/// Releases a configuration handle; NULL is a no-op.
///
/// # Safety
/// `cfg` must be NULL or a pointer returned by [`sds_config_new`] that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn sds_config_free(cfg: *mut SdsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

macro_rules! config_setter {
    ($name:ident, $ty:ty, $field:ident, $check:expr) => {
        /// # Safety
        /// `cfg` must be a live pointer from [`sds_config_new`].
        #[no_mangle]
        pub unsafe extern "C" fn $name(cfg: *mut SdsConfig, value: $ty) -> SdsStatus {
            let Some(cfg) = cfg.as_mut() else {
                return SdsStatus::NullPointer;
            };
            #[allow(clippy::redundant_closure_call)]
            if !($check)(value) {
                return SdsStatus::InvalidArgument;
            }
            cfg.inner.$field = value;
            SdsStatus::Ok
        }
    };
}

config_setter!(sds_config_set_m_threshold, f64, m_threshold, |v: f64| v > 0.0
    && v.is_finite());
config_setter!(sds_config_set_p_threshold, f64, p_threshold, |v: f64| v > 0.0
    && v.is_finite());
config_setter!(sds_config_set_kernel_size, usize, kernel_size, |v: usize| v >= 1);
config_setter!(sds_config_set_clamp_structure, bool, clamp_structure, |_| true);
config_setter!(sds_config_set_scale, f64, scale, |v: f64| v > 0.0 && v.is_finite());

/// Writes the 16-character config digest (plus NUL) into `buf`.
///
/// # Safety
/// `cfg` must be live; `buf` must point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sds_config_digest(
    cfg: *const SdsConfig,
    buf: *mut c_char,
    len: usize,
) -> SdsStatus {
    let Some(cfg) = cfg.as_ref() else {
        return SdsStatus::NullPointer;
    };
    if buf.is_null() {
        return SdsStatus::NullPointer;
    }
    let digest = cfg.inner.digest();
    if len < digest.len() + 1 {
        return SdsStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(digest.as_ptr(), buf as *mut u8, digest.len());
    *buf.add(digest.len()) = 0;
    SdsStatus::Ok
}

/// Builds an image from a row-major `f64` buffer of intensities in [0, 1].
///
/// # Safety
/// `data` must point to `width * height` readable doubles; `out` must be a
/// valid destination for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sds_image_from_gray(
    data: *const f64,
    width: usize,
    height: usize,
    out: *mut *mut SdsImage,
) -> SdsStatus {
    if data.is_null() || out.is_null() {
        return SdsStatus::NullPointer;
    }
    let slice = std::slice::from_raw_parts(data, width * height);
    guarded(|| match GrayImage::from_vec(width, height, slice.to_vec()) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SdsImage { inner }));
            SdsStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Builds a grayscale image from interleaved 8-bit RGB using the same
/// luminance weights as the pipeline.
///
/// # Safety
/// `data` must point to `width * height * 3` readable bytes; `out` must be a
/// valid destination for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sds_image_from_rgb8(
    data: *const u8,
    width: usize,
    height: usize,
    out: *mut *mut SdsImage,
) -> SdsStatus {
    if data.is_null() || out.is_null() {
        return SdsStatus::NullPointer;
    }
    let slice = std::slice::from_raw_parts(data, width * height * 3);
    guarded(|| {
        let pixels: Vec<[f64; 3]> = slice
            .chunks_exact(3)
            .map(|px| {
                [
                    px[0] as f64 / 255.0,
                    px[1] as f64 / 255.0,
                    px[2] as f64 / 255.0,
                ]
            })
            .collect();
        match RgbImage::from_vec(width, height, pixels) {
            Ok(rgb) => {
                *out = Box::into_raw(Box::new(SdsImage {
                    inner: sdscreen::to_grayscale(&rgb),
                }));
                SdsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Decodes a PNG or TIFF tile from disk (8/16-bit gray or RGB) and converts
/// it to grayscale.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid destination
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sds_image_load(
    path: *const c_char,
    out: *mut *mut SdsImage,
) -> SdsStatus {
    if path.is_null() || out.is_null() {
        return SdsStatus::NullPointer;
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return SdsStatus::InvalidUtf8;
    };
    guarded(|| match decode_image(std::path::Path::new(path)) {
        Ok(decoded) => {
            *out = Box::into_raw(Box::new(SdsImage {
                inner: decoded.to_gray(),
            }));
            SdsStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// # Safety
/// `img` must be NULL or a live image handle.
#[no_mangle]
pub unsafe extern "C" fn sds_image_width(img: *const SdsImage) -> usize {
    img.as_ref().map_or(0, |i| i.inner.width())
}

/// # Safety
/// `img` must be NULL or a live image handle.
#[no_mangle]
pub unsafe extern "C" fn sds_image_height(img: *const SdsImage) -> usize {
    img.as_ref().map_or(0, |i| i.inner.height())
}

/// Releases an image handle; NULL is a no-op.
///
/// # Safety
/// `img` must be NULL or a live image handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sds_image_free(img: *mut SdsImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Scores one pair: the three discrepancy aggregations plus the L1/L2/SSIM
/// baselines. A NULL `cfg` means the stock defaults.
///
/// # Safety
/// `original` and `processed` must be live image handles; `cfg` NULL or a
/// live config handle; `out` a valid destination for one record.
#[no_mangle]
pub unsafe extern "C" fn sds_score_pair(
    original: *const SdsImage,
    processed: *const SdsImage,
    cfg: *const SdsConfig,
    out: *mut SdsPairScore,
) -> SdsStatus {
    let (Some(original), Some(processed)) = (original.as_ref(), processed.as_ref()) else {
        return SdsStatus::NullPointer;
    };
    if out.is_null() {
        return SdsStatus::NullPointer;
    }
    let config = cfg.as_ref().map(|c| c.inner.clone()).unwrap_or_default();
    guarded(
        || match score_images("ffi", &original.inner, &processed.inner, &config) {
            Ok(score) => {
                *out = SdsPairScore {
                    sd_max: score.sd_max,
                    sd_mean: score.sd_mean,
                    sd_p99: score.sd_p99,
                    l1: score.l1,
                    l2: score.l2,
                    ssim: score.ssim,
                    width: score.width,
                    height: score.height,
                };
                SdsStatus::Ok
            }
            Err(e) => status_of(&e),
        },
    )
}

/// Computes the per-pixel discrepancy map. A NULL `cfg` means defaults.
///
/// # Safety
/// `original` and `processed` must be live image handles; `cfg` NULL or a
/// live config handle; `out` a valid destination for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sds_map_compute(
    original: *const SdsImage,
    processed: *const SdsImage,
    cfg: *const SdsConfig,
    out: *mut *mut SdsMap,
) -> SdsStatus {
    let (Some(original), Some(processed)) = (original.as_ref(), processed.as_ref()) else {
        return SdsStatus::NullPointer;
    };
    if out.is_null() {
        return SdsStatus::NullPointer;
    }
    let config = cfg.as_ref().map(|c| c.inner.clone()).unwrap_or_default();
    guarded(
        || match sd_map(&original.inner, &processed.inner, &config) {
            Ok(map) => {
                *out = Box::into_raw(Box::new(SdsMap { inner: map }));
                SdsStatus::Ok
            }
            Err(e) => status_of(&e),
        },
    )
}

/// # Safety
/// `map` must be NULL or a live map handle.
#[no_mangle]
pub unsafe extern "C" fn sds_map_width(map: *const SdsMap) -> usize {
    map.as_ref().map_or(0, |m| m.inner.width())
}

/// # Safety
/// `map` must be NULL or a live map handle.
#[no_mangle]
pub unsafe extern "C" fn sds_map_height(map: *const SdsMap) -> usize {
    map.as_ref().map_or(0, |m| m.inner.height())
}

/// Row-major borrow of the map values (`width * height` doubles); valid
/// until the map is freed. NULL for a NULL map.
///
/// # Safety
/// `map` must be NULL or a live map handle.
#[no_mangle]
pub unsafe extern "C" fn sds_map_data(map: *const SdsMap) -> *const f64 {
    map.as_ref()
        .map_or(ptr::null(), |m| m.inner.data().as_ptr())
}

/// Collapses the map to one scalar.
///
/// # Safety
/// `map` must be a live map handle; `out` a valid destination for a double.
#[no_mangle]
pub unsafe extern "C" fn sds_map_aggregate(
    map: *const SdsMap,
    mode: SdsAggregation,
    out: *mut f64,
) -> SdsStatus {
    let Some(map) = map.as_ref() else {
        return SdsStatus::NullPointer;
    };
    if out.is_null() {
        return SdsStatus::NullPointer;
    }
    let mode = match mode {
        SdsAggregation::Max => Aggregation::Max,
        SdsAggregation::Mean => Aggregation::Mean,
        SdsAggregation::P99 => Aggregation::P99,
    };
    guarded(|| match aggregate(&map.inner, mode) {
        Ok(value) => {
            *out = value;
            SdsStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Releases a map handle; NULL is a no-op.
///
/// # Safety
/// `map` must be NULL or a live map handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sds_map_free(map: *mut SdsMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}
