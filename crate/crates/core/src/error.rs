use std::path::PathBuf;

use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An image is too small for the requested operation (Sobel needs 3x3,
    /// SSIM needs its 11x11 window, ...).
    #[error("image is {width}x{height} but the operation needs at least {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("dimension mismatch: {expected_width}x{expected_height} vs {width}x{height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },

    #[error("pixel value {value} at index {index} is outside [0, 1]")]
    PixelOutOfRange { index: usize, value: f64 },

    #[error("negative value {value} at index {index} in a nonnegative raster")]
    NegativeValue { index: usize, value: f64 },

    #[error("buffer of length {len} does not fill a {width}x{height} raster")]
    BadBufferLength {
        len: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "region {x},{y} size {width}x{height} exceeds image bounds {image_width}x{image_height}"
    )]
    RegionOutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
        image_width: usize,
        image_height: usize,
    },

    /// An arithmetic edit (shift, pattern injection) pushed a pixel out of [0, 1].
    #[error("operation would push pixel values outside [0, 1] (worst offender {value})")]
    ValueOverflow { value: f64 },

    #[error("empty image")]
    EmptyImage,

    #[error("empty map")]
    EmptyMap,

    #[error("empty input")]
    EmptyInput,

    #[error("cannot read directory {path}: {source}")]
    DirectoryUnreadable {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Pair discovery found files on one side without a partner on the other.
    #[error("{} unmatched file(s): {}", orphans.len(), orphans.join(", "))]
    UnmatchedFiles { orphans: Vec<String> },

    #[error("two files in {dir} share the stem '{stem}'")]
    DuplicateStem { stem: String, dir: PathBuf },

    #[error("cannot decode {path}: {source}")]
    Decode {
        path: PathBuf,
        source: image::ImageError,
    },

    #[error("unsupported pixel layout in {path}: expected 8- or 16-bit grayscale or RGB")]
    UnsupportedPixelFormat { path: PathBuf },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;
