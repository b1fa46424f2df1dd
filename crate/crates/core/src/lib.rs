//! Screening toolkit for whole-slide-image normalization QA.
//!
//! Generative normalization models can hallucinate: fabricate tissue texture
//! that was never in the original, or wash real texture away. Pixel-level
//! measures (L1, L2, SSIM) respond to any intensity change, so a benign
//! global restain and a local fabrication can score alike. The structure
//! discrepancy measure implemented here responds specifically to one image
//! being textured where the other is flat, gated by a smoothed intensity
//! difference mask — see [`measure`] for the exact pipeline.
//!
//! The crate covers the full screening workflow:
//!
//! - [`measure`]: the per-pixel map and its scalar aggregations,
//! - [`baselines`]: L1 / L2 / SSIM for side-by-side comparison,
//! - [`pipeline`]: pair discovery on disk and deterministic parallel batches,
//! - [`report`]: distribution summaries, outlier ranking, heatmaps, exports,
//! - [`synthgen`]: seeded corpora with ground-truth labels for validation,
//! - [`normalizer`]: Reinhard-style color transfer to produce realistic
//!   pairs end to end without any trained model.

pub mod baselines;
pub mod error;
pub mod filter;
pub mod measure;
pub mod normalizer;
pub mod pipeline;
pub mod raster;
pub mod report;
pub mod synthgen;

mod stats;

pub use error::{Error, Result};
pub use measure::{aggregate, diff_mask, less_struct, sd_map, Aggregation, LogBase, SdConfig};
pub use raster::{to_grayscale, EdgeMap, GrayImage, Raster, RgbImage, SdMap, TriRaster};
