//! Seeded synthetic image pairs with known ground truth.
//!
//! Hallucinated pairs combine a localized structure edit (injected pattern or
//! flattened region) with a small global intensity shift; benign pairs apply
//! only a large uniform shift, the class of change a well-behaved normalizer
//! is allowed to make. Benign edits therefore leave the Sobel map bit-exact,
//! which the tests assert literally.
//!
//! All generated intensities sit on the 1/1024 grid and shifts are multiples
//! of 1/1024 too, so adding a shift is exact in f64 and "structure strictly
//! unchanged" is a bitwise statement rather than a tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{GrayImage, Raster};

/// Tile side used by [`make_corpus`].
pub const DEFAULT_TILE: usize = 192;

/// Smallest tile the corpus generator can lay out (quadrant placement needs
/// room for regions and margins).
pub const MIN_TILE: usize = 96;

/// Intensity quantization step; see the module docs.
const QUANT: f64 = 1024.0;

/// Rectangle in pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    fn check_within(&self, image_width: usize, image_height: usize) -> Result<()> {
        if self.x + self.width > image_width || self.y + self.height > image_height {
            return Err(Error::RegionOutOfBounds {
                x: self.x,
                y: self.y,
                width: self.width,
                height: self.height,
                image_width,
                image_height,
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pattern {
    Checkerboard,
    Stripes,
    Speckle,
}

/// Ground-truth class of a synthetic pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Hallucinated,
    Benign,
}

/// Recipe for one structure injection.
#[derive(Clone, Debug)]
pub struct SynthSpec {
    /// Seeds the speckle pattern; ignored by the deterministic patterns.
    pub seed: u64,
    pub region: Rect,
    pub pattern: Pattern,
    /// Peak-to-peak amplitude of the injected pattern, in intensity units.
    pub pattern_contrast: f64,
    /// Global shift applied alongside the edit when building corpora.
    pub shift_delta: f64,
    pub label: Label,
}

/// Checkerboard / stripe cell side in pixels; small enough that a smoothing
/// window always sees many cell transitions.
const PATTERN_CELL: usize = 4;

/// Adds a centered pattern (offsets in `[-contrast/2, contrast/2]`) to the
/// region; pixels outside the region are untouched.
pub fn inject_structure(img: &GrayImage, spec: &SynthSpec) -> Result<GrayImage> {
    spec.region.check_within(img.width(), img.height())?;
    if !(0.0..=1.0).contains(&spec.pattern_contrast) {
        return Err(Error::InvalidConfig(format!(
            "pattern_contrast must be in [0, 1], got {}",
            spec.pattern_contrast
        )));
    }
    if spec.pattern_contrast == 0.0 {
        return Ok(img.clone());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = img.data().to_vec();
    let width = img.width();
    for y in spec.region.y..spec.region.y + spec.region.height {
        for x in spec.region.x..spec.region.x + spec.region.width {
            let rel_x = x - spec.region.x;
            let rel_y = y - spec.region.y;
            let offset = match spec.pattern {
                Pattern::Checkerboard => {
                    let on = (rel_x / PATTERN_CELL + rel_y / PATTERN_CELL) % 2 == 0;
                    let sign = if on { 0.5 } else { -0.5 };
                    sign * spec.pattern_contrast
                }
                Pattern::Stripes => {
                    let on = (rel_y / PATTERN_CELL) % 2 == 0;
                    let sign = if on { 0.5 } else { -0.5 };
                    sign * spec.pattern_contrast
                }
                Pattern::Speckle => {
                    let u: f64 = rng.gen_range(-0.5..=0.5);
                    (u * spec.pattern_contrast * 2.0 * QUANT).round() / (2.0 * QUANT)
                }
            };
            let idx = y * width + x;
            let value = data[idx] + offset;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ValueOverflow { value });
            }
            data[idx] = value;
        }
    }
    GrayImage::from_vec(width, img.height(), data)
}

/// Replaces the region with its own mean intensity. A region that is already
/// constant comes back bit-identical.
pub fn erase_structure(img: &GrayImage, region: Rect) -> Result<GrayImage> {
    region.check_within(img.width(), img.height())?;
    let width = img.width();
    let data = img.data();

    let mut sum = 0.0f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for y in region.y..region.y + region.height {
        for x in region.x..region.x + region.width {
            let v = data[y * width + x];
            sum += v;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let count = region.width * region.height;
    if count == 0 || lo == hi {
        return Ok(img.clone());
    }
    let mean = (sum / count as f64).clamp(0.0, 1.0);

    let mut out = data.to_vec();
    for y in region.y..region.y + region.height {
        for x in region.x..region.x + region.width {
            out[y * width + x] = mean;
        }
    }
    GrayImage::from_vec(width, img.height(), out)
}

/// Adds `delta` to every pixel; errors if any value would leave `[0, 1]`.
pub fn shift_intensity(img: &GrayImage, delta: f64) -> Result<GrayImage> {
    let mut out = Vec::with_capacity(img.data().len());
    for &v in img.data() {
        let shifted = v + delta;
        if !(0.0..=1.0).contains(&shifted) {
            return Err(Error::ValueOverflow { value: shifted });
        }
        out.push(shifted);
    }
    GrayImage::from_vec(img.width(), img.height(), out)
}

/// One corpus entry: the pair plus its ground-truth class.
#[derive(Clone, Debug)]
pub struct LabeledPair {
    pub pair_id: String,
    pub original: GrayImage,
    pub processed: GrayImage,
    pub label: Label,
}

/// Deterministic labeled corpus at the default tile size.
pub fn make_corpus(n_hallucinated: usize, n_benign: usize, seed: u64) -> Vec<LabeledPair> {
    make_corpus_sized(n_hallucinated, n_benign, seed, DEFAULT_TILE, DEFAULT_TILE)
        .expect("default tile size is valid")
}

/// Corpus with explicit tile dimensions (both must be >= [`MIN_TILE`]).
pub fn make_corpus_sized(
    n_hallucinated: usize,
    n_benign: usize,
    seed: u64,
    width: usize,
    height: usize,
) -> Result<Vec<LabeledPair>> {
    if width < MIN_TILE || height < MIN_TILE {
        return Err(Error::InvalidConfig(format!(
            "corpus tiles must be at least {MIN_TILE}x{MIN_TILE}, got {width}x{height}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n_hallucinated + n_benign);

    for i in 0..n_hallucinated {
        let cluster_quadrant = rng.gen_range(0..4u8);
        let layout = tissue_with_layout(width, height, &mut rng, cluster_quadrant);
        let delta = quantized_delta(&mut rng, 10, 41);

        let edited = if i % 2 == 0 {
            // Inject a texture where the original is smooth: the quadrant
            // diagonally opposite the cluster keeps the two edits apart.
            let region = random_region_in_quadrant(
                &mut rng,
                width,
                height,
                3 - cluster_quadrant,
            );
            let pattern = match i % 3 {
                0 => Pattern::Checkerboard,
                1 => Pattern::Stripes,
                _ => Pattern::Speckle,
            };
            // Contrast in [0.30, 0.40]: strong enough to saturate the
            // textured side, small enough to keep shift headroom.
            let contrast = rng.gen_range(307..=410) as f64 / QUANT;
            let spec = SynthSpec {
                seed: rng.gen(),
                region,
                pattern,
                pattern_contrast: contrast,
                shift_delta: delta,
                label: Label::Hallucinated,
            };
            inject_structure(&layout.image, &spec).expect("layout guarantees headroom")
        } else {
            // Flatten the textured cluster.
            let region = inflate(layout.cluster, 4, width, height);
            erase_structure(&layout.image, region).expect("region lies within bounds")
        };
        let processed = shift_intensity(&edited, delta).expect("delta sized to headroom");
        pairs.push(LabeledPair {
            pair_id: format!("hall_{i:04}"),
            original: layout.image,
            processed,
            label: Label::Hallucinated,
        });
    }

    for i in 0..n_benign {
        let cluster_quadrant = rng.gen_range(0..4u8);
        let layout = tissue_with_layout(width, height, &mut rng, cluster_quadrant);
        let delta = quantized_delta(&mut rng, 103, 205);
        let processed = shift_intensity(&layout.image, delta).expect("delta sized to headroom");
        pairs.push(LabeledPair {
            pair_id: format!("ben_{i:04}"),
            original: layout.image,
            processed,
            label: Label::Benign,
        });
    }

    Ok(pairs)
}

/// Signed shift of magnitude `lo..=hi` in 1/1024 steps.
fn quantized_delta(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
    let magnitude = rng.gen_range(lo..=hi) as f64 / QUANT;
    if rng.gen_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

fn quadrant_bounds(width: usize, height: usize, quadrant: u8) -> Rect {
    let half_w = width / 2;
    let half_h = height / 2;
    let x = if quadrant % 2 == 0 { 0 } else { width - half_w };
    let y = if quadrant < 2 { 0 } else { height - half_h };
    Rect::new(x, y, half_w, half_h)
}

fn random_region_in_quadrant(
    rng: &mut ChaCha8Rng,
    width: usize,
    height: usize,
    quadrant: u8,
) -> Rect {
    let bounds = quadrant_bounds(width, height, quadrant);
    let margin = 8;
    let max_side = (bounds.width.min(bounds.height) - 2 * margin).min(64);
    let min_side = 40.min(max_side);
    let w = rng.gen_range(min_side..=max_side);
    let h = rng.gen_range(min_side..=max_side);
    let x = bounds.x + margin + rng.gen_range(0..=bounds.width - 2 * margin - w);
    let y = bounds.y + margin + rng.gen_range(0..=bounds.height - 2 * margin - h);
    Rect::new(x, y, w, h)
}

fn inflate(rect: Rect, by: usize, width: usize, height: usize) -> Rect {
    let x = rect.x.saturating_sub(by);
    let y = rect.y.saturating_sub(by);
    let right = (rect.x + rect.width + by).min(width);
    let bottom = (rect.y + rect.height + by).min(height);
    Rect::new(x, y, right - x, bottom - y)
}

struct TissueLayout {
    image: GrayImage,
    /// Footprint of the high-frequency texture cluster.
    cluster: Rect,
}

/// Tissue-like tile: a gentle illumination ramp, smooth dark blobs, and one
/// high-contrast micro-texture cluster confined to the given quadrant.
/// Values are clamped to [0.25, 0.75] (shift headroom) and quantized.
fn tissue_with_layout(
    width: usize,
    height: usize,
    rng: &mut ChaCha8Rng,
    cluster_quadrant: u8,
) -> TissueLayout {
    let mut field = Raster::constant(width, height, 0.5);

    // Illumination ramp along a random direction.
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let ramp_amp: f64 = rng.gen_range(0.02..0.06);
    let (dir_x, dir_y) = (theta.cos(), theta.sin());
    let diag = ((width * width + height * height) as f64).sqrt();
    for y in 0..height {
        for x in 0..width {
            let t = (x as f64 * dir_x + y as f64 * dir_y) / diag;
            let v = field.get(x, y) + ramp_amp * t;
            field.set(x, y, v);
        }
    }

    // Smooth blobs, mostly dark (nuclei-ish), a few light.
    let blob_count = (width * height / 1500).max(4);
    for _ in 0..blob_count {
        let cx = rng.gen_range(0.0..width as f64);
        let cy = rng.gen_range(0.0..height as f64);
        let sigma = rng.gen_range(8.0..16.0);
        let amp = if rng.gen_bool(0.7) {
            -rng.gen_range(0.04..0.12)
        } else {
            rng.gen_range(0.02..0.06)
        };
        splat_gaussian(&mut field, cx, cy, sigma, amp);
    }

    // One micro-texture cluster.
    let bounds = quadrant_bounds(width, height, cluster_quadrant);
    let margin = 8;
    let max_side = (bounds.width.min(bounds.height) - 2 * margin).min(56);
    let side = rng.gen_range(40.min(max_side)..=max_side);
    let cx0 = bounds.x + margin + rng.gen_range(0..=bounds.width - 2 * margin - side);
    let cy0 = bounds.y + margin + rng.gen_range(0..=bounds.height - 2 * margin - side);
    let cluster = Rect::new(cx0, cy0, side, side);
    let micro_count = rng.gen_range(25..=45);
    for _ in 0..micro_count {
        let cx = cluster.x as f64 + rng.gen_range(0.0..cluster.width as f64);
        let cy = cluster.y as f64 + rng.gen_range(0.0..cluster.height as f64);
        let sigma = rng.gen_range(1.2..2.5);
        let amp = rng.gen_range(0.15..0.30) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        splat_gaussian(&mut field, cx, cy, sigma, amp);
    }

    let data = field
        .into_vec()
        .into_iter()
        .map(|v| (v.clamp(0.25, 0.75) * QUANT).round() / QUANT)
        .collect();
    TissueLayout {
        image: GrayImage::from_vec(width, height, data).expect("values quantized into [0, 1]"),
        cluster,
    }
}

fn splat_gaussian(field: &mut Raster, cx: f64, cy: f64, sigma: f64, amp: f64) {
    let reach = (3.0 * sigma).ceil() as isize;
    let width = field.width() as isize;
    let height = field.height() as isize;
    let x0 = ((cx as isize) - reach).max(0);
    let x1 = ((cx as isize) + reach).min(width - 1);
    let y0 = ((cy as isize) - reach).max(0);
    let y1 = ((cy as isize) + reach).min(height - 1);
    let inv = 1.0 / (2.0 * sigma * sigma);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let g = (-(dx * dx + dy * dy) * inv).exp();
            let v = field.get(x as usize, y as usize) + amp * g;
            field.set(x as usize, y as usize, v);
        }
    }
}

/// One line of the labels manifest.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LabelEntry {
    pub pair_id: String,
    pub label: Label,
}

pub fn save_labels(entries: &[LabelEntry], path: &std::path::Path) -> Result<()> {
    let body = serde_json::to_string_pretty(entries).expect("plain structs serialize");
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_labels(path: &std::path::Path) -> Result<Vec<LabelEntry>> {
    let body = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&body).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}
