//! Turning score populations into something a reviewer can act on:
//! boxplot-style distribution summaries, ranked outlier lists, per-pixel
//! heatmap overlays, and machine-readable exports.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::PairScore;
use crate::raster::{Raster, RgbImage, SdMap};
use crate::stats::quantile_type7;

/// Which scalar of a [`PairScore`] a report runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreField {
    SdMax,
    SdMean,
    SdP99,
    L1,
    L2,
    Ssim,
}

impl ScoreField {
    pub fn get(&self, score: &PairScore) -> f64 {
        match self {
            ScoreField::SdMax => score.sd_max,
            ScoreField::SdMean => score.sd_mean,
            ScoreField::SdP99 => score.sd_p99,
            ScoreField::L1 => score.l1,
            ScoreField::L2 => score.l2,
            ScoreField::Ssim => score.ssim,
        }
    }
}

impl std::fmt::Display for ScoreField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ScoreField::SdMax => "sd_max",
            ScoreField::SdMean => "sd_mean",
            ScoreField::SdP99 => "sd_p99",
            ScoreField::L1 => "l1",
            ScoreField::L2 => "l2",
            ScoreField::Ssim => "ssim",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for ScoreField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sd_max" => Ok(ScoreField::SdMax),
            "sd_mean" => Ok(ScoreField::SdMean),
            "sd_p99" => Ok(ScoreField::SdP99),
            "l1" => Ok(ScoreField::L1),
            "l2" => Ok(ScoreField::L2),
            "ssim" => Ok(ScoreField::Ssim),
            other => Err(Error::InvalidConfig(format!(
                "unknown score field '{other}'"
            ))),
        }
    }
}

/// Boxplot-style summary of one score population: type-7 quartiles, Tukey
/// whiskers (last data point within 1.5 IQR of the box), and the pairs that
/// fall beyond the whiskers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub field: ScoreField,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outlier_ids: Vec<String>,
    /// Quantile rule used, recorded so summaries stay comparable.
    pub quantile_method: String,
}

pub const QUANTILE_METHOD: &str = "type-7";

pub fn summarize_distribution(
    scores: &[PairScore],
    field: ScoreField,
) -> Result<DistributionSummary> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    let values: Vec<f64> = scores.iter().map(|s| field.get(s)).collect();
    let q1 = quantile_type7(&mut values.clone(), 0.25);
    let median = quantile_type7(&mut values.clone(), 0.5);
    let q3 = quantile_type7(&mut values.clone(), 0.75);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let iqr = q3 - q1;
    let fence_low = q1 - 1.5 * iqr;
    let fence_high = q3 + 1.5 * iqr;

    // Whiskers sit on the most extreme data points inside the fences,
    // clamped to the box so the summary ordering invariant always holds.
    let whisker_low = values
        .iter()
        .copied()
        .filter(|&v| v >= fence_low)
        .fold(f64::INFINITY, f64::min)
        .min(q1);
    let whisker_high = values
        .iter()
        .copied()
        .filter(|&v| v <= fence_high)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(q3);

    let mut outliers: Vec<(f64, String)> = scores
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v < fence_low || v > fence_high)
        .map(|(s, &v)| (v, s.pair_id.clone()))
        .collect();
    outliers.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));

    Ok(DistributionSummary {
        field,
        n: scores.len(),
        min,
        q1,
        median,
        q3,
        max,
        whisker_low,
        whisker_high,
        outlier_ids: outliers.into_iter().map(|(_, id)| id).collect(),
        quantile_method: QUANTILE_METHOD.to_string(),
    })
}

/// Top-k pairs by descending score; ties break on ascending `pair_id` so the
/// ordering is total and reproducible.
pub fn rank_outliers(
    scores: &[PairScore],
    field: ScoreField,
    top_k: usize,
) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = scores
        .iter()
        .map(|s| (s.pair_id.clone(), field.get(s)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_k);
    ranked
}

/// Upper bound of the clamped-variant map at the default scale; the stock
/// heatmap cap, so colors stay comparable across pairs.
pub const DEFAULT_HEATMAP_CAP: f64 = 100.0 * std::f64::consts::LN_2;

/// Cap to use when none is given: the fixed default, widened to the data max
/// only when an unclamped map overshoots it.
pub fn default_heatmap_cap(map: &SdMap) -> f64 {
    let data_max = map.data().iter().copied().fold(0.0, f64::max);
    if data_max > DEFAULT_HEATMAP_CAP {
        data_max
    } else {
        DEFAULT_HEATMAP_CAP
    }
}

/// Renders the map as a saturating hot-colormap overlay on `base`.
///
/// `t = min(value / cap, 1)` drives both the overlay color and its opacity;
/// pixels with value 0 are copied through bit-exactly.
pub fn emit_heatmap(map: &SdMap, base: &RgbImage, cap: f64) -> Result<RgbImage> {
    if !(cap > 0.0) {
        return Err(Error::InvalidConfig(format!("cap must be > 0, got {cap}")));
    }
    if (map.width(), map.height()) != (base.width(), base.height()) {
        return Err(Error::DimensionMismatch {
            expected_width: map.width(),
            expected_height: map.height(),
            width: base.width(),
            height: base.height(),
        });
    }
    let data = map
        .data()
        .iter()
        .zip(base.data())
        .map(|(&value, &px)| {
            if value == 0.0 {
                return px;
            }
            let t = (value / cap).min(1.0);
            let hot = hot_color(t);
            [
                (1.0 - t) * px[0] + t * hot[0],
                (1.0 - t) * px[1] + t * hot[1],
                (1.0 - t) * px[2] + t * hot[2],
            ]
        })
        .collect();
    RgbImage::from_vec(base.width(), base.height(), data)
}

/// Black -> red -> yellow -> white ramp.
fn hot_color(t: f64) -> [f64; 3] {
    [
        (3.0 * t).clamp(0.0, 1.0),
        (3.0 * t - 1.0).clamp(0.0, 1.0),
        (3.0 * t - 2.0).clamp(0.0, 1.0),
    ]
}

/// Converts an SD map to a standalone grayscale rendering of `value / cap`.
pub fn map_to_gray(map: &SdMap, cap: f64) -> Result<crate::raster::GrayImage> {
    if !(cap > 0.0) {
        return Err(Error::InvalidConfig(format!("cap must be > 0, got {cap}")));
    }
    let data = map.data().iter().map(|&v| (v / cap).min(1.0)).collect();
    crate::raster::GrayImage::new(
        Raster::from_vec(map.width(), map.height(), data).expect("same length"),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Jsonl,
}

impl ExportFormat {
    /// Picks the format from a destination's extension; anything that is not
    /// `.jsonl` exports as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("jsonl") => ExportFormat::Jsonl,
            _ => ExportFormat::Csv,
        }
    }
}

/// Column order is part of the interface; reorder and downstream parsers
/// break silently.
pub const SCORE_CSV_HEADER: &str =
    "pair_id,sd_max,sd_mean,sd_p99,l1,l2,ssim,width,height,config_digest";

/// Formats with 9 significant digits, `%g`-style: fixed point in a sane
/// exponent range, scientific outside it, trailing zeros trimmed.
fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= 9 {
        let s = format!("{:.8e}", x);
        trim_sci(&s)
    } else {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_fixed(&s)
    }
}

fn trim_fixed(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

fn trim_sci(s: &str) -> String {
    // "1.23450000e-7" -> "1.2345e-7"
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let mantissa = trim_fixed(mantissa);
            format!("{mantissa}e{exp}")
        }
        None => s.to_string(),
    }
}

fn check_exportable_id(id: &str) -> Result<()> {
    if id.contains(',') || id.contains('\n') || id.contains('\r') {
        return Err(Error::InvalidConfig(format!(
            "pair_id '{id}' contains characters not representable in the CSV export"
        )));
    }
    Ok(())
}

/// Writes scores in the exact column order of [`SCORE_CSV_HEADER`] (or the
/// equivalent JSON-lines layout), floats at 9 significant digits.
pub fn export_scores(
    scores: &[PairScore],
    format: ExportFormat,
    destination: &Path,
) -> Result<()> {
    let mut body = String::new();
    match format {
        ExportFormat::Csv => {
            body.push_str(SCORE_CSV_HEADER);
            body.push('\n');
            for s in scores {
                check_exportable_id(&s.pair_id)?;
                body.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    s.pair_id,
                    format_sig9(s.sd_max),
                    format_sig9(s.sd_mean),
                    format_sig9(s.sd_p99),
                    format_sig9(s.l1),
                    format_sig9(s.l2),
                    format_sig9(s.ssim),
                    s.width,
                    s.height,
                    s.config_digest
                ));
            }
        }
        ExportFormat::Jsonl => {
            for s in scores {
                let id = serde_json::to_string(&s.pair_id).expect("strings serialize");
                let digest = serde_json::to_string(&s.config_digest).expect("strings serialize");
                body.push_str(&format!(
                    "{{\"pair_id\":{id},\"sd_max\":{},\"sd_mean\":{},\"sd_p99\":{},\"l1\":{},\"l2\":{},\"ssim\":{},\"width\":{},\"height\":{},\"config_digest\":{digest}}}\n",
                    format_sig9(s.sd_max),
                    format_sig9(s.sd_mean),
                    format_sig9(s.sd_p99),
                    format_sig9(s.l1),
                    format_sig9(s.l2),
                    format_sig9(s.ssim),
                    s.width,
                    s.height,
                ));
            }
        }
    }
    let mut file = std::fs::File::create(destination).map_err(|source| Error::Io {
        path: destination.to_path_buf(),
        source,
    })?;
    file.write_all(body.as_bytes()).map_err(|source| Error::Io {
        path: destination.to_path_buf(),
        source,
    })
}

/// Reads scores back from either export format (chosen by extension).
pub fn import_scores(path: &Path) -> Result<Vec<PairScore>> {
    let body = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match ExportFormat::from_path(path) {
        ExportFormat::Jsonl => body
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                serde_json::from_str::<PairScore>(line).map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    reason: e.to_string(),
                })
            })
            .collect(),
        ExportFormat::Csv => {
            let mut lines = body.lines();
            let header = lines.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                reason: "empty file".to_string(),
            })?;
            if header != SCORE_CSV_HEADER {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    reason: format!("unexpected header '{header}'"),
                });
            }
            lines
                .filter(|l| !l.trim().is_empty())
                .map(|line| parse_csv_line(line, path))
                .collect()
        }
    }
}

fn parse_csv_line(line: &str, path: &Path) -> Result<PairScore> {
    let parts: Vec<&str> = line.split(',').collect();
    if parts.len() != 10 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            reason: format!("expected 10 columns, got {}", parts.len()),
        });
    }
    let float = |s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: format!("bad float '{s}': {e}"),
        })
    };
    let int = |s: &str| -> Result<usize> {
        s.parse::<usize>().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: format!("bad integer '{s}': {e}"),
        })
    };
    Ok(PairScore {
        pair_id: parts[0].to_string(),
        sd_max: float(parts[1])?,
        sd_mean: float(parts[2])?,
        sd_p99: float(parts[3])?,
        l1: float(parts[4])?,
        l2: float(parts[5])?,
        ssim: float(parts[6])?,
        width: int(parts[7])?,
        height: int(parts[8])?,
        config_digest: parts[9].to_string(),
    })
}

pub fn save_summary_json(summary: &DistributionSummary, path: &Path) -> Result<()> {
    let body = serde_json::to_string_pretty(summary).expect("plain struct serializes");
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GrayImage;

    fn score(id: &str, sd_max: f64) -> PairScore {
        PairScore {
            pair_id: id.to_string(),
            sd_max,
            sd_mean: sd_max / 3.0,
            sd_p99: sd_max / 2.0,
            l1: 0.125,
            l2: 0.25,
            ssim: 0.875,
            width: 64,
            height: 64,
            config_digest: "0123456789abcdef".to_string(),
        }
    }

    #[test]
    fn summary_of_one_to_five() {
        let scores: Vec<PairScore> = [1.0, 2.0, 3.0, 4.0, 5.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| score(&format!("p{i}"), v))
            .collect();
        let s = summarize_distribution(&scores, ScoreField::SdMax).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        assert_eq!((s.min, s.max), (1.0, 5.0));
        assert_eq!((s.whisker_low, s.whisker_high), (1.0, 5.0));
        assert!(s.outlier_ids.is_empty());
        assert_eq!(s.quantile_method, "type-7");
    }

    #[test]
    fn summary_single_value_degenerates() {
        let scores = vec![score("only", 7.5)];
        let s = summarize_distribution(&scores, ScoreField::SdMax).unwrap();
        for v in [s.min, s.q1, s.median, s.q3, s.max, s.whisker_low, s.whisker_high] {
            assert_eq!(v, 7.5);
        }
        assert!(s.outlier_ids.is_empty());
    }

    #[test]
    fn summary_flags_tukey_outlier() {
        let scores: Vec<PairScore> = [1.0, 2.0, 3.0, 4.0, 100.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| score(&format!("p{i}"), v))
            .collect();
        let s = summarize_distribution(&scores, ScoreField::SdMax).unwrap();
        // IQR = 2, fences at -1 and 7; whiskers clamp to in-range data.
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        assert_eq!(s.whisker_low, 1.0);
        assert_eq!(s.whisker_high, 4.0);
        assert_eq!(s.outlier_ids, vec!["p4".to_string()]);
        // Ordering invariant.
        assert!(s.min <= s.whisker_low);
        assert!(s.whisker_low <= s.q1);
        assert!(s.q1 <= s.median && s.median <= s.q3);
        assert!(s.q3 <= s.whisker_high && s.whisker_high <= s.max);
    }

    #[test]
    fn summary_empty_errors() {
        assert!(matches!(
            summarize_distribution(&[], ScoreField::SdMax),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn rank_outliers_order_and_ties() {
        let scores = vec![score("a", 5.0), score("b", 9.0), score("c", 9.0)];
        assert!(rank_outliers(&scores, ScoreField::SdMax, 0).is_empty());
        let ranked = rank_outliers(&scores, ScoreField::SdMax, 3);
        let ids: Vec<&str> = ranked.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["b", "c", "a"]);
        // top_k beyond n returns everything, still sorted.
        let ranked = rank_outliers(&scores, ScoreField::SdMax, 10);
        assert_eq!(ranked.len(), 3);
    }

    #[test]
    fn heatmap_zero_map_is_identity() {
        let base = RgbImage::constant(8, 8, [0.25, 0.5, 0.75]).unwrap();
        let map = SdMap::new(Raster::new(8, 8)).unwrap();
        let out = emit_heatmap(&map, &base, 10.0).unwrap();
        assert_eq!(out.data(), base.data());
    }

    #[test]
    fn heatmap_saturates_at_cap() {
        let base = RgbImage::constant(8, 8, [0.2, 0.2, 0.2]).unwrap();
        let at_cap = SdMap::new(Raster::constant(8, 8, 10.0)).unwrap();
        let over_cap = SdMap::new(Raster::constant(8, 8, 20.0)).unwrap();
        let a = emit_heatmap(&at_cap, &base, 10.0).unwrap();
        let b = emit_heatmap(&over_cap, &base, 10.0).unwrap();
        assert_eq!(a.data(), b.data());
        // Full-intensity overlay color at t = 1 is the top of the ramp.
        assert_eq!(a.data()[0], [1.0, 1.0, 1.0]);
    }

    #[test]
    fn heatmap_dimension_mismatch() {
        let base = RgbImage::constant(8, 8, [0.0, 0.0, 0.0]).unwrap();
        let map = SdMap::new(Raster::new(9, 8)).unwrap();
        assert!(matches!(
            emit_heatmap(&map, &base, 10.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn default_cap_prefers_fixed_bound() {
        let small = SdMap::new(Raster::constant(4, 4, 3.0)).unwrap();
        assert_eq!(default_heatmap_cap(&small), DEFAULT_HEATMAP_CAP);
        let big = SdMap::new(Raster::constant(4, 4, 200.0)).unwrap();
        assert_eq!(default_heatmap_cap(&big), 200.0);
    }

    #[test]
    fn map_to_gray_scales_and_saturates() {
        let map = SdMap::new(Raster::from_vec(3, 3, vec![0.0, 5.0, 20.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap())
            .unwrap();
        let gray: GrayImage = map_to_gray(&map, 10.0).unwrap();
        assert_eq!(gray.get(0, 0), 0.0);
        assert_eq!(gray.get(1, 0), 0.5);
        assert_eq!(gray.get(2, 0), 1.0);
        assert!(map_to_gray(&map, 0.0).is_err());
    }

    #[test]
    fn format_sig9_cases() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(0.5), "0.5");
        assert_eq!(format_sig9(-2.25), "-2.25");
        assert_eq!(format_sig9(69.31471805599453), "69.3147181");
        assert_eq!(format_sig9(0.123456789123), "0.123456789");
        assert_eq!(format_sig9(1.23456789123e-7), "1.23456789e-7");
        assert_eq!(format_sig9(9.87654321e12), "9.87654321e12");
        // Round-trips to 9 significant digits.
        for v in [0.1234567891, 123.456789123, 3.14159265358979e-5] {
            let parsed: f64 = format_sig9(v).parse().unwrap();
            assert!(((parsed - v) / v).abs() < 5e-9, "{v} -> {parsed}");
        }
    }

    #[test]
    fn export_import_round_trip_csv_and_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let scores: Vec<PairScore> = (0..10)
            .map(|i| score(&format!("pair_{i:02}"), 0.3 + i as f64 * 0.817234561))
            .collect();

        for (name, format) in [("s.csv", ExportFormat::Csv), ("s.jsonl", ExportFormat::Jsonl)] {
            let path = dir.path().join(name);
            export_scores(&scores, format, &path).unwrap();
            let loaded = import_scores(&path).unwrap();
            assert_eq!(loaded.len(), scores.len());
            for (a, b) in scores.iter().zip(&loaded) {
                assert_eq!(a.pair_id, b.pair_id);
                assert_eq!(a.config_digest, b.config_digest);
                assert_eq!((a.width, a.height), (b.width, b.height));
                for (x, y) in [
                    (a.sd_max, b.sd_max),
                    (a.sd_mean, b.sd_mean),
                    (a.sd_p99, b.sd_p99),
                    (a.l1, b.l1),
                    (a.l2, b.l2),
                    (a.ssim, b.ssim),
                ] {
                    let tol = 5e-9 * x.abs().max(1e-12);
                    assert!((x - y).abs() <= tol, "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn csv_header_is_exact_and_empty_export_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        export_scores(&[], ExportFormat::Csv, &path).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            body,
            "pair_id,sd_max,sd_mean,sd_p99,l1,l2,ssim,width,height,config_digest\n"
        );
    }

    #[test]
    fn jsonl_line_count_matches() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("n.jsonl");
        let scores: Vec<PairScore> = (0..7).map(|i| score(&format!("p{i}"), i as f64)).collect();
        export_scores(&scores, ExportFormat::Jsonl, &path).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert_eq!(body.lines().count(), 7);
    }

    #[test]
    fn csv_rejects_commas_in_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let bad = vec![score("a,b", 1.0)];
        assert!(export_scores(&bad, ExportFormat::Csv, &path).is_err());
    }

    #[test]
    fn import_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "nope,really\n1,2\n").unwrap();
        assert!(matches!(
            import_scores(&path),
            Err(Error::Parse { .. })
        ));
    }
}
