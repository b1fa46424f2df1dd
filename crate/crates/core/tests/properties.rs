//! Property tests for the invariants the measure and its plumbing promise.

mod common;

use proptest::prelude::*;

use common::{naive_box_smooth, quantile_oracle};
use sdscreen::baselines::{l1_score, l2_score, ssim_score};
use sdscreen::filter::{box_smooth, sobel_magnitude};
use sdscreen::measure::{diff_mask, sd_map, SdConfig};
use sdscreen::pipeline::PairScore;
use sdscreen::raster::{GrayImage, Raster};
use sdscreen::report::{rank_outliers, summarize_distribution, ScoreField};

fn arb_gray(max_side: usize) -> impl Strategy<Value = GrayImage> {
    (3usize..=max_side, 3usize..=max_side)
        .prop_flat_map(|(w, h)| {
            proptest::collection::vec(0.0f64..=1.0, w * h)
                .prop_map(move |data| GrayImage::from_vec(w, h, data).unwrap())
        })
}

/// Gray image on the 1/1024 grid, leaving headroom for a shift.
fn arb_quantized_gray() -> impl Strategy<Value = GrayImage> {
    (3usize..=24, 3usize..=24)
        .prop_flat_map(|(w, h)| {
            proptest::collection::vec(256u32..=768, w * h).prop_map(move |quanta| {
                let data = quanta.into_iter().map(|q| q as f64 / 1024.0).collect();
                GrayImage::from_vec(w, h, data).unwrap()
            })
        })
}

fn arb_raster(max_side: usize) -> impl Strategy<Value = Raster> {
    (1usize..=max_side, 1usize..=max_side)
        .prop_flat_map(|(w, h)| {
            proptest::collection::vec(0.0f64..=4.0, w * h)
                .prop_map(move |data| Raster::from_vec(w, h, data).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sd_identity_is_zero(img in arb_gray(24)) {
        let map = sd_map(&img, &img, &SdConfig::default()).unwrap();
        prop_assert!(map.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sd_symmetric_and_nonnegative(
        a in arb_gray(20),
        seed in 0u64..1_000_000,
    ) {
        // Rebuild b at a's dimensions from the seed.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..a.width() * a.height())
            .map(|_| rng.gen_range(0.0..=1.0))
            .collect();
        let b = GrayImage::from_vec(a.width(), a.height(), data).unwrap();

        let cfg = SdConfig::default();
        let ab = sd_map(&a, &b, &cfg).unwrap();
        let ba = sd_map(&b, &a, &cfg).unwrap();
        for (&x, &y) in ab.data().iter().zip(ba.data()) {
            prop_assert!(x >= 0.0);
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn box_smooth_matches_naive_oracle(
        raster in arb_raster(20),
        kernel in 1usize..=48,
    ) {
        let fast = box_smooth(&raster, kernel).unwrap();
        let slow = naive_box_smooth(&raster, kernel);
        for (&x, &y) in fast.data().iter().zip(slow.data()) {
            prop_assert!((x - y).abs() <= 1e-6, "{x} vs {y} (k={kernel})");
        }
    }

    #[test]
    fn box_smooth_preserves_global_mean_in_interior(
        value in 0.0f64..=1.0,
        kernel in 1usize..=16,
    ) {
        // For a constant raster the mean survives everywhere, including
        // borders; this is the no-energy-created anchor for the filter.
        let raster = Raster::constant(40, 40, value);
        let smoothed = box_smooth(&raster, kernel).unwrap();
        for &v in smoothed.data() {
            prop_assert!((v - value).abs() < 1e-12);
        }
    }

    #[test]
    fn sobel_constant_offset_invariance(
        img in arb_quantized_gray(),
        offset_quanta in -255i32..=255,
    ) {
        // Values live on the 1/1024 grid in [0.25, 0.75] and the offset on
        // the same grid in (-0.25, 0.25), so the shifted image is exact and
        // the maps must be bit-identical.
        let offset = offset_quanta as f64 / 1024.0;
        let shifted: Vec<f64> = img.data().iter().map(|&v| v + offset).collect();
        let shifted = GrayImage::from_vec(img.width(), img.height(), shifted).unwrap();
        let before = sobel_magnitude(&img);
        let after = sobel_magnitude(&shifted);
        prop_assert_eq!(before.raster().data(), after.raster().data());
    }

    #[test]
    fn mask_monotone_under_pointwise_increase(
        img in arb_gray(16),
        delta1 in 0.0f64..0.2,
        delta2 in 0.0f64..0.2,
    ) {
        // Same structure, two difference magnitudes: the mask must not
        // decrease where |a - b| grew everywhere.
        let (lo, hi) = if delta1 <= delta2 { (delta1, delta2) } else { (delta2, delta1) };
        let scale = 0.6; // keep headroom
        let base: Vec<f64> = img.data().iter().map(|&v| v * scale).collect();
        let a = GrayImage::from_vec(img.width(), img.height(), base.clone()).unwrap();
        let near = GrayImage::from_vec(
            img.width(), img.height(),
            base.iter().map(|&v| v + lo).collect(),
        ).unwrap();
        let far = GrayImage::from_vec(
            img.width(), img.height(),
            base.iter().map(|&v| v + hi).collect(),
        ).unwrap();
        let mask_near = diff_mask(&a, &near, 0.1, 8).unwrap();
        let mask_far = diff_mask(&a, &far, 0.1, 8).unwrap();
        for (&n, &f) in mask_near.data().iter().zip(mask_far.data()) {
            prop_assert!(f >= n - 1e-12);
            prop_assert!((0.0..1.0).contains(&n));
        }
    }

    #[test]
    fn baselines_symmetric_and_bounded(
        a in arb_gray(16),
        seed in 0u64..1_000_000,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..a.width() * a.height())
            .map(|_| rng.gen_range(0.0..=1.0))
            .collect();
        let b = GrayImage::from_vec(a.width(), a.height(), data).unwrap();

        let l1 = l1_score(&a, &b).unwrap();
        let l2 = l2_score(&a, &b).unwrap();
        prop_assert!((l1 - l1_score(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!((l2 - l2_score(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&l1));
        prop_assert!((0.0..=1.0).contains(&l2));
        if a.width() >= 11 && a.height() >= 11 {
            let fwd = ssim_score(&a, &b).unwrap();
            let rev = ssim_score(&b, &a).unwrap();
            prop_assert!((fwd - rev).abs() <= 1e-12);
            prop_assert!(fwd <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn l1_l2_triangle_inequality(
        a in arb_gray(12),
        seed in 0u64..1_000_000,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut make = |_: ()| {
            let data: Vec<f64> = (0..a.width() * a.height())
                .map(|_| rng.gen_range(0.0..=1.0))
                .collect();
            GrayImage::from_vec(a.width(), a.height(), data).unwrap()
        };
        let b = make(());
        let c = make(());
        prop_assert!(
            l1_score(&a, &c).unwrap()
                <= l1_score(&a, &b).unwrap() + l1_score(&b, &c).unwrap() + 1e-12
        );
        prop_assert!(
            l2_score(&a, &c).unwrap()
                <= l2_score(&a, &b).unwrap() + l2_score(&b, &c).unwrap() + 1e-12
        );
    }

    #[test]
    fn quantiles_match_sort_oracle(
        values in proptest::collection::vec(-100.0f64..100.0, 1..200),
        q in 0.0f64..=1.0,
    ) {
        let scores: Vec<PairScore> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| PairScore {
                pair_id: format!("p{i:03}"),
                sd_max: v,
                sd_mean: 0.0,
                sd_p99: 0.0,
                l1: 0.0,
                l2: 0.0,
                ssim: 1.0,
                width: 8,
                height: 8,
                config_digest: "d".into(),
            })
            .collect();
        let summary = summarize_distribution(&scores, ScoreField::SdMax).unwrap();
        prop_assert_eq!(summary.q1, quantile_oracle(&values, 0.25));
        prop_assert_eq!(summary.median, quantile_oracle(&values, 0.5));
        prop_assert_eq!(summary.q3, quantile_oracle(&values, 0.75));
        // Every flagged outlier really lies outside the whiskers.
        for id in &summary.outlier_ids {
            let idx: usize = id[1..].parse().unwrap();
            let v = values[idx];
            prop_assert!(v < summary.whisker_low || v > summary.whisker_high);
        }
        let _ = q;
    }

    #[test]
    fn ranking_is_permutation_prefix(
        values in proptest::collection::vec(0.0f64..10.0, 0..50),
        top_k in 0usize..60,
    ) {
        let scores: Vec<PairScore> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| PairScore {
                pair_id: format!("p{i:03}"),
                sd_max: v,
                sd_mean: 0.0,
                sd_p99: 0.0,
                l1: 0.0,
                l2: 0.0,
                ssim: 1.0,
                width: 8,
                height: 8,
                config_digest: "d".into(),
            })
            .collect();
        let ranked = rank_outliers(&scores, ScoreField::SdMax, top_k);
        prop_assert_eq!(ranked.len(), top_k.min(values.len()));
        // Descending, ties by ascending id; ids drawn from the input set
        // without invention or duplication.
        let mut seen = std::collections::HashSet::new();
        for window in ranked.windows(2) {
            let (ref id0, v0) = window[0];
            let (ref id1, v1) = window[1];
            prop_assert!(v0 > v1 || (v0 == v1 && id0 < id1));
        }
        for (id, _) in &ranked {
            prop_assert!(seen.insert(id.clone()), "duplicate {id}");
            prop_assert!(scores.iter().any(|s| &s.pair_id == id));
        }
    }
}
