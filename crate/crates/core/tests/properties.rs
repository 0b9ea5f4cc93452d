use std::collections::HashMap;

use proptest::prelude::*;

use mabed::baselines::score_windows;
use mabed::dedup::overlap_coefficient;
use mabed::description::{erdem_correlation, weight};
use mabed::detection::{anomaly_series, max_magnitude_interval, Signal};
use mabed::eval::{compute_metrics, Annotation, AnnotationSet};
use mabed::testkit::{brute_force_mcss, reference_lag_correlation};
use mabed::{Interval, SliceIndex, StopWords, Tweet};

/// Multiples of 1/16, so every partial sum is exact in f64.
fn dyadic() -> impl Strategy<Value = f64> {
    prop_oneof![
        1 => Just(0.0),
        6 => (-160i32..=160).prop_map(|v| f64::from(v) / 16.0),
    ]
}

fn series(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(dyadic(), 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn kadane_matches_exhaustive_scan(xs in series(200)) {
        let fast = max_magnitude_interval(&xs).unwrap();
        let (interval, sum) = brute_force_mcss(&xs).unwrap();
        prop_assert_eq!(fast.interval, interval);
        prop_assert_eq!(fast.magnitude, sum);
    }
}

proptest! {
    #[test]
    fn best_interval_has_positive_suffixes(xs in series(60)) {
        let best = max_magnitude_interval(&xs).unwrap();
        prop_assume!(best.is_event());
        let window = &xs[best.interval.positions()];
        for cut in 1..window.len() {
            let prefix: f64 = window[..cut].iter().sum();
            let suffix: f64 = window[cut..].iter().sum();
            // the earliest start keeps zero-sum lead-ins
            prop_assert!(prefix >= 0.0);
            prop_assert!(suffix > 0.0);
        }
    }

    #[test]
    fn best_interval_strict_on_continuous_values(
        xs in prop::collection::vec(-10.0f64..10.0, 1..60)
    ) {
        let best = max_magnitude_interval(&xs).unwrap();
        prop_assume!(best.is_event());
        let window = &xs[best.interval.positions()];
        for cut in 1..window.len() {
            prop_assert!(window[..cut].iter().sum::<f64>() > 0.0);
            prop_assert!(window[cut..].iter().sum::<f64>() > 0.0);
        }
    }

    #[test]
    fn correlation_bounded_and_symmetric(
        pair in (3usize..40).prop_flat_map(|n| (
            prop::collection::vec(-50.0f64..50.0, n),
            prop::collection::vec(-50.0f64..50.0, n),
        ))
    ) {
        let (x, y) = pair;
        let rho = erdem_correlation(&x, &y).unwrap();
        prop_assert!(rho.abs() <= 1.0 + 1e-9);
        prop_assert!((rho - erdem_correlation(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!((rho - reference_lag_correlation(&x, &y)).abs() < 1e-9);
        let w = weight(rho).unwrap();
        prop_assert!((0.0..=1.0).contains(&w));
    }

    #[test]
    fn correlation_ignores_scale_and_shift(
        x in prop::collection::vec(-50.0f64..50.0, 3..30),
        noise in prop::collection::vec(-5.0f64..5.0, 30),
        scale in 0.1f64..100.0,
        shift in -1000.0f64..1000.0,
    ) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(a, e)| a + e).collect();
        let scaled: Vec<f64> = x.iter().map(|a| scale * a + shift).collect();
        let rho = erdem_correlation(&x, &y).unwrap();
        let rho_scaled = erdem_correlation(&scaled, &y).unwrap();
        prop_assert!((rho - rho_scaled).abs() < 1e-6);
    }

    #[test]
    fn overlap_is_symmetric_and_bounded(
        a in (1usize..50, 0usize..20), b in (1usize..50, 0usize..20)
    ) {
        let i = Interval::new(a.0, a.0 + a.1);
        let j = Interval::new(b.0, b.0 + b.1);
        let o = overlap_coefficient(&i, &j);
        prop_assert_eq!(o, overlap_coefficient(&j, &i));
        prop_assert!((0.0..=1.0).contains(&o));
        if i.start >= j.start && i.end <= j.end {
            prop_assert_eq!(o, 1.0);
        }
        if i.end < j.start || j.end < i.start {
            prop_assert_eq!(o, 0.0);
        }
    }

    #[test]
    fn trending_score_ignores_window_volume(
        windows in prop::collection::vec(
            prop::collection::hash_map(0u8..12, 1u32..50, 1..8), 2..6),
        which in 0usize..6,
        factor in 2u32..20,
    ) {
        let which = which % windows.len();
        let mut scaled: Vec<HashMap<u8, u32>> = windows.clone();
        for count in scaled[which].values_mut() {
            *count *= factor;
        }
        let before = score_windows(&windows).unwrap();
        let after = score_windows(&scaled).unwrap();
        for (w0, w1) in before.iter().zip(&after) {
            let w1: HashMap<u8, f64> = w1.iter().copied().collect();
            for (key, score) in w0 {
                let other = w1[key];
                prop_assert!((score - other).abs() <= 1e-9 * score.abs().max(1.0));
            }
        }
    }

    #[test]
    fn metrics_ignore_annotation_order(
        rows in prop::collection::vec((0u8..2, 0u8..2, any::<bool>(), any::<prop::sample::Index>()), 1..40)
            .prop_map(annotations)
            .prop_shuffle()
    ) {
        let mut sorted = rows.clone();
        sorted.sort_by_key(|a| a.event_rank);
        let shuffled = compute_metrics(&AnnotationSet::new(rows).unwrap());
        let ordered = compute_metrics(&AnnotationSet::new(sorted).unwrap());
        prop_assert_eq!(shuffled, ordered);
        prop_assert!(shuffled.k_doubleprime <= shuffled.k_prime);
        prop_assert!(shuffled.recall <= shuffled.precision);
    }

    #[test]
    fn anomalies_sum_to_zero(
        tweets in prop::collection::vec(
            (0i64..20_000, prop::collection::vec(0usize..15, 1..5), any::<bool>()), 2..120)
    ) {
        let stop = StopWords::default();
        let mut tweets: Vec<Tweet> = tweets
            .into_iter()
            .map(|(ts, words, mention)| {
                let mut text: Vec<String> = words.iter().map(|w| format!("word{w}")).collect();
                if mention {
                    text.push("@someone".into());
                }
                Tweet::new(ts, text.join(" "), &stop)
            })
            .collect();
        tweets.push(Tweet::new(0, "anchor", &stop));
        tweets.push(Tweet::new(20_000, "anchor", &stop));
        let index = SliceIndex::build(&tweets, 1800, 0).unwrap();
        for signal in [Signal::Mentions, Signal::Occurrences] {
            for word in index.words() {
                let total: f64 = anomaly_series(&index, word, signal).iter().sum();
                prop_assert!(total.abs() < 1e-9, "{} {total}", index.word(word));
            }
        }
    }
}

/// Turns random draws into a valid annotation set: a row may repeat an
/// earlier significant row only when it is itself significant.
fn annotations(draws: Vec<(u8, u8, bool, prop::sample::Index)>) -> Vec<Annotation> {
    let mut rows: Vec<Annotation> = Vec::new();
    for (i, (j1, j2, dup, pick)) in draws.into_iter().enumerate() {
        let significant = j1 == 1 && j2 == 1;
        let duplicate_of = (dup && significant && i > 0).then(|| pick.index(i) + 1);
        rows.push(Annotation {
            event_rank: i + 1,
            judge1: j1,
            judge2: j2,
            duplicate_of,
        });
    }
    rows
}
