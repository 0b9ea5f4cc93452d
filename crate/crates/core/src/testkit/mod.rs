//! Synthetic corpora with known answers, plus slow reference
//! implementations used to cross-check the fast ones.

mod synth;

pub use synth::{
    burst_profile, generate, permute_texts, Background, CorpusStats, GroundTruth, PlantedEvent,
    PlantedRecord, SyntheticCorpus, SyntheticSpec, SyntheticTweet,
};

use serde::Serialize;

use crate::description::Event;
use crate::interval::Interval;

/// Exhaustive maximum contiguous sum over all `O(n^2)` intervals, with the
/// earliest start and then the shortest length winning ties. `None` for an
/// empty series.
pub fn brute_force_mcss(series: &[f64]) -> Option<(Interval, f64)> {
    let mut best: Option<(Interval, f64)> = None;
    for a in 0..series.len() {
        let mut sum = 0.0;
        for (b, &x) in series.iter().enumerate().skip(a) {
            sum += x;
            // strict: later starts and longer intervals lose ties
            if best.is_none_or(|(_, s)| sum > s) {
                best = Some((Interval::new(a + 1, b + 1), sum));
            }
        }
    }
    best
}

/// Independent evaluation of the lag correlation straight from its
/// definition, as the cosine between the two first-difference vectors.
pub fn reference_lag_correlation(x: &[f64], y: &[f64]) -> f64 {
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let dot: f64 = dx.iter().zip(&dy).map(|(a, b)| a * b).sum();
    let nx = dx.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny = dy.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        dot / (nx * ny)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub planted: usize,
    pub detected: usize,
    /// Planted events matched by some detected event.
    pub recovered: usize,
    /// Detected events matching some planted event.
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub missed: Vec<String>,
}

fn matches(detected: &Event, planted: &PlantedEvent, slack: usize) -> bool {
    detected.main_words.contains(&planted.main_word)
        && detected.interval.start.abs_diff(planted.start_slice) <= slack
        && detected.interval.end.abs_diff(planted.end_slice) <= slack
}

/// Compares detected events against planted ones. A planted event counts as
/// recovered when some detected event has it among its main words and both
/// interval endpoints are within `slack` slices.
pub fn score_recovery(detected: &[Event], planted: &[PlantedEvent], slack: usize) -> RecoveryReport {
    let missed: Vec<String> = planted
        .iter()
        .filter(|p| !detected.iter().any(|d| matches(d, p, slack)))
        .map(|p| p.main_word.clone())
        .collect();
    let recovered = planted.len() - missed.len();
    let matched = detected
        .iter()
        .filter(|d| planted.iter().any(|p| matches(d, p, slack)))
        .count();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(matched, detected.len());
    let recall = ratio(recovered, planted.len());
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    RecoveryReport {
        planted: planted.len(),
        detected: detected.len(),
        recovered,
        matched,
        precision,
        recall,
        f1,
        missed,
    }
}
