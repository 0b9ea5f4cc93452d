//! Trending Score n-gram baseline.
//!
//! Each window's n-gram frequencies are normalized by the window's total
//! n-gram count; an n-gram scores high in a window when that normalized
//! frequency is large compared with its mean over the other windows:
//!
//! ```text
//! TS(g, i) = tf(g, i) / (mean_{j != i} tf(g, j) + 1e-9)
//! ```

use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use crate::corpus::{SliceIndex, WordId};
use crate::error::{Error, Result};

pub const EPSILON: f64 = 1e-9;

/// Scores every n-gram present in every window. Output windows keep input
/// order; within a window scores are sorted descending, ties by key.
pub fn score_windows<K>(windows: &[HashMap<K, u32>]) -> Result<Vec<Vec<(K, f64)>>>
where
    K: Clone + Eq + Hash + Ord,
{
    if windows.len() < 2 {
        return Err(Error::TooFewWindows(windows.len()));
    }
    let others = (windows.len() - 1) as f64;
    let totals: Vec<f64> = windows
        .iter()
        .map(|w| w.values().map(|&c| f64::from(c)).sum())
        .collect();

    // normalized frequency of each key in the windows where it occurs
    let mut presence: HashMap<&K, Vec<(usize, f64)>> = HashMap::new();
    for (i, window) in windows.iter().enumerate() {
        for (key, &count) in window {
            if count > 0 {
                presence
                    .entry(key)
                    .or_default()
                    .push((i, f64::from(count) / totals[i]));
            }
        }
    }

    let mut scored: Vec<Vec<(K, f64)>> = vec![Vec::new(); windows.len()];
    for (key, occurrences) in &presence {
        for &(i, tf) in occurrences {
            let rest: f64 = occurrences
                .iter()
                .filter(|&&(j, _)| j != i)
                .map(|&(_, other)| other)
                .sum();
            scored[i].push(((*key).clone(), tf / (rest / others + EPSILON)));
        }
    }
    for window in &mut scored {
        window.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    }
    Ok(scored)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredNgram {
    pub ngram: String,
    pub count: u32,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRanking {
    /// 1-based window (slice) number.
    pub window: usize,
    pub start: i64,
    pub ngrams: Vec<ScoredNgram>,
}

/// Counts of word n-grams per slice of `index`, taken from each tweet's
/// token sequence.
pub fn ngram_counts(index: &SliceIndex, n: usize) -> Vec<HashMap<Vec<WordId>, u32>> {
    (1..=index.n())
        .map(|slice| {
            let mut counts: HashMap<Vec<WordId>, u32> = HashMap::new();
            for tweet in index.slice_tweets(slice) {
                for gram in tweet.sequence.windows(n) {
                    *counts.entry(gram.to_vec()).or_default() += 1;
                }
            }
            counts
        })
        .collect()
}

/// Top `top_k` n-grams of every slice of `index` by Trending Score. The
/// index's slices are the windows, so build it with one-day slices to match
/// the usual setting.
pub fn trending_score(index: &SliceIndex, n: usize, top_k: usize) -> Result<Vec<WindowRanking>> {
    if n == 0 {
        return Err(Error::InvalidParams("n-gram length must be positive".into()));
    }
    let counts = ngram_counts(index, n);
    let scored = score_windows(&counts)?;
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, window)| WindowRanking {
            window: i + 1,
            start: index.slice_start(i + 1),
            ngrams: window
                .into_iter()
                .take(top_k)
                .map(|(gram, score)| ScoredNgram {
                    count: counts[i][&gram],
                    ngram: gram
                        .iter()
                        .map(|&w| index.word(w))
                        .collect::<Vec<_>>()
                        .join(" "),
                    score,
                })
                .collect(),
        })
        .collect())
}
