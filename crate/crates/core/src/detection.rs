//! Phase one: mention anomaly per word and slice, and the interval of
//! maximal magnitude for every word.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{SliceIndex, WordId};
use crate::error::{Error, Result};
use crate::interval::Interval;

/// Which per-slice frequency drives phase one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signal {
    /// Tweets containing the word and at least one mention (`N_@t^i`).
    #[default]
    Mentions,
    /// All tweets containing the word (`N_t^i`), ignoring mentions.
    Occurrences,
}

/// A word's burst before its description is known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawEvent {
    pub word: WordId,
    pub interval: Interval,
    pub magnitude: f64,
}

/// Expected count in a slice of `slice_total` tweets for a word seen
/// `word_total` times among `corpus_total` tweets.
#[inline]
pub fn expected(slice_total: u32, word_total: u32, corpus_total: u64) -> f64 {
    f64::from(slice_total) * f64::from(word_total) / corpus_total as f64
}

fn check_slice(index: &SliceIndex, word: WordId, slice: usize) -> Result<()> {
    if word.index() >= index.vocabulary_len() {
        return Err(Error::UnknownWord(format!("#{}", word.0)));
    }
    if slice == 0 || slice > index.n() {
        return Err(Error::InvalidInterval {
            start: slice,
            end: slice,
            slices: index.n(),
        });
    }
    Ok(())
}

/// `E[t|i] = N^i * N_@t / N` for 1-based `slice`.
pub fn expected_count(index: &SliceIndex, word: WordId, slice: usize) -> Result<f64> {
    check_slice(index, word, slice)?;
    Ok(expected(
        index.slice_counts()[slice - 1],
        index.mention_total(word),
        index.total_tweets(),
    ))
}

/// `N_@t^i - E[t|i]` for 1-based `slice`.
pub fn anomaly(index: &SliceIndex, word: WordId, slice: usize) -> Result<f64> {
    let expectation = expected_count(index, word, slice)?;
    Ok(f64::from(index.mention_series(word)[slice - 1]) - expectation)
}

/// Anomaly of `word` in every slice under the given signal.
pub fn anomaly_series(index: &SliceIndex, word: WordId, signal: Signal) -> Vec<f64> {
    let (observed, total) = match signal {
        Signal::Mentions => (index.mention_series(word), index.mention_total(word)),
        Signal::Occurrences => (index.word_series(word), index.word_total(word)),
    };
    let corpus = index.total_tweets();
    observed
        .iter()
        .zip(index.slice_counts())
        .map(|(&obs, &n_i)| f64::from(obs) - expected(n_i, total, corpus))
        .collect()
}

/// Best contiguous interval of an anomaly series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxInterval {
    pub interval: Interval,
    pub magnitude: f64,
}

impl MaxInterval {
    /// Only strictly positive magnitudes make an event.
    pub fn is_event(&self) -> bool {
        self.magnitude > 0.0
    }
}

/// Maximum contiguous subsequence sum in one pass and constant space.
///
/// Among maximal intervals the earliest start wins, then the shortest. The
/// result is returned even when the best sum is not positive; callers check
/// [`MaxInterval::is_event`].
pub fn max_magnitude_interval(series: &[f64]) -> Result<MaxInterval> {
    let (&first, rest) = series.split_first().ok_or(Error::EmptySeries)?;
    let mut best = MaxInterval {
        interval: Interval::new(1, 1),
        magnitude: first,
    };
    let mut run_start = 1;
    let mut run_sum = first;

    for (offset, &x) in rest.iter().enumerate() {
        let slice = offset + 2;
        // A run summing to exactly zero is kept so the start stays earliest.
        if run_sum >= 0.0 {
            run_sum += x;
        } else {
            run_start = slice;
            run_sum = x;
        }
        let better = match run_sum.total_cmp(&best.magnitude) {
            Ordering::Greater => true,
            Ordering::Equal => run_start < best.interval.start,
            Ordering::Less => false,
        };
        if better {
            best = MaxInterval {
                interval: Interval::new(run_start, slice),
                magnitude: run_sum,
            };
        }
    }
    Ok(best)
}

/// Orders events by descending magnitude, then by word.
pub fn stack_order(a: &RawEvent, b: &RawEvent) -> Ordering {
    b.magnitude
        .total_cmp(&a.magnitude)
        .then_with(|| a.word.cmp(&b.word))
}

fn detect_word(index: &SliceIndex, word: WordId, signal: Signal) -> Option<RawEvent> {
    let series = anomaly_series(index, word, signal);
    if series.iter().all(|&a| a == 0.0) {
        return None;
    }
    let best = max_magnitude_interval(&series).ok()?;
    best.is_event().then_some(RawEvent {
        word,
        interval: best.interval,
        magnitude: best.magnitude,
    })
}

/// Runs phase one over the whole candidate vocabulary: `V_@` for
/// [`Signal::Mentions`], `V` for [`Signal::Occurrences`].
///
/// The returned stack is sorted by [`stack_order`], most impactful first.
/// `threads > 1` fans the words out over a dedicated pool; the result does
/// not depend on the thread count.
pub fn detect_all(index: &SliceIndex, signal: Signal, threads: usize) -> Vec<RawEvent> {
    let words: Vec<WordId> = match signal {
        Signal::Mentions => index.mention_vocabulary().collect(),
        Signal::Occurrences => index.words().collect(),
    };

    let mut stack: Vec<RawEvent> = if threads > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| {
                words
                    .par_iter()
                    .filter_map(|&w| detect_word(index, w, signal))
                    .collect()
            }),
            Err(e) => {
                log::warn!("falling back to one thread: {e}");
                words
                    .iter()
                    .filter_map(|&w| detect_word(index, w, signal))
                    .collect()
            }
        }
    } else {
        words
            .iter()
            .filter_map(|&w| detect_word(index, w, signal))
            .collect()
    };
    stack.sort_by(stack_order);
    stack
}
