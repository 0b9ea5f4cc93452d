//! Phase two, first half: picking and weighting the words that describe an
//! event.
//!
//! Candidates are the `p` words co-occurring most often with the main word
//! during the event interval. Each one is weighted by the lag correlation of
//! its frequency series with the main word's, computed on first differences
//! so no stationarity assumption is needed, and kept when the weight reaches
//! `theta`.

use serde::{Deserialize, Serialize};

use crate::corpus::{SliceIndex, WordId};
use crate::detection::RawEvent;
use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelatedWord {
    pub word: String,
    pub weight: f64,
}

/// A fully described event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// One word until duplicates are merged.
    pub main_words: Vec<String>,
    /// Sorted by descending weight.
    pub related: Vec<RelatedWord>,
    pub interval: Interval,
    pub magnitude: f64,
}

impl Event {
    pub fn main_word(&self) -> &str {
        &self.main_words[0]
    }

    pub fn has_related(&self, word: &str) -> bool {
        self.related.iter().any(|r| r.word == word)
    }
}

/// Up to `p` words ranked by co-occurrence with the event's main word over
/// its interval. Ties go to the lexicographically smaller word.
pub fn candidate_words(index: &SliceIndex, raw: &RawEvent, p: usize) -> Result<Vec<WordId>> {
    let counts = index.cooccurrence_counts(raw.word, raw.interval)?;
    let mut ranked: Vec<(WordId, u32)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(p);
    Ok(ranked.into_iter().map(|(w, _)| w).collect())
}

/// Lag correlation of two count series covering the same interval `[a;b]`.
///
/// With `dx`, `dy` the first differences, the coefficient is
/// `sum(dx*dy) / ((b-a-1) * A_x * A_y)` where `A_x^2 = sum(dx^2) / (b-a-1)`.
/// A constant series yields 0. Fewer than two differences is an error.
pub fn erdem_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let differences = x.len().saturating_sub(1);
    if differences < 2 {
        return Err(Error::IntervalTooShort { differences });
    }
    let scale = (differences - 1) as f64;
    let (mut cross, mut sq_x, mut sq_y) = (0.0, 0.0, 0.0);
    for i in 1..x.len() {
        let dx = x[i] - x[i - 1];
        let dy = y[i] - y[i - 1];
        cross += dx * dy;
        sq_x += dx * dx;
        sq_y += dy * dy;
    }
    let a_x = (sq_x / scale).sqrt();
    let a_y = (sq_y / scale).sqrt();
    if a_x == 0.0 || a_y == 0.0 {
        return Ok(0.0);
    }
    Ok((cross / (scale * a_x * a_y)).clamp(-1.0, 1.0))
}

/// Maps a correlation in `[-1, 1]` to a weight in `[0, 1]`.
pub fn weight(rho: f64) -> Result<f64> {
    if rho.is_nan() || rho.abs() > 1.0 + 1e-9 {
        return Err(Error::CorrelationOutOfRange(rho));
    }
    Ok(((rho + 1.0) / 2.0).clamp(0.0, 1.0))
}

fn series_over(index: &SliceIndex, word: WordId, interval: Interval) -> Vec<f64> {
    index.word_series(word)[interval.positions()]
        .iter()
        .map(|&c| f64::from(c))
        .collect()
}

/// Selects and weights the related words of a phase-one event.
///
/// Intervals too short for the correlation keep every candidate with
/// weight `theta`.
pub fn describe(index: &SliceIndex, raw: &RawEvent, p: usize, theta: f64) -> Result<Event> {
    let candidates = candidate_words(index, raw, p)?;
    let mut scored: Vec<(WordId, f64)> = if raw.interval.len() < 3 {
        candidates.into_iter().map(|w| (w, theta)).collect()
    } else {
        let main_series = series_over(index, raw.word, raw.interval);
        let mut scored = Vec::with_capacity(candidates.len());
        for w in candidates {
            let rho = erdem_correlation(&main_series, &series_over(index, w, raw.interval))?;
            let w_q = weight(rho)?;
            if w_q >= theta {
                scored.push((w, w_q));
            }
        }
        scored
    };
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    Ok(Event {
        main_words: vec![index.word(raw.word).to_string()],
        related: scored
            .into_iter()
            .map(|(w, weight)| RelatedWord {
                word: index.word(w).to_string(),
                weight,
            })
            .collect(),
        interval: raw.interval,
        magnitude: raw.magnitude,
    })
}
