//! Precision, recall, F-measure and duplicate rate from human annotations.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two judges' ratings of one detected event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub event_rank: usize,
    pub judge1: u8,
    pub judge2: u8,
    /// Rank of an earlier event this one repeats.
    #[serde(default)]
    pub duplicate_of: Option<usize>,
}

impl Annotation {
    pub fn significant(&self) -> bool {
        self.judge1 == 1 && self.judge2 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet(Vec<Annotation>);

impl AnnotationSet {
    pub fn new(annotations: Vec<Annotation>) -> Result<Self> {
        let mut by_rank = HashMap::new();
        for a in &annotations {
            if a.judge1 > 1 || a.judge2 > 1 {
                return Err(Error::Annotation(format!(
                    "event {}: ratings must be 0 or 1",
                    a.event_rank
                )));
            }
            if by_rank.insert(a.event_rank, *a).is_some() {
                return Err(Error::Annotation(format!("event {} rated twice", a.event_rank)));
            }
        }
        for a in &annotations {
            let Some(original) = a.duplicate_of else { continue };
            if !a.significant() {
                return Err(Error::Annotation(format!(
                    "event {} is marked duplicate but not rated 1 by both judges",
                    a.event_rank
                )));
            }
            if original >= a.event_rank || !by_rank.contains_key(&original) {
                return Err(Error::Annotation(format!(
                    "event {} duplicates {original}, which is not an earlier annotated event",
                    a.event_rank
                )));
            }
        }
        Ok(AnnotationSet(annotations))
    }

    /// Reads a CSV with columns `event_rank,judge1,judge2,duplicate_of`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Format {
                path: path.into(),
                message: format!("{other:?}"),
            },
        })?;
        let mut rows = Vec::new();
        for row in reader.deserialize() {
            let row: Annotation = row.map_err(|e| Error::Format {
                path: path.into(),
                message: e.to_string(),
            })?;
            rows.push(row);
        }
        AnnotationSet::new(rows)
    }

    pub fn as_slice(&self) -> &[Annotation] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub k: usize,
    pub k_prime: usize,
    pub k_doubleprime: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub derate: f64,
}

impl MetricReport {
    /// `k` detected events, `k_prime` rated significant by both judges,
    /// `k_doubleprime` of those being duplicates.
    pub fn from_counts(k: usize, k_prime: usize, k_doubleprime: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(k_prime, k);
        let recall = ratio(k_prime.saturating_sub(k_doubleprime), k);
        let f_measure = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        MetricReport {
            k,
            k_prime,
            k_doubleprime,
            precision,
            recall,
            f_measure,
            derate: ratio(k_doubleprime, k_prime),
        }
    }
}

pub fn compute_metrics(annotations: &AnnotationSet) -> MetricReport {
    let rows = annotations.as_slice();
    let k_prime = rows.iter().filter(|a| a.significant()).count();
    let k_doubleprime = rows.iter().filter(|a| a.duplicate_of.is_some()).count();
    MetricReport::from_counts(rows.len(), k_prime, k_doubleprime)
}
