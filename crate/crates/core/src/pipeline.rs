//! End-to-end detection: phase-one stack, then pop, describe and register
//! until `k` distinct events are stored or the stack runs out, then merge
//! duplicates and sort.

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::SliceIndex;
use crate::dedup::{self, DuplicateRule, Graphs, Registration};
use crate::description::{self, Event};
use crate::detection::{self, Signal};
use crate::error::{Error, Result};

/// Environment variable consulted for the default worker count.
pub const THREADS_ENV: &str = "MABED_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Bursts measured on mention-bearing tweets.
    #[default]
    Mabed,
    /// Bursts measured on all tweets, mentions ignored.
    Alpha,
}

impl Variant {
    pub fn signal(self) -> Signal {
        match self {
            Variant::Mabed => Signal::Mentions,
            Variant::Alpha => Signal::Occurrences,
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mabed" => Ok(Variant::Mabed),
            "alpha" | "alpha-mabed" => Ok(Variant::Alpha),
            other => Err(Error::InvalidParams(format!("unknown variant `{other}`"))),
        }
    }
}

impl FromStr for DuplicateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "disjunction" | "or" => Ok(DuplicateRule::Disjunction),
            "conjunction" | "and" => Ok(DuplicateRule::Conjunction),
            other => Err(Error::InvalidParams(format!("unknown duplicate rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Number of distinct events to collect.
    pub k: usize,
    /// Maximum number of related words per event.
    pub p: usize,
    /// Minimum weight of a related word.
    pub theta: f64,
    /// Minimum interval overlap for two events to be duplicates.
    pub sigma: f64,
    /// Slice length in minutes.
    pub slice_minutes: u32,
    pub variant: Variant,
    /// Phase-one workers.
    pub threads: usize,
    pub duplicate_rule: DuplicateRule,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            k: 40,
            p: 10,
            theta: 0.7,
            sigma: 0.5,
            slice_minutes: 30,
            variant: Variant::Mabed,
            threads: 1,
            duplicate_rule: DuplicateRule::Disjunction,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidParams(m));
        if self.k == 0 {
            return fail("k must be positive".into());
        }
        if self.p == 0 {
            return fail("p must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return fail(format!("theta must lie in [0, 1], got {}", self.theta));
        }
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return fail(format!("sigma must lie in (0, 1], got {}", self.sigma));
        }
        if self.slice_minutes == 0 {
            return fail("slice length must be positive".into());
        }
        if self.threads == 0 {
            return fail("threads must be positive".into());
        }
        Ok(())
    }

    pub fn slice_seconds(&self) -> i64 {
        i64::from(self.slice_minutes) * 60
    }

    /// Worker count from [`THREADS_ENV`], if set to a positive integer.
    pub fn threads_from_env() -> Option<usize> {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&t| t > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub tweets: u64,
    pub slices: usize,
    pub slice_seconds: i64,
    pub start: i64,
    pub vocabulary: usize,
    pub mention_vocabulary: usize,
}

impl CorpusStats {
    pub fn of(index: &SliceIndex) -> Self {
        CorpusStats {
            tweets: index.total_tweets(),
            slices: index.n(),
            slice_seconds: index.slice_length(),
            start: index.start(),
            vocabulary: index.vocabulary_len(),
            mention_vocabulary: index.mention_vocabulary().count(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub detection_secs: f64,
    pub description_secs: f64,
    pub merge_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub params: Params,
    pub corpus: CorpusStats,
    /// Size of the phase-one stack.
    pub candidates: usize,
    /// Events popped from the stack.
    pub processed: usize,
    pub duplicates: usize,
    pub timings: Timings,
}

/// Ranked events of one run, most impactful first.
#[derive(Debug, Clone, PartialEq)]
pub struct EventList {
    pub events: Vec<Event>,
    pub meta: RunMeta,
}

/// Runs the detector with `params.variant`.
pub fn run(index: &SliceIndex, params: &Params) -> Result<EventList> {
    run_phases(index, params).map(|(list, _)| list)
}

/// Like [`run`], also returning the event and redundancy graphs as they
/// stood before merging.
pub fn run_phases(index: &SliceIndex, params: &Params) -> Result<(EventList, Graphs)> {
    params.validate()?;
    let signal = params.variant.signal();

    let started = Instant::now();
    let stack = detection::detect_all(index, signal, params.threads);
    let detection_secs = started.elapsed().as_secs_f64();
    if stack.is_empty() {
        log::warn!("no word shows a positive anomaly; nothing to report");
    }

    let started = Instant::now();
    let mut graphs = Graphs::default();
    let mut processed = 0;
    let mut duplicates = 0;
    for raw in &stack {
        if graphs.distinct_count() >= params.k {
            break;
        }
        processed += 1;
        let event = description::describe(index, raw, params.p, params.theta)?;
        if let Registration::Deduplicated { .. } =
            dedup::register(&mut graphs, event, params.sigma, params.duplicate_rule)
        {
            duplicates += 1;
        }
    }
    let description_secs = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let mut events = dedup::merge_all(&graphs, params.p)?;
    events.sort_by(|a, b| {
        b.magnitude
            .total_cmp(&a.magnitude)
            .then_with(|| a.main_words.cmp(&b.main_words))
    });
    let merge_secs = started.elapsed().as_secs_f64();

    let list = EventList {
        events,
        meta: RunMeta {
            params: params.clone(),
            corpus: CorpusStats::of(index),
            candidates: stack.len(),
            processed,
            duplicates,
            timings: Timings {
                detection_secs,
                description_secs,
                merge_secs,
            },
        },
    };
    Ok((list, graphs))
}

/// Runs the mention-blind variant regardless of `params.variant`.
pub fn run_alpha(index: &SliceIndex, params: &Params) -> Result<EventList> {
    let params = Params {
        variant: Variant::Alpha,
        ..params.clone()
    };
    run(index, &params)
}
