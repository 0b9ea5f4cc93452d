//! Detection of impactful events in timestamped short-text streams from
//! anomalies in the rate at which words appear alongside user mentions.
//!
//! The pipeline has two phases. [`detection`] scores every word's
//! mention anomaly per time slice and finds the interval of maximal
//! magnitude. [`pipeline`] then walks those candidates by decreasing
//! magnitude, describes each with correlated co-occurring words
//! ([`description`]), and stores or merges it ([`dedup`]) until `k`
//! distinct events are collected.
//!
//! ```no_run
//! use std::path::Path;
//! use mabed::corpus::{load_corpus, LoadOptions};
//! use mabed::pipeline::{run, Params};
//!
//! let (index, _) = load_corpus(Path::new("tweets.csv"), &LoadOptions::default())?;
//! let events = run(&index, &Params::default())?;
//! for e in &events.events {
//!     println!("{} {} {:.1}", e.main_words.join(" "), e.interval, e.magnitude);
//! }
//! # Ok::<(), mabed::Error>(())
//! ```

pub mod baselines;
pub mod corpus;
pub mod dedup;
pub mod description;
pub mod detection;
mod error;
pub mod eval;
pub mod export;
mod interval;
pub mod pipeline;
pub mod testkit;

pub use corpus::{SliceIndex, StopWords, Tweet, WordId};
pub use description::{Event, RelatedWord};
pub use detection::{RawEvent, Signal};
pub use error::{Error, Result};
pub use interval::Interval;
pub use pipeline::{EventList, Params, Variant};
