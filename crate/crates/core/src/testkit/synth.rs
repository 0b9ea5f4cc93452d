//! Seeded synthetic corpora with planted bursts.
//!
//! Background tweets arrive at a sinusoidally modulated daily rate and draw
//! their words uniformly from a generated vocabulary. Each planted event adds
//! extra tweets during its interval that carry the main word, each companion
//! with some probability, and a couple of background filler words. The
//! per-slice burst volume follows a bump shape so companion series correlate
//! with the main word's. Distractor words get the mirror image of that bump,
//! plus one tweet per slice shared with the main word so they show up as
//! co-occurring candidates.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{format_timestamp, parse_timestamp, tokenize, StopWords, Tweet};
use crate::error::{Error, Result};

fn default_start() -> String {
    "2009-11-01T00:00:00Z".into()
}

fn default_companion_probability() -> f64 {
    0.6
}

fn default_filler() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    /// Number of distinct background words.
    pub vocabulary: usize,
    /// Mean tweets per slice before diurnal modulation.
    pub tweets_per_slice: f64,
    /// Distinct background words per tweet.
    pub words_per_tweet: usize,
    pub mention_probability: f64,
    /// Relative amplitude of the daily cycle, in `[0, 1)`.
    #[serde(default)]
    pub diurnal_amplitude: f64,
}

impl Background {
    /// Expected per-slice tweet count of one background word.
    pub fn word_rate(&self) -> f64 {
        self.tweets_per_slice * self.words_per_tweet as f64 / self.vocabulary as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEvent {
    pub main_word: String,
    #[serde(default)]
    pub companions: Vec<String>,
    #[serde(default)]
    pub distractors: Vec<String>,
    /// First burst slice, 1-based.
    pub start_slice: usize,
    /// Last burst slice, inclusive.
    pub end_slice: usize,
    /// Peak burst tweets per slice as a multiple of
    /// [`Background::word_rate`].
    pub intensity: f64,
    pub mention_probability: f64,
    #[serde(default = "default_companion_probability")]
    pub companion_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start: String,
    pub slices: usize,
    pub slice_minutes: u32,
    pub background: Background,
    #[serde(default)]
    pub events: Vec<PlantedEvent>,
    /// Background words added to every burst tweet.
    #[serde(default = "default_filler")]
    pub filler_words: usize,
}

impl SyntheticSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn slice_seconds(&self) -> i64 {
        i64::from(self.slice_minutes) * 60
    }

    pub fn background_word(i: usize) -> String {
        format!("w{i:05}")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::SyntheticSpec(m));
        let bg = &self.background;
        if self.slices < 2 || self.slice_minutes == 0 {
            return fail("need at least two slices of positive length".into());
        }
        if parse_timestamp(&self.start).is_none() {
            return fail(format!("bad start time `{}`", self.start));
        }
        if bg.vocabulary == 0 || bg.words_per_tweet == 0 || bg.words_per_tweet > bg.vocabulary {
            return fail("background needs 1 <= words_per_tweet <= vocabulary".into());
        }
        if self.filler_words > bg.vocabulary {
            return fail("more filler words than background vocabulary".into());
        }
        if bg.tweets_per_slice.is_nan() || bg.tweets_per_slice < 0.0 {
            return fail("tweets_per_slice must be non-negative".into());
        }
        if !(0.0..1.0).contains(&bg.diurnal_amplitude) {
            return fail("diurnal_amplitude must lie in [0, 1)".into());
        }
        if !(0.0..=1.0).contains(&bg.mention_probability) {
            return fail("background mention_probability must lie in [0, 1]".into());
        }

        let mut planted = HashSet::new();
        let none = StopWords::default();
        for e in &self.events {
            if e.start_slice == 0 || e.start_slice > e.end_slice || e.end_slice > self.slices {
                return fail(format!(
                    "event `{}` interval [{};{}] outside [1;{}]",
                    e.main_word, e.start_slice, e.end_slice, self.slices
                ));
            }
            if e.intensity.is_nan() || e.intensity <= 0.0 {
                return fail(format!("event `{}` needs positive intensity", e.main_word));
            }
            for p in [e.mention_probability, e.companion_probability] {
                if !(0.0..=1.0).contains(&p) {
                    return fail(format!("event `{}` has a probability outside [0, 1]", e.main_word));
                }
            }
            let words = std::iter::once(&e.main_word)
                .chain(&e.companions)
                .chain(&e.distractors);
            for w in words {
                if tokenize(w, &none).sequence != [w.as_str()] {
                    return fail(format!("`{w}` does not tokenize to itself"));
                }
                if w.len() == 6 && w.starts_with('w') && w[1..].bytes().all(|b| b.is_ascii_digit()) {
                    return fail(format!("`{w}` collides with background words"));
                }
                if !planted.insert(w.clone()) {
                    return fail(format!("`{w}` is planted twice"));
                }
            }
        }
        Ok(())
    }
}

/// Burst volume profile over an interval of `len` slices; peaks at 1 in the
/// middle and stays above 0.6.
pub fn burst_profile(position: usize, len: usize) -> f64 {
    0.6 + 0.4 * (PI * (position as f64 + 0.5) / len as f64).sin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub tweets: usize,
    pub background_tweets: usize,
    pub event_tweets: usize,
    /// Share of tweets not generated by any planted event.
    pub noise_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedRecord {
    #[serde(flatten)]
    pub event: PlantedEvent,
    /// Tweets generated for this event, distractor tweets included.
    pub tweets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub slices: usize,
    pub slice_minutes: u32,
    pub start: String,
    pub events: Vec<PlantedRecord>,
    pub stats: CorpusStats,
}

impl GroundTruth {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticTweet {
    pub timestamp: i64,
    pub author: String,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// Sorted by timestamp.
    pub tweets: Vec<SyntheticTweet>,
    pub truth: GroundTruth,
}

impl SyntheticCorpus {
    pub fn to_tweets(&self, stopwords: &StopWords) -> Vec<Tweet> {
        self.tweets
            .iter()
            .map(|t| Tweet::new(t.timestamp, t.text.clone(), stopwords))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let mut writer = csv::Writer::from_writer(&mut out);
        let csv_err = |e: csv::Error| Error::Format {
            path: path.into(),
            message: e.to_string(),
        };
        writer.write_record(["time", "author", "text"]).map_err(csv_err)?;
        for t in &self.tweets {
            writer
                .write_record([format_timestamp(t.timestamp).as_str(), &t.author, &t.text])
                .map_err(csv_err)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        drop(writer);
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_truth(&self, path: &Path) -> Result<()> {
        crate::export::write_json(path, &self.truth)
    }
}

struct Generator<'a> {
    spec: &'a SyntheticSpec,
    rng: ChaCha8Rng,
    start: i64,
    tweets: Vec<SyntheticTweet>,
    users: u32,
}

impl Generator<'_> {
    fn poisson(&mut self, mean: f64) -> usize {
        if mean <= 0.0 {
            return 0;
        }
        Poisson::new(mean).map_or(0, |d| d.sample(&mut self.rng) as usize)
    }

    fn author(&mut self) -> String {
        format!("user{}", self.rng.gen_range(0..self.users))
    }

    fn background_words(&mut self, count: usize) -> Vec<String> {
        let vocabulary = self.spec.background.vocabulary;
        sample(&mut self.rng, vocabulary, count.min(vocabulary))
            .into_iter()
            .map(SyntheticSpec::background_word)
            .collect()
    }

    fn emit(&mut self, slice: usize, mut words: Vec<String>, mention_probability: f64) {
        if self.rng.gen_bool(mention_probability) {
            let target = format!("@user{}", self.rng.gen_range(0..self.users));
            let at = self.rng.gen_range(0..=words.len());
            words.insert(at, target);
        }
        let length = self.spec.slice_seconds();
        let timestamp = self.start + (slice as i64 - 1) * length + self.rng.gen_range(0..length);
        let author = self.author();
        self.tweets.push(SyntheticTweet {
            timestamp,
            author,
            text: words.join(" "),
        });
    }
}

/// Generates the corpus described by `spec`. Identical specs give identical
/// corpora.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let bg = &spec.background;
    let mut g = Generator {
        spec,
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        start: parse_timestamp(&spec.start).unwrap_or_default(),
        tweets: Vec::new(),
        users: 5000,
    };

    let slices_per_day = (24.0 * 60.0 / f64::from(spec.slice_minutes)).max(1.0);
    for slice in 1..=spec.slices {
        let phase = 2.0 * PI * (slice as f64 - 0.5) / slices_per_day;
        let mean = bg.tweets_per_slice * (1.0 + bg.diurnal_amplitude * phase.sin());
        for _ in 0..g.poisson(mean) {
            let words = g.background_words(bg.words_per_tweet);
            g.emit(slice, words, bg.mention_probability);
        }
    }
    let background_tweets = g.tweets.len();

    let mut records = Vec::with_capacity(spec.events.len());
    for event in &spec.events {
        let before = g.tweets.len();
        let len = event.end_slice - event.start_slice + 1;
        let peak = event.intensity * bg.word_rate();
        for (position, slice) in (event.start_slice..=event.end_slice).enumerate() {
            let shape = burst_profile(position, len);
            for _ in 0..g.poisson(peak * shape) {
                let mut words = vec![event.main_word.clone()];
                for companion in &event.companions {
                    if g.rng.gen_bool(event.companion_probability) {
                        words.push(companion.clone());
                    }
                }
                words.extend(g.background_words(spec.filler_words));
                g.emit(slice, words, event.mention_probability);
            }
            for distractor in &event.distractors {
                for _ in 0..g.poisson(peak * (1.6 - shape)) {
                    let mut words = vec![distractor.clone()];
                    words.extend(g.background_words(spec.filler_words));
                    g.emit(slice, words, bg.mention_probability);
                }
                let mut shared = vec![event.main_word.clone(), distractor.clone()];
                shared.extend(g.background_words(spec.filler_words));
                g.emit(slice, shared, event.mention_probability);
            }
        }
        records.push(PlantedRecord {
            event: event.clone(),
            tweets: g.tweets.len() - before,
        });
    }

    let mut tweets = g.tweets;
    tweets.sort_by_key(|t| t.timestamp);
    let total = tweets.len();
    let event_tweets = total - background_tweets;
    Ok(SyntheticCorpus {
        tweets,
        truth: GroundTruth {
            seed: spec.seed,
            slices: spec.slices,
            slice_minutes: spec.slice_minutes,
            start: spec.start.clone(),
            events: records,
            stats: CorpusStats {
                tweets: total,
                background_tweets,
                event_tweets,
                noise_fraction: if total == 0 {
                    0.0
                } else {
                    background_tweets as f64 / total as f64
                },
            },
        },
    })
}

/// Returns a copy of `tweets` whose texts are shuffled across the original
/// timestamps, destroying any temporal structure.
pub fn permute_texts(tweets: &[SyntheticTweet], seed: u64) -> Vec<SyntheticTweet> {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut texts: Vec<&SyntheticTweet> = tweets.iter().collect();
    texts.shuffle(&mut rng);
    tweets
        .iter()
        .zip(texts)
        .map(|(slot, src)| SyntheticTweet {
            timestamp: slot.timestamp,
            author: src.author.clone(),
            text: src.text.clone(),
        })
        .collect()
}
