//! Corpus ingestion, tokenization and the per-slice frequency index.
//!
//! Tweets are bucketed into `n` contiguous slices of equal length anchored at
//! the earliest timestamp. The index keeps, for every word, its per-slice
//! tweet counts and per-slice counts restricted to tweets carrying at least
//! one mention, plus the token sets of every tweet so co-occurrences can be
//! queried over any slice interval.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Dense identifier of a vocabulary word. Ids follow the lexicographic order
/// of the words, so comparing ids compares words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WordId(pub u32);

impl WordId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    /// Guess the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("ndjson") => {
                InputFormat::Jsonl
            }
            _ => InputFormat::Csv,
        }
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "jsonl" | "ndjson" => Ok(InputFormat::Jsonl),
            other => Err(Error::InvalidParams(format!("unknown input format `{other}`"))),
        }
    }
}

/// Case-folded stop-word list.
#[derive(Debug, Clone, Default)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopWords(
            words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    /// Reads one word per line.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(StopWords::new(text.lines()))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tokenized {
    /// Distinct words in first-occurrence order.
    pub tokens: Vec<String>,
    /// Words in text order, duplicates kept. Used for n-gram baselines.
    pub sequence: Vec<String>,
    pub has_mention: bool,
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '#' || c == '@' || c == '\''
}

/// Lowercases, splits and filters a tweet.
///
/// A chunk starting with `@` followed by a letter, digit or underscore is a
/// mention: it sets `has_mention` and never becomes a word. Apostrophes are
/// kept only inside words. Stop-words, single-character tokens and tokens
/// without any alphanumeric character are dropped.
pub fn tokenize(text: &str, stopwords: &StopWords) -> Tokenized {
    let lowered = text.to_lowercase();
    let mut out = Tokenized::default();
    let mut seen: HashSet<&str> = HashSet::new();

    for chunk in lowered.split(|c: char| !is_token_char(c)) {
        let chunk = chunk.trim_matches('\'');
        if chunk.is_empty() {
            continue;
        }
        if let Some(rest) = chunk.strip_prefix('@') {
            if rest
                .chars()
                .next()
                .is_some_and(|c| c.is_alphanumeric() || c == '_')
            {
                out.has_mention = true;
            }
            continue;
        }
        if chunk.chars().count() < 2 || !chunk.chars().any(char::is_alphanumeric) {
            continue;
        }
        if stopwords.contains(chunk) {
            continue;
        }
        out.sequence.push(chunk.to_string());
        if seen.insert(chunk) {
            out.tokens.push(chunk.to_string());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tweet {
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    pub text: String,
    pub tokens: Vec<String>,
    pub sequence: Vec<String>,
    pub has_mention: bool,
}

impl Tweet {
    pub fn new(timestamp: i64, text: impl Into<String>, stopwords: &StopWords) -> Self {
        let text = text.into();
        let Tokenized {
            tokens,
            sequence,
            has_mention,
        } = tokenize(&text, stopwords);
        Tweet {
            timestamp,
            text,
            tokens,
            sequence,
            has_mention,
        }
    }
}

/// Parses integer epoch seconds or an ISO-8601 timestamp. Timestamps without
/// an offset are taken as UTC.
pub fn parse_timestamp(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    if let Ok(secs) = raw.parse::<i64>() {
        return Some(secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    DateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S%z")
        .ok()
        .map(|dt| dt.timestamp())
}

/// Formats epoch seconds as `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_timestamp(secs: i64) -> String {
    DateTime::<Utc>::from_timestamp(secs, 0)
        .map(|dt| dt.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| secs.to_string())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub accepted: usize,
    pub rejected: usize,
}

/// Reads raw tweets from a CSV (header row with `time` and `text`) or JSONL
/// file. Records whose timestamp or text is missing or malformed are skipped
/// and counted in the report.
pub fn read_tweets(
    path: &Path,
    format: InputFormat,
    stopwords: &StopWords,
) -> Result<(Vec<Tweet>, LoadReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut report = LoadReport::default();
    let mut tweets = Vec::new();
    let mut accept = |time: Option<i64>, text: Option<String>, line: usize| match (time, text) {
        (Some(ts), Some(text)) => {
            tweets.push(Tweet::new(ts, text, stopwords));
            report.accepted += 1;
        }
        _ => {
            log::warn!("{}: skipping malformed record {}", path.display(), line);
            report.rejected += 1;
        }
    };

    match format {
        InputFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .flexible(true)
                .from_reader(BufReader::new(file));
            let headers = reader.headers().map_err(|e| Error::Format {
                path: path.into(),
                message: e.to_string(),
            })?;
            let column = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
            let (time_col, text_col) = match (column("time"), column("text")) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::Format {
                        path: path.into(),
                        message: "header must contain `time` and `text` columns".into(),
                    })
                }
            };
            for (line, record) in reader.records().enumerate() {
                match record {
                    Ok(rec) => accept(
                        rec.get(time_col).and_then(parse_timestamp),
                        rec.get(text_col).map(str::to_string),
                        line + 2,
                    ),
                    Err(e) => match e.kind() {
                        csv::ErrorKind::Io(_) => {
                            return Err(Error::Format {
                                path: path.into(),
                                message: e.to_string(),
                            })
                        }
                        _ => accept(None, None, line + 2),
                    },
                }
            }
        }
        InputFormat::Jsonl => {
            for (line, raw) in BufReader::new(file).lines().enumerate() {
                let raw = raw.map_err(|e| Error::io(path, e))?;
                if raw.trim().is_empty() {
                    continue;
                }
                let value: Option<serde_json::Value> = serde_json::from_str(&raw).ok();
                let time = value.as_ref().and_then(|v| match v.get("time")? {
                    serde_json::Value::Number(n) => n.as_i64(),
                    serde_json::Value::String(s) => parse_timestamp(s),
                    _ => None,
                });
                let text = value
                    .as_ref()
                    .and_then(|v| v.get("text")?.as_str().map(str::to_string));
                accept(time, text, line + 1);
            }
        }
    }
    Ok((tweets, report))
}

/// Options controlling how a corpus file becomes a [`SliceIndex`].
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub format: InputFormat,
    /// Slice length in seconds.
    pub slice_length: i64,
    pub stopwords: StopWords,
    /// Words occurring in fewer tweets are dropped. 0 keeps everything.
    pub min_count: u32,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            format: InputFormat::Csv,
            slice_length: 30 * 60,
            stopwords: StopWords::default(),
            min_count: 0,
        }
    }
}

pub fn load_corpus(path: &Path, options: &LoadOptions) -> Result<(SliceIndex, LoadReport)> {
    let (tweets, report) = read_tweets(path, options.format, &options.stopwords)?;
    if tweets.is_empty() {
        return Err(Error::EmptyCorpus {
            rejected: report.rejected,
        });
    }
    let index = SliceIndex::build(&tweets, options.slice_length, options.min_count)?;
    Ok((index, report))
}

/// Token ids of one indexed tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TweetTokens {
    /// Sorted, distinct.
    pub words: Vec<WordId>,
    /// Text order, duplicates kept.
    pub sequence: Vec<WordId>,
    pub has_mention: bool,
}

/// Immutable frequency index over a sliced corpus.
///
/// Counts are stored as dense `|V| x n` row-major matrices so a word's series
/// is a contiguous slice.
#[derive(Debug, Clone, Serialize)]
pub struct SliceIndex {
    start: i64,
    slice_length: i64,
    n: usize,
    total: u64,
    slice_counts: Vec<u32>,
    vocabulary: Vec<String>,
    #[serde(skip)]
    lookup: HashMap<String, WordId>,
    word_counts: Vec<u32>,
    mention_counts: Vec<u32>,
    word_totals: Vec<u32>,
    mention_totals: Vec<u32>,
    /// Tweets in time order; slice `i` owns `tweets[offsets[i]..offsets[i + 1]]`.
    tweets: Vec<TweetTokens>,
    offsets: Vec<usize>,
    /// Per word, ascending positions in `tweets` of the tweets containing it.
    postings: Vec<Vec<u32>>,
}

impl SliceIndex {
    /// Builds the index. `slice_length` is in seconds.
    pub fn build(tweets: &[Tweet], slice_length: i64, min_count: u32) -> Result<Self> {
        if slice_length <= 0 {
            return Err(Error::InvalidParams(format!(
                "slice length must be positive, got {slice_length}s"
            )));
        }
        if tweets.is_empty() {
            return Err(Error::EmptyCorpus { rejected: 0 });
        }
        let mut order: Vec<usize> = (0..tweets.len()).collect();
        order.sort_by_key(|&i| tweets[i].timestamp);
        let start = tweets[order[0]].timestamp;
        let last = tweets[*order.last().unwrap()].timestamp;
        let n = ((last - start) / slice_length) as usize + 1;
        if n < 2 {
            return Err(Error::TooFewSlices { slices: n });
        }

        let mut frequency: HashMap<&str, u32> = HashMap::new();
        for tweet in tweets {
            for word in &tweet.tokens {
                *frequency.entry(word.as_str()).or_default() += 1;
            }
        }
        let mut vocabulary: Vec<String> = frequency
            .into_iter()
            .filter(|&(_, count)| count >= min_count)
            .map(|(w, _)| w.to_string())
            .collect();
        vocabulary.sort_unstable();
        let lookup: HashMap<String, WordId> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), WordId(i as u32)))
            .collect();

        let v = vocabulary.len();
        let mut slice_counts = vec![0u32; n];
        let mut word_counts = vec![0u32; v * n];
        let mut mention_counts = vec![0u32; v * n];
        let mut word_totals = vec![0u32; v];
        let mut mention_totals = vec![0u32; v];
        let mut indexed = Vec::with_capacity(tweets.len());
        let mut offsets = vec![0usize; n + 1];
        let mut postings: Vec<Vec<u32>> = vec![Vec::new(); v];

        for (position, &i) in order.iter().enumerate() {
            let tweet = &tweets[i];
            let slice = ((tweet.timestamp - start) / slice_length) as usize;
            slice_counts[slice] += 1;
            offsets[slice + 1] += 1;

            let mut words: Vec<WordId> = tweet
                .tokens
                .iter()
                .filter_map(|w| lookup.get(w).copied())
                .collect();
            words.sort_unstable();
            words.dedup();
            for &id in &words {
                let cell = id.index() * n + slice;
                word_counts[cell] += 1;
                word_totals[id.index()] += 1;
                if tweet.has_mention {
                    mention_counts[cell] += 1;
                    mention_totals[id.index()] += 1;
                }
                postings[id.index()].push(position as u32);
            }
            let sequence = tweet
                .sequence
                .iter()
                .filter_map(|w| lookup.get(w).copied())
                .collect();
            indexed.push(TweetTokens {
                words,
                sequence,
                has_mention: tweet.has_mention,
            });
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }

        Ok(SliceIndex {
            start,
            slice_length,
            n,
            total: tweets.len() as u64,
            slice_counts,
            vocabulary,
            lookup,
            word_counts,
            mention_counts,
            word_totals,
            mention_totals,
            tweets: indexed,
            offsets,
            postings,
        })
    }

    /// Number of slices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Slice length in seconds.
    pub fn slice_length(&self) -> i64 {
        self.slice_length
    }

    /// Epoch seconds at which slice 1 begins.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Start of 1-based `slice`, in epoch seconds.
    pub fn slice_start(&self, slice: usize) -> i64 {
        self.start + (slice as i64 - 1) * self.slice_length
    }

    /// Exclusive end of 1-based `slice`, in epoch seconds.
    pub fn slice_end(&self, slice: usize) -> i64 {
        self.start + slice as i64 * self.slice_length
    }

    /// Total number of tweets, `N`.
    pub fn total_tweets(&self) -> u64 {
        self.total
    }

    /// Per-slice tweet counts `N^i`, indexed from 0.
    pub fn slice_counts(&self) -> &[u32] {
        &self.slice_counts
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn word_id(&self, word: &str) -> Option<WordId> {
        self.lookup.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.vocabulary[id.index()]
    }

    pub fn words(&self) -> impl Iterator<Item = WordId> + '_ {
        (0..self.vocabulary.len() as u32).map(WordId)
    }

    /// Words used in at least one mention-bearing tweet (`V_@`).
    pub fn mention_vocabulary(&self) -> impl Iterator<Item = WordId> + '_ {
        self.words().filter(|id| self.mention_totals[id.index()] > 0)
    }

    pub fn in_mention_vocabulary(&self, id: WordId) -> bool {
        self.mention_totals[id.index()] > 0
    }

    /// `N_t^i` for every slice.
    pub fn word_series(&self, id: WordId) -> &[u32] {
        let row = id.index() * self.n;
        &self.word_counts[row..row + self.n]
    }

    /// `N_@t^i` for every slice.
    pub fn mention_series(&self, id: WordId) -> &[u32] {
        let row = id.index() * self.n;
        &self.mention_counts[row..row + self.n]
    }

    /// Tweets containing the word across the corpus.
    pub fn word_total(&self, id: WordId) -> u32 {
        self.word_totals[id.index()]
    }

    /// `N_@t`: mention-bearing tweets containing the word.
    pub fn mention_total(&self, id: WordId) -> u32 {
        self.mention_totals[id.index()]
    }

    pub fn tweets(&self) -> &[TweetTokens] {
        &self.tweets
    }

    /// Tweets of 1-based `slice`.
    pub fn slice_tweets(&self, slice: usize) -> &[TweetTokens] {
        &self.tweets[self.offsets[slice - 1]..self.offsets[slice]]
    }

    pub fn check_interval(&self, interval: Interval) -> Result<()> {
        if interval.start == 0 || interval.start > interval.end || interval.end > self.n {
            return Err(Error::InvalidInterval {
                start: interval.start,
                end: interval.end,
                slices: self.n,
            });
        }
        Ok(())
    }

    /// For every other word, the number of tweets in `interval` containing
    /// both it and `word`.
    pub fn cooccurrence_counts(
        &self,
        word: WordId,
        interval: Interval,
    ) -> Result<HashMap<WordId, u32>> {
        if word.index() >= self.vocabulary.len() {
            return Err(Error::UnknownWord(format!("#{}", word.0)));
        }
        self.check_interval(interval)?;
        let lo = self.offsets[interval.start - 1] as u32;
        let hi = self.offsets[interval.end] as u32;
        let postings = &self.postings[word.index()];
        let first = postings.partition_point(|&p| p < lo);
        let last = postings.partition_point(|&p| p < hi);

        let mut counts = HashMap::new();
        for &p in &postings[first..last] {
            for &other in &self.tweets[p as usize].words {
                if other != word {
                    *counts.entry(other).or_insert(0) += 1;
                }
            }
        }
        Ok(counts)
    }

    /// String-keyed variant of [`SliceIndex::cooccurrence_counts`].
    pub fn cooccurrence_by_word(
        &self,
        word: &str,
        interval: Interval,
    ) -> Result<HashMap<String, u32>> {
        let id = self
            .word_id(word)
            .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
        Ok(self
            .cooccurrence_counts(id, interval)?
            .into_iter()
            .map(|(w, c)| (self.word(w).to_string(), c))
            .collect())
    }
}
