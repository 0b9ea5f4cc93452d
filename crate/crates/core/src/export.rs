//! JSON files describing a run: the ranked event list plus the data behind
//! a chronological timeline, per-event anomaly curves and the event graph.
//!
//! JSON Schemas for every file live in `schemas/` at the crate root.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{format_timestamp, parse_timestamp, SliceIndex};
use crate::description::{Event, RelatedWord};
use crate::detection::{anomaly_series, Signal};
use crate::error::{Error, Result};
use crate::interval::Interval;

pub const EVENTS_FILE: &str = "events.json";
pub const RUN_FILE: &str = "run.json";
pub const TIMELINE_FILE: &str = "timeline.json";
pub const IMPACT_FILE: &str = "impact.json";
pub const GRAPH_FILE: &str = "graph.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub start_slice: usize,
    pub end_slice: usize,
    pub start_time: String,
    /// Exclusive: end of the last slice.
    pub end_time: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub rank: usize,
    pub main_words: Vec<String>,
    pub related: Vec<RelatedWord>,
    pub interval: IntervalRecord,
    pub magnitude: f64,
}

impl EventRecord {
    pub fn to_event(&self) -> Event {
        Event {
            main_words: self.main_words.clone(),
            related: self.related.clone(),
            interval: Interval::new(self.interval.start_slice, self.interval.end_slice),
            magnitude: self.magnitude,
        }
    }

    pub fn label(&self) -> String {
        self.main_words.join(" ")
    }
}

fn interval_record(index: &SliceIndex, interval: Interval) -> IntervalRecord {
    IntervalRecord {
        start_slice: interval.start,
        end_slice: interval.end,
        start_time: format_timestamp(index.slice_start(interval.start)),
        end_time: format_timestamp(index.slice_end(interval.end)),
    }
}

/// Ranks events from 1 in their current order.
pub fn event_records(events: &[Event], index: &SliceIndex) -> Vec<EventRecord> {
    events
        .iter()
        .enumerate()
        .map(|(i, e)| EventRecord {
            rank: i + 1,
            main_words: e.main_words.clone(),
            related: e.related.clone(),
            interval: interval_record(index, e.interval),
            magnitude: e.magnitude,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub rank: usize,
    pub label: String,
    pub related: Vec<String>,
    pub start_slice: usize,
    pub end_slice: usize,
    pub start_time: String,
    pub end_time: String,
    pub magnitude: f64,
}

/// Events in chronological order of their interval start.
pub fn export_timeline(records: &[EventRecord]) -> Vec<TimelineEntry> {
    let mut entries: Vec<TimelineEntry> = records
        .iter()
        .map(|r| TimelineEntry {
            rank: r.rank,
            label: r.label(),
            related: r.related.iter().map(|w| w.word.clone()).collect(),
            start_slice: r.interval.start_slice,
            end_slice: r.interval.end_slice,
            start_time: r.interval.start_time.clone(),
            end_time: r.interval.end_time.clone(),
            magnitude: r.magnitude,
        })
        .collect();
    entries.sort_by_key(|e| (e.start_slice, e.end_slice, e.rank));
    entries
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactSeries {
    pub rank: usize,
    pub label: String,
    pub word: String,
    pub start_slice: usize,
    pub end_slice: usize,
    pub magnitude: f64,
    /// One value per slice of the corpus.
    pub anomaly: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Impact {
    pub signal: Signal,
    pub slice_seconds: i64,
    /// Start of every slice.
    pub slice_times: Vec<String>,
    pub events: Vec<ImpactSeries>,
}

/// Anomaly curve of each event's first main word over the whole corpus.
pub fn export_impact(records: &[EventRecord], index: &SliceIndex, signal: Signal) -> Result<Impact> {
    let events = records
        .iter()
        .map(|r| {
            let word = &r.main_words[0];
            let id = index
                .word_id(word)
                .ok_or_else(|| Error::UnknownWord(word.clone()))?;
            Ok(ImpactSeries {
                rank: r.rank,
                label: r.label(),
                word: word.clone(),
                start_slice: r.interval.start_slice,
                end_slice: r.interval.end_slice,
                magnitude: r.magnitude,
                anomaly: anomaly_series(index, id, signal),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Impact {
        signal,
        slice_seconds: index.slice_length(),
        slice_times: (1..=index.n())
            .map(|s| format_timestamp(index.slice_start(s)))
            .collect(),
        events,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Main,
    Related,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub kind: NodeKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub magnitude: Option<f64>,
    /// Rank of the event this node is a main word of.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub event: Option<usize>,
    /// Main word of a merged event with several main words.
    #[serde(default)]
    pub co_main: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// Related word to main word, weighted by the related weight.
    Related,
    /// Secondary main word of a merged event to its first main word.
    CoMain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphLink {
    pub source: String,
    pub target: String,
    pub weight: f64,
    pub kind: LinkKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventGraphExport {
    pub nodes: Vec<GraphNode>,
    pub links: Vec<GraphLink>,
}

/// Node-link view of the (merged) event graph.
///
/// A word that is a main word anywhere is a main node. Related-word links
/// point at the event's first main word; other main words of a merged event
/// are flagged `co_main` and tied to the first by a `co_main` link.
pub fn export_event_graph(records: &[EventRecord]) -> EventGraphExport {
    let mut mains: HashMap<&str, (usize, f64, bool)> = HashMap::new();
    for r in records {
        let merged = r.main_words.len() > 1;
        for w in &r.main_words {
            mains.entry(w.as_str()).or_insert((r.rank, r.magnitude, merged));
        }
    }

    let mut nodes = Vec::new();
    let mut links = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut add_node = |word: &str, nodes: &mut Vec<GraphNode>| {
        if !seen.insert(word.to_string()) {
            return;
        }
        let node = match mains.get(word) {
            Some(&(rank, magnitude, co_main)) => GraphNode {
                id: word.to_string(),
                kind: NodeKind::Main,
                magnitude: Some(magnitude),
                event: Some(rank),
                co_main,
            },
            None => GraphNode {
                id: word.to_string(),
                kind: NodeKind::Related,
                magnitude: None,
                event: None,
                co_main: false,
            },
        };
        nodes.push(node);
    };

    for r in records {
        let primary = r.main_words[0].as_str();
        for w in &r.main_words {
            add_node(w, &mut nodes);
            if w != primary {
                links.push(GraphLink {
                    source: w.clone(),
                    target: primary.to_string(),
                    weight: 1.0,
                    kind: LinkKind::CoMain,
                });
            }
        }
        for rel in &r.related {
            add_node(&rel.word, &mut nodes);
            links.push(GraphLink {
                source: rel.word.clone(),
                target: primary.to_string(),
                weight: rel.weight,
                kind: LinkKind::Related,
            });
        }
    }
    EventGraphExport { nodes, links }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_events(path: &Path) -> Result<Vec<EventRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let records: Vec<EventRecord> = serde_json::from_str(&text)?;
    for r in &records {
        if r.main_words.is_empty()
            || r.interval.start_slice == 0
            || r.interval.start_slice > r.interval.end_slice
            || parse_timestamp(&r.interval.start_time).is_none()
        {
            return Err(Error::Format {
                path: path.into(),
                message: format!("event {} is malformed", r.rank),
            });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportKind {
    Timeline,
    Impact,
    Graph,
}

impl ExportKind {
    pub const ALL: [ExportKind; 3] = [ExportKind::Timeline, ExportKind::Impact, ExportKind::Graph];

    pub fn file_name(self) -> &'static str {
        match self {
            ExportKind::Timeline => TIMELINE_FILE,
            ExportKind::Impact => IMPACT_FILE,
            ExportKind::Graph => GRAPH_FILE,
        }
    }
}

impl std::str::FromStr for ExportKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "timeline" => Ok(ExportKind::Timeline),
            "impact" => Ok(ExportKind::Impact),
            "graph" => Ok(ExportKind::Graph),
            other => Err(Error::InvalidParams(format!("unknown export `{other}`"))),
        }
    }
}

/// Writes the selected visualization files into `dir`.
pub fn write_exports(
    dir: &Path,
    kinds: &[ExportKind],
    records: &[EventRecord],
    index: &SliceIndex,
    signal: Signal,
) -> Result<()> {
    for kind in kinds {
        let path = dir.join(kind.file_name());
        match kind {
            ExportKind::Timeline => write_json(&path, &export_timeline(records))?,
            ExportKind::Impact => write_json(&path, &export_impact(records, index, signal)?)?,
            ExportKind::Graph => write_json(&path, &export_event_graph(records))?,
        }
    }
    Ok(())
}
