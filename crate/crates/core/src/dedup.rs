//! Phase two, second half: storing described events, spotting duplicates
//! and merging them once the loop ends.
//!
//! Distinct events live in the [`EventGraph`]. An incoming event that
//! duplicates a stored one is put aside and linked to it in the
//! [`RedundancyGraph`]; each connected component of that graph is later
//! collapsed into a single event.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::description::{Event, RelatedWord};
use crate::error::{Error, Result};
use crate::interval::Interval;

/// How "the two main words are connected" is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DuplicateRule {
    /// Either main word describes the other event.
    #[default]
    Disjunction,
    /// Each main word describes the other event.
    Conjunction,
}

/// `|I1 ∩ I0| / min(|I1|, |I0|)` with lengths counted in slices.
pub fn overlap_coefficient(a: &Interval, b: &Interval) -> f64 {
    a.intersection_len(b) as f64 / a.len().min(b.len()) as f64
}

/// Stored event descriptions. Arcs go from related words to the main word.
#[derive(Debug, Clone, Default)]
pub struct EventGraph {
    events: Vec<Event>,
    by_main: HashMap<String, usize>,
}

impl EventGraph {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn get(&self, main_word: &str) -> Option<&Event> {
        self.by_main.get(main_word).map(|&i| &self.events[i])
    }

    /// `(related, main, weight)` triples.
    pub fn arcs(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        self.events.iter().flat_map(|e| {
            e.related
                .iter()
                .map(move |r| (r.word.as_str(), e.main_word(), r.weight))
        })
    }

    fn insert(&mut self, event: Event) {
        debug_assert!(!self.by_main.contains_key(event.main_word()));
        self.by_main
            .insert(event.main_word().to_string(), self.events.len());
        self.events.push(event);
    }
}

/// Undirected links between main words of duplicated events, plus the
/// descriptions that were set aside.
#[derive(Debug, Clone, Default)]
pub struct RedundancyGraph {
    nodes: Vec<String>,
    node_ids: HashMap<String, usize>,
    edges: BTreeSet<(usize, usize)>,
    aside: Vec<Event>,
}

impl RedundancyGraph {
    fn node(&mut self, word: &str) -> usize {
        if let Some(&id) = self.node_ids.get(word) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(word.to_string());
        self.node_ids.insert(word.to_string(), id);
        id
    }

    /// Adds an edge; self-loops and repeated edges are ignored.
    pub fn link(&mut self, a: &str, b: &str) {
        let (a, b) = (self.node(a), self.node(b));
        if a != b {
            self.edges.insert((a.min(b), a.max(b)));
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (self.nodes[a].as_str(), self.nodes[b].as_str()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn aside(&self) -> &[Event] {
        &self.aside
    }

    /// Connected components as lists of node ids, each sorted, found by
    /// depth-first search in time linear in nodes plus edges.
    fn components(&self) -> Vec<Vec<usize>> {
        let mut adjacency = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut components = Vec::new();
        for root in 0..self.nodes.len() {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut stack = vec![root];
            let mut members = Vec::new();
            while let Some(v) = stack.pop() {
                members.push(v);
                for &u in &adjacency[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }
}

/// Both phase-two graphs and the distinct-event count.
#[derive(Debug, Clone, Default)]
pub struct Graphs {
    pub events: EventGraph,
    pub redundancy: RedundancyGraph,
}

impl Graphs {
    pub fn distinct_count(&self) -> usize {
        self.events.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Registration {
    Inserted,
    Deduplicated { of: String },
}

fn connected(new: &Event, stored: &Event, rule: DuplicateRule) -> bool {
    let forward = stored.has_related(new.main_word());
    let backward = new.has_related(stored.main_word());
    match rule {
        DuplicateRule::Disjunction => forward || backward,
        DuplicateRule::Conjunction => forward && backward,
    }
}

/// The stored event `event` duplicates, if any. Among several candidates
/// the one with the largest magnitude wins, then the earliest stored.
pub fn find_duplicate<'a>(
    graph: &'a EventGraph,
    event: &Event,
    sigma: f64,
    rule: DuplicateRule,
) -> Option<&'a str> {
    let mut best: Option<&Event> = None;
    for stored in graph.events() {
        if stored.main_word() == event.main_word()
            || !connected(event, stored, rule)
            || overlap_coefficient(&event.interval, &stored.interval) < sigma
        {
            continue;
        }
        if best.is_none_or(|b| stored.magnitude > b.magnitude) {
            best = Some(stored);
        }
    }
    best.map(Event::main_word)
}

/// Inserts `event` as a distinct event or records it as a duplicate.
pub fn register(graphs: &mut Graphs, event: Event, sigma: f64, rule: DuplicateRule) -> Registration {
    match find_duplicate(&graphs.events, &event, sigma, rule).map(str::to_string) {
        Some(of) => {
            graphs.redundancy.link(&of, event.main_word());
            graphs.redundancy.aside.push(event);
            Registration::Deduplicated { of }
        }
        None => {
            graphs.events.insert(event);
            Registration::Inserted
        }
    }
}

/// Collapses every redundancy component into its stored event.
///
/// The merged event keeps the stored event's interval and magnitude. Its
/// main words are those of all members by descending magnitude; its related
/// words are the `p` heaviest among all members, main words excluded, each
/// word at its highest weight. Output follows event-graph insertion order.
pub fn merge_all(graphs: &Graphs, p: usize) -> Result<Vec<Event>> {
    let redundancy = &graphs.redundancy;
    let aside: HashMap<&str, &Event> = redundancy
        .aside
        .iter()
        .map(|e| (e.main_word(), e))
        .collect();

    let mut merged: HashMap<&str, Event> = HashMap::new();
    for component in redundancy.components() {
        let words: Vec<&str> = component.iter().map(|&v| redundancy.nodes[v].as_str()).collect();
        let stored: Vec<&Event> = words.iter().filter_map(|w| graphs.events.get(w)).collect();
        if stored.len() != 1 {
            return Err(Error::ComponentInvariant {
                word: words[0].to_string(),
                stored: stored.len(),
            });
        }
        let anchor = stored[0];
        let mut members: Vec<&Event> = vec![anchor];
        members.extend(words.iter().filter_map(|w| aside.get(w).copied()));
        let is_anchor = |e: &Event| std::ptr::eq(e, anchor);
        members.sort_by(|a, b| {
            b.magnitude
                .total_cmp(&a.magnitude)
                .then_with(|| is_anchor(b).cmp(&is_anchor(a)))
        });

        let main_words: Vec<String> = members.iter().map(|e| e.main_word().to_string()).collect();
        let mut best: HashMap<&str, f64> = HashMap::new();
        for member in &members {
            for r in &member.related {
                if main_words.contains(&r.word) {
                    continue;
                }
                let slot = best.entry(r.word.as_str()).or_insert(r.weight);
                if r.weight > *slot {
                    *slot = r.weight;
                }
            }
        }
        let mut related: Vec<RelatedWord> = best
            .into_iter()
            .map(|(word, weight)| RelatedWord {
                word: word.to_string(),
                weight,
            })
            .collect();
        related.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.word.cmp(&b.word)));
        related.truncate(p);

        merged.insert(
            anchor.main_word(),
            Event {
                main_words,
                related,
                interval: anchor.interval,
                magnitude: anchor.magnitude,
            },
        );
    }

    Ok(graphs
        .events
        .events()
        .iter()
        .map(|e| merged.remove(e.main_word()).unwrap_or_else(|| e.clone()))
        .collect())
}
