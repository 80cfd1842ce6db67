//! Tab-separated dataset files and JSON-lines event streams.
//!
//! Files carry external integer node ids; [`Dataset`] keeps the mapping to
//! the graph's dense [`NodeId`]s.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::Assignment;
use crate::error::{Error, Result};
use crate::graph::{Direction, DynamicGraph, NodeId, TextPayload};

/// A graph together with the external ids of its nodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub graph: DynamicGraph,
    external: HashMap<u64, NodeId>,
    ids: Vec<Option<u64>>,
}

impl Dataset {
    pub fn new(direction: Direction) -> Self {
        Dataset {
            graph: DynamicGraph::with_direction(direction),
            ..Default::default()
        }
    }

    pub fn node(&self, external: u64) -> Option<NodeId> {
        self.external.get(&external).copied()
    }

    pub fn external_id(&self, v: NodeId) -> Option<u64> {
        self.ids.get(v.index()).copied().flatten()
    }

    pub fn add_node(&mut self, external: u64) -> Result<NodeId> {
        if self.external.contains_key(&external) {
            return Err(Error::DuplicateNode(external));
        }
        let v = self.graph.add_node(None);
        self.external.insert(external, v);
        if self.ids.len() <= v.index() {
            self.ids.resize(v.index() + 1, None);
        }
        self.ids[v.index()] = Some(external);
        Ok(v)
    }

    pub fn remove_node(&mut self, external: u64) -> Option<NodeId> {
        let v = self.external.remove(&external)?;
        self.ids[v.index()] = None;
        self.graph.remove_node(v).ok()?;
        Some(v)
    }

    /// Canonical event stream describing the current state: nodes by
    /// ascending external id, then edges, texts and labels.
    pub fn to_events(&self) -> Vec<Event> {
        let g = &self.graph;
        let t = g.time();
        let mut nodes: Vec<(u64, NodeId)> = self.external.iter().map(|(&e, &v)| (e, v)).collect();
        nodes.sort_unstable();
        let mut events: Vec<Event> = nodes
            .iter()
            .map(|&(e, v)| Event {
                t,
                op: Op::AddNode {
                    node: e,
                    label: g.label_of(v).map(|l| g.label_name(l).to_owned()),
                },
            })
            .collect();
        for &(e, v) in &nodes {
            let mut targets: Vec<u64> = g
                .successors(v)
                .expect("live node")
                .iter()
                .map(|&u| self.external_id(u).expect("mapped node"))
                .collect();
            targets.sort_unstable();
            events.extend(targets.into_iter().map(|to| Event {
                t,
                op: Op::AddEdge { from: e, to },
            }));
        }
        for &(e, v) in &nodes {
            let text = g.text(v).expect("live node");
            if text.is_empty() {
                continue;
            }
            let mut words: Vec<(&str, u32)> = text.iter().map(|(&w, &c)| (g.word(w), c)).collect();
            words.sort_unstable();
            let joined = words
                .iter()
                .flat_map(|&(w, c)| std::iter::repeat(w).take(c as usize))
                .collect::<Vec<_>>()
                .join(" ");
            events.push(Event {
                t,
                op: Op::AttachText {
                    node: e,
                    text: joined,
                },
            });
        }
        events
    }
}

fn parse_id(field: &str, source: &str, line: usize) -> Result<u64> {
    field.trim().parse().map_err(|_| Error::Parse {
        source_name: source.to_owned(),
        line,
        reason: format!("invalid node id {field:?}"),
    })
}

fn split_two<'a>(raw: &'a str, source: &str, line: usize) -> Result<(&'a str, &'a str)> {
    raw.split_once('\t').ok_or_else(|| Error::Parse {
        source_name: source.to_owned(),
        line,
        reason: "expected two tab-separated fields".into(),
    })
}

/// Non-empty lines with their 1-based line numbers.
fn lines<R: Read>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    BufReader::new(reader)
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

/// In-memory contents of the three dataset files.
#[derive(Debug, Clone, Default)]
pub struct DatasetSources<R> {
    pub edges: Option<R>,
    pub labels: Option<R>,
    pub texts: Option<R>,
}

/// Builds a graph from `edges.tsv` (`from\tto`), `labels.tsv`
/// (`node\tlabel`) and `texts.tsv` (`node\traw text`). Nodes are the ids that
/// occur in the edge or text file, inserted in ascending id order; a label
/// for any other id is an error.
pub fn load_dataset<R: Read>(sources: DatasetSources<R>, direction: Direction) -> Result<Dataset> {
    let mut edges = Vec::new();
    let mut texts = Vec::new();
    let mut ids = BTreeSet::new();
    if let Some(r) = sources.edges {
        for row in lines(r) {
            let (n, l) = row?;
            let (a, b) = split_two(&l, "edges", n)?;
            let (a, b) = (parse_id(a, "edges", n)?, parse_id(b, "edges", n)?);
            ids.insert(a);
            ids.insert(b);
            edges.push((a, b));
        }
    }
    if let Some(r) = sources.texts {
        for row in lines(r) {
            let (n, l) = row?;
            let (a, raw) = split_two(&l, "texts", n)?;
            let a = parse_id(a, "texts", n)?;
            ids.insert(a);
            texts.push((a, raw.to_owned()));
        }
    }

    let mut ds = Dataset::new(direction);
    for &id in &ids {
        ds.add_node(id)?;
    }
    for (a, b) in edges {
        ds.graph.add_edge(ds.external[&a], ds.external[&b])?;
    }
    for (a, raw) in texts {
        if let Some(p) = TextPayload::from_raw(ds.external[&a], &raw) {
            ds.graph.attach_text(&p)?;
        }
    }
    if let Some(r) = sources.labels {
        for row in lines(r) {
            let (n, l) = row?;
            let (a, name) = split_two(&l, "labels", n)?;
            let id = parse_id(a, "labels", n)?;
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::Parse {
                    source_name: "labels".into(),
                    line: n,
                    reason: "empty label".into(),
                });
            }
            let v = ds.node(id).ok_or_else(|| Error::UnknownReference {
                source_name: "labels".into(),
                line: n,
                id,
            })?;
            let label = ds.graph.intern_label(name);
            ds.graph.set_label(v, label)?;
        }
    }
    Ok(ds)
}

/// [`load_dataset`] over files on disk. Missing paths are skipped.
pub fn load_dataset_files(
    edges: Option<&Path>,
    labels: Option<&Path>,
    texts: Option<&Path>,
    direction: Direction,
) -> Result<Dataset> {
    let open = |p: Option<&Path>| p.map(fs::File::open).transpose();
    load_dataset(
        DatasetSources {
            edges: open(edges)?,
            labels: open(labels)?,
            texts: open(texts)?,
        },
        direction,
    )
}

/// One line of an event stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub t: u64,
    #[serde(flatten)]
    pub op: Op,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    AddNode {
        node: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    AddEdge {
        from: u64,
        to: u64,
    },
    RemoveNode {
        node: u64,
    },
    RemoveEdge {
        from: u64,
        to: u64,
    },
    AttachText {
        node: u64,
        text: String,
    },
    SetLabel {
        node: u64,
        label: String,
    },
}

pub fn parse_events<R: Read>(reader: R) -> Result<Vec<(usize, Event)>> {
    lines(reader)
        .map(|row| {
            let (n, l) = row?;
            let e = serde_json::from_str(&l).map_err(|err| Error::Parse {
                source_name: "events".into(),
                line: n,
                reason: err.to_string(),
            })?;
            Ok((n, e))
        })
        .collect()
}

pub fn write_events(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("event serializes"));
        out.push('\n');
    }
    out
}

fn lookup(ds: &Dataset, id: u64, line: usize) -> Result<NodeId> {
    ds.node(id).ok_or(Error::UnknownReference {
        source_name: "events".into(),
        line,
        id,
    })
}

/// Applies one event to the dataset and advances the logical clock to `t`.
pub fn apply_event(ds: &mut Dataset, event: &Event, line: usize) -> Result<()> {
    ds.graph.set_time(event.t);
    match &event.op {
        Op::AddNode { node, label } => {
            let v = ds.add_node(*node)?;
            if let Some(name) = label {
                let l = ds.graph.intern_label(name);
                ds.graph.set_label(v, l)?;
            }
        }
        Op::AddEdge { from, to } => {
            let (a, b) = (lookup(ds, *from, line)?, lookup(ds, *to, line)?);
            ds.graph.add_edge(a, b)?;
        }
        Op::RemoveNode { node } => {
            lookup(ds, *node, line)?;
            ds.remove_node(*node);
        }
        Op::RemoveEdge { from, to } => {
            let (a, b) = (lookup(ds, *from, line)?, lookup(ds, *to, line)?);
            ds.graph.remove_edge(a, b)?;
        }
        Op::AttachText { node, text } => {
            let v = lookup(ds, *node, line)?;
            if let Some(p) = TextPayload::from_raw(v, text) {
                ds.graph.attach_text(&p)?;
            }
        }
        Op::SetLabel { node, label } => {
            let v = lookup(ds, *node, line)?;
            let l = ds.graph.intern_label(label);
            ds.graph.set_label(v, l)?;
        }
    }
    Ok(())
}

/// Applies a stream in order. `on_time` runs every time the clock is
/// about to move past a timestamp, and once more at the end, with the
/// state as of that timestamp.
pub fn replay_events_with<F>(
    events: &[(usize, Event)],
    direction: Direction,
    mut on_time: F,
) -> Result<Dataset>
where
    F: FnMut(&mut Dataset, u64) -> Result<()>,
{
    let mut ds = Dataset::new(direction);
    let mut current: Option<u64> = None;
    for (line, e) in events {
        if let Some(prev) = current {
            if e.t < prev {
                return Err(Error::OutOfOrderEvent {
                    line: *line,
                    t: e.t,
                    previous: prev,
                });
            }
            if e.t > prev {
                on_time(&mut ds, prev)?;
            }
        }
        current = Some(e.t);
        apply_event(&mut ds, e, *line)?;
    }
    if let Some(t) = current {
        on_time(&mut ds, t)?;
    }
    Ok(ds)
}

pub fn replay_events(events: &[(usize, Event)], direction: Direction) -> Result<Dataset> {
    replay_events_with(events, direction, |_, _| Ok(()))
}

/// `node_id\tlabel\tconfidence\tsource` rows.
pub fn assignments_tsv(ds: &Dataset, assignments: &[Assignment]) -> String {
    let mut out = String::new();
    for a in assignments {
        let id = ds.external_id(a.node).expect("mapped node");
        out.push_str(&format!(
            "{}\t{}\t{:.6}\t{}\n",
            id,
            ds.graph.label_name(a.label),
            a.confidence,
            a.source.as_str()
        ));
    }
    out
}
