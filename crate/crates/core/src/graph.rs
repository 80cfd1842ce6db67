//! Mutable storage for the structural graph: nodes, directed edges, labels,
//! per-node word multisets and the installed vocabulary's inverted index.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocabulary::Vocabulary;

/// Dense node identifier. Ids are assigned at insertion and never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Index into the graph's append-only label dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label(pub u32);

impl Label {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned word id. The word dictionary is append-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordId(pub u32);

/// Which incident edges a walk may follow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Follow stored edges from source to target only.
    OutOnly,
    /// Follow edges in both directions.
    #[default]
    Undirected,
}

/// Where a node's current label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelOrigin {
    /// Supplied with the input; never expires.
    Given,
    /// Assigned by the classifier at logical time `assigned_at`.
    Inferred { assigned_at: u64, ttl: Option<u64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelEntry {
    pub label: Label,
    pub origin: LabelOrigin,
}

/// Words attached to one node. Tokens must already be normalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextPayload {
    pub node: NodeId,
    pub tokens: Vec<String>,
}

impl TextPayload {
    /// Tokenizes `raw` with [`tokenize`]. Returns `None` when nothing survives.
    pub fn from_raw(node: NodeId, raw: &str) -> Option<Self> {
        let tokens = tokenize(raw);
        (!tokens.is_empty()).then_some(TextPayload { node, tokens })
    }
}

/// Lowercases, splits on anything that is not alphanumeric and drops tokens
/// shorter than two characters.
pub fn tokenize(raw: &str) -> Vec<String> {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

// Adjacency lists are sorted, so walks depend on the graph and not on the
// order in which edges arrived.
#[derive(Debug, Clone, Default, PartialEq)]
struct NodeData {
    out: Vec<NodeId>,
    inc: Vec<NodeId>,
    // union of `out` and `inc`
    both: Vec<NodeId>,
    label: Option<LabelEntry>,
    text: BTreeMap<WordId, u32>,
}

fn insert_item(list: &mut Vec<NodeId>, v: NodeId) {
    if let Err(pos) = list.binary_search(&v) {
        list.insert(pos, v);
    }
}

fn remove_item(list: &mut Vec<NodeId>, v: NodeId) {
    if let Ok(pos) = list.binary_search(&v) {
        list.remove(pos);
    }
}

/// A directed, partially labeled graph whose nodes carry word multisets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DynamicGraph {
    nodes: Vec<Option<NodeData>>,
    live_nodes: usize,
    edges: HashSet<(NodeId, NodeId)>,
    direction: Direction,
    label_names: Vec<String>,
    label_ids: HashMap<String, Label>,
    histogram: Vec<usize>,
    labeled: usize,
    words: IndexSet<String>,
    vocabulary: Option<Vocabulary>,
    revision: u64,
    time: u64,
}

impl DynamicGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_direction(direction: Direction) -> Self {
        DynamicGraph {
            direction,
            ..Self::default()
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn set_direction(&mut self, direction: Direction) {
        self.direction = direction;
    }

    /// Monotone mutation counter.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Logical clock used for label lifetimes. Set by the caller (for
    /// example while replaying a timestamped event stream).
    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn set_time(&mut self, t: u64) {
        self.time = self.time.max(t);
    }

    pub fn node_count(&self) -> usize {
        self.live_nodes
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labeled_count(&self) -> usize {
        self.labeled
    }

    /// Upper bound (exclusive) on every `NodeId::index()` ever handed out.
    pub fn id_bound(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        matches!(self.nodes.get(v.index()), Some(Some(_)))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_some())
            .map(|(i, _)| NodeId(i as u32))
    }

    pub fn labeled_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| {
            n.as_ref()
                .and_then(|n| n.label)
                .map(|_| NodeId(i as u32))
        })
    }

    pub fn unlabeled_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| match n {
            Some(n) if n.label.is_none() => Some(NodeId(i as u32)),
            _ => None,
        })
    }

    fn node(&self, v: NodeId) -> Result<&NodeData> {
        self.nodes
            .get(v.index())
            .and_then(Option::as_ref)
            .ok_or(Error::UnknownNode(v))
    }

    fn node_mut(&mut self, v: NodeId) -> Result<&mut NodeData> {
        self.nodes
            .get_mut(v.index())
            .and_then(Option::as_mut)
            .ok_or(Error::UnknownNode(v))
    }

    // ---- label dictionary ----

    /// Returns the id for `name`, adding it to the dictionary if new.
    pub fn intern_label(&mut self, name: &str) -> Label {
        if let Some(&l) = self.label_ids.get(name) {
            return l;
        }
        let l = Label(self.label_names.len() as u32);
        self.label_names.push(name.to_owned());
        self.label_ids.insert(name.to_owned(), l);
        self.histogram.push(0);
        l
    }

    pub fn label_id(&self, name: &str) -> Option<Label> {
        self.label_ids.get(name).copied()
    }

    pub fn label_name(&self, label: Label) -> &str {
        &self.label_names[label.index()]
    }

    /// Number of labels in the dictionary, `|L_t|`.
    pub fn label_count(&self) -> usize {
        self.label_names.len()
    }

    /// Count of currently labeled nodes per label.
    pub fn label_histogram(&self) -> &[usize] {
        &self.histogram
    }

    // ---- mutation ----

    pub fn add_node(&mut self, label: Option<Label>) -> NodeId {
        let v = NodeId(self.nodes.len() as u32);
        self.nodes.push(Some(NodeData::default()));
        self.live_nodes += 1;
        if let Some(l) = label {
            self.put_label(v, l, LabelOrigin::Given);
        }
        self.revision += 1;
        v
    }

    /// Inserts the directed edge `from -> to`. Inserting an existing edge is a no-op.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId) -> Result<()> {
        self.node(from)?;
        self.node(to)?;
        if !self.edges.insert((from, to)) {
            return Ok(());
        }
        let reverse = from != to && self.edges.contains(&(to, from));
        let from_node = self.node_mut(from)?;
        insert_item(&mut from_node.out, to);
        if !reverse {
            insert_item(&mut from_node.both, to);
        }
        let to_node = self.node_mut(to)?;
        insert_item(&mut to_node.inc, from);
        if !reverse && from != to {
            insert_item(&mut to_node.both, from);
        }
        self.revision += 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, from: NodeId, to: NodeId) -> Result<()> {
        self.node(from)?;
        self.node(to)?;
        if !self.edges.remove(&(from, to)) {
            return Err(Error::UnknownEdge(from, to));
        }
        remove_item(&mut self.node_mut(from)?.out, to);
        remove_item(&mut self.node_mut(to)?.inc, from);
        if !self.edges.contains(&(to, from)) {
            remove_item(&mut self.node_mut(from)?.both, to);
            remove_item(&mut self.node_mut(to)?.both, from);
        }
        self.revision += 1;
        Ok(())
    }

    /// Removes `v` together with its edges, label, text and index entries.
    pub fn remove_node(&mut self, v: NodeId) -> Result<()> {
        let data = self.node(v)?.clone();
        for &u in &data.out {
            self.edges.remove(&(v, u));
            if u != v {
                let n = self.node_mut(u)?;
                remove_item(&mut n.inc, v);
                remove_item(&mut n.both, v);
            }
        }
        for &u in &data.inc {
            self.edges.remove(&(u, v));
            if u != v {
                let n = self.node_mut(u)?;
                remove_item(&mut n.out, v);
                remove_item(&mut n.both, v);
            }
        }
        if let Some(entry) = data.label {
            self.histogram[entry.label.index()] -= 1;
            self.labeled -= 1;
        }
        if let Some(vocab) = self.vocabulary.as_mut() {
            vocab.forget_node(v, data.text.keys().copied());
        }
        self.nodes[v.index()] = None;
        self.live_nodes -= 1;
        self.revision += 1;
        Ok(())
    }

    /// Merges the payload's tokens into the node's word multiset.
    pub fn attach_text(&mut self, payload: &TextPayload) -> Result<()> {
        self.node(payload.node)?;
        let ids: Vec<WordId> = payload
            .tokens
            .iter()
            .map(|t| self.intern_word(t))
            .collect();
        let node = self.node_mut(payload.node)?;
        let mut fresh = Vec::new();
        for id in ids {
            let c = node.text.entry(id).or_insert(0);
            if *c == 0 {
                fresh.push(id);
            }
            *c += 1;
        }
        if let Some(vocab) = self.vocabulary.as_mut() {
            vocab.note_words(payload.node, &fresh);
        }
        self.revision += 1;
        Ok(())
    }

    /// Labels `v` as input ground truth, replacing any existing label.
    pub fn set_label(&mut self, v: NodeId, label: Label) -> Result<()> {
        self.assign_label(v, label, LabelOrigin::Given)
    }

    pub fn assign_label(&mut self, v: NodeId, label: Label, origin: LabelOrigin) -> Result<()> {
        assert!(label.index() < self.label_count(), "label outside dictionary");
        self.clear_label(v)?;
        self.put_label(v, label, origin);
        self.revision += 1;
        Ok(())
    }

    /// Removes `v`'s label, returning what it was.
    pub fn clear_label(&mut self, v: NodeId) -> Result<Option<LabelEntry>> {
        let old = self.node_mut(v)?.label.take();
        if let Some(entry) = old {
            self.histogram[entry.label.index()] -= 1;
            self.labeled -= 1;
            self.revision += 1;
        }
        Ok(old)
    }

    fn put_label(&mut self, v: NodeId, label: Label, origin: LabelOrigin) {
        let node = self.nodes[v.index()].as_mut().expect("live node");
        debug_assert!(node.label.is_none());
        node.label = Some(LabelEntry { label, origin });
        self.histogram[label.index()] += 1;
        self.labeled += 1;
    }

    // ---- queries ----

    pub fn label(&self, v: NodeId) -> Result<Option<Label>> {
        Ok(self.node(v)?.label.map(|e| e.label))
    }

    pub fn label_entry(&self, v: NodeId) -> Result<Option<LabelEntry>> {
        Ok(self.node(v)?.label)
    }

    /// Label of `v`, or `None` when `v` is unlabeled or absent.
    #[inline]
    pub fn label_of(&self, v: NodeId) -> Option<Label> {
        self.nodes
            .get(v.index())
            .and_then(Option::as_ref)
            .and_then(|n| n.label)
            .map(|e| e.label)
    }

    /// Neighbors a walk may step to, under the configured direction mode,
    /// in ascending id order.
    pub fn neighbors(&self, v: NodeId) -> Result<&[NodeId]> {
        let n = self.node(v)?;
        Ok(match self.direction {
            Direction::OutOnly => &n.out,
            Direction::Undirected => &n.both,
        })
    }

    pub fn successors(&self, v: NodeId) -> Result<&[NodeId]> {
        Ok(&self.node(v)?.out)
    }

    pub fn predecessors(&self, v: NodeId) -> Result<&[NodeId]> {
        Ok(&self.node(v)?.inc)
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.contains(&(from, to))
    }

    /// All labels whose count in the histogram is maximal.
    pub fn most_frequent_labels(&self) -> Result<Vec<Label>> {
        if self.labeled == 0 {
            return Err(Error::NoLabeledNodes);
        }
        let max = self.histogram.iter().copied().max().unwrap_or(0);
        Ok(self
            .histogram
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == max)
            .map(|(i, _)| Label(i as u32))
            .collect())
    }

    pub fn text(&self, v: NodeId) -> Result<&BTreeMap<WordId, u32>> {
        Ok(&self.node(v)?.text)
    }

    pub fn word_count(&self, v: NodeId, word: &str) -> u32 {
        match (self.node(v), self.word_id(word)) {
            (Ok(n), Some(w)) => n.text.get(&w).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn word_id(&self, word: &str) -> Option<WordId> {
        self.words.get_index_of(word).map(|i| WordId(i as u32))
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id.0 as usize]
    }

    fn intern_word(&mut self, word: &str) -> WordId {
        if let Some(i) = self.words.get_index_of(word) {
            return WordId(i as u32);
        }
        WordId(self.words.insert_full(word.to_owned()).0 as u32)
    }

    // ---- vocabulary ----

    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        self.vocabulary.as_ref()
    }

    /// Replaces the installed vocabulary, returning the previous one.
    pub fn install_vocabulary(&mut self, vocabulary: Vocabulary) -> Option<Vocabulary> {
        self.revision += 1;
        self.vocabulary.replace(vocabulary)
    }

    pub fn take_vocabulary(&mut self) -> Option<Vocabulary> {
        self.vocabulary.take()
    }

    /// Recounts the label map from scratch. Used to check the incremental histogram.
    pub fn recount_histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.label_count()];
        for n in self.nodes.iter().flatten() {
            if let Some(e) = n.label {
                counts[e.label.index()] += 1;
            }
        }
        counts
    }
}
