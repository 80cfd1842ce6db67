//! Single hops over the word-extended graph: uniform structural hops and
//! content two-hops through shared vocabulary words.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, NodeId};
use crate::vocabulary::Vocabulary;

/// Walk-time parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Walks started from each node, `r`.
    pub walks: usize,
    /// Hops per walk, `l`.
    pub walk_length: usize,
    /// Probability of a structural hop, `p_S`.
    pub structural_prob: f64,
    /// Cap on content two-hop targets, `q`.
    pub top_q: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks: 10,
            walk_length: 5,
            structural_prob: 0.5,
            top_q: 10,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks == 0 || self.walk_length == 0 || self.top_q == 0 {
            return Err(Error::InvalidConfig(
                "walks, walk length and top-q must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.structural_prob) {
            return Err(Error::InvalidConfig(format!(
                "structural hop probability {} outside [0, 1]",
                self.structural_prob
            )));
        }
        Ok(())
    }
}

/// Content two-hop targets with their path counts, best first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateSet {
    entries: Vec<(NodeId, u32)>,
    total: u64,
}

impl CandidateSet {
    pub fn entries(&self) -> &[(NodeId, u32)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.entries.iter().any(|&(u, _)| u == v)
    }

    /// Sum of path counts over the set.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Probability that [`sample`](Self::sample) returns `v`.
    pub fn probability(&self, v: NodeId) -> f64 {
        self.entries
            .iter()
            .find(|&&(u, _)| u == v)
            .map_or(0.0, |&(_, c)| c as f64 / self.total as f64)
    }

    /// Draws a node with probability proportional to its path count, by
    /// inverting the cumulative counts in canonical order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<NodeId> {
        if self.total == 0 {
            return None;
        }
        let mut x = rng.gen_range(0..self.total);
        for &(v, c) in &self.entries {
            if x < c as u64 {
                return Some(v);
            }
            x -= c as u64;
        }
        unreachable!("cumulative counts cover the range")
    }
}

fn by_count_then_id(a: &(NodeId, u32), b: &(NodeId, u32)) -> Ordering {
    b.1.cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Keeps the `q` largest counts; ties at the cut go to the smaller id.
pub fn top_q(counts: impl IntoIterator<Item = (NodeId, u32)>, q: usize) -> CandidateSet {
    let mut entries: Vec<(NodeId, u32)> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
    if q == 0 {
        entries.clear();
    } else if entries.len() > q {
        entries.select_nth_unstable_by(q - 1, by_count_then_id);
        entries.truncate(q);
    }
    entries.sort_unstable_by(by_count_then_id);
    let total = entries.iter().map(|&(_, c)| c as u64).sum();
    CandidateSet { entries, total }
}

/// Uniform step to one of `v`'s traversal neighbors.
pub fn structural_hop<R: Rng + ?Sized>(graph: &DynamicGraph, v: NodeId, rng: &mut R) -> Result<NodeId> {
    let nbrs = graph.neighbors(v)?;
    if nbrs.is_empty() {
        return Err(Error::DeadEnd(v));
    }
    Ok(nbrs[rng.gen_range(0..nbrs.len())])
}

/// Number of distinct vocabulary words `v` shares with each structural node,
/// `v` itself included.
pub fn two_hop_path_counts(
    graph: &DynamicGraph,
    vocab: &Vocabulary,
    v: NodeId,
) -> Result<BTreeMap<NodeId, u32>> {
    if !graph.contains(v) {
        return Err(Error::UnknownNode(v));
    }
    let mut counts = BTreeMap::new();
    for &w in vocab.words_of(v) {
        for &u in vocab.nodes_of(w) {
            if graph.contains(u) {
                *counts.entry(u).or_insert(0) += 1;
            }
        }
    }
    Ok(counts)
}

/// Reusable dense counter for computing candidate sets without hashing.
#[derive(Debug, Default)]
pub struct PathCounter {
    counts: Vec<u32>,
    touched: Vec<NodeId>,
}

impl PathCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn candidates(
        &mut self,
        graph: &DynamicGraph,
        vocab: &Vocabulary,
        v: NodeId,
        q: usize,
    ) -> CandidateSet {
        if self.counts.len() < graph.id_bound() {
            self.counts.resize(graph.id_bound(), 0);
        }
        for &w in vocab.words_of(v) {
            for &u in vocab.nodes_of(w) {
                let slot = &mut self.counts[u.index()];
                if *slot == 0 {
                    if !graph.contains(u) {
                        continue;
                    }
                    self.touched.push(u);
                }
                *slot += 1;
            }
        }
        let counts = &mut self.counts;
        let set = top_q(self.touched.iter().map(|&u| (u, counts[u.index()])), q);
        for u in self.touched.drain(..) {
            counts[u.index()] = 0;
        }
        set
    }
}

/// Lazily computed candidate sets for one fixed graph revision. Safe to share
/// between threads; each set is computed at most once.
#[derive(Debug)]
pub struct CandidateCache {
    q: usize,
    slots: Vec<OnceLock<CandidateSet>>,
}

impl CandidateCache {
    pub fn new(graph: &DynamicGraph, q: usize) -> Self {
        CandidateCache {
            q,
            slots: (0..graph.id_bound()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn get(
        &self,
        graph: &DynamicGraph,
        vocab: &Vocabulary,
        v: NodeId,
        scratch: &mut PathCounter,
    ) -> &CandidateSet {
        self.slots[v.index()].get_or_init(|| scratch.candidates(graph, vocab, v, self.q))
    }
}

/// Two-hop step through a shared vocabulary word, restricted to the top-`q`
/// targets by path count and sampled proportionally to that count.
pub fn content_two_hop<R: Rng + ?Sized>(
    graph: &DynamicGraph,
    vocab: &Vocabulary,
    v: NodeId,
    q: usize,
    rng: &mut R,
) -> Result<NodeId> {
    let counts = two_hop_path_counts(graph, vocab, v)?;
    top_q(counts, q).sample(rng).ok_or(Error::NoContentPath(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopKind {
    Structural,
    Content,
}

/// Counters of hop attempts, for checking how `p_S` steers the walk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopStats {
    /// Hops where the structural type was drawn.
    pub structural: u64,
    /// Hops where the content type was drawn.
    pub content: u64,
    /// Structural hops taken after a drawn content hop failed.
    pub structural_fallback: u64,
    /// Content hops taken after a drawn structural hop failed.
    pub content_fallback: u64,
    /// Walks cut short because neither hop type was possible.
    pub aborted_walks: u64,
}

impl HopStats {
    pub fn merge(&mut self, other: &HopStats) {
        self.structural += other.structural;
        self.content += other.content;
        self.structural_fallback += other.structural_fallback;
        self.content_fallback += other.content_fallback;
        self.aborted_walks += other.aborted_walks;
    }
}

/// Everything a walker needs to take hops against one graph revision.
pub struct Stepper<'a> {
    pub graph: &'a DynamicGraph,
    pub vocab: &'a Vocabulary,
    pub config: &'a WalkConfig,
    pub cache: &'a CandidateCache,
}

impl Stepper<'_> {
    fn try_hop<R: Rng + ?Sized>(
        &self,
        kind: HopKind,
        v: NodeId,
        scratch: &mut PathCounter,
        rng: &mut R,
    ) -> Option<NodeId> {
        match kind {
            HopKind::Structural => structural_hop(self.graph, v, rng).ok(),
            HopKind::Content => self
                .cache
                .get(self.graph, self.vocab, v, scratch)
                .sample(rng),
        }
    }

    /// One hop from `v`: draw the hop type, fall back to the other type once
    /// if it is impossible, and return `None` if both are.
    pub fn hop<R: Rng + ?Sized>(
        &self,
        v: NodeId,
        scratch: &mut PathCounter,
        rng: &mut R,
        stats: &mut HopStats,
    ) -> Option<NodeId> {
        let drawn = if rng.gen_bool(self.config.structural_prob) {
            stats.structural += 1;
            HopKind::Structural
        } else {
            stats.content += 1;
            HopKind::Content
        };
        if let Some(u) = self.try_hop(drawn, v, scratch, rng) {
            return Some(u);
        }
        let other = match drawn {
            HopKind::Structural => {
                stats.content_fallback += 1;
                HopKind::Content
            }
            HopKind::Content => {
                stats.structural_fallback += 1;
                HopKind::Structural
            }
        };
        self.try_hop(other, v, scratch, rng)
    }
}
