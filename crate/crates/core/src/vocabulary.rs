//! Gini-based vocabulary selection and the word-node inverted index.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, NodeId, WordId};

/// Per-label occurrence counts of one word over a set of labeled texts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordStats {
    pub word: String,
    pub per_label_counts: Vec<u64>,
    pub total: u64,
}

impl WordStats {
    pub fn new(word: impl Into<String>, per_label_counts: Vec<u64>) -> Self {
        let total = per_label_counts.iter().sum();
        WordStats {
            word: word.into(),
            per_label_counts,
            total,
        }
    }
}

/// Sum of squared per-label relative frequencies.
///
/// Evaluated as `Σ n_i² / (Σ n_i)²` in integer arithmetic so that scaling
/// every count by the same factor gives a bit-identical result.
pub fn compute_gini(stats: &WordStats) -> Result<f64> {
    let total: u128 = stats.per_label_counts.iter().map(|&c| c as u128).sum();
    if total == 0 {
        return Err(Error::ZeroTotal);
    }
    let squares: u128 = stats
        .per_label_counts
        .iter()
        .map(|&c| (c as u128) * (c as u128))
        .sum();
    Ok(squares as f64 / (total * total) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyConfig {
    /// Target number of words, `m`.
    pub size: usize,
    /// Labeled nodes sampled for the statistics. `None` uses all of them.
    pub sample_size: Option<usize>,
    pub seed: u64,
}

impl Default for VocabularyConfig {
    fn default() -> Self {
        VocabularyConfig {
            size: 5,
            sample_size: None,
            seed: 0,
        }
    }
}

impl VocabularyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidConfig("vocabulary size must be at least 1".into()));
        }
        if self.sample_size == Some(0) {
            return Err(Error::InvalidConfig("vocabulary sample size must be at least 1".into()));
        }
        Ok(())
    }
}

/// A selected word together with the structural nodes whose text contains it.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabEntry {
    pub word: String,
    pub gini: f64,
    /// Occurrences over the sampled labeled texts.
    pub total: u64,
    word_id: WordId,
    nodes: Vec<NodeId>,
}

impl VocabEntry {
    /// Nodes whose text contains this word, ascending.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn document_frequency(&self) -> usize {
        self.nodes.len()
    }
}

/// The selected word layer: entries in selection order plus, per node, the
/// entries its text touches.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    by_word: HashMap<WordId, usize>,
    node_words: Vec<Vec<u32>>,
    built_at: u64,
}

fn trimmed(lists: &[Vec<u32>]) -> &[Vec<u32>] {
    let len = lists.iter().rposition(|l| !l.is_empty()).map_or(0, |i| i + 1);
    &lists[..len]
}

// `node_words` may carry trailing empty slots depending on how it was grown.
impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
            && self.by_word == other.by_word
            && self.built_at == other.built_at
            && trimmed(&self.node_words) == trimmed(&other.node_words)
    }
}

impl Vocabulary {
    /// A vocabulary with no words; content hops always fail against it.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn get(&self, word: &str) -> Option<&VocabEntry> {
        self.entries.iter().find(|e| e.word == word)
    }

    /// Graph revision the statistics were computed at.
    pub fn built_at(&self) -> u64 {
        self.built_at
    }

    /// Indices into [`entries`](Self::entries) of the words `v`'s text contains.
    #[inline]
    pub fn words_of(&self, v: NodeId) -> &[u32] {
        self.node_words.get(v.index()).map_or(&[], Vec::as_slice)
    }

    #[inline]
    pub fn nodes_of(&self, entry: u32) -> &[NodeId] {
        &self.entries[entry as usize].nodes
    }

    /// Recomputes every inverted list from the graph's current texts.
    pub fn rebuild_inverted_index(&mut self, graph: &DynamicGraph) {
        for e in &mut self.entries {
            e.nodes.clear();
        }
        self.node_words = vec![Vec::new(); graph.id_bound()];
        for v in graph.node_ids() {
            let text = graph.text(v).expect("live node");
            for w in text.keys() {
                if let Some(&i) = self.by_word.get(w) {
                    self.entries[i].nodes.push(v);
                    self.node_words[v.index()].push(i as u32);
                }
            }
            self.node_words[v.index()].sort_unstable();
        }
    }

    /// Tab-separated `word`, `gini`, `df` rows in selection order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}", e.word, e.gini, e.nodes.len());
        }
        out
    }

    pub(crate) fn note_words(&mut self, v: NodeId, fresh: &[WordId]) {
        for w in fresh {
            let Some(&i) = self.by_word.get(w) else {
                continue;
            };
            let nodes = &mut self.entries[i].nodes;
            if let Err(pos) = nodes.binary_search(&v) {
                nodes.insert(pos, v);
            }
            if self.node_words.len() <= v.index() {
                self.node_words.resize(v.index() + 1, Vec::new());
            }
            let words = &mut self.node_words[v.index()];
            if let Err(pos) = words.binary_search(&(i as u32)) {
                words.insert(pos, i as u32);
            }
        }
    }

    pub(crate) fn forget_node(&mut self, v: NodeId, words: impl Iterator<Item = WordId>) {
        for w in words {
            if let Some(&i) = self.by_word.get(&w) {
                let nodes = &mut self.entries[i].nodes;
                if let Ok(pos) = nodes.binary_search(&v) {
                    nodes.remove(pos);
                }
            }
        }
        if let Some(words) = self.node_words.get_mut(v.index()) {
            words.clear();
        }
    }
}

/// Uniform sample without replacement of `sample_size` labeled nodes
/// (reservoir sampling over the labeled nodes in id order). The result is sorted.
pub fn sample_labeled_nodes<R: Rng + ?Sized>(
    graph: &DynamicGraph,
    sample_size: usize,
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    if graph.labeled_count() == 0 {
        return Err(Error::NoLabeledNodes);
    }
    let mut reservoir = Vec::with_capacity(sample_size.min(graph.labeled_count()));
    for (seen, v) in graph.labeled_nodes().enumerate() {
        if seen < sample_size {
            reservoir.push(v);
        } else {
            let j = rng.gen_range(0..=seen);
            if j < sample_size {
                reservoir[j] = v;
            }
        }
    }
    reservoir.sort_unstable();
    Ok(reservoir)
}

/// Per-label word counts over the texts of `sample`. Rows are ordered by
/// first appearance of the word id.
pub fn word_stats(graph: &DynamicGraph, sample: &[NodeId]) -> Result<Vec<(WordId, WordStats)>> {
    let labels = graph.label_count();
    let mut counts: HashMap<WordId, Vec<u64>> = HashMap::new();
    let mut order = Vec::new();
    for &v in sample {
        let Some(label) = graph.label(v)? else {
            continue;
        };
        for (&w, &c) in graph.text(v)? {
            let row = counts.entry(w).or_insert_with(|| {
                order.push(w);
                vec![0; labels]
            });
            row[label.index()] += c as u64;
        }
    }
    order.sort_unstable();
    Ok(order
        .into_iter()
        .map(|w| {
            let row = counts.remove(&w).expect("counted word");
            (w, WordStats::new(graph.word(w), row))
        })
        .collect())
}

/// Sorts scored words best-first: higher Gini, then higher total count, then
/// lexicographically smaller word.
pub fn rank_words(scored: &mut [(f64, &WordStats)]) {
    scored.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(b.1.total.cmp(&a.1.total))
            .then_with(|| a.1.word.cmp(&b.1.word))
    });
}

/// Selects the `config.size` most label-discriminative words from a sample
/// of labeled nodes and indexes them against every node of the graph.
pub fn build_vocabulary(graph: &DynamicGraph, config: &VocabularyConfig) -> Result<Vocabulary> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sample_size = config.sample_size.unwrap_or(usize::MAX);
    let sample = sample_labeled_nodes(graph, sample_size, &mut rng)?;
    let stats = word_stats(graph, &sample)?;
    if stats.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut scored = Vec::with_capacity(stats.len());
    for (_, s) in &stats {
        scored.push((compute_gini(s)?, s));
    }
    rank_words(&mut scored);
    scored.truncate(config.size);

    let ids: HashMap<&str, WordId> = stats.iter().map(|(w, s)| (s.word.as_str(), *w)).collect();
    let entries: Vec<VocabEntry> = scored
        .into_iter()
        .map(|(gini, s)| VocabEntry {
            word: s.word.clone(),
            gini,
            total: s.total,
            word_id: ids[s.word.as_str()],
            nodes: Vec::new(),
        })
        .collect();
    let by_word = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.word_id, i))
        .collect();
    let mut vocab = Vocabulary {
        entries,
        by_word,
        node_words: Vec::new(),
        built_at: graph.revision(),
    };
    vocab.rebuild_inverted_index(graph);
    Ok(vocab)
}
