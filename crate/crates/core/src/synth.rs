//! Seeded planted-partition graphs with community-specific vocabularies.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Direction;
use crate::io::{load_dataset, Dataset, DatasetSources};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub communities: usize,
    pub nodes_per_community: usize,
    /// Share of each community whose label is visible.
    pub labeled_fraction: f64,
    pub intra_prob: f64,
    pub inter_prob: f64,
    /// Distinct words owned by each community.
    pub words_per_community: usize,
    /// Words shared by all communities.
    pub shared_words: usize,
    /// Probability that a token is drawn from the node's own community words.
    pub topic_prob: f64,
    pub tokens_per_node: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// Two communities of 100 nodes, 20% labeled, community-exclusive words.
    fn default() -> Self {
        SyntheticSpec {
            communities: 2,
            nodes_per_community: 100,
            labeled_fraction: 0.2,
            intra_prob: 0.1,
            inter_prob: 0.01,
            words_per_community: 10,
            shared_words: 0,
            topic_prob: 1.0,
            tokens_per_node: 8,
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn labeled_per_community(&self) -> usize {
        (self.labeled_fraction * self.nodes_per_community as f64).round() as usize
    }

    pub fn node_count(&self) -> usize {
        self.communities * self.nodes_per_community
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.communities < 2 {
            return bad("need at least two communities");
        }
        if !(self.labeled_fraction > 0.0 && self.labeled_fraction < 1.0) {
            return bad("labeled fraction must lie in (0, 1)");
        }
        if self.labeled_per_community() == 0 {
            return bad("labeled fraction leaves a community without labeled nodes");
        }
        if !(self.intra_prob <= 1.0 && self.intra_prob > self.inter_prob && self.inter_prob > 0.0) {
            return bad("edge probabilities must satisfy 1 >= intra > inter > 0");
        }
        if !(0.0..=1.0).contains(&self.topic_prob) {
            return bad("topic probability must lie in [0, 1]");
        }
        if self.words_per_community == 0 || self.tokens_per_node == 0 {
            return bad("need at least one word per community and one token per node");
        }
        if self.topic_prob < 1.0 && self.shared_words == 0 {
            return bad("off-topic tokens need shared words");
        }
        Ok(())
    }
}

/// Generated dataset rows. Node ids are `0..node_count`, community `c`
/// owning ids `c*n..(c+1)*n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synthetic {
    pub edges: Vec<(u64, u64)>,
    /// Visible labels.
    pub labels: Vec<(u64, String)>,
    /// Ground truth for every node.
    pub truth: Vec<(u64, String)>,
    pub texts: Vec<(u64, String)>,
}

pub fn community_label(c: usize) -> String {
    format!("c{c}")
}

pub fn community_word(c: usize, i: usize) -> String {
    format!("c{c}w{i}")
}

fn shared_word(i: usize) -> String {
    format!("common{i}")
}

/// Index pairs `(i, j)` with `i < j` from a `rows x cols` block (triangular
/// when `tri`), each kept independently with probability `p`. Skips ahead
/// geometrically so the cost is proportional to the number of kept pairs.
fn bernoulli_pairs<R: Rng>(rng: &mut R, rows: u64, cols: u64, tri: bool, p: f64, mut keep: impl FnMut(u64, u64)) {
    let total = if tri { rows * (rows - 1) / 2 } else { rows * cols };
    if total == 0 || p <= 0.0 {
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut k: u64 = 0;
    loop {
        if p < 1.0 {
            let u: f64 = 1.0 - rng.gen::<f64>();
            let skip = (u.ln() / log_q).floor();
            if skip >= (total - k) as f64 {
                return;
            }
            k += skip as u64;
        }
        if k >= total {
            return;
        }
        if tri {
            // row i holds pairs (i, i+1..rows); invert the running offset
            let mut i = ((2 * rows - 1) as f64 - (((2 * rows - 1) as f64).powi(2) - 8.0 * k as f64).sqrt()) / 2.0;
            i = i.floor().max(0.0);
            let mut i = i as u64;
            let start = |i: u64| i * (2 * rows - i - 1) / 2;
            while i > 0 && start(i) > k {
                i -= 1;
            }
            while start(i + 1) <= k {
                i += 1;
            }
            keep(i, i + 1 + (k - start(i)));
        } else {
            keep(k / cols, k % cols);
        }
        k += 1;
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Synthetic> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.nodes_per_community as u64;
    let mut edges = Vec::new();
    for a in 0..spec.communities as u64 {
        for b in a..spec.communities as u64 {
            let (p, tri) = if a == b {
                (spec.intra_prob, true)
            } else {
                (spec.inter_prob, false)
            };
            bernoulli_pairs(&mut rng, n, n, tri, p, |i, j| edges.push((a * n + i, b * n + j)));
        }
    }
    for e in &mut edges {
        if rng.gen_bool(0.5) {
            *e = (e.1, e.0);
        }
    }

    let mut labels = Vec::new();
    let mut truth = Vec::new();
    let per = spec.labeled_per_community();
    for c in 0..spec.communities {
        let ids: Vec<u64> = (0..n).map(|i| c as u64 * n + i).collect();
        let mut chosen: Vec<u64> = ids.choose_multiple(&mut rng, per).copied().collect();
        chosen.sort_unstable();
        labels.extend(chosen.into_iter().map(|v| (v, community_label(c))));
        truth.extend(ids.into_iter().map(|v| (v, community_label(c))));
    }

    let mut texts = Vec::with_capacity(spec.node_count());
    for (v, _) in &truth {
        let c = (*v / n) as usize;
        let words: Vec<String> = (0..spec.tokens_per_node)
            .map(|_| {
                if spec.topic_prob >= 1.0 || rng.gen_bool(spec.topic_prob) {
                    community_word(c, rng.gen_range(0..spec.words_per_community))
                } else {
                    shared_word(rng.gen_range(0..spec.shared_words))
                }
            })
            .collect();
        texts.push((*v, words.join(" ")));
    }
    Ok(Synthetic {
        edges,
        labels,
        truth,
        texts,
    })
}

impl Synthetic {
    pub fn edges_tsv(&self) -> String {
        self.edges.iter().map(|(a, b)| format!("{a}\t{b}\n")).collect()
    }

    pub fn labels_tsv(&self) -> String {
        self.labels.iter().map(|(v, l)| format!("{v}\t{l}\n")).collect()
    }

    pub fn truth_tsv(&self) -> String {
        self.truth.iter().map(|(v, l)| format!("{v}\t{l}\n")).collect()
    }

    pub fn texts_tsv(&self) -> String {
        self.texts.iter().map(|(v, t)| format!("{v}\t{t}\n")).collect()
    }

    /// Writes `edges.tsv`, `labels.tsv`, `texts.tsv` and `truth.tsv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("edges.tsv"), self.edges_tsv())?;
        fs::write(dir.join("labels.tsv"), self.labels_tsv())?;
        fs::write(dir.join("texts.tsv"), self.texts_tsv())?;
        fs::write(dir.join("truth.tsv"), self.truth_tsv())?;
        Ok(())
    }

    /// Loads the visible part through the regular TSV loader.
    pub fn to_dataset(&self, direction: Direction) -> Result<Dataset> {
        let (e, l, t) = (self.edges_tsv(), self.labels_tsv(), self.texts_tsv());
        load_dataset(
            DatasetSources {
                edges: Some(e.as_bytes()),
                labels: Some(l.as_bytes()),
                texts: Some(t.as_bytes()),
            },
            direction,
        )
    }

    pub fn true_label(&self, v: u64) -> Option<&str> {
        self.truth.get(v as usize).map(|(_, l)| l.as_str())
    }
}
