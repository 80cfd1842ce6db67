//! Label inference for unlabeled nodes by majority vote over the labels seen
//! on random walks, with graph-wide fallback and optional label lifetimes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, Label, LabelOrigin, NodeId};
use crate::vocabulary::Vocabulary;
use crate::walk::{CandidateCache, HopStats, PathCounter, Stepper, WalkConfig};

/// Visit counts per label accumulated over one node's walks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelDistribution {
    counts: Vec<u64>,
    total_visits: u64,
}

impl LabelDistribution {
    pub fn new(label_count: usize) -> Self {
        LabelDistribution {
            counts: vec![0; label_count],
            total_visits: 0,
        }
    }

    pub fn record(&mut self, label: Label) {
        self.counts[label.index()] += 1;
        self.total_visits += 1;
    }

    pub fn count(&self, label: Label) -> u64 {
        self.counts.get(label.index()).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_visits(&self) -> u64 {
        self.total_visits
    }

    pub fn is_empty(&self) -> bool {
        self.total_visits == 0
    }

    /// Labels attaining the maximum count. Empty when nothing was visited.
    pub fn argmax(&self) -> Vec<Label> {
        if self.total_visits == 0 {
            return Vec::new();
        }
        let max = self.counts.iter().copied().max().unwrap_or(0);
        self.counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == max)
            .map(|(i, _)| Label(i as u32))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    WalkMajority,
    GlobalFallback,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::WalkMajority => "walk_majority",
            Source::GlobalFallback => "global_fallback",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub node: NodeId,
    pub label: Label,
    pub source: Source,
    /// Share of visits that carried the chosen label; 0 for fallbacks.
    pub confidence: f64,
    pub assigned_at: u64,
    pub ttl: Option<u64>,
}

/// When classifier output becomes visible to later walks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplyMode {
    /// Every node is classified against the input labeling; labels are
    /// written once the whole pass is done.
    #[default]
    Batch,
    /// Nodes are classified in id order and each label is written at once.
    Immediate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassifyOptions {
    pub mode: ApplyMode,
    /// Lifetime given to inferred labels, in logical time steps.
    pub ttl: Option<u64>,
    pub seed: u64,
}

/// Random stream for one node, independent of processing order.
pub fn node_rng(seed: u64, v: NodeId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(v.0 as u64);
    rng
}

/// Runs `r` walks of `l` hops from `v` and counts the labels of the nodes
/// landed on. Unlabeled nodes are not counted.
pub fn tally_walks<R: Rng + ?Sized>(
    stepper: &Stepper<'_>,
    v: NodeId,
    scratch: &mut PathCounter,
    rng: &mut R,
    stats: &mut HopStats,
) -> LabelDistribution {
    let graph = stepper.graph;
    let mut dist = LabelDistribution::new(graph.label_count());
    for _ in 0..stepper.config.walks {
        let mut at = v;
        for _ in 0..stepper.config.walk_length {
            match stepper.hop(at, scratch, rng, stats) {
                Some(next) => at = next,
                None => {
                    stats.aborted_walks += 1;
                    break;
                }
            }
            if let Some(label) = graph.label_of(at) {
                dist.record(label);
            }
        }
    }
    dist
}

fn decide<R: Rng + ?Sized>(
    graph: &DynamicGraph,
    v: NodeId,
    dist: &LabelDistribution,
    rng: &mut R,
) -> Result<Assignment> {
    let (candidates, source) = if dist.is_empty() {
        (graph.most_frequent_labels()?, Source::GlobalFallback)
    } else {
        (dist.argmax(), Source::WalkMajority)
    };
    let label = *candidates.choose(rng).expect("non-empty label set");
    let confidence = match source {
        Source::WalkMajority => dist.count(label) as f64 / dist.total_visits() as f64,
        Source::GlobalFallback => 0.0,
    };
    Ok(Assignment {
        node: v,
        label,
        source,
        confidence,
        assigned_at: graph.time(),
        ttl: None,
    })
}

fn check_target(graph: &DynamicGraph, v: NodeId) -> Result<()> {
    if graph.label(v)?.is_some() {
        return Err(Error::AlreadyLabeled(v));
    }
    if graph.labeled_count() == 0 {
        return Err(Error::NoLabeledNodes);
    }
    Ok(())
}

/// Walk tally and hop counters for one unlabeled node.
pub fn walk_label_distribution<R: Rng + ?Sized>(
    graph: &DynamicGraph,
    vocab: &Vocabulary,
    v: NodeId,
    config: &WalkConfig,
    rng: &mut R,
) -> Result<(LabelDistribution, HopStats)> {
    config.validate()?;
    check_target(graph, v)?;
    let cache = CandidateCache::new(graph, config.top_q);
    let stepper = Stepper {
        graph,
        vocab,
        config,
        cache: &cache,
    };
    let mut stats = HopStats::default();
    let dist = tally_walks(&stepper, v, &mut PathCounter::new(), rng, &mut stats);
    Ok((dist, stats))
}

/// Picks a label for `v` without writing it to the graph.
pub fn classify_node<R: Rng + ?Sized>(
    graph: &DynamicGraph,
    vocab: &Vocabulary,
    v: NodeId,
    config: &WalkConfig,
    rng: &mut R,
) -> Result<Assignment> {
    let (dist, _) = walk_label_distribution(graph, vocab, v, config, rng)?;
    decide(graph, v, &dist, rng)
}

/// Result of a classification pass.
#[derive(Debug, Clone, Default)]
pub struct ClassifyOutcome {
    pub assignments: Vec<Assignment>,
    pub stats: HopStats,
}

/// Classifies `nodes` against the current labeling without mutating the
/// graph. Each node draws from its own stream, so the result does not
/// depend on the order of `nodes` or on thread scheduling.
pub fn predict(
    graph: &DynamicGraph,
    vocab: &Vocabulary,
    nodes: &[NodeId],
    config: &WalkConfig,
    seed: u64,
) -> Result<ClassifyOutcome> {
    config.validate()?;
    for &v in nodes {
        check_target(graph, v)?;
    }
    let cache = CandidateCache::new(graph, config.top_q);
    let stepper = Stepper {
        graph,
        vocab,
        config,
        cache: &cache,
    };
    let one = |scratch: &mut PathCounter, v: NodeId| -> Result<(Assignment, HopStats)> {
        let mut rng = node_rng(seed, v);
        let mut stats = HopStats::default();
        let dist = tally_walks(&stepper, v, scratch, &mut rng, &mut stats);
        Ok((decide(graph, v, &dist, &mut rng)?, stats))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<Result<(Assignment, HopStats)>> = {
        use rayon::prelude::*;
        nodes
            .par_iter()
            .map_init(PathCounter::new, |scratch, &v| one(scratch, v))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(Assignment, HopStats)>> = {
        let mut scratch = PathCounter::new();
        nodes.iter().map(|&v| one(&mut scratch, v)).collect()
    };

    let mut outcome = ClassifyOutcome::default();
    for r in results {
        let (a, s) = r?;
        outcome.stats.merge(&s);
        outcome.assignments.push(a);
    }
    Ok(outcome)
}

fn apply(graph: &mut DynamicGraph, a: &Assignment) -> Result<()> {
    graph.assign_label(
        a.node,
        a.label,
        LabelOrigin::Inferred {
            assigned_at: a.assigned_at,
            ttl: a.ttl,
        },
    )
}

/// Classifies and labels the given unlabeled nodes using the graph's
/// installed vocabulary (or none).
pub fn classify_nodes(
    graph: &mut DynamicGraph,
    nodes: &[NodeId],
    config: &WalkConfig,
    options: &ClassifyOptions,
) -> Result<ClassifyOutcome> {
    config.validate()?;
    if nodes.is_empty() {
        return Ok(ClassifyOutcome::default());
    }
    let vocab = graph.vocabulary().cloned().unwrap_or_default();
    let mut outcome = match options.mode {
        ApplyMode::Batch => predict(graph, &vocab, nodes, config, options.seed)?,
        ApplyMode::Immediate => {
            let cache = CandidateCache::new(graph, config.top_q);
            let mut scratch = PathCounter::new();
            let mut outcome = ClassifyOutcome::default();
            for &v in nodes {
                check_target(graph, v)?;
                let mut rng = node_rng(options.seed, v);
                let stepper = Stepper {
                    graph,
                    vocab: &vocab,
                    config,
                    cache: &cache,
                };
                let dist = tally_walks(&stepper, v, &mut scratch, &mut rng, &mut outcome.stats);
                let mut a = decide(graph, v, &dist, &mut rng)?;
                a.ttl = options.ttl;
                apply(graph, &a)?;
                outcome.assignments.push(a);
            }
            return Ok(outcome);
        }
    };
    for a in &mut outcome.assignments {
        a.ttl = options.ttl;
        apply(graph, a)?;
    }
    Ok(outcome)
}

/// Labels every unlabeled node of the graph.
pub fn classify_all(
    graph: &mut DynamicGraph,
    config: &WalkConfig,
    options: &ClassifyOptions,
) -> Result<ClassifyOutcome> {
    let targets: Vec<NodeId> = graph.unlabeled_nodes().collect();
    if !targets.is_empty() && graph.labeled_count() == 0 {
        return Err(Error::NoLabeledNodes);
    }
    classify_nodes(graph, &targets, config, options)
}

/// Strips every inferred label whose lifetime has run out by `now` and
/// classifies those nodes again in one batch. Input labels never expire.
pub fn reclassify_expired(
    graph: &mut DynamicGraph,
    config: &WalkConfig,
    options: &ClassifyOptions,
    now: u64,
) -> Result<ClassifyOutcome> {
    graph.set_time(now);
    let expired: Vec<NodeId> = graph
        .labeled_nodes()
        .filter(|&v| {
            matches!(
                graph.label_entry(v),
                Ok(Some(e)) if matches!(
                    e.origin,
                    LabelOrigin::Inferred { assigned_at, ttl: Some(ttl) } if assigned_at + ttl <= now
                )
            )
        })
        .collect();
    for &v in &expired {
        graph.clear_label(v)?;
    }
    let batch = ClassifyOptions {
        mode: ApplyMode::Batch,
        ..*options
    };
    classify_nodes(graph, &expired, config, &batch)
}
