//! k-fold cross-validation over labeled nodes and the majority-vote error bound.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{predict, Source};
use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, NodeId};
use crate::vocabulary::{build_vocabulary, Vocabulary, VocabularyConfig};
use crate::walk::{HopStats, WalkConfig};

/// A random partition of the labeled nodes into `k` folds whose sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub folds: Vec<Vec<NodeId>>,
    pub seed: u64,
}

pub fn make_folds<R: Rng + ?Sized>(graph: &DynamicGraph, k: usize, rng: &mut R) -> Result<FoldPlan> {
    let mut labeled: Vec<NodeId> = graph.labeled_nodes().collect();
    if k == 0 || labeled.len() < k {
        return Err(Error::TooFewLabeledNodes {
            labeled: labeled.len(),
            folds: k,
        });
    }
    labeled.shuffle(rng);
    let mut folds = vec![Vec::with_capacity(labeled.len() / k + 1); k];
    for (i, v) in labeled.into_iter().enumerate() {
        folds[i % k].push(v);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { k, folds, seed: 0 })
}

/// [`make_folds`] driven by a seed, recorded in the plan.
pub fn make_folds_seeded(graph: &DynamicGraph, k: usize, seed: u64) -> Result<FoldPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plan = make_folds(graph, k, &mut rng)?;
    plan.seed = seed;
    Ok(plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Relative-frequency margin, in (0, 1].
    pub b: f64,
    /// Walk length.
    pub l: u64,
    pub label_count: usize,
}

/// `(|L|-1) · exp(-l·b²/2)`, clamped to [0, 1]: an upper bound on the
/// probability that the majority vote lands on a label whose visit
/// probability trails the best one by at least `b`.
pub fn misclassification_bound(params: &BoundParams) -> f64 {
    let others = params.label_count.saturating_sub(1) as f64;
    let raw = others * (-(params.l as f64) * params.b * params.b / 2.0).exp();
    raw.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub b: f64,
    pub l: u64,
    pub label_count: usize,
    pub bound: f64,
}

pub fn bound_table(bs: &[f64], ls: &[u64], label_count: usize) -> Vec<BoundRow> {
    let mut rows = Vec::with_capacity(bs.len() * ls.len());
    for &b in bs {
        for &l in ls {
            let bound = misclassification_bound(&BoundParams { b, l, label_count });
            rows.push(BoundRow {
                b,
                l,
                label_count,
                bound,
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub hidden: usize,
    pub correct: usize,
    pub fallbacks: usize,
    pub accuracy: f64,
    pub vocabulary_size: usize,
    pub hops: HopStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema: u32,
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub stddev: f64,
    pub bound_table: Vec<BoundRow>,
    /// Wall time per fold in seconds. Not serialized, so reports from
    /// identical runs compare byte for byte.
    #[serde(skip)]
    pub fold_seconds: Vec<f64>,
}

impl EvaluationReport {
    pub fn per_fold_accuracy(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }

    /// One CSV row per fold.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fold,hidden,correct,fallbacks,accuracy,vocabulary_size\n");
        for f in &self.folds {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                f.fold, f.hidden, f.correct, f.fallbacks, f.accuracy, f.vocabulary_size
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationConfig {
    pub vocabulary: VocabularyConfig,
    pub walk: WalkConfig,
    pub seed: u64,
    /// b values of the bound table.
    pub bound_b: Vec<f64>,
    /// l values of the bound table.
    pub bound_l: Vec<u64>,
}

pub const DEFAULT_BOUND_B: &[f64] = &[0.05, 0.1, 0.2, 0.3];
pub const DEFAULT_BOUND_L: &[u64] = &[5, 20, 100];

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            vocabulary: VocabularyConfig::default(),
            walk: WalkConfig::default(),
            seed: 0,
            bound_b: DEFAULT_BOUND_B.to_vec(),
            bound_l: DEFAULT_BOUND_L.to_vec(),
        }
    }
}

fn mix(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Hides each fold in turn, rebuilds the vocabulary from the labels that
/// remain, classifies the hidden nodes and scores them against their true
/// labels. The input graph is not modified.
pub fn cross_validate(
    graph: &DynamicGraph,
    config: &EvaluationConfig,
    plan: &FoldPlan,
) -> Result<EvaluationReport> {
    config.walk.validate()?;
    config.vocabulary.validate()?;
    let mut work = graph.clone();
    let mut folds = Vec::with_capacity(plan.k);
    let mut fold_seconds = Vec::with_capacity(plan.k);

    for (i, fold) in plan.folds.iter().enumerate() {
        let started = Instant::now();
        let mut truth = Vec::with_capacity(fold.len());
        for &v in fold {
            let entry = work.clear_label(v)?.ok_or(Error::NoLabeledNodes)?;
            truth.push((v, entry));
        }
        if work.labeled_count() == 0 {
            return Err(Error::NoLabeledNodes);
        }
        let vocab_cfg = VocabularyConfig {
            seed: mix(config.vocabulary.seed, i),
            ..config.vocabulary
        };
        let vocab = match build_vocabulary(&work, &vocab_cfg) {
            Ok(v) => v,
            Err(Error::EmptyCorpus) => Vocabulary::empty(),
            Err(e) => return Err(e),
        };
        let outcome = predict(&work, &vocab, fold, &config.walk, mix(config.seed, i))?;

        let mut correct = 0;
        let mut fallbacks = 0;
        for (a, (v, entry)) in outcome.assignments.iter().zip(&truth) {
            debug_assert_eq!(a.node, *v);
            correct += usize::from(a.label == entry.label);
            fallbacks += usize::from(a.source == Source::GlobalFallback);
        }
        for (v, entry) in truth {
            work.assign_label(v, entry.label, entry.origin)?;
        }
        folds.push(FoldResult {
            fold: i,
            hidden: fold.len(),
            correct,
            fallbacks,
            accuracy: if fold.is_empty() {
                0.0
            } else {
                correct as f64 / fold.len() as f64
            },
            vocabulary_size: vocab.len(),
            hops: outcome.stats,
        });
        fold_seconds.push(started.elapsed().as_secs_f64());
    }

    let n = folds.len() as f64;
    let mean = folds.iter().map(|f| f.accuracy).sum::<f64>() / n;
    let var = folds.iter().map(|f| (f.accuracy - mean).powi(2)).sum::<f64>() / n;
    Ok(EvaluationReport {
        schema: 1,
        folds,
        mean_accuracy: mean,
        stddev: var.sqrt(),
        bound_table: bound_table(&config.bound_b, &config.bound_l, graph.label_count()),
        fold_seconds,
    })
}
