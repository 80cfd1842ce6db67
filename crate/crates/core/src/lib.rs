//! Classification of unlabeled nodes in a dynamic, partially labeled graph
//! whose nodes carry text.
//!
//! Labels are inferred by random walks that mix structural hops along graph
//! edges with content two-hops through a small vocabulary of
//! label-discriminative words (chosen by Gini coefficient). The label seen
//! most often along the walks wins.
//!
//! ```
//! use dycos::{classify_all, ClassifyOptions, DynamicGraph, WalkConfig};
//!
//! let mut g = DynamicGraph::new();
//! let a = g.intern_label("A");
//! let v1 = g.add_node(Some(a));
//! let v2 = g.add_node(None);
//! g.add_edge(v2, v1).unwrap();
//! let out = classify_all(&mut g, &WalkConfig::default(), &ClassifyOptions::default()).unwrap();
//! assert_eq!(out.assignments[0].label, a);
//! assert_eq!(g.label_of(v2), Some(a));
//! ```

pub mod classifier;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod io;
pub mod synth;
pub mod vocabulary;
pub mod walk;

pub use classifier::{
    classify_all, classify_node, classify_nodes, predict, reclassify_expired, ApplyMode, Assignment,
    ClassifyOptions, ClassifyOutcome, LabelDistribution, Source,
};
pub use error::{Error, Result};
pub use evaluation::{
    cross_validate, make_folds, make_folds_seeded, misclassification_bound, BoundParams, EvaluationConfig,
    EvaluationReport, FoldPlan,
};
pub use graph::{Direction, DynamicGraph, Label, LabelOrigin, NodeId, TextPayload};
pub use io::{load_dataset, load_dataset_files, replay_events, Dataset, Event, Op};
pub use synth::{generate_synthetic, Synthetic, SyntheticSpec};
pub use vocabulary::{build_vocabulary, compute_gini, Vocabulary, VocabularyConfig, WordStats};
pub use walk::{content_two_hop, structural_hop, top_q, two_hop_path_counts, CandidateSet, WalkConfig};
