use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dycos::evaluation::{DEFAULT_BOUND_B, DEFAULT_BOUND_L};
use dycos::{ApplyMode, ClassifyOptions, Direction, SyntheticSpec, VocabularyConfig, WalkConfig};

#[derive(Debug, Parser)]
#[command(name = "dycos", version, about = "Random-walk classification of dynamic text-attributed graphs")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "DYCOS_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load the input and print its size.
    LoadCheck {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Vocabulary inspection.
    Vocab {
        #[command(subcommand)]
        action: VocabAction,
    },
    /// Label every unlabeled node.
    Classify(ClassifyArgs),
    /// k-fold cross-validation over the labeled nodes.
    Evaluate(EvaluateArgs),
    /// Print the misclassification bound over a (b, l) grid.
    Bound(BoundArgs),
    /// Write a planted-community dataset.
    Synth(SynthArgs),
    /// Replay an event stream, classifying at checkpoints.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
pub enum VocabAction {
    /// Emit the selected words as `word\tgini\tdf`.
    Dump {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        vocab: VocabArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    Out,
    Undirected,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Out => Direction::OutOnly,
            DirectionArg::Undirected => Direction::Undirected,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Batch,
    Immediate,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// `from\tto` rows.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// `node\tlabel` rows.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// `node\traw text` rows.
    #[arg(long)]
    pub texts: Option<PathBuf>,
    /// JSON-lines event stream, instead of the three files.
    #[arg(long, conflicts_with_all = ["edges", "labels", "texts"])]
    pub events: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DirectionArg::Undirected)]
    pub direction: DirectionArg,
}

#[derive(Debug, Clone, Args)]
pub struct VocabArgs {
    /// Number of words kept (m).
    #[arg(long, default_value_t = 5)]
    pub vocab_size: usize,
    /// Labeled nodes sampled for the word statistics; all when absent.
    #[arg(long)]
    pub vocab_sample_size: Option<usize>,
}

impl VocabArgs {
    pub fn config(&self, seed: u64) -> VocabularyConfig {
        VocabularyConfig { size: self.vocab_size, sample_size: self.vocab_sample_size, seed }
    }
}

#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    /// Probability of a structural hop (p_S).
    #[arg(long, default_value_t = 0.5)]
    pub ps: f64,
    /// Walks per node (r).
    #[arg(long, default_value_t = 10)]
    pub walks: usize,
    /// Hops per walk (l).
    #[arg(long, default_value_t = 5)]
    pub walk_length: usize,
    /// Candidates kept for a content hop (q).
    #[arg(long, default_value_t = 10)]
    pub top_q: usize,
}

impl WalkArgs {
    pub fn config(&self) -> WalkConfig {
        WalkConfig { walks: self.walks, walk_length: self.walk_length, structural_prob: self.ps, top_q: self.top_q }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModeArgs {
    /// When new labels become visible to other walks.
    #[arg(long, value_enum, default_value_t = ModeArg::Batch)]
    pub mode: ModeArg,
    /// Shorthand for `--mode immediate`.
    #[arg(long, conflicts_with = "mode")]
    pub immediate: bool,
    /// Lifetime of inferred labels, in time units.
    #[arg(long)]
    pub ttl: Option<u64>,
}

impl ModeArgs {
    pub fn options(&self, seed: u64) -> ClassifyOptions {
        let mode = match (self.immediate, self.mode) {
            (true, _) | (_, ModeArg::Immediate) => ApplyMode::Immediate,
            _ => ApplyMode::Batch,
        };
        ClassifyOptions { mode, ttl: self.ttl, seed }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub vocab: VocabArgs,
    #[command(flatten)]
    pub walk: WalkArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Directory for assignments.tsv and report.json; assignments go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub vocab: VocabArgs,
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// b values of the bound table.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_BOUND_B.to_vec())]
    pub bound_b: Vec<f64>,
    /// l values of the bound table.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_BOUND_L.to_vec())]
    pub bound_l: Vec<u64>,
    /// Directory for report.json and folds.csv; the report goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Number of distinct labels.
    #[arg(long)]
    pub labels: usize,
    #[arg(long, short = 'b', value_delimiter = ',', default_values_t = DEFAULT_BOUND_B.to_vec())]
    pub b: Vec<f64>,
    #[arg(long, short = 'l', value_delimiter = ',', default_values_t = DEFAULT_BOUND_L.to_vec())]
    pub l: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2)]
    pub communities: usize,
    #[arg(long, default_value_t = 100)]
    pub nodes_per_community: usize,
    #[arg(long, default_value_t = 0.2)]
    pub labeled_fraction: f64,
    #[arg(long, default_value_t = 0.1)]
    pub intra: f64,
    #[arg(long, default_value_t = 0.01)]
    pub inter: f64,
    #[arg(long, default_value_t = 10)]
    pub words_per_community: usize,
    #[arg(long, default_value_t = 0)]
    pub shared_words: usize,
    /// Probability that a token comes from the node's own community.
    #[arg(long, default_value_t = 1.0)]
    pub topic_prob: f64,
    #[arg(long, default_value_t = 8)]
    pub tokens: usize,
    /// Also write the visible dataset as events.jsonl.
    #[arg(long)]
    pub events: bool,
    #[arg(long)]
    pub out: PathBuf,
}

impl SynthArgs {
    pub fn spec(&self, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            communities: self.communities,
            nodes_per_community: self.nodes_per_community,
            labeled_fraction: self.labeled_fraction,
            intra_prob: self.intra,
            inter_prob: self.inter,
            words_per_community: self.words_per_community,
            shared_words: self.shared_words,
            topic_prob: self.topic_prob,
            tokens_per_node: self.tokens,
            seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long, value_enum, default_value_t = DirectionArg::Undirected)]
    pub direction: DirectionArg,
    /// Times at which to rebuild the vocabulary and classify.
    #[arg(long, value_delimiter = ',')]
    pub checkpoint: Vec<u64>,
    #[command(flatten)]
    pub vocab: VocabArgs,
    #[command(flatten)]
    pub walk: WalkArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Directory for per-checkpoint assignments and report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the final state as a canonical event stream.
    #[arg(long)]
    pub emit_events: Option<PathBuf>,
}
