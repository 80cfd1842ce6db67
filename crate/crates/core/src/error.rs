use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge {0} -> {1}")]
    UnknownEdge(NodeId, NodeId),
    #[error("node {0} is already labeled")]
    AlreadyLabeled(NodeId),
    #[error("the graph has no labeled nodes")]
    NoLabeledNodes,
    #[error("word statistics have a zero total")]
    ZeroTotal,
    #[error("none of the sampled labeled nodes carries text")]
    EmptyCorpus,
    #[error("node {0} has no traversal neighbors")]
    DeadEnd(NodeId),
    #[error("node {0} reaches no node through a vocabulary word")]
    NoContentPath(NodeId),
    #[error("need at least {folds} labeled nodes for {folds} folds, found {labeled}")]
    TooFewLabeledNodes { labeled: usize, folds: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{source_name}:{line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },
    #[error("{source_name}:{line}: reference to unknown node id {id}")]
    UnknownReference {
        source_name: String,
        line: usize,
        id: u64,
    },
    #[error("event on line {line} has t={t}, earlier than the previous t={previous}")]
    OutOfOrderEvent { line: usize, t: u64, previous: u64 },
    #[error("node id {0} already exists")]
    DuplicateNode(u64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
