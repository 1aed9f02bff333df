use thiserror::Error;

use crate::graph::{NodeId, TopicId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: self-loop on node `{node}`")]
    SelfLoop { line: usize, node: String },

    #[error("unknown topic id {0}")]
    UnknownTopic(TopicId),

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("node {0} has no neighbours (dead end)")]
    DeadEnd(NodeId),

    #[error("no signed edge between {0} and {1} in the topic view")]
    MissingEdge(NodeId, NodeId),

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("topic {0} has an empty context vocabulary")]
    EmptyVocabulary(TopicId),

    #[error("could not draw a negative distinct from the positive context after {0} attempts")]
    NegativeRetriesExhausted(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Eval(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
