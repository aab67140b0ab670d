use thiserror::Error;

use crate::net::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cluster plan needs at least one head")]
    EmptyHeads,
    #[error("node {0} is not alive and cannot serve as a cluster head")]
    DeadHead(NodeId),
    #[error("node {0} appears more than once in the head list")]
    DuplicateHead(NodeId),
    #[error("node {0} is not part of the network")]
    UnknownNode(NodeId),
    #[error("head vector must have even length, got {0}")]
    OddDimension(usize),
    #[error("population is empty")]
    EmptyPopulation,
    #[error("no alive nodes")]
    NoAliveNodes,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown algorithm `{name}` (valid: {valid})")]
    UnknownAlgorithm { name: String, valid: String },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
