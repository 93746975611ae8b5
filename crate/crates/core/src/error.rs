use thiserror::Error;

/// Errors produced by graph construction, sampling, wiring and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("self-loop on node {node} is not allowed")]
    SelfLoop { node: usize },

    #[error("node id {node} is out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("undefined input: {0}")]
    UndefinedInput(String),

    #[error("community {community} has zero total degree")]
    DegenerateCommunity { community: usize },

    #[error("resolution window is undefined for a partition with fewer than two communities")]
    UndefinedWindow,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
