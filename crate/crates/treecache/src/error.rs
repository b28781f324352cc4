use thiserror::Error;

/// Errors produced by the library.
///
/// The variants are grouped by how a caller should react: bad inputs
/// (`InvalidNode`, `MalformedTree`, `Parse`, `InvalidParameter`,
/// `ContractViolation`), resource guards that refuse work instead of blowing
/// up (`SizeLimit`, `StateGuard`), and internal consistency failures that
/// indicate a bug and must never be swallowed (`InvariantViolation`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid node id {node}: tree has {node_count} nodes")]
    InvalidNode { node: u64, node_count: usize },

    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("tree too large for exhaustive search: {nodes} nodes exceeds limit {limit}")]
    SizeLimit { nodes: usize, limit: usize },

    #[error("state space too large: {states} states exceed guard {guard}")]
    StateGuard { states: usize, guard: usize },

    #[error("invariant violation at round {round}: {detail}")]
    InvariantViolation { round: u64, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invariant(round: u64, detail: impl Into<String>) -> Self {
        Error::InvariantViolation {
            round,
            detail: detail.into(),
        }
    }
}
