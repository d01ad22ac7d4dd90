use thiserror::Error;

pub type Result<T> = std::result::Result<T, TedError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TedError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph {graph}: {message}")]
    Structure { graph: usize, message: String },

    #[error("embedding guard tripped: more than {limit} embeddings of one pattern in graph {graph}")]
    EmbeddingLimit { limit: u64, graph: usize },

    #[error("candidate pool exceeded {limit} patterns")]
    PoolLimit { limit: usize },

    #[error(
        "exact search infeasible: {candidates} candidates (cap {cap}), {subsets} subsets (cap {subset_cap})"
    )]
    OptCapacity {
        candidates: usize,
        cap: usize,
        subsets: u128,
        subset_cap: u128,
    },

    #[error("pattern index is full (k = {k})")]
    IndexFull { k: usize },

    #[error("pattern already resident in the index")]
    DuplicatePattern,

    #[error("pattern is not resident in the index")]
    AbsentPattern,

    #[error("pattern index is empty")]
    EmptyIndex,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("time limit of {millis} ms exceeded")]
    TimeLimit { millis: u64 },
}
