//! Mining of top-k edge-diversified patterns from databases of small
//! labeled graphs.
//!
//! A pattern set is scored by the number of distinct database edges its
//! embeddings touch. The streaming miner ([`engine`]) keeps at most `k`
//! patterns in a [`index::PesIndex`] while enumerating connected subgraphs
//! depth-first, swapping a resident out whenever a new subgraph passes the
//! swap test. [`baselines`] holds the greedy and exact reference solvers.

extern crate self as ted_core;

pub mod baselines;
pub mod dfs;
pub mod embedding;
pub mod engine;
pub mod error;
pub mod graph;
pub mod index;
pub mod report;

#[cfg(test)]
#[path = "../tests/common/mod.rs"]
pub(crate) mod test_support;

pub use embedding::{CoverSet, Embedding, Matcher};
pub use error::{Result, TedError};
pub use graph::{EdgeRef, Graph, GraphDatabase, Label};
