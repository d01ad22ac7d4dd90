//! Plain-text outputs: run reports, annotated pattern files and the
//! pattern containment matrix.

use std::fmt::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::dfs::Pattern;
use crate::embedding::{contains, CoverSet};
use crate::engine::{MiningConfig, MiningResult};
use crate::graph::{serialize_graph, GraphDatabase};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub k: usize,
    pub emax: usize,
    pub alpha: String,
    pub minsup: f64,
    pub embedding_guard: u64,
    pub opt_candidate_cap: usize,
    pub time_limit_s: Option<f64>,
}

impl From<&MiningConfig> for ConfigEcho {
    fn from(c: &MiningConfig) -> Self {
        ConfigEcho {
            k: c.k,
            emax: c.emax,
            alpha: c.alpha.to_string(),
            minsup: c.minsup,
            embedding_guard: c.embedding_guard,
            opt_candidate_cap: c.opt_candidate_cap,
            time_limit_s: c.time_limit.map(|d| d.as_secs_f64()),
        }
    }
}

/// Metrics of one run. Field names are stable; `elapsed_ms` and
/// `index_time_ms` are the only timing-dependent fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub algorithm: String,
    pub config: ConfigEcho,
    pub complete: bool,
    pub patterns: usize,
    pub total_coverage: usize,
    pub total_edges: usize,
    /// `total_coverage/total_edges`, unreduced.
    pub coverage_fraction: String,
    pub coverage_rate: f64,
    pub elapsed_ms: f64,
    pub patterns_enumerated: u64,
    pub swaps: u64,
    pub prm_pruned: u64,
    pub index_size_bytes: usize,
    pub index_time_ms: f64,
}

impl RunReport {
    pub fn new(result: &MiningResult, cfg: &MiningConfig) -> RunReport {
        let m = &result.metrics;
        RunReport {
            schema: REPORT_SCHEMA,
            algorithm: result.algorithm.name().to_string(),
            config: cfg.into(),
            complete: result.complete,
            patterns: result.patterns.len(),
            total_coverage: result.total_coverage,
            total_edges: result.total_edges,
            coverage_fraction: format!("{}/{}", result.total_coverage, result.total_edges),
            coverage_rate: result.coverage_rate(),
            elapsed_ms: m.elapsed.as_secs_f64() * 1e3,
            patterns_enumerated: m.patterns_enumerated,
            swaps: m.swaps,
            prm_pruned: m.prm_pruned,
            index_size_bytes: m.index_size_bytes,
            index_time_ms: m.index_time.as_secs_f64() * 1e3,
        }
    }

    /// The report with timing fields zeroed, for comparing runs.
    pub fn without_timings(&self) -> RunReport {
        RunReport {
            elapsed_ms: 0.0,
            index_time_ms: 0.0,
            ..self.clone()
        }
    }
}

/// Patterns in interchange format, each preceded by a
/// `# cov=<n> support=<num>/<den> marginal=<n>` line. The marginal value
/// counts the edges a pattern adds over the patterns listed before it.
pub fn pattern_file(patterns: &[Pattern], db: &GraphDatabase) -> String {
    let mut out = String::new();
    let mut seen = CoverSet::new();
    for (i, p) in patterns.iter().enumerate() {
        let marginal = p.cover().difference(&seen).len();
        seen = seen.union(p.cover());
        let _ = writeln!(
            out,
            "# cov={} support={}/{} marginal={}",
            p.coverage(),
            p.support_count(),
            db.len(),
            marginal
        );
        out.push_str(&serialize_graph(&p.graph().clone().with_id(i), &[]));
    }
    out
}

/// `matrix[i][j]` is true iff graph `i` contains pattern `j`.
pub fn containment_matrix(patterns: &[Pattern], db: &GraphDatabase) -> Vec<Vec<bool>> {
    db.graphs()
        .par_iter()
        .map(|g| patterns.iter().map(|p| contains(p.graph(), g)).collect())
        .collect()
}

/// Text form: a header of pattern indices, one 0/1 row per graph and a
/// final row counting, per pattern, the graphs that do not contain it.
/// Without patterns only the header is written.
pub fn render_matrix(matrix: &[Vec<bool>], pattern_count: usize) -> String {
    let mut out = String::from("graph");
    for j in 0..pattern_count {
        let _ = write!(out, " p{j}");
    }
    out.push('\n');
    if pattern_count == 0 {
        return out;
    }
    let mut pruned = vec![0usize; pattern_count];
    for (i, row) in matrix.iter().enumerate() {
        let _ = write!(out, "G{i}");
        for (j, &hit) in row.iter().enumerate() {
            out.push_str(if hit { " 1" } else { " 0" });
            if !hit {
                pruned[j] += 1;
            }
        }
        out.push('\n');
    }
    out.push_str("pruned");
    for c in pruned {
        let _ = write!(out, " {c}");
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfs::enum_all_subgraphs;
    use crate::engine::{mine, Algorithm};
    use crate::graph::parse_database;
    use crate::test_support::db_toy;

    #[test]
    fn matrix_on_toy_edges() {
        let db = db_toy();
        let edges: Vec<Pattern> = enum_all_subgraphs(&db, 1).collect::<crate::Result<_>>().unwrap();
        let m = containment_matrix(&edges, &db);
        assert_eq!(m, vec![vec![true, true], vec![false, true]]);
        assert_eq!(render_matrix(&m, 2), "graph p0 p1\nG0 1 1\nG1 0 1\npruned 1 0\n");
        assert_eq!(render_matrix(&containment_matrix(&[], &db), 0), "graph\n");
    }

    #[test]
    fn pattern_file_reparses() {
        let db = db_toy();
        let cfg = crate::engine::MiningConfig::new(Algorithm::Ted, 2, 3);
        let r = mine(&db, &cfg).unwrap();
        let text = pattern_file(&r.patterns, &db);
        assert!(text.starts_with("# cov=3 support="));
        let back = parse_database(&text).unwrap();
        assert_eq!(back.len(), 2);
        for (g, p) in back.graphs().iter().zip(&r.patterns) {
            assert_eq!(&crate::dfs::min_dfs_code(g), p.code());
        }
        let report = RunReport::new(&r, &cfg);
        assert_eq!(report.schema, 1);
        assert_eq!(report.coverage_fraction, "4/4");
        assert!(report.index_time_ms <= report.elapsed_ms);
    }
}
