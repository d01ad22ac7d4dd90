//! Reference miners: greedy maximum coverage over a materialized pool,
//! the exact optimum by exhaustive subset search, and a support-ranked
//! selection.

use std::collections::HashMap;
use std::time::Instant;

use crate::dfs::{Extender, Pattern, SubgraphStream};
use crate::engine::{Algorithm, Deadline, MiningConfig, MiningResult, Metrics};
use crate::error::{Result, TedError};
use crate::graph::{EdgeRef, GraphDatabase};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoolKind {
    All,
    Frequent(f64),
}

/// A materialized set of pairwise non-isomorphic candidate patterns, in
/// enumeration order.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    patterns: Vec<Pattern>,
    kind: PoolKind,
    complete: bool,
}

impl CandidatePool {
    /// Enumerates the pool, failing once it grows past `limit` patterns.
    pub fn build(db: &GraphDatabase, cfg: &MiningConfig, kind: PoolKind, limit: usize) -> Result<CandidatePool> {
        Self::build_until(db, cfg, kind, limit, Deadline::after(None, Instant::now()))
    }

    pub(crate) fn build_until(
        db: &GraphDatabase,
        cfg: &MiningConfig,
        kind: PoolKind,
        limit: usize,
        deadline: Deadline,
    ) -> Result<CandidatePool> {
        let minsup = match kind {
            PoolKind::All => None,
            PoolKind::Frequent(m) => {
                if !(m > 0.0 && m <= 1.0) {
                    return Err(TedError::Config(format!("minsup {m} outside (0, 1]")));
                }
                Some(m)
            }
        };
        let mut patterns = Vec::new();
        let mut complete = true;
        for p in SubgraphStream::new(Extender::new(db, cfg.matcher()), cfg.emax, minsup) {
            if deadline.expired() {
                complete = false;
                break;
            }
            if patterns.len() == limit {
                return Err(TedError::PoolLimit { limit });
            }
            patterns.push(p?);
        }
        Ok(CandidatePool {
            patterns,
            kind,
            complete,
        })
    }

    pub fn from_patterns(patterns: Vec<Pattern>, kind: PoolKind) -> CandidatePool {
        CandidatePool {
            patterns,
            kind,
            complete: true,
        }
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn kind(&self) -> PoolKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

/// Greedy maximum coverage: `k` rounds, each taking the pattern with the
/// largest marginal gain (smaller code on ties). Stops early once no
/// pattern adds a new edge.
pub fn max_cover(pool: &CandidatePool, k: usize, db: &GraphDatabase) -> Vec<Pattern> {
    let mut covered = vec![false; db.total_edges()];
    let mut taken = vec![false; pool.len()];
    let mut out = Vec::new();
    for _ in 0..k {
        let mut best: Option<(usize, usize)> = None;
        for (i, p) in pool.patterns().iter().enumerate() {
            if taken[i] {
                continue;
            }
            let gain = p.cover().iter().filter(|&e| !covered[db.edge_index(e)]).count();
            let better = match best {
                None => true,
                Some((bi, bg)) => gain > bg || (gain == bg && p.code() < pool.patterns()[bi].code()),
            };
            if better {
                best = Some((i, gain));
            }
        }
        match best {
            Some((i, gain)) if gain > 0 => {
                taken[i] = true;
                let p = &pool.patterns()[i];
                for e in p.cover().iter() {
                    covered[db.edge_index(e)] = true;
                }
                out.push(p.clone());
            }
            _ => break,
        }
    }
    out
}

fn greedy(db: &GraphDatabase, cfg: &MiningConfig, kind: PoolKind, algorithm: Algorithm) -> Result<MiningResult> {
    let started = Instant::now();
    let deadline = Deadline::after(cfg.time_limit, started);
    let pool = CandidatePool::build_until(db, cfg, kind, cfg.pool_limit, deadline)?;
    let metrics = Metrics {
        patterns_enumerated: pool.len() as u64,
        ..Metrics::default()
    };
    let chosen = max_cover(&pool, cfg.k, db);
    Ok(MiningResult::from_selection(algorithm, chosen, db, metrics, pool.complete, started))
}

/// Greedy selection over every connected subgraph.
pub fn all_g(db: &GraphDatabase, cfg: &MiningConfig) -> Result<MiningResult> {
    greedy(db, cfg, PoolKind::All, Algorithm::AllG)
}

/// Greedy selection over the frequent subgraphs.
pub fn fsg_g(db: &GraphDatabase, cfg: &MiningConfig) -> Result<MiningResult> {
    greedy(db, cfg, PoolKind::Frequent(cfg.minsup), Algorithm::FsgG)
}

/// Swap-based selection over every connected subgraph, in enumeration
/// order.
pub fn all_t(db: &GraphDatabase, cfg: &MiningConfig) -> Result<MiningResult> {
    let mut r = crate::engine::ted_base(db, cfg)?;
    r.algorithm = Algorithm::AllT;
    Ok(r)
}

/// Swap-based selection over the frequent subgraphs.
pub fn fsg_t(db: &GraphDatabase, cfg: &MiningConfig) -> Result<MiningResult> {
    let mut r = crate::engine::fsg_t(db, cfg)?;
    r.algorithm = Algorithm::FsgT;
    Ok(r)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

struct SubsetSearch<'a> {
    masks: &'a [Vec<u64>],
    best_cov: u32,
    best: Vec<usize>,
    current: Vec<usize>,
    visited: u64,
    deadline: Deadline,
    timed_out: bool,
}

impl SubsetSearch<'_> {
    // Visits `size`-subsets in lexicographic index order; replaces the
    // incumbent only on strictly larger coverage.
    fn run(&mut self, start: usize, size: usize, acc: &[u64]) {
        if self.timed_out {
            return;
        }
        if self.current.len() == size {
            let cov: u32 = acc.iter().map(|w| w.count_ones()).sum();
            if cov > self.best_cov {
                self.best_cov = cov;
                self.best = self.current.clone();
            }
            self.visited += 1;
            if self.visited % 4096 == 0 && self.deadline.expired() {
                self.timed_out = true;
            }
            return;
        }
        let remaining = size - self.current.len();
        for i in start..=self.masks.len() - remaining {
            let next: Vec<u64> = acc.iter().zip(&self.masks[i]).map(|(a, b)| a | b).collect();
            self.current.push(i);
            self.run(i + 1, size, &next);
            self.current.pop();
        }
    }
}

/// The exact optimum by exhaustive search over all subsets of at most `k`
/// candidates. Among subsets with maximum coverage the one with the fewest
/// patterns wins, then the lexicographically smallest code sequence.
pub fn brute_force_optimal(db: &GraphDatabase, cfg: &MiningConfig) -> Result<MiningResult> {
    let started = Instant::now();
    let deadline = Deadline::after(cfg.time_limit, started);
    let cap = cfg.opt_candidate_cap;
    let mut patterns = Vec::new();
    for p in SubgraphStream::new(Extender::new(db, cfg.matcher()), cfg.emax, None) {
        patterns.push(p?);
        if patterns.len() > cap {
            // keep counting so the error names the real pool size
            let rest = SubgraphStream::new(Extender::new(db, cfg.matcher()), cfg.emax, None).count();
            return Err(TedError::OptCapacity {
                candidates: rest,
                cap,
                subsets: binomial(rest, cfg.k.min(rest)),
                subset_cap: cfg.opt_subset_cap,
            });
        }
    }
    let n = patterns.len();
    let size = cfg.k.min(n);
    let subsets = binomial(n, size);
    if subsets > cfg.opt_subset_cap {
        return Err(TedError::OptCapacity {
            candidates: n,
            cap,
            subsets,
            subset_cap: cfg.opt_subset_cap,
        });
    }
    patterns.sort_by(|a, b| a.code().cmp(b.code()));

    // dense bit positions over the edges some candidate covers
    let mut position: HashMap<EdgeRef, usize> = HashMap::new();
    for p in &patterns {
        for e in p.cover().iter() {
            let next = position.len();
            position.entry(e).or_insert(next);
        }
    }
    let words = position.len().div_ceil(64).max(1);
    let masks: Vec<Vec<u64>> = patterns
        .iter()
        .map(|p| {
            let mut m = vec![0u64; words];
            for e in p.cover().iter() {
                let b = position[&e];
                m[b / 64] |= 1 << (b % 64);
            }
            m
        })
        .collect();

    let mut search = SubsetSearch {
        masks: &masks,
        best_cov: 0,
        best: Vec::new(),
        current: Vec::new(),
        visited: 0,
        deadline,
        timed_out: false,
    };
    for s in 1..=size {
        search.run(0, s, &vec![0u64; words]);
    }
    let metrics = Metrics {
        patterns_enumerated: n as u64,
        ..Metrics::default()
    };
    let complete = !search.timed_out;
    let chosen: Vec<Pattern> = search.best.iter().map(|&i| patterns[i].clone()).collect();
    Ok(MiningResult::from_selection(Algorithm::Opt, chosen, db, metrics, complete, started))
}

/// The `k` patterns with the highest support (smaller code on ties).
pub fn top_k_frequent(db: &GraphDatabase, emax: usize, k: usize) -> Result<Vec<Pattern>> {
    let mut all: Vec<Pattern> = SubgraphStream::new(Extender::new(db, Default::default()), emax, None)
        .collect::<Result<_>>()?;
    all.sort_by(|a, b| {
        b.support_count()
            .cmp(&a.support_count())
            .then_with(|| a.code().cmp(b.code()))
    });
    all.truncate(k);
    Ok(all)
}
