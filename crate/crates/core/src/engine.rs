//! Swap-based streaming miners and the algorithm dispatcher.
//!
//! Every streaming variant walks the right-most extension tree depth-first
//! with an explicit stack, offering each popped pattern to the
//! [`PesIndex`] through [`pattern_maintain`]. Two optional refinements sit
//! on top of the plain walk:
//!
//! * promising-extension pruning ([`prm_admit`]), which skips a whole
//!   subtree when no pattern in it could pass the swap test, and
//! * initial pattern selection ([`ips_initial`]), which fills the index
//!   with hill-climbed patterns before the walk starts.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::baselines;
use crate::dfs::{meets_minsup, DfsCode, Extender, Pattern};
use crate::embedding::{CoverSet, Matcher, DEFAULT_EMBEDDING_GUARD};
use crate::error::{Result, TedError};
use crate::graph::GraphDatabase;
use crate::index::{Alpha, PesIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Base,
    Prm,
    Ips,
    Ted,
    AllG,
    FsgG,
    AllT,
    FsgT,
    Opt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Base,
        Algorithm::Prm,
        Algorithm::Ips,
        Algorithm::Ted,
        Algorithm::AllG,
        Algorithm::FsgG,
        Algorithm::AllT,
        Algorithm::FsgT,
        Algorithm::Opt,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Base => "base",
            Algorithm::Prm => "prm",
            Algorithm::Ips => "ips",
            Algorithm::Ted => "ted",
            Algorithm::AllG => "all_g",
            Algorithm::FsgG => "fsg_g",
            Algorithm::AllT => "all_t",
            Algorithm::FsgT => "fsg_t",
            Algorithm::Opt => "opt",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = TedError;

    fn from_str(s: &str) -> Result<Algorithm> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Algorithm::ALL.iter().map(Algorithm::name).collect();
                TedError::Config(format!("unknown algorithm `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningConfig {
    pub k: usize,
    pub emax: usize,
    pub alpha: Alpha,
    pub minsup: f64,
    pub algorithm: Algorithm,
    pub embedding_guard: u64,
    /// Largest candidate pool the exact search accepts.
    pub opt_candidate_cap: usize,
    /// Largest number of k-subsets the exact search accepts.
    pub opt_subset_cap: u128,
    /// Largest candidate pool the materializing baselines build.
    pub pool_limit: usize,
    pub time_limit: Option<Duration>,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            k: 5,
            emax: 10,
            alpha: Alpha::ONE,
            minsup: 0.2,
            algorithm: Algorithm::Ted,
            embedding_guard: DEFAULT_EMBEDDING_GUARD,
            opt_candidate_cap: 25,
            opt_subset_cap: 10_000_000,
            pool_limit: 1_000_000,
            time_limit: None,
        }
    }
}

impl MiningConfig {
    pub fn new(algorithm: Algorithm, k: usize, emax: usize) -> MiningConfig {
        MiningConfig {
            algorithm,
            k,
            emax,
            ..MiningConfig::default()
        }
    }

    pub fn with_alpha(mut self, alpha: Alpha) -> MiningConfig {
        self.alpha = alpha;
        self
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> MiningConfig {
        self.algorithm = algorithm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(TedError::Config("k must be at least 1".into()));
        }
        if self.emax == 0 {
            return Err(TedError::Config("emax must be at least 1".into()));
        }
        if !(self.minsup > 0.0 && self.minsup <= 1.0) {
            return Err(TedError::Config(format!("minsup {} outside (0, 1]", self.minsup)));
        }
        if self.embedding_guard == 0 {
            return Err(TedError::Config("embedding guard must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn matcher(&self) -> Matcher {
        Matcher::new(self.embedding_guard)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub elapsed: Duration,
    /// Accepted swaps (evictions); fill-phase inserts are not counted.
    pub swaps: u64,
    pub patterns_enumerated: u64,
    pub prm_pruned: u64,
    pub index_size_bytes: usize,
    pub index_time: Duration,
}

#[derive(Debug, Clone)]
pub struct MiningResult {
    pub algorithm: Algorithm,
    pub patterns: Vec<Pattern>,
    pub total_coverage: usize,
    pub total_edges: usize,
    pub metrics: Metrics,
    /// False when the time limit cut the run short.
    pub complete: bool,
}

impl MiningResult {
    pub fn coverage_rate(&self) -> f64 {
        if self.total_edges == 0 {
            0.0
        } else {
            self.total_coverage as f64 / self.total_edges as f64
        }
    }

    pub fn codes(&self) -> Vec<DfsCode> {
        self.patterns.iter().map(|p| p.code().clone()).collect()
    }

    /// Builds a result for an externally chosen pattern list, indexing it
    /// once to obtain the size and maintenance figures.
    pub(crate) fn from_selection(
        algorithm: Algorithm,
        patterns: Vec<Pattern>,
        db: &GraphDatabase,
        mut metrics: Metrics,
        complete: bool,
        started: Instant,
    ) -> MiningResult {
        let idx = PesIndex::from_patterns(patterns.len().max(1), &patterns).expect("selection is duplicate-free");
        metrics.index_size_bytes = idx.size_bytes();
        metrics.index_time = idx.maintenance_time();
        metrics.elapsed = started.elapsed();
        MiningResult {
            algorithm,
            total_coverage: idx.total_coverage(),
            total_edges: db.total_edges(),
            patterns,
            metrics,
            complete,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Deadline(Option<Instant>);

impl Deadline {
    pub(crate) fn after(limit: Option<Duration>, from: Instant) -> Deadline {
        Deadline(limit.map(|d| from + d))
    }

    pub(crate) fn expired(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}

/// What [`pattern_maintain`] did with a candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Maintained {
    /// Added during the fill phase.
    Inserted,
    /// Replaced the minimum-loss resident `out`.
    Swapped {
        out: DfsCode,
        score_l: usize,
        score_b: usize,
    },
    /// Failed the swap test.
    Rejected { score_l: usize, score_b: usize },
    /// Already resident.
    Resident,
}

impl Maintained {
    pub fn changed(&self) -> bool {
        matches!(self, Maintained::Inserted | Maintained::Swapped { .. })
    }
}

/// Offers `g` to the resident set: inserted while fewer than `k` patterns
/// are resident, otherwise swapped in for the minimum-loss pattern when
/// the swap test passes.
pub fn pattern_maintain(idx: &mut PesIndex, g: &Pattern, cfg: &MiningConfig) -> Maintained {
    if idx.contains(g.code()) {
        return Maintained::Resident;
    }
    if !idx.is_full() {
        idx.insert(g.clone()).expect("room for a new pattern");
        return Maintained::Inserted;
    }
    let start = Instant::now();
    let (score_l, out) = match idx.min_loss() {
        Ok((s, p)) => (s, p.code().clone()),
        // k = 0 cannot hold anything
        Err(_) => return Maintained::Rejected { score_l: 0, score_b: 0 },
    };
    idx.charge(start.elapsed());
    let score_b = idx.timed_benefit(g.cover());
    let threshold = cfg.alpha.threshold(score_l, idx.total_coverage(), idx.k());
    if threshold.exceeded_by(score_b) {
        idx.swap(&out, g.clone()).expect("swap preconditions checked");
        Maintained::Swapped { out, score_l, score_b }
    } else {
        Maintained::Rejected { score_l, score_b }
    }
}

/// Upper bound on the benefit any pattern in the subtree rooted at `g`
/// can reach: the uncovered edges of the graphs that contain `g`.
/// Descendants only occur in a subset of those graphs.
pub fn subtree_benefit_bound(g: &Pattern, idx: &PesIndex, db: &GraphDatabase) -> usize {
    g.containing_ids()
        .iter()
        .map(|&i| db.graph(i).edge_count() - idx.covered_in_graph(i))
        .sum()
}

/// Should the subtree rooted at `g` be explored? Always while the
/// resident set is not full; afterwards only if the benefit bound reaches
/// the current swap threshold.
pub fn prm_admit(g: &Pattern, idx: &PesIndex, db: &GraphDatabase, cfg: &MiningConfig) -> bool {
    if !idx.is_full() {
        return true;
    }
    let Ok((score_l, _)) = idx.min_loss() else {
        return true;
    };
    let threshold = cfg.alpha.threshold(score_l, idx.total_coverage(), idx.k());
    threshold.met_by(subtree_benefit_bound(g, idx, db))
}

/// Hill-climbs from every one-edge pattern towards the child with the
/// largest coverage, then keeps the `k` grown patterns with the largest
/// coverage (smaller code first on ties).
pub fn ips_initial(db: &GraphDatabase, cfg: &MiningConfig) -> Result<Vec<Pattern>> {
    ips_with(&Extender::new(db, cfg.matcher()), cfg, &mut 0)
}

fn ips_with(ext: &Extender<'_>, cfg: &MiningConfig, enumerated: &mut u64) -> Result<Vec<Pattern>> {
    let mut grown: Vec<Pattern> = Vec::new();
    for root in ext.seeds() {
        let mut cur = root;
        while cur.edge_count() < cfg.emax {
            let children = ext.children(&cur)?;
            *enumerated += children.len() as u64;
            // children arrive in code order, so the first maximum wins ties
            let best = children
                .into_iter()
                .reduce(|a, b| if b.coverage() > a.coverage() { b } else { a });
            match best {
                Some(c) if c.coverage() > cur.coverage() => cur = c,
                _ => break,
            }
        }
        if !grown.iter().any(|p| p.code() == cur.code()) {
            grown.push(cur);
        }
    }
    grown.sort_by(|a, b| b.coverage().cmp(&a.coverage()).then_with(|| a.code().cmp(b.code())));
    grown.truncate(cfg.k);
    Ok(grown)
}

#[derive(Debug, Clone, Copy, Default)]
struct StreamOptions {
    prm: bool,
    ips: bool,
    minsup: Option<f64>,
}

fn stream_mine(db: &GraphDatabase, cfg: &MiningConfig, opts: StreamOptions) -> Result<MiningResult> {
    let started = Instant::now();
    let deadline = Deadline::after(cfg.time_limit, started);
    let ext = Extender::new(db, cfg.matcher());
    let mut idx = PesIndex::new(cfg.k);
    let mut metrics = Metrics::default();
    let mut complete = true;

    if opts.ips {
        for p in ips_with(&ext, cfg, &mut metrics.patterns_enumerated)? {
            idx.insert(p)?;
        }
    }

    let frequent = |p: &Pattern| {
        opts.minsup
            .is_none_or(|m| meets_minsup(p.support_count(), db.len(), m))
    };
    let mut stack: Vec<Pattern> = ext.seeds().into_iter().filter(|p| frequent(p)).collect();
    stack.reverse();

    while let Some(g) = stack.pop() {
        if deadline.expired() {
            complete = false;
            break;
        }
        metrics.patterns_enumerated += 1;
        if opts.prm && g.edge_count() > 1 {
            let start = Instant::now();
            let admit = prm_admit(&g, &idx, db, cfg);
            idx.charge(start.elapsed());
            if !admit {
                metrics.prm_pruned += 1;
                continue;
            }
        }
        if let Maintained::Swapped { .. } = pattern_maintain(&mut idx, &g, cfg) {
            metrics.swaps += 1;
        }
        if g.edge_count() < cfg.emax {
            let children = ext.children(&g)?;
            stack.extend(children.into_iter().rev().filter(|c| frequent(c)));
        }
    }

    metrics.index_size_bytes = idx.size_bytes();
    metrics.index_time = idx.maintenance_time();
    metrics.elapsed = started.elapsed();
    Ok(MiningResult {
        algorithm: cfg.algorithm,
        patterns: idx.patterns().into_iter().cloned().collect(),
        total_coverage: idx.total_coverage(),
        total_edges: db.total_edges(),
        metrics,
        complete,
    })
}

/// The plain swap-based walk over every connected subgraph.
pub fn ted_base(db: &GraphDatabase, cfg: &MiningConfig) -> Result<MiningResult> {
    stream_mine(db, cfg, StreamOptions::default())
}

/// The walk with both pruning and initial selection enabled.
pub fn ted(db: &GraphDatabase, cfg: &MiningConfig) -> Result<MiningResult> {
    stream_mine(
        db,
        cfg,
        StreamOptions {
            prm: true,
            ips: true,
            minsup: None,
        },
    )
}

/// The swap-based walk restricted to frequent patterns.
pub fn fsg_t(db: &GraphDatabase, cfg: &MiningConfig) -> Result<MiningResult> {
    stream_mine(
        db,
        cfg,
        StreamOptions {
            minsup: Some(cfg.minsup),
            ..StreamOptions::default()
        },
    )
}

/// Runs `cfg.algorithm` on `db`.
pub fn mine(db: &GraphDatabase, cfg: &MiningConfig) -> Result<MiningResult> {
    cfg.validate()?;
    if db.is_empty() {
        return Err(TedError::Config("the database holds no graphs".into()));
    }
    match cfg.algorithm {
        Algorithm::Base | Algorithm::AllT => ted_base(db, cfg),
        Algorithm::Prm => stream_mine(
            db,
            cfg,
            StreamOptions {
                prm: true,
                ..StreamOptions::default()
            },
        ),
        Algorithm::Ips => stream_mine(
            db,
            cfg,
            StreamOptions {
                ips: true,
                ..StreamOptions::default()
            },
        ),
        Algorithm::Ted => ted(db, cfg),
        Algorithm::FsgT => fsg_t(db, cfg),
        Algorithm::AllG => baselines::all_g(db, cfg),
        Algorithm::FsgG => baselines::fsg_g(db, cfg),
        Algorithm::Opt => baselines::brute_force_optimal(db, cfg),
    }
}

/// Union of the cover sets of `patterns`.
pub fn union_cover<'a, I: IntoIterator<Item = &'a Pattern>>(patterns: I) -> CoverSet {
    patterns
        .into_iter()
        .fold(CoverSet::new(), |acc, p| acc.union(p.cover()))
}
