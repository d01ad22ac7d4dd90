//! Private-edge-set index over the resident pattern set.
//!
//! The index keeps, for at most `k` resident patterns:
//!
//! * the total coverage `|Cov(P, D)|`,
//! * each pattern's private coverage `|pCov(p)|` (edges no other resident
//!   covers),
//! * the reverse cover set `rCov(e)` of every covered edge,
//! * the reverse counting cells `rCnt(i)` grouping patterns by private
//!   coverage,
//! * the pattern with minimum private coverage.
//!
//! Removing a resident uncovers exactly its private edges, so the minimum
//! loss score is the private coverage of the first pattern in the lowest
//! non-empty cell. A candidate's benefit is the number of its edges with an
//! empty reverse cover set.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use crate::dfs::{DfsCode, Pattern};
use crate::embedding::CoverSet;
use crate::error::{Result, TedError};
use crate::graph::EdgeRef;

/// Swap threshold weight in `[0, 1]`, held as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alpha {
    num: u64,
    den: u64,
}

const MAX_FRACTION_DIGITS: usize = 18;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Alpha {
    pub const ONE: Alpha = Alpha { num: 1, den: 1 };
    pub const ZERO: Alpha = Alpha { num: 0, den: 1 };

    pub fn from_ratio(num: u64, den: u64) -> Result<Alpha> {
        if den == 0 || num > den {
            return Err(TedError::Config(format!("alpha {num}/{den} outside [0, 1]")));
        }
        let g = gcd(num, den).max(1);
        Ok(Alpha {
            num: num / g,
            den: den / g,
        })
    }

    /// Parses a plain decimal such as `1`, `0.5` or `.25`.
    pub fn parse(s: &str) -> Result<Alpha> {
        let bad = || TedError::Config(format!("alpha `{s}` is not a decimal in [0, 1]"));
        let s = s.trim();
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if (int.is_empty() && frac.is_empty())
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let frac = frac.trim_end_matches('0');
        if frac.len() > MAX_FRACTION_DIGITS {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let frac_val: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int
            .checked_mul(den)
            .and_then(|x| x.checked_add(frac_val))
            .ok_or_else(bad)?;
        Alpha::from_ratio(num, den).map_err(|_| bad())
    }

    /// Converts through the shortest decimal representation of `x`, so
    /// `0.1` means one tenth.
    pub fn new(x: f64) -> Result<Alpha> {
        if !x.is_finite() || !(0.0..=1.0).contains(&x) {
            return Err(TedError::Config(format!("alpha {x} outside [0, 1]")));
        }
        Alpha::parse(&format!("{x}"))
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `(1 + alpha) * score_l + (1 - alpha) * total / k`, exactly.
    pub fn threshold(&self, score_l: usize, total_coverage: usize, k: usize) -> Threshold {
        let (a, b) = (self.num as u128, self.den as u128);
        let k = k.max(1) as u128;
        Threshold {
            num: (b + a) * score_l as u128 * k + (b - a) * total_coverage as u128,
            den: b * k,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A non-negative rational swap threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    num: u128,
    den: u128,
}

impl Threshold {
    /// `x > threshold`
    pub fn exceeded_by(&self, x: usize) -> bool {
        x as u128 * self.den > self.num
    }

    /// `x >= threshold`
    pub fn met_by(&self, x: usize) -> bool {
        x as u128 * self.den >= self.num
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// The swap test: admit a candidate with benefit `score_b` in place of the
/// minimum-loss resident iff
/// `score_b > (1 + alpha) * score_l + (1 - alpha) * total_coverage / k`.
pub fn swap_decision(score_b: usize, score_l: usize, alpha: Alpha, total_coverage: usize, k: usize) -> bool {
    alpha.threshold(score_l, total_coverage, k).exceeded_by(score_b)
}

#[derive(Debug, Clone)]
struct Resident {
    pattern: Pattern,
    private: usize,
    seq: u64,
}

/// Coverage bookkeeping for up to `k` resident patterns, keyed by canonical
/// code.
#[derive(Debug, Clone)]
pub struct PesIndex {
    k: usize,
    slots: Vec<Option<Resident>>,
    by_code: HashMap<DfsCode, usize>,
    rcov: HashMap<EdgeRef, Vec<u32>>,
    // private coverage -> (insertion seq, slot)
    rcnt: BTreeMap<usize, BTreeSet<(u64, usize)>>,
    total_coverage: usize,
    covered_per_graph: HashMap<u32, usize>,
    next_seq: u64,
    elapsed: Duration,
}

/// Comparable view of all index components, keyed by pattern code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSnapshot {
    pub total_coverage: usize,
    pub private_cov: BTreeMap<DfsCode, usize>,
    pub rcov: BTreeMap<EdgeRef, BTreeSet<DfsCode>>,
    pub rcnt: BTreeMap<usize, BTreeSet<DfsCode>>,
    pub p_min: Option<DfsCode>,
    pub patterns: BTreeMap<DfsCode, CoverSet>,
}

impl PesIndex {
    pub fn new(k: usize) -> PesIndex {
        PesIndex {
            k,
            slots: Vec::with_capacity(k),
            by_code: HashMap::with_capacity(k),
            rcov: HashMap::new(),
            rcnt: BTreeMap::new(),
            total_coverage: 0,
            covered_per_graph: HashMap::new(),
            next_seq: 0,
            elapsed: Duration::ZERO,
        }
    }

    /// Builds an index by inserting `patterns` in order.
    pub fn from_patterns<'p, I>(k: usize, patterns: I) -> Result<PesIndex>
    where
        I: IntoIterator<Item = &'p Pattern>,
    {
        let mut idx = PesIndex::new(k);
        for p in patterns {
            idx.insert(p.clone())?;
        }
        Ok(idx)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.by_code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_code.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.len() >= self.k
    }

    pub fn total_coverage(&self) -> usize {
        self.total_coverage
    }

    pub fn contains(&self, code: &DfsCode) -> bool {
        self.by_code.contains_key(code)
    }

    pub fn private_coverage(&self, code: &DfsCode) -> Option<usize> {
        self.by_code
            .get(code)
            .map(|&s| self.resident(s).private)
    }

    /// Resident patterns in insertion order.
    pub fn patterns(&self) -> Vec<&Pattern> {
        let mut rs: Vec<&Resident> = self.slots.iter().flatten().collect();
        rs.sort_by_key(|r| r.seq);
        rs.into_iter().map(|r| &r.pattern).collect()
    }

    /// Is `e` covered by some resident?
    pub fn is_covered(&self, e: EdgeRef) -> bool {
        self.rcov.contains_key(&e)
    }

    /// Covered edges inside graph `graph_id`.
    pub fn covered_in_graph(&self, graph_id: usize) -> usize {
        self.covered_per_graph.get(&(graph_id as u32)).copied().unwrap_or(0)
    }

    /// Number of residents covering `e`.
    pub fn owners(&self, e: EdgeRef) -> usize {
        self.rcov.get(&e).map_or(0, Vec::len)
    }

    /// Time spent inside index operations so far.
    pub fn maintenance_time(&self) -> Duration {
        self.elapsed
    }

    fn resident(&self, slot: usize) -> &Resident {
        self.slots[slot].as_ref().expect("live slot")
    }

    fn move_cell(&mut self, slot: usize, from: usize, to: usize) {
        let seq = self.resident(slot).seq;
        if let Some(cell) = self.rcnt.get_mut(&from) {
            cell.remove(&(seq, slot));
            if cell.is_empty() {
                self.rcnt.remove(&from);
            }
        }
        self.rcnt.entry(to).or_default().insert((seq, slot));
        self.slots[slot].as_mut().expect("live slot").private = to;
    }

    pub fn insert(&mut self, p: Pattern) -> Result<()> {
        let start = Instant::now();
        let out = self.insert_inner(p);
        self.elapsed += start.elapsed();
        out
    }

    fn insert_inner(&mut self, p: Pattern) -> Result<()> {
        if self.is_full() {
            return Err(TedError::IndexFull { k: self.k });
        }
        if self.by_code.contains_key(p.code()) {
            return Err(TedError::DuplicatePattern);
        }
        let slot = match self.slots.iter().position(Option::is_none) {
            Some(s) => s,
            None => {
                self.slots.push(None);
                self.slots.len() - 1
            }
        };
        let seq = self.next_seq;
        self.next_seq += 1;
        self.slots[slot] = Some(Resident {
            pattern: p,
            private: 0,
            seq,
        });
        let refs: Vec<EdgeRef> = self.resident(slot).pattern.cover().iter().collect();
        let mut private = 0;
        for e in refs {
            let owners = self.rcov.entry(e).or_default();
            owners.push(slot as u32);
            match owners.len() {
                1 => {
                    self.total_coverage += 1;
                    *self.covered_per_graph.entry(e.graph_id).or_default() += 1;
                    private += 1;
                }
                2 => {
                    let other = owners[0] as usize;
                    let was = self.resident(other).private;
                    self.move_cell(other, was, was - 1);
                }
                _ => {}
            }
        }
        self.slots[slot].as_mut().expect("live slot").private = private;
        self.rcnt.entry(private).or_default().insert((seq, slot));
        let code = self.resident(slot).pattern.code().clone();
        self.by_code.insert(code, slot);
        Ok(())
    }

    /// Removes the resident with `code` and returns it.
    pub fn delete(&mut self, code: &DfsCode) -> Result<Pattern> {
        let start = Instant::now();
        let out = self.delete_inner(code);
        self.elapsed += start.elapsed();
        out
    }

    fn delete_inner(&mut self, code: &DfsCode) -> Result<Pattern> {
        let slot = self.by_code.remove(code).ok_or(TedError::AbsentPattern)?;
        let Resident {
            pattern,
            private,
            seq,
        } = self.slots[slot].take().expect("live slot");
        if let Some(cell) = self.rcnt.get_mut(&private) {
            cell.remove(&(seq, slot));
            if cell.is_empty() {
                self.rcnt.remove(&private);
            }
        }
        for e in pattern.cover().iter() {
            let owners = self.rcov.get_mut(&e).expect("covered edge is indexed");
            owners.retain(|&s| s as usize != slot);
            match owners.len() {
                0 => {
                    self.rcov.remove(&e);
                    self.total_coverage -= 1;
                    let left = self.covered_per_graph.get_mut(&e.graph_id).expect("graph has covered edges");
                    *left -= 1;
                    if *left == 0 {
                        self.covered_per_graph.remove(&e.graph_id);
                    }
                }
                1 => {
                    let other = owners[0] as usize;
                    let was = self.resident(other).private;
                    self.move_cell(other, was, was + 1);
                }
                _ => {}
            }
        }
        Ok(pattern)
    }

    /// Replaces resident `out` by `incoming`: a delete followed by an
    /// insert. Nothing changes if either precondition fails.
    pub fn swap(&mut self, out: &DfsCode, incoming: Pattern) -> Result<Pattern> {
        if self.by_code.contains_key(incoming.code()) {
            return Err(TedError::DuplicatePattern);
        }
        if !self.by_code.contains_key(out) {
            return Err(TedError::AbsentPattern);
        }
        let removed = self.delete(out)?;
        self.insert(incoming)?;
        Ok(removed)
    }

    /// The minimum private coverage and its pattern; ties go to the
    /// earliest-inserted resident.
    pub fn min_loss(&self) -> Result<(usize, &Pattern)> {
        let (&score, cell) = self.rcnt.first_key_value().ok_or(TedError::EmptyIndex)?;
        let &(_, slot) = cell.first().expect("cells are never empty");
        Ok((score, &self.resident(slot).pattern))
    }

    /// Edges of `cov` no resident covers yet.
    pub fn benefit(&self, cov: &CoverSet) -> usize {
        cov.iter().filter(|e| !self.rcov.contains_key(e)).count()
    }

    /// Like [`benefit`](Self::benefit) but charged to maintenance time.
    pub(crate) fn timed_benefit(&mut self, cov: &CoverSet) -> usize {
        let start = Instant::now();
        let b = self.benefit(cov);
        self.elapsed += start.elapsed();
        b
    }

    pub(crate) fn charge(&mut self, d: Duration) {
        self.elapsed += d;
    }

    /// Union of all resident cover sets.
    pub fn covered(&self) -> CoverSet {
        CoverSet::from_refs(self.rcov.keys().copied())
    }

    pub fn snapshot(&self) -> IndexSnapshot {
        let code_of = |slot: u32| self.resident(slot as usize).pattern.code().clone();
        IndexSnapshot {
            total_coverage: self.total_coverage,
            private_cov: self
                .by_code
                .iter()
                .map(|(c, &s)| (c.clone(), self.resident(s).private))
                .collect(),
            rcov: self
                .rcov
                .iter()
                .map(|(&e, owners)| (e, owners.iter().map(|&s| code_of(s)).collect()))
                .collect(),
            rcnt: self
                .rcnt
                .iter()
                .map(|(&i, cell)| (i, cell.iter().map(|&(_, s)| code_of(s as u32)).collect()))
                .collect(),
            p_min: self.min_loss().ok().map(|(_, p)| p.code().clone()),
            patterns: self
                .by_code
                .iter()
                .map(|(c, &s)| (c.clone(), self.resident(s).pattern.cover().clone()))
                .collect(),
        }
    }

    /// A fresh index holding the same residents, inserted in the same order.
    pub fn rebuilt(&self) -> PesIndex {
        let residents: Vec<Pattern> = self.patterns().into_iter().cloned().collect();
        let mut idx = PesIndex::new(self.k);
        for p in residents {
            idx.insert(p).expect("residents are distinct and fit");
        }
        idx
    }

    /// Compact binary encoding of the index. Cover sets are not stored
    /// separately; they are recoverable from the reverse cover sets.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut rs: Vec<(usize, &Resident)> = self
            .slots
            .iter()
            .enumerate()
            .filter_map(|(s, r)| r.as_ref().map(|r| (s, r)))
            .collect();
        rs.sort_by_key(|(_, r)| r.seq);
        let rank: HashMap<usize, usize> = rs.iter().enumerate().map(|(i, &(s, _))| (s, i)).collect();

        put_varint(&mut out, self.k as u64);
        put_varint(&mut out, self.total_coverage as u64);
        put_varint(&mut out, rs.len() as u64);
        for (_, r) in &rs {
            put_varint(&mut out, r.private as u64);
            let tuples = r.pattern.code().tuples();
            put_varint(&mut out, tuples.len() as u64);
            for t in tuples {
                put_varint(&mut out, t.from as u64);
                put_varint(&mut out, t.to as u64);
                for l in [t.from_label, t.edge_label, t.to_label] {
                    put_varint(&mut out, l.as_str().len() as u64);
                    out.extend_from_slice(l.as_str().as_bytes());
                }
            }
        }
        put_varint(&mut out, self.rcnt.len() as u64);
        for (&count, cell) in &self.rcnt {
            put_varint(&mut out, count as u64);
            put_varint(&mut out, cell.len() as u64);
            for &(_, s) in cell {
                put_varint(&mut out, rank[&s] as u64);
            }
        }
        put_varint(&mut out, self.min_loss().map_or(0, |(_, p)| rank[&self.by_code[p.code()]] as u64 + 1));

        // rCov: per touched graph, one k-bit owner mask per edge id up to
        // the largest covered one
        let mut edges: Vec<(&EdgeRef, &Vec<u32>)> = self.rcov.iter().collect();
        edges.sort_unstable_by_key(|(e, _)| **e);
        let mut i = 0;
        let mut prev_graph = 0u64;
        let width = rs.len().max(1);
        while i < edges.len() {
            let gid = edges[i].0.graph_id;
            let mut j = i;
            while j < edges.len() && edges[j].0.graph_id == gid {
                j += 1;
            }
            let span = edges[j - 1].0.edge_id as usize + 1;
            put_varint(&mut out, gid as u64 - prev_graph);
            put_varint(&mut out, span as u64);
            prev_graph = gid as u64;
            let mut bits = vec![0u8; (span * width).div_ceil(8)];
            for (e, owners) in &edges[i..j] {
                for &s in owners.iter() {
                    let bit = e.edge_id as usize * width + rank[&(s as usize)];
                    bits[bit / 8] |= 1 << (bit % 8);
                }
            }
            out.extend_from_slice(&bits);
            i = j;
        }
        out
    }

    pub fn size_bytes(&self) -> usize {
        self.encode().len()
    }
}

fn put_varint(out: &mut Vec<u8>, mut x: u64) {
    loop {
        let byte = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn union_of<'a, I: IntoIterator<Item = &'a Pattern>>(ps: I) -> CoverSet {
    ps.into_iter()
        .fold(CoverSet::new(), |acc, p| acc.union(p.cover()))
}

/// Loss score by direct set algebra: the drop in total coverage when `p`
/// leaves `set`.
pub fn loss_score_naive(set: &[Pattern], p: &Pattern) -> Result<usize> {
    if !set.iter().any(|q| q.code() == p.code()) {
        return Err(TedError::AbsentPattern);
    }
    let all = union_of(set);
    let rest = union_of(set.iter().filter(|q| q.code() != p.code()));
    Ok(all.difference(&rest).len())
}

/// Benefit score by direct set algebra: the gain in total coverage when `g`
/// joins `set`.
pub fn benefit_score_naive(set: &[Pattern], g: &Pattern) -> Result<usize> {
    if set.iter().any(|q| q.code() == g.code()) {
        return Err(TedError::DuplicatePattern);
    }
    let before = union_of(set);
    Ok(before.union(g.cover()).difference(&before).len())
}
