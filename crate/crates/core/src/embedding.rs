//! Subgraph-isomorphism embeddings and cover sets.
//!
//! Matching is plain backtracking: pattern vertices are visited in a
//! connected order rooted at pattern vertex 0, and every vertex after the
//! first draws its candidates from the neighbors of an already-matched
//! vertex. All embeddings are enumerated, automorphic ones included.

use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::error::{Result, TedError};
use crate::graph::{EdgeLabel, EdgeRef, Graph, GraphDatabase};

/// Upper bound on embeddings of one pattern in one data graph.
pub const DEFAULT_EMBEDDING_GUARD: u64 = 10_000_000;

/// A subgraph isomorphism: `mapping[i]` is the data vertex assigned to
/// pattern vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding {
    pub mapping: Vec<usize>,
}

/// Sorted, duplicate-free set of data edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CoverSet {
    refs: Vec<EdgeRef>,
}

impl CoverSet {
    pub fn new() -> CoverSet {
        CoverSet::default()
    }

    pub fn from_refs<I: IntoIterator<Item = EdgeRef>>(refs: I) -> CoverSet {
        let mut refs: Vec<EdgeRef> = refs.into_iter().collect();
        refs.sort_unstable();
        refs.dedup();
        CoverSet { refs }
    }

    /// Wraps a vector that is already sorted and deduplicated.
    pub(crate) fn from_sorted(refs: Vec<EdgeRef>) -> CoverSet {
        debug_assert!(refs.windows(2).all(|w| w[0] < w[1]));
        CoverSet { refs }
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        self.refs.iter().copied()
    }

    pub fn as_slice(&self) -> &[EdgeRef] {
        &self.refs
    }

    pub fn contains(&self, e: EdgeRef) -> bool {
        self.refs.binary_search(&e).is_ok()
    }

    /// The refs belonging to graph `graph_id`.
    pub fn in_graph(&self, graph_id: usize) -> &[EdgeRef] {
        let gid = graph_id as u32;
        let lo = self.refs.partition_point(|e| e.graph_id < gid);
        let hi = self.refs.partition_point(|e| e.graph_id <= gid);
        &self.refs[lo..hi]
    }

    /// Distinct graph ids touched, ascending.
    pub fn graph_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.refs.iter().map(|e| e.graph_id as usize).collect();
        ids.dedup();
        ids
    }

    pub fn union(&self, other: &CoverSet) -> CoverSet {
        let (a, b) = (&self.refs, &other.refs);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        CoverSet { refs: out }
    }

    pub fn difference(&self, other: &CoverSet) -> CoverSet {
        let mut out = Vec::with_capacity(self.refs.len());
        let mut j = 0;
        for &e in &self.refs {
            while j < other.refs.len() && other.refs[j] < e {
                j += 1;
            }
            if j >= other.refs.len() || other.refs[j] != e {
                out.push(e);
            }
        }
        CoverSet { refs: out }
    }

    pub fn is_subset(&self, other: &CoverSet) -> bool {
        self.difference(other).is_empty()
    }
}

impl FromIterator<EdgeRef> for CoverSet {
    fn from_iter<I: IntoIterator<Item = EdgeRef>>(iter: I) -> Self {
        CoverSet::from_refs(iter)
    }
}

// One step of the matching plan: which pattern vertex to bind, which
// already-bound neighbor supplies candidates, and the remaining edges back
// into the bound prefix that must also exist.
struct Step {
    vertex: usize,
    anchor: Option<(usize, EdgeLabel)>,
    checks: Vec<(usize, EdgeLabel)>,
}

fn plan(p: &Graph) -> Vec<Step> {
    let n = p.vertex_count();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    order.push(0);
    placed[0] = true;
    while order.len() < n {
        // smallest unplaced vertex adjacent to the placed prefix
        let next = (0..n)
            .find(|&v| !placed[v] && p.neighbors(v).iter().any(|&(w, _)| placed[w]))
            .expect("pattern is connected");
        placed[next] = true;
        order.push(next);
    }
    let mut position = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    order
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut back: Vec<(usize, EdgeLabel)> = p
                .neighbors(v)
                .iter()
                .filter(|&&(w, _)| position[w] < i)
                .map(|&(w, eid)| (w, p.edge(eid).label))
                .collect();
            back.sort_by_key(|&(w, _)| position[w]);
            let anchor = if back.is_empty() { None } else { Some(back.remove(0)) };
            Step {
                vertex: v,
                anchor,
                checks: back,
            }
        })
        .collect()
}

/// Backtracking matcher with an embedding-count guard.
#[derive(Debug, Clone, Copy)]
pub struct Matcher {
    limit: u64,
}

impl Default for Matcher {
    fn default() -> Self {
        Matcher {
            limit: DEFAULT_EMBEDDING_GUARD,
        }
    }
}

impl Matcher {
    pub fn new(limit: u64) -> Matcher {
        Matcher { limit }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn search<F>(&self, p: &Graph, g: &Graph, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        if p.vertex_count() > g.vertex_count() || p.edge_count() > g.edge_count() {
            return ControlFlow::Continue(());
        }
        let steps = plan(p);
        let mut mapping = vec![usize::MAX; p.vertex_count()];
        let mut used = vec![false; g.vertex_count()];
        extend(&steps, 0, p, g, &mut mapping, &mut used, &mut visit)
    }

    /// Calls `f` on every embedding of `p` into `g`; returns how many
    /// there were.
    pub fn for_each_embedding<F>(&self, p: &Graph, g: &Graph, mut f: F) -> Result<u64>
    where
        F: FnMut(&[usize]),
    {
        let mut count = 0u64;
        let flow = self.search(p, g, |m| {
            count += 1;
            if count > self.limit {
                return ControlFlow::Break(());
            }
            f(m);
            ControlFlow::Continue(())
        });
        match flow {
            ControlFlow::Break(()) => Err(TedError::EmbeddingLimit {
                limit: self.limit,
                graph: g.id(),
            }),
            ControlFlow::Continue(()) => Ok(count),
        }
    }

    pub fn embeddings(&self, p: &Graph, g: &Graph) -> Result<Vec<Embedding>> {
        let mut out = Vec::new();
        self.for_each_embedding(p, g, |m| {
            out.push(Embedding {
                mapping: m.to_vec(),
            })
        })?;
        Ok(out)
    }

    /// True iff `p` embeds in `g`; stops at the first embedding.
    pub fn contains(&self, p: &Graph, g: &Graph) -> bool {
        self.search(p, g, |_| ControlFlow::Break(())).is_break()
    }

    pub fn cover_set(&self, p: &Graph, g: &Graph) -> Result<CoverSet> {
        let mut hit = vec![false; g.edge_count()];
        self.for_each_embedding(p, g, |m| {
            for e in p.edges() {
                let eid = g
                    .edge_between(m[e.u], m[e.v])
                    .expect("embedding maps pattern edges onto data edges");
                hit[eid] = true;
            }
        })?;
        Ok(CoverSet::from_sorted(
            hit.iter()
                .enumerate()
                .filter(|&(_, &h)| h)
                .map(|(eid, _)| EdgeRef::new(g.id(), eid))
                .collect(),
        ))
    }

    pub fn cover_set_db(&self, p: &Graph, db: &GraphDatabase) -> Result<CoverSet> {
        let parts: Vec<CoverSet> = db
            .graphs()
            .par_iter()
            .with_min_len(16)
            .map(|g| self.cover_set(p, g))
            .collect::<Result<_>>()?;
        Ok(CoverSet::from_sorted(
            parts.into_iter().flat_map(|c| c.refs).collect(),
        ))
    }
}

fn extend<F>(
    steps: &[Step],
    depth: usize,
    p: &Graph,
    g: &Graph,
    mapping: &mut [usize],
    used: &mut [bool],
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    if depth == steps.len() {
        return visit(mapping);
    }
    let step = &steps[depth];
    let want = p.label(step.vertex);
    let mut try_candidate = |x: usize, mapping: &mut [usize], used: &mut [bool]| {
        if used[x] || g.label(x) != want {
            return ControlFlow::Continue(());
        }
        for &(w, label) in &step.checks {
            match g.edge_between(x, mapping[w]) {
                Some(eid) if g.edge(eid).label == label => {}
                _ => return ControlFlow::Continue(()),
            }
        }
        mapping[step.vertex] = x;
        used[x] = true;
        let flow = extend(steps, depth + 1, p, g, mapping, used, visit);
        used[x] = false;
        mapping[step.vertex] = usize::MAX;
        flow
    };
    match step.anchor {
        None => {
            for x in 0..g.vertex_count() {
                try_candidate(x, mapping, used)?;
            }
        }
        Some((w, label)) => {
            for &(x, eid) in g.neighbors(mapping[w]) {
                if g.edge(eid).label == label {
                    try_candidate(x, mapping, used)?;
                }
            }
        }
    }
    ControlFlow::Continue(())
}

pub fn enumerate_embeddings(p: &Graph, g: &Graph) -> Result<Vec<Embedding>> {
    Matcher::default().embeddings(p, g)
}

pub fn contains(p: &Graph, g: &Graph) -> bool {
    Matcher::default().contains(p, g)
}

pub fn cover_set(p: &Graph, g: &Graph) -> Result<CoverSet> {
    Matcher::default().cover_set(p, g)
}

pub fn cover_set_db(p: &Graph, db: &GraphDatabase) -> Result<CoverSet> {
    Matcher::default().cover_set_db(p, db)
}
