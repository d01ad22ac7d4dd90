//! DFS codes, minimum-code canonicalization and right-most extension.
//!
//! Codes follow gSpan's lexicographic order. A pattern's canonical form is
//! its minimum DFS code, and its materialized graph numbers vertices by
//! discovery index, so vertex `i` of [`Pattern::graph`] is DFS index `i`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::embedding::{CoverSet, Matcher};
use crate::error::{Result, TedError};
use crate::graph::{Edge, EdgeLabel, EdgeRef, Graph, GraphDatabase, VertexLabel};

/// One code tuple `(from, to, l(from), l(edge), l(to))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DfsEdge {
    pub from: usize,
    pub to: usize,
    pub from_label: VertexLabel,
    pub edge_label: EdgeLabel,
    pub to_label: VertexLabel,
}

impl DfsEdge {
    pub fn is_forward(&self) -> bool {
        self.from < self.to
    }

    // Total order on index pairs that agrees with gSpan's edge order: a
    // backward edge (i, j) sits right after vertex i is discovered, a
    // forward edge (i, j) right before vertex j is.
    fn position(&self) -> (usize, u8, usize) {
        if self.is_forward() {
            (self.to - 1, 1, usize::MAX - self.from)
        } else {
            (self.from, 0, self.to)
        }
    }
}

impl Ord for DfsEdge {
    fn cmp(&self, other: &Self) -> Ordering {
        self.position()
            .cmp(&other.position())
            .then_with(|| self.from_label.cmp(&other.from_label))
            .then_with(|| self.edge_label.cmp(&other.edge_label))
            .then_with(|| self.to_label.cmp(&other.to_label))
    }
}

impl PartialOrd for DfsEdge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DfsEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{})",
            self.from, self.to, self.from_label, self.edge_label, self.to_label
        )
    }
}

/// A DFS code. Codes compare lexicographically tuple by tuple, a proper
/// prefix being smaller.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DfsCode(Vec<DfsEdge>);

impl DfsCode {
    pub fn new(tuples: Vec<DfsEdge>) -> DfsCode {
        DfsCode(tuples)
    }

    pub fn tuples(&self) -> &[DfsEdge] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.0
            .iter()
            .map(|t| t.from.max(t.to) + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn push(&mut self, t: DfsEdge) {
        self.0.push(t);
    }

    pub fn extended(&self, t: DfsEdge) -> DfsCode {
        let mut tuples = Vec::with_capacity(self.0.len() + 1);
        tuples.extend_from_slice(&self.0);
        tuples.push(t);
        DfsCode(tuples)
    }

    /// Vertices from the root to the right-most vertex, root first.
    pub fn rightmost_path(&self) -> Vec<usize> {
        let n = self.vertex_count();
        if n == 0 {
            return Vec::new();
        }
        let mut parent = vec![usize::MAX; n];
        for t in self.0.iter().filter(|t| t.is_forward()) {
            parent[t.to] = t.from;
        }
        let mut path = vec![n - 1];
        let mut v = n - 1;
        while v != 0 {
            v = parent[v];
            path.push(v);
        }
        path.reverse();
        path
    }

    /// Materializes the code; edge `i` of the result is tuple `i`.
    pub fn to_graph(&self) -> Graph {
        let n = self.vertex_count();
        let mut labels = vec![None; n];
        let mut edges = Vec::with_capacity(self.0.len());
        for t in &self.0 {
            labels[t.from] = Some(t.from_label);
            labels[t.to] = Some(t.to_label);
            edges.push(Edge {
                u: t.from,
                v: t.to,
                label: t.edge_label,
            });
        }
        let labels = labels
            .into_iter()
            .map(|l| l.expect("every DFS index is labeled"))
            .collect();
        Graph::new(0, labels, edges).expect("a DFS code describes a simple connected graph")
    }
}

impl fmt::Display for DfsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

// A partial DFS subscripting of a graph: code index -> graph vertex, plus
// which graph edges are already in the code.
#[derive(Clone)]
struct Partial {
    map: Vec<usize>,
    used_edges: Vec<bool>,
    used_vertices: Vec<bool>,
}

fn rightmost_candidates(g: &Graph, rmpath: &[usize], st: &Partial) -> Vec<(DfsEdge, usize, Option<usize>)> {
    let mut out = Vec::new();
    let r = *rmpath.last().expect("non-empty code");
    let n = st.map.len();
    let xr = st.map[r];
    for &j in &rmpath[..rmpath.len() - 1] {
        if let Some(eid) = g.edge_between(xr, st.map[j]) {
            if !st.used_edges[eid] {
                out.push((
                    DfsEdge {
                        from: r,
                        to: j,
                        from_label: g.label(xr),
                        edge_label: g.edge(eid).label,
                        to_label: g.label(st.map[j]),
                    },
                    eid,
                    None,
                ));
            }
        }
    }
    for &i in rmpath {
        let xi = st.map[i];
        for &(y, eid) in g.neighbors(xi) {
            if !st.used_vertices[y] {
                out.push((
                    DfsEdge {
                        from: i,
                        to: n,
                        from_label: g.label(xi),
                        edge_label: g.edge(eid).label,
                        to_label: g.label(y),
                    },
                    eid,
                    Some(y),
                ));
            }
        }
    }
    out
}

// Greedy minimum-code construction. With `target`, stops as soon as the
// minimum diverges from it and reports whether they agree.
fn min_code_impl(g: &Graph, target: Option<&DfsCode>) -> (DfsCode, bool) {
    let mut code = DfsCode::default();
    if g.edge_count() == 0 {
        return (code, target.is_none_or(|t| t.is_empty()));
    }
    let mut first: Option<DfsEdge> = None;
    let mut states: Vec<Partial> = Vec::new();
    for (eid, e) in g.edges().iter().enumerate() {
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            let t = DfsEdge {
                from: 0,
                to: 1,
                from_label: g.label(a),
                edge_label: e.label,
                to_label: g.label(b),
            };
            match first.map(|f| t.cmp(&f)) {
                Some(Ordering::Greater) => continue,
                Some(Ordering::Less) | None => {
                    first = Some(t);
                    states.clear();
                }
                Some(Ordering::Equal) => {}
            }
            let mut used_edges = vec![false; g.edge_count()];
            used_edges[eid] = true;
            let mut used_vertices = vec![false; g.vertex_count()];
            used_vertices[a] = true;
            used_vertices[b] = true;
            states.push(Partial {
                map: vec![a, b],
                used_edges,
                used_vertices,
            });
        }
    }
    code.push(first.expect("graph has an edge"));
    if let Some(t) = target {
        match t.tuples().first() {
            Some(&x) if x == code.0[0] => {}
            _ => return (code, false),
        }
    }

    while code.len() < g.edge_count() {
        let rmpath = code.rightmost_path();
        let mut best: Option<DfsEdge> = None;
        let mut next: Vec<Partial> = Vec::new();
        for st in &states {
            for (t, eid, new_vertex) in rightmost_candidates(g, &rmpath, st) {
                match best.map(|b| t.cmp(&b)) {
                    Some(Ordering::Greater) => continue,
                    Some(Ordering::Less) | None => {
                        best = Some(t);
                        next.clear();
                    }
                    Some(Ordering::Equal) => {}
                }
                let mut s = st.clone();
                s.used_edges[eid] = true;
                if let Some(y) = new_vertex {
                    s.map.push(y);
                    s.used_vertices[y] = true;
                }
                next.push(s);
            }
        }
        let best = best.expect("connected graph always has a right-most extension");
        code.push(best);
        if let Some(t) = target {
            match t.tuples().get(code.len() - 1) {
                Some(&x) if x == best => {}
                _ => return (code, false),
            }
        }
        states = next;
    }
    let agrees = target.is_none_or(|t| t.len() == code.len());
    (code, agrees)
}

/// The minimum DFS code of a connected graph.
pub fn min_dfs_code(g: &Graph) -> DfsCode {
    min_code_impl(g, None).0
}

/// True iff `code` is the minimum code of the graph it describes.
pub fn is_canonical(code: &DfsCode) -> bool {
    min_code_impl(&code.to_graph(), Some(code)).1
}

/// A connected subgraph pattern with its database statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    code: DfsCode,
    graph: Graph,
    cov: CoverSet,
    containing_ids: Vec<usize>,
}

impl Pattern {
    /// Canonicalizes `g` and measures it against `db`.
    pub fn from_graph(g: &Graph, db: &GraphDatabase, matcher: &Matcher) -> Result<Pattern> {
        let code = min_dfs_code(g);
        let graph = code.to_graph();
        let cov = matcher.cover_set_db(&graph, db)?;
        let containing_ids = db
            .graphs()
            .iter()
            .filter(|h| matcher.contains(&graph, h))
            .map(|h| h.id())
            .collect();
        Ok(Pattern {
            code,
            graph,
            cov,
            containing_ids,
        })
    }

    pub(crate) fn from_parts(code: DfsCode, cov: CoverSet, containing_ids: Vec<usize>) -> Pattern {
        let graph = code.to_graph();
        Pattern {
            code,
            graph,
            cov,
            containing_ids,
        }
    }

    pub fn code(&self) -> &DfsCode {
        &self.code
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn cover(&self) -> &CoverSet {
        &self.cov
    }

    pub fn coverage(&self) -> usize {
        self.cov.len()
    }

    pub fn containing_ids(&self) -> &[usize] {
        &self.containing_ids
    }

    pub fn support_count(&self) -> usize {
        self.containing_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.code.len()
    }
}

/// Fraction of graphs in `db` containing `p`, by direct containment checks.
pub fn support(p: &Pattern, db: &GraphDatabase) -> f64 {
    if db.is_empty() {
        return 0.0;
    }
    let hits = db
        .graphs()
        .iter()
        .filter(|g| crate::embedding::contains(p.graph(), g))
        .count();
    hits as f64 / db.len() as f64
}

pub(crate) fn meets_minsup(count: usize, n: usize, minsup: f64) -> bool {
    n > 0 && count as f64 / n as f64 >= minsup
}

/// Grounded pattern growth over one database.
#[derive(Debug, Clone, Copy)]
pub struct Extender<'a> {
    db: &'a GraphDatabase,
    matcher: Matcher,
}

type GraphExtensions = BTreeMap<DfsEdge, Vec<bool>>;

impl<'a> Extender<'a> {
    pub fn new(db: &'a GraphDatabase, matcher: Matcher) -> Extender<'a> {
        Extender { db, matcher }
    }

    pub fn db(&self) -> &'a GraphDatabase {
        self.db
    }

    pub fn matcher(&self) -> Matcher {
        self.matcher
    }

    /// Every distinct one-edge pattern of the database, sorted by code.
    pub fn seeds(&self) -> Vec<Pattern> {
        let mut groups: BTreeMap<DfsEdge, (Vec<EdgeRef>, Vec<usize>)> = BTreeMap::new();
        for g in self.db.graphs() {
            for (eid, e) in g.edges().iter().enumerate() {
                let (a, b) = if g.label(e.u) <= g.label(e.v) {
                    (e.u, e.v)
                } else {
                    (e.v, e.u)
                };
                let t = DfsEdge {
                    from: 0,
                    to: 1,
                    from_label: g.label(a),
                    edge_label: e.label,
                    to_label: g.label(b),
                };
                let entry = groups.entry(t).or_default();
                entry.0.push(EdgeRef::new(g.id(), eid));
                if entry.1.last() != Some(&g.id()) {
                    entry.1.push(g.id());
                }
            }
        }
        groups
            .into_iter()
            .map(|(t, (refs, ids))| Pattern::from_parts(DfsCode::new(vec![t]), CoverSet::from_refs(refs), ids))
            .collect()
    }

    fn extensions_in(&self, p: &Pattern, gid: usize, rmpath: &[usize]) -> Result<GraphExtensions> {
        let g = self.db.graph(gid);
        let pg = p.graph();
        let n = pg.vertex_count();
        let r = *rmpath.last().expect("pattern has vertices");
        let mut found: GraphExtensions = BTreeMap::new();
        let mut image = vec![0usize; pg.edge_count()];
        let mut in_image = vec![false; g.vertex_count()];
        self.matcher.for_each_embedding(pg, g, |m| {
            for (k, e) in pg.edges().iter().enumerate() {
                image[k] = g.edge_between(m[e.u], m[e.v]).expect("embedded edge");
            }
            for &x in m {
                in_image[x] = true;
            }
            let mut record = |t: DfsEdge, new_eid: usize| {
                let hit = found.entry(t).or_insert_with(|| vec![false; g.edge_count()]);
                for &eid in &image {
                    hit[eid] = true;
                }
                hit[new_eid] = true;
            };
            for &j in &rmpath[..rmpath.len() - 1] {
                if pg.edge_between(r, j).is_some() {
                    continue;
                }
                if let Some(eid) = g.edge_between(m[r], m[j]) {
                    record(
                        DfsEdge {
                            from: r,
                            to: j,
                            from_label: pg.label(r),
                            edge_label: g.edge(eid).label,
                            to_label: pg.label(j),
                        },
                        eid,
                    );
                }
            }
            for &i in rmpath {
                for &(y, eid) in g.neighbors(m[i]) {
                    if in_image[y] {
                        continue;
                    }
                    record(
                        DfsEdge {
                            from: i,
                            to: n,
                            from_label: pg.label(i),
                            edge_label: g.edge(eid).label,
                            to_label: g.label(y),
                        },
                        eid,
                    );
                }
            }
            for &x in m {
                in_image[x] = false;
            }
        })?;
        Ok(found)
    }

    // All grounded right-most extensions of `p`, canonical or not.
    pub(crate) fn candidates(&self, p: &Pattern) -> Result<Vec<(DfsCode, Vec<EdgeRef>, Vec<usize>)>> {
        let rmpath = p.code().rightmost_path();
        let per_graph: Vec<(usize, GraphExtensions)> = p
            .containing_ids()
            .par_iter()
            .map(|&gid| self.extensions_in(p, gid, &rmpath).map(|m| (gid, m)))
            .collect::<Result<_>>()?;
        let mut merged: BTreeMap<DfsEdge, (Vec<EdgeRef>, Vec<usize>)> = BTreeMap::new();
        for (gid, found) in per_graph {
            for (t, hit) in found {
                let entry = merged.entry(t).or_default();
                entry.0.extend(
                    hit.iter()
                        .enumerate()
                        .filter(|&(_, &h)| h)
                        .map(|(eid, _)| EdgeRef::new(gid, eid)),
                );
                entry.1.push(gid);
            }
        }
        Ok(merged
            .into_iter()
            .map(|(t, (refs, ids))| (p.code().extended(t), refs, ids))
            .collect())
    }

    /// Canonical one-edge right-most extensions of `p` that occur in the
    /// database, in code order, with cover sets and containing graphs
    /// filled in.
    pub fn children(&self, p: &Pattern) -> Result<Vec<Pattern>> {
        Ok(self
            .candidates(p)?
            .into_par_iter()
            .filter(|(code, _, _)| is_canonical(code))
            .map(|(code, refs, ids)| Pattern::from_parts(code, CoverSet::from_sorted(refs), ids))
            .collect())
    }
}

/// Children of `p` with one more edge. `p` must have fewer than `emax`
/// edges.
pub fn rightmost_extend(p: &Pattern, db: &GraphDatabase, emax: usize) -> Result<Vec<Pattern>> {
    if p.edge_count() >= emax {
        return Err(TedError::Config(format!(
            "cannot extend a {}-edge pattern under emax = {emax}",
            p.edge_count()
        )));
    }
    Extender::new(db, Matcher::default()).children(p)
}

/// Depth-first, pre-order stream over the extension tree.
pub struct SubgraphStream<'a> {
    extender: Extender<'a>,
    emax: usize,
    minsup: Option<f64>,
    stack: Vec<Pattern>,
    failed: bool,
}

impl<'a> SubgraphStream<'a> {
    pub fn new(extender: Extender<'a>, emax: usize, minsup: Option<f64>) -> SubgraphStream<'a> {
        let mut s = SubgraphStream {
            extender,
            emax,
            minsup,
            stack: Vec::new(),
            failed: emax == 0,
        };
        if !s.failed {
            let mut seeds = extender.seeds();
            seeds.retain(|p| s.frequent(p));
            seeds.reverse();
            s.stack = seeds;
        }
        s
    }

    fn frequent(&self, p: &Pattern) -> bool {
        self.minsup
            .is_none_or(|m| meets_minsup(p.support_count(), self.extender.db().len(), m))
    }
}

impl Iterator for SubgraphStream<'_> {
    type Item = Result<Pattern>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let p = self.stack.pop()?;
        if p.edge_count() < self.emax {
            match self.extender.children(&p) {
                Ok(mut children) => {
                    children.retain(|c| self.frequent(c));
                    self.stack.extend(children.into_iter().rev());
                }
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
        Some(Ok(p))
    }
}

/// Every connected subgraph of `db` with `1..=emax` edges, once each.
pub fn enum_all_subgraphs(db: &GraphDatabase, emax: usize) -> SubgraphStream<'_> {
    SubgraphStream::new(Extender::new(db, Matcher::default()), emax, None)
}

/// Patterns with support at least `minsup`; infrequent branches are never
/// expanded.
pub fn enum_frequent(db: &GraphDatabase, emax: usize, minsup: f64) -> Result<Vec<Pattern>> {
    if !(minsup > 0.0 && minsup <= 1.0) {
        return Err(TedError::Config(format!("minsup {minsup} outside (0, 1]")));
    }
    SubgraphStream::new(Extender::new(db, Matcher::default()), emax, Some(minsup)).collect()
}
