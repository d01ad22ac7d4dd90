//! Independent oracles and fixtures shared by unit and integration tests.
//!
//! Nothing here goes through the matcher or DFS-code machinery: embeddings
//! are found by trying every vertex mapping, canonical forms by trying
//! every vertex permutation.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use ted_core::graph::{derive_edge_label, Edge, Graph, GraphDatabase, Label};
use ted_core::{CoverSet, EdgeRef};

pub fn label(s: &str) -> Label {
    Label::new(s).expect("valid label")
}

/// A graph with derived edge labels.
pub fn graph(labels: &[&str], edges: &[(usize, usize)]) -> Graph {
    let labels: Vec<Label> = labels.iter().map(|s| label(s)).collect();
    let edges = edges
        .iter()
        .map(|&(u, v)| Edge {
            u,
            v,
            label: derive_edge_label(labels[u], labels[v]),
        })
        .collect();
    Graph::new(0, labels, edges).expect("valid test graph")
}

/// G0: triangle over A, A, B with e0 = A-A, e1 = A-B, e2 = A-B.
/// G1: a single A-B edge.
pub fn db_toy() -> GraphDatabase {
    GraphDatabase::new(vec![
        graph(&["A", "A", "B"], &[(0, 1), (0, 2), (1, 2)]),
        graph(&["A", "B"], &[(0, 1)]),
    ])
}

/// Every injective, label- and edge-preserving map from `p` into `g`,
/// found by trying every injective vertex assignment and filtering.
pub fn brute_force_embeddings(p: &Graph, g: &Graph) -> Vec<Vec<usize>> {
    let n = p.vertex_count();
    let m = g.vertex_count();
    let mut out = Vec::new();
    if n > m {
        return out;
    }
    let mut f = Vec::with_capacity(n);
    let mut used = vec![false; m];
    assign(p, g, &mut f, &mut used, &mut out);
    out
}

fn assign(p: &Graph, g: &Graph, f: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
    if f.len() == p.vertex_count() {
        let labels_ok = (0..f.len()).all(|v| p.label(v) == g.label(f[v]));
        let edges_ok = p.edges().iter().all(|e| {
            g.edges().iter().any(|d| {
                d.label == e.label
                    && ((d.u == f[e.u] && d.v == f[e.v]) || (d.u == f[e.v] && d.v == f[e.u]))
            })
        });
        if labels_ok && edges_ok {
            out.push(f.clone());
        }
        return;
    }
    for x in 0..g.vertex_count() {
        if used[x] {
            continue;
        }
        used[x] = true;
        f.push(x);
        assign(p, g, f, used, out);
        f.pop();
        used[x] = false;
    }
}

pub fn brute_force_cover_graph(p: &Graph, g: &Graph) -> CoverSet {
    let mut refs = Vec::new();
    for f in brute_force_embeddings(p, g) {
        for e in p.edges() {
            for (eid, d) in g.edges().iter().enumerate() {
                if (d.u == f[e.u] && d.v == f[e.v]) || (d.u == f[e.v] && d.v == f[e.u]) {
                    refs.push(EdgeRef::new(g.id(), eid));
                }
            }
        }
    }
    CoverSet::from_refs(refs)
}

pub fn brute_force_cover(p: &Graph, db: &GraphDatabase) -> CoverSet {
    let mut all = CoverSet::new();
    for g in db.graphs() {
        all = all.union(&brute_force_cover_graph(p, g));
    }
    all
}

/// Canonical form by exhaustive relabeling: the smallest
/// (vertex labels, sorted edge triples) over all vertex permutations.
pub type BruteKey = (Vec<String>, Vec<(usize, usize, String)>);

pub fn brute_canonical(g: &Graph) -> BruteKey {
    let n = g.vertex_count();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<BruteKey> = None;
    loop {
        // perm[v] = new index of v
        let mut labels = vec![String::new(); n];
        for v in 0..n {
            labels[perm[v]] = g.label(v).as_str().to_string();
        }
        let mut edges: Vec<(usize, usize, String)> = g
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = (perm[e.u], perm[e.v]);
                (a.min(b), a.max(b), e.label.as_str().to_string())
            })
            .collect();
        edges.sort();
        let key = (labels, edges);
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.expect("at least one permutation")
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// The subgraph of `g` spanned by an edge subset, vertices renumbered in
/// order of first appearance.
pub fn edge_subgraph(g: &Graph, edge_ids: &[usize]) -> Graph {
    let mut index = vec![usize::MAX; g.vertex_count()];
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    for &eid in edge_ids {
        let e = g.edge(eid);
        for x in [e.u, e.v] {
            if index[x] == usize::MAX {
                index[x] = labels.len();
                labels.push(g.label(x));
            }
        }
        edges.push(Edge {
            u: index[e.u],
            v: index[e.v],
            label: e.label,
        });
    }
    Graph::new(0, labels, edges).expect("connected edge subset")
}

fn edge_subset_connected(g: &Graph, edge_ids: &[usize]) -> bool {
    if edge_ids.is_empty() {
        return false;
    }
    let mut reached: BTreeSet<usize> = BTreeSet::new();
    let first = g.edge(edge_ids[0]);
    reached.insert(first.u);
    reached.insert(first.v);
    let mut used = vec![false; edge_ids.len()];
    used[0] = true;
    let mut progress = true;
    while progress {
        progress = false;
        for (k, &eid) in edge_ids.iter().enumerate() {
            if used[k] {
                continue;
            }
            let e = g.edge(eid);
            if reached.contains(&e.u) || reached.contains(&e.v) {
                reached.insert(e.u);
                reached.insert(e.v);
                used[k] = true;
                progress = true;
            }
        }
    }
    used.iter().all(|&u| u)
}

/// Every connected edge subset of every graph with 1..=emax edges, as
/// (brute canonical key, graph id) pairs.
pub fn brute_force_subgraphs(db: &GraphDatabase, emax: usize) -> Vec<(BruteKey, usize, Graph)> {
    let mut out = Vec::new();
    for g in db.graphs() {
        let mut subset = Vec::new();
        fn rec(
            g: &Graph,
            start: usize,
            emax: usize,
            subset: &mut Vec<usize>,
            out: &mut Vec<(BruteKey, usize, Graph)>,
        ) {
            if !subset.is_empty() && edge_subset_connected(g, subset) {
                let sg = edge_subgraph(g, subset);
                out.push((brute_canonical(&sg), g.id(), sg));
            }
            if subset.len() == emax {
                return;
            }
            for e in start..g.edge_count() {
                subset.push(e);
                rec(g, e + 1, emax, subset, out);
                subset.pop();
            }
        }
        rec(g, 0, emax, &mut subset, &mut out);
    }
    out
}

/// Distinct canonical keys of all connected subgraphs with their supports.
pub fn brute_force_pattern_keys(db: &GraphDatabase, emax: usize) -> Vec<(BruteKey, BTreeSet<usize>)> {
    let mut map: std::collections::BTreeMap<BruteKey, BTreeSet<usize>> = Default::default();
    for (key, gid, _) in brute_force_subgraphs(db, emax) {
        map.entry(key).or_default().insert(gid);
    }
    map.into_iter().collect()
}

/// A random connected graph: random spanning tree plus extra edges.
pub fn random_graph<R: Rng>(rng: &mut R, min_edges: usize, max_edges: usize, alphabet: &[&str]) -> Graph {
    let target = rng.gen_range(min_edges..=max_edges);
    // vertices: between ~half the edges and edges+1 (a tree)
    let lo = ((target + 3) / 2).max(2);
    let n = rng.gen_range(lo..=target + 1);
    let labels: Vec<&str> = (0..n).map(|_| *alphabet.choose(rng).unwrap()).collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut have: HashSet<(usize, usize)> = HashSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        pairs.push((u, v));
        have.insert((u, v));
    }
    let max_possible = n * (n - 1) / 2;
    while pairs.len() < target.min(max_possible) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if have.insert(key) {
            pairs.push(key);
        }
    }
    pairs.shuffle(rng);
    graph(&labels, &pairs)
}

pub fn random_db<R: Rng>(
    rng: &mut R,
    graphs: std::ops::RangeInclusive<usize>,
    edges: std::ops::RangeInclusive<usize>,
    labels: usize,
) -> GraphDatabase {
    const ALPHABET: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
    let count = rng.gen_range(graphs);
    let alphabet = &ALPHABET[..labels.clamp(1, ALPHABET.len())];
    GraphDatabase::new(
        (0..count)
            .map(|_| random_graph(rng, *edges.start(), *edges.end(), alphabet))
            .collect(),
    )
}
