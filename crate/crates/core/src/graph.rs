//! Labeled undirected graphs, graph databases and the line-based
//! interchange format.
//!
//! The format is the one used by gSpan-family tools:
//!
//! ```text
//! # comment
//! t # 0
//! v 0 C
//! v 1 O
//! e 0 1 C.O
//! ```
//!
//! The edge label is optional; a missing one is derived from the two
//! endpoint labels with [`derive_edge_label`]. An edge's position in its
//! graph's edge list is its stable identifier ([`EdgeRef::edge_id`]).

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::BufRead;
use std::sync::{Mutex, OnceLock};

use crate::error::{Result, TedError};

static INTERNER: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();

/// An interned vertex or edge label.
///
/// Equality and hashing use token identity; ordering is lexicographic on
/// the underlying string so that anything sorted by label is reproducible
/// regardless of interning order.
#[derive(Clone, Copy)]
pub struct Label(&'static str);

pub type VertexLabel = Label;
pub type EdgeLabel = Label;

impl Label {
    /// Interns `s`. Returns `None` for empty strings or strings containing
    /// whitespace.
    pub fn new(s: &str) -> Option<Label> {
        if s.is_empty() || s.chars().any(char::is_whitespace) {
            return None;
        }
        let mut table = INTERNER
            .get_or_init(|| Mutex::new(HashSet::new()))
            .lock()
            .unwrap_or_else(|e| e.into_inner());
        if let Some(&interned) = table.get(s) {
            return Some(Label(interned));
        }
        let leaked: &'static str = Box::leak(s.to_owned().into_boxed_str());
        table.insert(leaked);
        Some(Label(leaked))
    }

    pub fn as_str(&self) -> &'static str {
        self.0
    }
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for Label {}

impl Hash for Label {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::ptr::hash(self.0, state)
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            Ordering::Equal
        } else {
            self.0.cmp(other.0)
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

/// Label for an edge whose input carried none: the two endpoint labels
/// joined by `.`, smaller first.
pub fn derive_edge_label(lu: VertexLabel, lv: VertexLabel) -> EdgeLabel {
    let (a, b) = if lu <= lv { (lu, lv) } else { (lv, lu) };
    Label::new(&format!("{a}.{b}")).expect("joined labels are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: EdgeLabel,
}

impl Edge {
    /// The endpoint opposite `x`.
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// A simple, connected, undirected labeled graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    id: usize,
    labels: Vec<VertexLabel>,
    edges: Vec<Edge>,
    // (neighbor, edge id), sorted by neighbor
    adj: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Builds a graph, checking simplicity and connectivity.
    ///
    /// `id` only labels error messages and [`EdgeRef`]s; a database
    /// reassigns it.
    pub fn new(id: usize, labels: Vec<VertexLabel>, edges: Vec<Edge>) -> Result<Graph> {
        let structure = |message: String| TedError::Structure { graph: id, message };
        if labels.is_empty() {
            return Err(structure("graph has no vertices".into()));
        }
        let mut adj = vec![Vec::new(); labels.len()];
        let mut seen = HashSet::with_capacity(edges.len());
        for (eid, e) in edges.iter().enumerate() {
            if e.u >= labels.len() || e.v >= labels.len() {
                return Err(structure(format!(
                    "edge {} -- {} references an undeclared vertex",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(structure(format!("self-loop on vertex {}", e.u)));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(structure(format!("duplicate edge {} -- {}", e.u, e.v)));
            }
            adj[e.u].push((e.v, eid));
            adj[e.v].push((e.u, eid));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = Graph {
            id,
            labels,
            edges,
            adj,
        };
        if !g.is_connected() {
            return Err(structure("graph is disconnected".into()));
        }
        Ok(g)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, v: usize) -> VertexLabel {
        self.labels[v]
    }

    pub fn labels(&self) -> &[VertexLabel] {
        &self.labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, eid: usize) -> &Edge {
        &self.edges[eid]
    }

    /// `(neighbor, edge id)` pairs of `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        let list = &self.adj[a];
        list.binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.labels.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    pub(crate) fn with_id(mut self, id: usize) -> Graph {
        self.id = id;
        self
    }
}

/// Identity of one data edge: `(graph index, edge index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeRef {
    pub graph_id: u32,
    pub edge_id: u32,
}

impl EdgeRef {
    pub fn new(graph_id: usize, edge_id: usize) -> EdgeRef {
        EdgeRef {
            graph_id: graph_id as u32,
            edge_id: edge_id as u32,
        }
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}.e{}", self.graph_id, self.edge_id)
    }
}

/// An ordered collection of graphs; graph `i` has id `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphDatabase {
    graphs: Vec<Graph>,
    edge_offsets: Vec<usize>,
    total_edges: usize,
}

impl GraphDatabase {
    pub fn new(graphs: Vec<Graph>) -> GraphDatabase {
        let graphs: Vec<Graph> = graphs
            .into_iter()
            .enumerate()
            .map(|(i, g)| g.with_id(i))
            .collect();
        let mut edge_offsets = Vec::with_capacity(graphs.len());
        let mut total_edges = 0;
        for g in &graphs {
            edge_offsets.push(total_edges);
            total_edges += g.edge_count();
        }
        GraphDatabase {
            graphs,
            edge_offsets,
            total_edges,
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn graph(&self, id: usize) -> &Graph {
        &self.graphs[id]
    }

    pub fn total_edges(&self) -> usize {
        self.total_edges
    }

    /// Dense position of `e` in `0..total_edges`.
    pub fn edge_index(&self, e: EdgeRef) -> usize {
        self.edge_offsets[e.graph_id as usize] + e.edge_id as usize
    }

    /// All edge refs in ascending order.
    pub fn edge_refs(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        self.graphs
            .iter()
            .flat_map(|g| (0..g.edge_count()).map(move |e| EdgeRef::new(g.id(), e)))
    }

    pub fn contains_ref(&self, e: EdgeRef) -> bool {
        (e.graph_id as usize) < self.graphs.len()
            && (e.edge_id as usize) < self.graphs[e.graph_id as usize].edge_count()
    }
}

/// Parses a database from interchange-format text.
pub fn parse_database(text: &str) -> Result<GraphDatabase> {
    read_database(text.as_bytes())
}

/// Streaming variant of [`parse_database`].
pub fn read_database<R: BufRead>(reader: R) -> Result<GraphDatabase> {
    struct Pending {
        first_line: usize,
        labels: Vec<VertexLabel>,
        vids: HashMap<i64, usize>,
        edges: Vec<Edge>,
    }

    fn finish(p: Pending, graphs: &mut Vec<Graph>) -> Result<()> {
        let id = graphs.len();
        let g = Graph::new(id, p.labels, p.edges).map_err(|e| match e {
            TedError::Structure { message, .. } => TedError::Structure {
                graph: id,
                message: format!("{message} (graph starting at line {})", p.first_line),
            },
            other => other,
        })?;
        graphs.push(g);
        Ok(())
    }

    let mut graphs = Vec::new();
    let mut current: Option<Pending> = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| TedError::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let parse_err = |message: String| TedError::Parse {
            line: lineno,
            message,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match tokens[0] {
            "t" => {
                if tokens.len() != 3 || tokens[1] != "#" {
                    return Err(parse_err(format!("expected `t # <int>`, found `{trimmed}`")));
                }
                let tid: i64 = tokens[2]
                    .parse()
                    .map_err(|_| parse_err(format!("invalid graph id `{}`", tokens[2])))?;
                if let Some(p) = current.take() {
                    finish(p, &mut graphs)?;
                }
                if tid < 0 {
                    // `t # -1` terminates gSpan-style files
                    break;
                }
                current = Some(Pending {
                    first_line: lineno,
                    labels: Vec::new(),
                    vids: HashMap::new(),
                    edges: Vec::new(),
                });
            }
            "v" => {
                let p = current
                    .as_mut()
                    .ok_or_else(|| parse_err("vertex declared outside a graph".into()))?;
                if tokens.len() != 3 {
                    return Err(parse_err(format!("expected `v <vid> <label>`, found `{trimmed}`")));
                }
                let vid: i64 = tokens[1]
                    .parse()
                    .map_err(|_| parse_err(format!("invalid vertex id `{}`", tokens[1])))?;
                let label = Label::new(tokens[2])
                    .ok_or_else(|| parse_err(format!("invalid label `{}`", tokens[2])))?;
                if p.vids.insert(vid, p.labels.len()).is_some() {
                    return Err(TedError::Structure {
                        graph: graphs.len(),
                        message: format!("vertex {vid} declared twice (line {lineno})"),
                    });
                }
                p.labels.push(label);
            }
            "e" => {
                let p = current
                    .as_mut()
                    .ok_or_else(|| parse_err("edge declared outside a graph".into()))?;
                if tokens.len() != 3 && tokens.len() != 4 {
                    return Err(parse_err(format!("expected `e <u> <v> [<label>]`, found `{trimmed}`")));
                }
                let mut ends = [0usize; 2];
                for (slot, tok) in ends.iter_mut().zip(&tokens[1..3]) {
                    let vid: i64 = tok
                        .parse()
                        .map_err(|_| parse_err(format!("invalid vertex id `{tok}`")))?;
                    *slot = *p.vids.get(&vid).ok_or_else(|| TedError::Structure {
                        graph: graphs.len(),
                        message: format!("edge references undeclared vertex {vid} (line {lineno})"),
                    })?;
                }
                let label = match tokens.get(3) {
                    Some(tok) => Label::new(tok)
                        .ok_or_else(|| parse_err(format!("invalid label `{tok}`")))?,
                    None => derive_edge_label(p.labels[ends[0]], p.labels[ends[1]]),
                };
                p.edges.push(Edge {
                    u: ends[0],
                    v: ends[1],
                    label,
                });
            }
            other => return Err(parse_err(format!("unknown record type `{other}`"))),
        }
    }
    if let Some(p) = current.take() {
        finish(p, &mut graphs)?;
    }
    Ok(GraphDatabase::new(graphs))
}

/// Emits `g` in interchange format, preceded by one `# key=value` line per
/// annotation.
pub fn serialize_graph(g: &Graph, annotations: &[(&str, String)]) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for (key, value) in annotations {
        let _ = writeln!(out, "# {key}={value}");
    }
    let _ = writeln!(out, "t # {}", g.id());
    for (v, label) in g.labels().iter().enumerate() {
        let _ = writeln!(out, "v {v} {label}");
    }
    for e in g.edges() {
        let _ = writeln!(out, "e {} {} {}", e.u, e.v, e.label);
    }
    out
}

pub fn serialize_database(db: &GraphDatabase) -> String {
    db.graphs().iter().map(|g| serialize_graph(g, &[])).collect()
}
