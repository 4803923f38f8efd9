//! Unified mixed-graph representation for DAGs, ADMGs, CPDAGs, MAGs and PAGs.
//!
//! All five classes share one structure: a set of named nodes and a set of
//! edges with a mark at each endpoint. A directed edge `a -> b` carries
//! (Tail, Arrow), a bidirected edge (Arrow, Arrow), an undirected edge
//! (Tail, Tail) and PAG edges may carry Circle marks. The `kind` tag
//! restricts which marks are legal and which structural invariants
//! `validate` checks.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Node identifier: a name unique within one graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

/// Endpoint mark of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Tail,
    Arrow,
    Circle,
}

impl Mark {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mark::Tail => "tail",
            Mark::Arrow => "arrow",
            Mark::Circle => "circle",
        }
    }
}

/// Graph class tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum GraphKind {
    DAG,
    ADMG,
    CPDAG,
    MAG,
    PAG,
}

impl GraphKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GraphKind::DAG => "DAG",
            GraphKind::ADMG => "ADMG",
            GraphKind::CPDAG => "CPDAG",
            GraphKind::MAG => "MAG",
            GraphKind::PAG => "PAG",
        }
    }

    /// Whether an edge with these endpoint marks is legal in this class.
    fn allows(&self, m: (Mark, Mark)) -> bool {
        use Mark::*;
        let canon = canonical_marks(m);
        match self {
            GraphKind::DAG => canon == (Tail, Arrow),
            GraphKind::ADMG => matches!(canon, (Tail, Arrow) | (Arrow, Arrow)),
            GraphKind::CPDAG => matches!(canon, (Tail, Arrow) | (Tail, Tail)),
            // Selection bias is omitted, so MAGs carry no undirected edges.
            GraphKind::MAG => matches!(canon, (Tail, Arrow) | (Arrow, Arrow)),
            GraphKind::PAG => !matches!(canon, (Tail, Tail)),
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Order-insensitive mark pair, used for legality checks only.
fn canonical_marks(m: (Mark, Mark)) -> (Mark, Mark) {
    if m.0 <= m.1 {
        m
    } else {
        (m.1, m.0)
    }
}

/// An edge record: endpoints in canonical (lexicographic) order with their marks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub mark_a: Mark,
    pub mark_b: Mark,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("node name must be non-empty")]
    EmptyNodeName,
    #[error("self edge on `{0}`")]
    SelfEdge(String),
    #[error("edge {a} {b}: marks ({ma}, {mb}) not allowed in a {kind}", ma = .mark_a.as_str(), mb = .mark_b.as_str())]
    IllegalMark {
        a: String,
        b: String,
        mark_a: Mark,
        mark_b: Mark,
        kind: GraphKind,
    },
    #[error("pair ({0}, {1}) already carries an edge; only ADMGs may combine a directed and a bidirected edge")]
    DuplicatePair(String, String),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("cannot parse edge spec `{0}`")]
    BadEdgeSpec(String),
}

/// A structural invariant violated by a graph. Violations are data, not faults:
/// `validate` reports them instead of erroring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Directed part of the graph contains a cycle.
    DirectedCycle,
    /// More than one edge on an unordered pair, beyond the ADMG
    /// directed-plus-bidirected combination.
    MultiEdgePair(NodeId, NodeId),
    /// MAG only: a bidirected edge between two nodes connected by a directed path.
    AlmostDirectedCycle(NodeId, NodeId),
    /// MAG only: inducing path (w.r.t. the empty latent set) between non-adjacent nodes.
    NotMaximal(NodeId, NodeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DirectedCycle => write!(f, "cycle"),
            Violation::MultiEdgePair(a, b) => {
                write!(f, "multiple edges between {a} and {b}")
            }
            Violation::AlmostDirectedCycle(a, b) => {
                write!(f, "almost directed cycle through {a} <-> {b}")
            }
            Violation::NotMaximal(a, b) => {
                write!(f, "inducing path between non-adjacent {a} and {b}")
            }
        }
    }
}

/// Half-edge view used by traversals: the neighbour, the mark at the current
/// node and the mark at the neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct HalfEdge {
    pub to: usize,
    pub mark_here: Mark,
    pub mark_there: Mark,
}

/// Immutable after construction; all queries are read-only.
#[derive(Debug, Clone)]
pub struct Graph {
    kind: GraphKind,
    /// Sorted node names; indices used internally.
    names: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    /// Edges keyed by (a_idx, b_idx, mark_a, mark_b) with a_idx < b_idx.
    edges: BTreeSet<(usize, usize, Mark, Mark)>,
    adj: Vec<Vec<HalfEdge>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.names == other.names && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new<I, S>(kind: GraphKind, nodes: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: Into<NodeId>,
    {
        let mut names: Vec<NodeId> = nodes.into_iter().map(Into::into).collect();
        names.sort();
        let mut index = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if n.0.is_empty() {
                return Err(GraphError::EmptyNodeName);
            }
            if index.insert(n.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(n.0.clone()));
            }
        }
        let n = names.len();
        Ok(Graph {
            kind,
            names,
            index,
            edges: BTreeSet::new(),
            adj: vec![Vec::new(); n],
        })
    }

    /// Builds a graph from a compact edge notation, e.g.
    /// `Graph::parse(GraphKind::ADMG, &["X", "Y"], "X -> Y, X <-> Y")`.
    /// Supported edge tokens: `->`, `<-`, `<->`, `--`, `o->`, `<-o`, `o-o`.
    pub fn parse(kind: GraphKind, nodes: &[&str], edges: &str) -> Result<Self, GraphError> {
        let mut g = Graph::new(kind, nodes.iter().copied())?;
        for spec in edges.split(',') {
            let spec = spec.trim();
            if spec.is_empty() {
                continue;
            }
            let parts: Vec<&str> = spec.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(GraphError::BadEdgeSpec(spec.to_string()));
            }
            let (a, op, b) = (parts[0], parts[1], parts[2]);
            let (ma, mb) = match op {
                "->" => (Mark::Tail, Mark::Arrow),
                "<-" => (Mark::Arrow, Mark::Tail),
                "<->" => (Mark::Arrow, Mark::Arrow),
                "--" => (Mark::Tail, Mark::Tail),
                "o->" => (Mark::Circle, Mark::Arrow),
                "<-o" => (Mark::Arrow, Mark::Circle),
                "o-o" => (Mark::Circle, Mark::Circle),
                "o--" => (Mark::Circle, Mark::Tail),
                "--o" => (Mark::Tail, Mark::Circle),
                _ => return Err(GraphError::BadEdgeSpec(spec.to_string())),
            };
            g.add_edge(a, b, ma, mb)?;
        }
        Ok(g)
    }

    pub fn add_edge(
        &mut self,
        a: &str,
        b: &str,
        mark_a: Mark,
        mark_b: Mark,
    ) -> Result<(), GraphError> {
        let ia = self.idx(a)?;
        let ib = self.idx(b)?;
        if ia == ib {
            return Err(GraphError::SelfEdge(a.to_string()));
        }
        if !self.kind.allows((mark_a, mark_b)) {
            return Err(GraphError::IllegalMark {
                a: a.to_string(),
                b: b.to_string(),
                mark_a,
                mark_b,
                kind: self.kind,
            });
        }
        let rec = if ia < ib {
            (ia, ib, mark_a, mark_b)
        } else {
            (ib, ia, mark_b, mark_a)
        };
        // Exact duplicates are rejected; other multi-edge situations are
        // representable and reported by `validate` as violations.
        if self.edges.contains(&rec) {
            return Err(GraphError::DuplicatePair(a.to_string(), b.to_string()));
        }
        self.edges.insert(rec);
        self.adj[rec.0].push(HalfEdge {
            to: rec.1,
            mark_here: rec.2,
            mark_there: rec.3,
        });
        self.adj[rec.1].push(HalfEdge {
            to: rec.0,
            mark_here: rec.3,
            mark_there: rec.2,
        });
        Ok(())
    }

    pub fn add_directed(&mut self, from: &str, to: &str) -> Result<(), GraphError> {
        self.add_edge(from, to, Mark::Tail, Mark::Arrow)
    }

    pub fn add_bidirected(&mut self, a: &str, b: &str) -> Result<(), GraphError> {
        self.add_edge(a, b, Mark::Arrow, Mark::Arrow)
    }

    pub fn add_undirected(&mut self, a: &str, b: &str) -> Result<(), GraphError> {
        self.add_edge(a, b, Mark::Tail, Mark::Tail)
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node names in sorted order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.names
    }

    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.names.iter().cloned().collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(&NodeId(name.to_string()))
    }

    /// Edge records sorted by (a, b, mark_a, mark_b).
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .edges
            .iter()
            .map(|&(a, b, ma, mb)| Edge {
                a: self.names[a].clone(),
                b: self.names[b].clone(),
                mark_a: ma,
                mark_b: mb,
            })
            .collect();
        out.sort_by(|x, y| {
            (&x.a, &x.b, x.mark_a.as_str(), x.mark_b.as_str())
                .cmp(&(&y.a, &y.b, y.mark_a.as_str(), y.mark_b.as_str()))
        });
        out
    }

    pub(crate) fn idx(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(&NodeId(name.to_string()))
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub(crate) fn name(&self, ix: usize) -> &NodeId {
        &self.names[ix]
    }

    pub(crate) fn half_edges(&self, v: usize) -> &[HalfEdge] {
        &self.adj[v]
    }

    pub fn adjacent(&self, a: &str, b: &str) -> Result<bool, GraphError> {
        let ia = self.idx(a)?;
        let ib = self.idx(b)?;
        Ok(self.adjacent_ix(ia, ib))
    }

    pub(crate) fn adjacent_ix(&self, a: usize, b: usize) -> bool {
        self.adj[a].iter().any(|h| h.to == b)
    }

    /// True if a fully directed edge `from -> to` exists.
    pub fn has_directed(&self, from: &str, to: &str) -> Result<bool, GraphError> {
        let ia = self.idx(from)?;
        let ib = self.idx(to)?;
        Ok(self.has_directed_ix(ia, ib))
    }

    pub(crate) fn has_directed_ix(&self, from: usize, to: usize) -> bool {
        self.adj[from]
            .iter()
            .any(|h| h.to == to && h.mark_here == Mark::Tail && h.mark_there == Mark::Arrow)
    }

    /// True if a bidirected edge joins `a` and `b`.
    pub fn has_bidirected(&self, a: &str, b: &str) -> Result<bool, GraphError> {
        let ia = self.idx(a)?;
        let ib = self.idx(b)?;
        Ok(self.has_bidirected_ix(ia, ib))
    }

    pub(crate) fn has_bidirected_ix(&self, a: usize, b: usize) -> bool {
        self.adj[a]
            .iter()
            .any(|h| h.to == b && h.mark_here == Mark::Arrow && h.mark_there == Mark::Arrow)
    }

    /// Parents of `x`: nodes `y` with a fully directed edge `y -> x`.
    pub fn parents(&self, x: &str) -> Result<BTreeSet<NodeId>, GraphError> {
        let ix = self.idx(x)?;
        Ok(self
            .parents_ix(ix)
            .into_iter()
            .map(|i| self.names[i].clone())
            .collect())
    }

    pub(crate) fn parents_ix(&self, x: usize) -> Vec<usize> {
        self.adj[x]
            .iter()
            .filter(|h| h.mark_here == Mark::Arrow && h.mark_there == Mark::Tail)
            .map(|h| h.to)
            .collect()
    }

    pub(crate) fn children_ix(&self, x: usize) -> Vec<usize> {
        self.adj[x]
            .iter()
            .filter(|h| h.mark_here == Mark::Tail && h.mark_there == Mark::Arrow)
            .map(|h| h.to)
            .collect()
    }

    pub(crate) fn spouses_ix(&self, x: usize) -> Vec<usize> {
        self.adj[x]
            .iter()
            .filter(|h| h.mark_here == Mark::Arrow && h.mark_there == Mark::Arrow)
            .map(|h| h.to)
            .collect()
    }

    /// Ancestors of `x` via directed edges, including `x` itself.
    pub fn ancestors(&self, x: &str) -> Result<BTreeSet<NodeId>, GraphError> {
        let ix = self.idx(x)?;
        let mask = self.ancestors_mask(&[ix]);
        Ok(self.mask_to_names(&mask))
    }

    /// Mask of nodes with a directed path into some seed (seeds included).
    pub(crate) fn ancestors_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for p in self.parents_ix(v) {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Possible descendants of `x`: nodes reachable by a possibly directed
    /// path (no edge on the path has an arrowhead at its earlier node),
    /// including `x` itself. Reduces to descendants on DAGs and ADMGs.
    pub fn possible_descendants(&self, x: &str) -> Result<BTreeSet<NodeId>, GraphError> {
        let ix = self.idx(x)?;
        let mask = self.possible_descendants_mask(&[ix]);
        Ok(self.mask_to_names(&mask))
    }

    pub(crate) fn possible_descendants_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for h in &self.adj[v] {
                if h.mark_here != Mark::Arrow && !seen[h.to] {
                    seen[h.to] = true;
                    stack.push(h.to);
                }
            }
        }
        seen
    }

    /// Possible ancestors of the seeds: nodes with a possibly directed path
    /// into some seed (seeds included).
    pub(crate) fn possible_ancestors_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for h in &self.adj[v] {
                // Traverse v -- w backwards: usable iff the mark at w is not an arrowhead.
                if h.mark_there != Mark::Arrow && !seen[h.to] {
                    seen[h.to] = true;
                    stack.push(h.to);
                }
            }
        }
        seen
    }

    pub(crate) fn mask_to_names(&self, mask: &[bool]) -> BTreeSet<NodeId> {
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.names[i].clone())
            .collect()
    }

    /// Checks the kind-specific structural invariants. Mark legality and
    /// per-pair multiplicity are enforced at construction; this reports
    /// cycle-type violations and, for MAGs, maximality.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.has_directed_cycle() {
            out.push(Violation::DirectedCycle);
        }
        let mut seen_pairs: BTreeMap<(usize, usize), Vec<(Mark, Mark)>> = BTreeMap::new();
        for &(a, b, ma, mb) in &self.edges {
            seen_pairs.entry((a, b)).or_default().push((ma, mb));
        }
        for ((a, b), marks) in seen_pairs {
            if marks.len() <= 1 {
                continue;
            }
            let admg_combo = self.kind == GraphKind::ADMG
                && marks.len() == 2
                && marks.iter().filter(|&&(x, y)| is_bidirected(x, y)).count() == 1;
            if !admg_combo {
                out.push(Violation::MultiEdgePair(
                    self.names[a].clone(),
                    self.names[b].clone(),
                ));
            }
        }
        if self.kind == GraphKind::MAG {
            for &(a, b, ma, mb) in &self.edges {
                if (ma, mb) == (Mark::Arrow, Mark::Arrow) {
                    let anc_a = self.ancestors_mask(&[a]);
                    let anc_b = self.ancestors_mask(&[b]);
                    if anc_a[b] || anc_b[a] {
                        out.push(Violation::AlmostDirectedCycle(
                            self.names[a].clone(),
                            self.names[b].clone(),
                        ));
                    }
                }
            }
            for a in 0..self.names.len() {
                for b in (a + 1)..self.names.len() {
                    if !self.adjacent_ix(a, b) && self.inducing_walk_ix(a, b, &vec![false; self.names.len()])
                    {
                        out.push(Violation::NotMaximal(
                            self.names[a].clone(),
                            self.names[b].clone(),
                        ));
                    }
                }
            }
        }
        out
    }

    fn has_directed_cycle(&self) -> bool {
        // Kahn's algorithm over the fully directed part.
        let n = self.names.len();
        let mut indeg = vec![0usize; n];
        for (v, d) in indeg.iter_mut().enumerate() {
            *d = self.parents_ix(v).len();
        }
        let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for c in self.children_ix(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        seen != n
    }

    /// Topological order of the directed part; None if cyclic.
    pub(crate) fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.names.len();
        let mut indeg = vec![0usize; n];
        for (v, d) in indeg.iter_mut().enumerate() {
            *d = self.parents_ix(v).len();
        }
        let mut queue: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&v) = queue.iter().next() {
            queue.remove(&v);
            order.push(v);
            for c in self.children_ix(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.insert(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Inducing-walk reachability used by MAG maximality and latent-MAG
    /// projection: is there a path x..y on which every non-endpoint outside
    /// `latent` is a collider, and every collider is an ancestor of {x, y}?
    pub(crate) fn inducing_walk_ix(&self, x: usize, y: usize, latent: &[bool]) -> bool {
        let anc_xy = self.ancestors_mask(&[x, y]);
        // State: (node, arrived-with-arrowhead-at-node).
        let mut seen = vec![[false; 2]; self.names.len()];
        let mut stack: Vec<(usize, bool)> = Vec::new();
        for h in &self.adj[x] {
            if h.to == y {
                return true;
            }
            let arrow_in = h.mark_there == Mark::Arrow;
            if !seen[h.to][arrow_in as usize] {
                seen[h.to][arrow_in as usize] = true;
                stack.push((h.to, arrow_in));
            }
        }
        while let Some((v, arrow_in)) = stack.pop() {
            if v == x {
                continue;
            }
            for h in &self.adj[v] {
                let collider = arrow_in && h.mark_here == Mark::Arrow;
                if !latent[v] && !collider {
                    continue;
                }
                if collider && !anc_xy[v] {
                    continue;
                }
                if h.to == y {
                    return true;
                }
                let next_arrow = h.mark_there == Mark::Arrow;
                if !seen[h.to][next_arrow as usize] {
                    seen[h.to][next_arrow as usize] = true;
                    stack.push((h.to, next_arrow));
                }
            }
        }
        false
    }

    /// Serializes to the JSON interchange document. Nodes are sorted and edges
    /// sorted by (a, b, mark_a, mark_b); `decode(encode(g)) == g`.
    pub fn encode(&self) -> String {
        let doc = GraphDoc {
            kind: self.kind.as_str().to_string(),
            nodes: self.names.iter().map(|n| n.0.clone()).collect(),
            edges: self
                .edges()
                .into_iter()
                .map(|e| EdgeDoc {
                    a: e.a.0,
                    b: e.b.0,
                    mark_a: e.mark_a,
                    mark_b: e.mark_b,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("graph document serializes")
    }

    pub fn decode(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
        let kind = match doc.kind.as_str() {
            "DAG" => GraphKind::DAG,
            "ADMG" => GraphKind::ADMG,
            "CPDAG" => GraphKind::CPDAG,
            "MAG" => GraphKind::MAG,
            "PAG" => GraphKind::PAG,
            other => return Err(GraphError::Malformed(format!("unknown kind `{other}`"))),
        };
        let mut g = Graph::new(kind, doc.nodes)?;
        for e in doc.edges {
            g.add_edge(&e.a, &e.b, e.mark_a, e.mark_b)?;
        }
        Ok(g)
    }

}

fn is_bidirected(ma: Mark, mb: Mark) -> bool {
    ma == Mark::Arrow && mb == Mark::Arrow
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    kind: String,
    nodes: Vec<String>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    a: String,
    b: String,
    mark_a: Mark,
    mark_b: Mark,
}
