//! Path-based separation and visibility machinery.
//!
//! `is_m_separated` runs a reachability traversal over (node, incoming-mark)
//! states rather than enumerating paths; the exhaustive path enumeration
//! lives in the test suite as an independent oracle. Walk reachability and
//! path existence coincide for m-connection, so the traversal is exact.

use crate::graph::{Graph, GraphError, GraphKind, Mark, NodeId};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeparationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{op} is not defined for graphs of kind {kind}")]
    UnsupportedKind { op: &'static str, kind: GraphKind },
    #[error("query endpoints must differ and be disjoint from the conditioning set")]
    BadQuery,
    #[error("edge {0} -> {1} is not a fully directed edge of the graph")]
    NotDirectedEdge(String, String),
}

/// A separation query: are `x` and `y` separated given `conditioning`?
#[derive(Debug, Clone)]
pub struct PathQuery {
    pub x: NodeId,
    pub y: NodeId,
    pub conditioning: BTreeSet<NodeId>,
}

impl PathQuery {
    pub fn new<I, S>(x: &str, y: &str, conditioning: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<NodeId>,
    {
        PathQuery {
            x: x.into(),
            y: y.into(),
            conditioning: conditioning.into_iter().map(Into::into).collect(),
        }
    }
}

/// True iff no undirected path between `q.x` and `q.y` is m-connecting given
/// `q.conditioning`: every non-collider on an open path must lie outside Z and
/// every collider must be an ancestor of (or in) Z. On DAGs this is
/// d-separation.
pub fn is_m_separated(g: &Graph, q: &PathQuery) -> Result<bool, SeparationError> {
    if !matches!(g.kind(), GraphKind::DAG | GraphKind::ADMG | GraphKind::MAG) {
        return Err(SeparationError::UnsupportedKind {
            op: "m-separation",
            kind: g.kind(),
        });
    }
    let x = g.idx(q.x.as_str())?;
    let y = g.idx(q.y.as_str())?;
    let mut z = vec![false; g.node_count()];
    for c in &q.conditioning {
        z[g.idx(c.as_str())?] = true;
    }
    if x == y || z[x] || z[y] {
        return Err(SeparationError::BadQuery);
    }
    Ok(!m_connected_ix(g, x, y, &z))
}

/// Reachability over (node, incoming mark) states.
pub(crate) fn m_connected_ix(g: &Graph, x: usize, y: usize, z: &[bool]) -> bool {
    let z_seeds: Vec<usize> = (0..z.len()).filter(|&v| z[v]).collect();
    let anc_z = g.ancestors_mask(&z_seeds);
    let mut seen = vec![[false; 2]; g.node_count()];
    let mut stack: Vec<(usize, bool)> = Vec::new();
    for h in g.half_edges(x) {
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
        for h in g.half_edges(v) {
            let collider = arrow_in && h.mark_here == Mark::Arrow;
            let open = if collider { anc_z[v] } else { !z[v] };
            if !open {
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

/// True iff a path between `x` and `y` exists whose every non-endpoint
/// outside `latent` is a collider and an ancestor of one of the endpoints.
/// Drives latent-MAG projection and MAG maximality validation.
pub fn inducing_path_exists(
    g: &Graph,
    x: &str,
    y: &str,
    latent: &BTreeSet<NodeId>,
) -> Result<bool, SeparationError> {
    if !matches!(g.kind(), GraphKind::DAG | GraphKind::ADMG | GraphKind::MAG) {
        return Err(SeparationError::UnsupportedKind {
            op: "inducing paths",
            kind: g.kind(),
        });
    }
    let ix = g.idx(x)?;
    let iy = g.idx(y)?;
    if ix == iy {
        return Err(SeparationError::BadQuery);
    }
    let mut latent_mask = vec![false; g.node_count()];
    for l in latent {
        latent_mask[g.idx(l.as_str())?] = true;
    }
    Ok(g.inducing_walk_ix(ix, iy, &latent_mask))
}

/// Visibility of a fully directed edge `from -> to`.
///
/// Every edge in a DAG or CPDAG is visible. In a MAG or PAG the edge is
/// visible iff some node z outside the adjacency of `to` reaches `from`
/// through a collider path into `from` whose interior nodes are all parents
/// of `to` (a single edge with an arrowhead at `from` counts).
pub fn is_visible(g: &Graph, from: &str, to: &str) -> Result<bool, SeparationError> {
    let f = g.idx(from)?;
    let t = g.idx(to)?;
    if !g.has_directed_ix(f, t) {
        return Err(SeparationError::NotDirectedEdge(
            from.to_string(),
            to.to_string(),
        ));
    }
    match g.kind() {
        GraphKind::DAG | GraphKind::CPDAG => Ok(true),
        GraphKind::MAG | GraphKind::PAG => Ok(visible_ix(g, f, t)),
        GraphKind::ADMG => Err(SeparationError::UnsupportedKind {
            op: "edge visibility",
            kind: g.kind(),
        }),
    }
}

fn visible_ix(g: &Graph, from: usize, to: usize) -> bool {
    let n = g.node_count();
    let parents_of_to: Vec<bool> = {
        let mut m = vec![false; n];
        for p in g.parents_ix(to) {
            m[p] = true;
        }
        m
    };
    for z in 0..n {
        if z == from || z == to || g.adjacent_ix(z, to) {
            continue;
        }
        // Collider path z .. from: interior nodes carry arrowheads on both
        // sides and are parents of `to`; the final edge points into `from`.
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        for h in g.half_edges(z) {
            if h.mark_there != Mark::Arrow {
                continue;
            }
            if h.to == from {
                return true;
            }
            if parents_of_to[h.to] && !seen[h.to] {
                seen[h.to] = true;
                stack.push(h.to);
            }
        }
        while let Some(v) = stack.pop() {
            for h in g.half_edges(v) {
                if h.mark_here != Mark::Arrow || h.mark_there != Mark::Arrow {
                    continue;
                }
                if h.to == from {
                    return true;
                }
                if parents_of_to[h.to] && !seen[h.to] {
                    seen[h.to] = true;
                    stack.push(h.to);
                }
            }
        }
    }
    false
}

/// True iff some definite-status, non-causal path from `q.x` to `q.y` is
/// m-connecting given the conditioning set. Interior nodes must be colliders
/// (two arrowheads) or definite non-colliders (at least one tail); circle
/// pairs have no definite status and prune the search.
pub fn definite_status_open_paths(g: &Graph, q: &PathQuery) -> Result<bool, SeparationError> {
    let x = g.idx(q.x.as_str())?;
    let y = g.idx(q.y.as_str())?;
    let mut z = vec![false; g.node_count()];
    for c in &q.conditioning {
        z[g.idx(c.as_str())?] = true;
    }
    if x == y || z[x] || z[y] {
        return Err(SeparationError::BadQuery);
    }
    let z_seeds: Vec<usize> = (0..z.len()).filter(|&v| z[v]).collect();
    let anc_z = g.ancestors_mask(&z_seeds);
    let mut on_path = vec![false; g.node_count()];
    on_path[x] = true;
    dfs_definite(g, x, y, &z, &anc_z, None, true, &mut on_path)
}

/// Depth-first search over simple paths keeping the mark of the edge used to
/// enter the current node (`incoming`) and whether the path so far consists
/// solely of forward directed edges (`causal`).
#[allow(clippy::too_many_arguments)]
fn dfs_definite(
    g: &Graph,
    v: usize,
    y: usize,
    z: &[bool],
    anc_z: &[bool],
    incoming: Option<Mark>,
    causal: bool,
    on_path: &mut Vec<bool>,
) -> Result<bool, SeparationError> {
    for h in g.half_edges(v) {
        if on_path[h.to] {
            continue;
        }
        // Status of v as an interior node, given the incoming and outgoing marks.
        if let Some(m_in) = incoming {
            let collider = m_in == Mark::Arrow && h.mark_here == Mark::Arrow;
            let definite_non_collider = m_in == Mark::Tail || h.mark_here == Mark::Tail;
            let open = if collider {
                anc_z[v]
            } else if definite_non_collider {
                !z[v]
            } else {
                false // no definite status
            };
            if !open {
                continue;
            }
        }
        let step_directed = h.mark_here == Mark::Tail && h.mark_there == Mark::Arrow;
        let next_causal = causal && step_directed;
        if h.to == y {
            if !next_causal {
                return Ok(true);
            }
            continue;
        }
        on_path[h.to] = true;
        let hit = dfs_definite(
            g,
            h.to,
            y,
            z,
            anc_z,
            Some(h.mark_there),
            next_causal,
            on_path,
        )?;
        on_path[h.to] = false;
        if hit {
            return Ok(true);
        }
    }
    Ok(false)
}
