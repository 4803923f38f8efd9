//! Identifiability and adjustment-set machinery.
//!
//! The generalized criterion applies to DAGs, CPDAGs, MAGs and PAGs; ADMGs
//! are served by parent adjustment and the bidirected-path identifiability
//! check. The API names roles (treatment, outcome) rather than indices.

use crate::graph::{Graph, GraphError, GraphKind, Mark, NodeId};
use crate::separation::{definite_status_open_paths, is_visible, PathQuery, SeparationError};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdjustmentError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error("{op} is not defined for graphs of kind {kind}")]
    UnsupportedKind { op: &'static str, kind: GraphKind },
    #[error("treatment and outcome must differ")]
    SameNode,
    #[error("candidate set overlaps treatment or outcome")]
    OverlappingCandidate,
}

/// An adjustment-validity query.
#[derive(Debug, Clone)]
pub struct AdjustmentQuery {
    pub treatment: NodeId,
    pub outcome: NodeId,
    pub candidate: BTreeSet<NodeId>,
}

impl AdjustmentQuery {
    pub fn new<I, S>(treatment: &str, outcome: &str, candidate: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<NodeId>,
    {
        AdjustmentQuery {
            treatment: treatment.into(),
            outcome: outcome.into(),
            candidate: candidate.into_iter().map(Into::into).collect(),
        }
    }
}

fn check_generalized_kind(g: &Graph, op: &'static str) -> Result<(), AdjustmentError> {
    match g.kind() {
        GraphKind::DAG | GraphKind::CPDAG | GraphKind::MAG | GraphKind::PAG => Ok(()),
        kind => Err(AdjustmentError::UnsupportedKind { op, kind }),
    }
}

/// Nodes other than the treatment that lie on some proper possibly directed
/// path from `treatment` to `outcome` (the outcome included when a path
/// exists).
fn nodes_on_pd_paths(g: &Graph, t: usize, o: usize) -> Vec<bool> {
    let n = g.node_count();
    let pd_from_t = g.possible_descendants_mask(&[t]);
    let pd_to_o = g.possible_ancestors_mask(&[o]);
    let candidate: Vec<bool> = (0..n).map(|v| pd_from_t[v] && pd_to_o[v]).collect();
    let mut on_path = vec![false; n];
    if !candidate[o] {
        return on_path;
    }
    let mut path = vec![t];
    let mut visited = vec![false; n];
    visited[t] = true;
    dfs_pd(g, t, o, &candidate, &mut path, &mut visited, &mut on_path);
    on_path[t] = false;
    on_path
}

fn dfs_pd(
    g: &Graph,
    v: usize,
    o: usize,
    candidate: &[bool],
    path: &mut Vec<usize>,
    visited: &mut Vec<bool>,
    on_path: &mut Vec<bool>,
) {
    if v == o {
        for &u in path.iter() {
            on_path[u] = true;
        }
        return;
    }
    for h in g.half_edges(v) {
        if h.mark_here == Mark::Arrow || visited[h.to] || !candidate[h.to] {
            continue;
        }
        visited[h.to] = true;
        path.push(h.to);
        dfs_pd(g, h.to, o, candidate, path, visited, on_path);
        path.pop();
        visited[h.to] = false;
    }
}

/// Forbidden set: possible descendants of every node other than the
/// treatment that lies on a possibly directed treatment-to-outcome path.
pub fn forbidden_set(
    g: &Graph,
    treatment: &str,
    outcome: &str,
) -> Result<BTreeSet<NodeId>, AdjustmentError> {
    check_generalized_kind(g, "forbidden_set")?;
    let t = g.idx(treatment)?;
    let o = g.idx(outcome)?;
    if t == o {
        return Err(AdjustmentError::SameNode);
    }
    let on_path = nodes_on_pd_paths(g, t, o);
    let seeds: Vec<usize> = (0..g.node_count()).filter(|&v| on_path[v]).collect();
    let forb = g.possible_descendants_mask(&seeds);
    Ok(g.mask_to_names(&forb))
}

/// Canonical adjustment set: possible ancestors of treatment and outcome,
/// minus the forbidden set and the pair itself. Valid whenever any valid
/// adjustment set exists.
pub fn canonical_adjustment_set(
    g: &Graph,
    treatment: &str,
    outcome: &str,
) -> Result<BTreeSet<NodeId>, AdjustmentError> {
    check_generalized_kind(g, "canonical_adjustment_set")?;
    let t = g.idx(treatment)?;
    let o = g.idx(outcome)?;
    if t == o {
        return Err(AdjustmentError::SameNode);
    }
    let poss_anc = g.possible_ancestors_mask(&[t, o]);
    let forb = forbidden_set(g, treatment, outcome)?;
    let mut out = BTreeSet::new();
    for (v, &in_anc) in poss_anc.iter().enumerate() {
        if v == t || v == o || !in_anc {
            continue;
        }
        let name = g.name(v).clone();
        if !forb.contains(&name) {
            out.insert(name);
        }
    }
    Ok(out)
}

/// Generalized adjustment criterion. All three conditions must hold:
/// every possibly directed treatment-to-outcome path starts with a visible
/// directed edge, the candidate avoids the forbidden set, and the candidate
/// m-separates every definite-status non-causal path.
///
/// When no possibly directed path exists the implied effect is null
/// (p(outcome) itself); the empty set counts as valid (the marginal claim),
/// as does any candidate that blocks every path, since its adjustment
/// formula provably collapses to the marginal.
pub fn is_valid_adjustment(g: &Graph, q: &AdjustmentQuery) -> Result<bool, AdjustmentError> {
    check_generalized_kind(g, "is_valid_adjustment")?;
    let t = g.idx(q.treatment.as_str())?;
    let o = g.idx(q.outcome.as_str())?;
    if t == o {
        return Err(AdjustmentError::SameNode);
    }
    if q.candidate.contains(&q.treatment) || q.candidate.contains(&q.outcome) {
        return Err(AdjustmentError::OverlappingCandidate);
    }
    for c in &q.candidate {
        g.idx(c.as_str())?;
    }

    let on_path = nodes_on_pd_paths(g, t, o);
    let causal_path_exists = on_path.iter().any(|&b| b);
    if !causal_path_exists {
        if q.candidate.is_empty() {
            return Ok(true);
        }
        let open = definite_status_open_paths(
            g,
            &PathQuery {
                x: q.treatment.clone(),
                y: q.outcome.clone(),
                conditioning: q.candidate.clone(),
            },
        )?;
        return Ok(!open);
    }

    // Condition 1: every possibly directed path leaves the treatment through
    // a visible directed edge. First steps are exactly the on-path possible
    // descendants adjacent to the treatment via a non-arrow mark at t.
    for h in g.half_edges(t) {
        if h.mark_here == Mark::Arrow {
            continue;
        }
        let w = h.to;
        let first_step_on_path = on_path[w] && pd_path_through_first_step(g, t, w, o, &on_path);
        if !first_step_on_path {
            continue;
        }
        let directed = h.mark_here == Mark::Tail && h.mark_there == Mark::Arrow;
        if !directed {
            return Ok(false);
        }
        if !is_visible(g, g.name(t).as_str(), g.name(w).as_str())? {
            return Ok(false);
        }
    }

    // Condition 2: candidate avoids the forbidden set.
    let forb = forbidden_set(g, q.treatment.as_str(), q.outcome.as_str())?;
    if q.candidate.iter().any(|c| forb.contains(c)) {
        return Ok(false);
    }

    // Condition 3: all non-causal definite-status paths blocked.
    let open = definite_status_open_paths(
        g,
        &PathQuery {
            x: q.treatment.clone(),
            y: q.outcome.clone(),
            conditioning: q.candidate.clone(),
        },
    )?;
    Ok(!open)
}

/// Whether some possibly directed path t -> o uses (t, w) as its first edge.
fn pd_path_through_first_step(g: &Graph, t: usize, w: usize, o: usize, on_path: &[bool]) -> bool {
    if w == o {
        return true;
    }
    let n = g.node_count();
    let mut visited = vec![false; n];
    visited[t] = true;
    visited[w] = true;
    let mut path = vec![w];
    let mut hit = vec![false; n];
    let candidate: Vec<bool> = (0..n).map(|v| on_path[v] || v == o).collect();
    dfs_pd(g, w, o, &candidate, &mut path, &mut visited, &mut hit);
    hit[o]
}

/// Parent adjustment for DAGs and ADMGs: valid iff no bidirected edge
/// touches the treatment; the set is the treatment's parents.
pub fn parent_adjustment_valid(
    g: &Graph,
    treatment: &str,
    outcome: &str,
) -> Result<(bool, BTreeSet<NodeId>), AdjustmentError> {
    if !matches!(g.kind(), GraphKind::DAG | GraphKind::ADMG) {
        return Err(AdjustmentError::UnsupportedKind {
            op: "parent_adjustment_valid",
            kind: g.kind(),
        });
    }
    let t = g.idx(treatment)?;
    let o = g.idx(outcome)?;
    if t == o {
        return Err(AdjustmentError::SameNode);
    }
    let valid = g.spouses_ix(t).is_empty();
    Ok((valid, g.parents(treatment)?))
}

/// Identifiability of p(outcome | do(treatment)) in an ADMG: no path of
/// bidirected edges may connect the treatment to any of its children.
pub fn identifiable_in_admg(
    g: &Graph,
    treatment: &str,
    outcome: &str,
) -> Result<bool, AdjustmentError> {
    if !matches!(g.kind(), GraphKind::DAG | GraphKind::ADMG) {
        return Err(AdjustmentError::UnsupportedKind {
            op: "identifiable_in_admg",
            kind: g.kind(),
        });
    }
    let t = g.idx(treatment)?;
    let o = g.idx(outcome)?;
    if t == o {
        return Err(AdjustmentError::SameNode);
    }
    let children: BTreeSet<usize> = g.children_ix(t).into_iter().collect();
    if children.is_empty() {
        return Ok(true);
    }
    let mut seen = vec![false; g.node_count()];
    let mut stack = vec![t];
    seen[t] = true;
    while let Some(v) = stack.pop() {
        for s in g.spouses_ix(v) {
            if children.contains(&s) {
                return Ok(false);
            }
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    Ok(true)
}
