//! Latent-projection operators: marginalize a causal graph onto a subset of
//! its nodes, in ADMG, MAG, CPDAG or PAG semantics, plus DAG -> CPDAG
//! conversion.

mod pag;
mod pdag;

use crate::graph::{Graph, GraphError, GraphKind, Mark, NodeId};
use crate::separation::{is_m_separated, PathQuery};
use pag::PagBuilder;
pub(crate) use pdag::Pdag;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Working PDAG with all skeleton edges undirected; used by PC.
#[allow(clippy::needless_range_loop)]
pub(crate) fn pdag_from_skeleton(n: usize, adjacent: &[Vec<bool>]) -> Pdag {
    let mut p = Pdag::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent[i][j] {
                p.add_undirected(i, j);
            }
        }
    }
    p
}

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{op} expects a {expected} input, got {got}")]
    WrongKind {
        op: &'static str,
        expected: &'static str,
        got: GraphKind,
    },
    #[error("keep-set must be a non-empty subset of the graph's nodes")]
    BadKeepSet,
}

fn keep_mask(g: &Graph, keep: &BTreeSet<NodeId>) -> Result<Vec<bool>, ProjectionError> {
    if keep.is_empty() {
        return Err(ProjectionError::BadKeepSet);
    }
    let mut mask = vec![false; g.node_count()];
    for k in keep {
        let ix = g.idx(k.as_str()).map_err(|_| ProjectionError::BadKeepSet)?;
        mask[ix] = true;
    }
    Ok(mask)
}

/// Latent ADMG L(G, S): keeps a directed edge X -> Y when a directed path
/// runs from X to Y entirely through dropped nodes, and a bidirected edge
/// when a path with arrowheads into both endpoints passes only through
/// dropped non-colliders.
pub fn latent_admg(g: &Graph, keep: &BTreeSet<NodeId>) -> Result<Graph, ProjectionError> {
    if !matches!(g.kind(), GraphKind::DAG | GraphKind::ADMG) {
        return Err(ProjectionError::WrongKind {
            op: "latent_admg",
            expected: "DAG or ADMG",
            got: g.kind(),
        });
    }
    let mask = keep_mask(g, keep)?;
    let n = g.node_count();
    let mut out = Graph::new(GraphKind::ADMG, keep.iter().cloned())?;
    let kept: Vec<usize> = (0..n).filter(|&v| mask[v]).collect();

    for &x in &kept {
        // Directed: BFS through dropped nodes along directed edges.
        let mut seen = vec![false; n];
        let mut stack = vec![x];
        seen[x] = true;
        while let Some(v) = stack.pop() {
            for c in g.children_ix(v) {
                if seen[c] {
                    continue;
                }
                seen[c] = true;
                if mask[c] {
                    out.add_directed(g.name(x).as_str(), g.name(c).as_str())?;
                } else {
                    stack.push(c);
                }
            }
        }
    }

    for &x in &kept {
        for y in bidirected_reach(g, x, &mask) {
            if y > x {
                out.add_bidirected(g.name(x).as_str(), g.name(y).as_str())?;
            }
        }
    }
    Ok(out)
}

/// Kept nodes y reachable from x along a path whose first and last edges
/// point into the endpoints and whose interior nodes are dropped
/// non-colliders.
fn bidirected_reach(g: &Graph, x: usize, keep: &[bool]) -> Vec<usize> {
    let n = g.node_count();
    // State: arrived at node with (true = arrowhead at node).
    let mut seen = vec![[false; 2]; n];
    let mut stack: Vec<(usize, bool)> = Vec::new();
    let mut hits = vec![false; n];
    for h in g.half_edges(x) {
        if h.mark_here != Mark::Arrow {
            continue; // first edge must point into x
        }
        let arrow_in = h.mark_there == Mark::Arrow;
        if keep[h.to] {
            if arrow_in {
                hits[h.to] = true;
            }
            continue;
        }
        if !seen[h.to][arrow_in as usize] {
            seen[h.to][arrow_in as usize] = true;
            stack.push((h.to, arrow_in));
        }
    }
    while let Some((v, arrow_in)) = stack.pop() {
        for h in g.half_edges(v) {
            // v must stay a non-collider.
            if arrow_in && h.mark_here == Mark::Arrow {
                continue;
            }
            let next_arrow = h.mark_there == Mark::Arrow;
            if keep[h.to] {
                if next_arrow {
                    hits[h.to] = true;
                }
                continue;
            }
            if !seen[h.to][next_arrow as usize] {
                seen[h.to][next_arrow as usize] = true;
                stack.push((h.to, next_arrow));
            }
        }
    }
    hits[x] = false;
    (0..n).filter(|&v| hits[v]).collect()
}

/// Latent MAG of a DAG: an edge per inducing path w.r.t. the dropped nodes;
/// a tail marks an endpoint that is an ancestor (in the DAG) of the other.
pub fn latent_mag(g: &Graph, keep: &BTreeSet<NodeId>) -> Result<Graph, ProjectionError> {
    if g.kind() != GraphKind::DAG {
        return Err(ProjectionError::WrongKind {
            op: "latent_mag",
            expected: "DAG",
            got: g.kind(),
        });
    }
    let mask = keep_mask(g, keep)?;
    let latent: Vec<bool> = mask.iter().map(|&m| !m).collect();
    let n = g.node_count();
    let kept: Vec<usize> = (0..n).filter(|&v| mask[v]).collect();
    let mut out = Graph::new(GraphKind::MAG, keep.iter().cloned())?;
    for (i, &x) in kept.iter().enumerate() {
        let anc_x = g.ancestors_mask(&[x]);
        for &y in kept.iter().skip(i + 1) {
            if !g.inducing_walk_ix(x, y, &latent) {
                continue;
            }
            let anc_y = g.ancestors_mask(&[y]);
            let mark_x = if anc_y[x] { Mark::Tail } else { Mark::Arrow };
            let mark_y = if anc_x[y] { Mark::Tail } else { Mark::Arrow };
            out.add_edge(g.name(x).as_str(), g.name(y).as_str(), mark_x, mark_y)?;
        }
    }
    Ok(out)
}

/// CPDAG of a DAG's Markov equivalence class: skeleton, the DAG's unshielded
/// colliders, then Meek closure.
pub fn dag_to_cpdag(g: &Graph) -> Result<Graph, ProjectionError> {
    if g.kind() != GraphKind::DAG {
        return Err(ProjectionError::WrongKind {
            op: "dag_to_cpdag",
            expected: "DAG",
            got: g.kind(),
        });
    }
    let n = g.node_count();
    let mut pdag = Pdag::new(n);
    for e in g.edges() {
        let i = g.idx(e.a.as_str())?;
        let j = g.idx(e.b.as_str())?;
        pdag.add_undirected(i, j);
    }
    for k in 0..n {
        let parents = g.parents_ix(k);
        for (pi, &i) in parents.iter().enumerate() {
            for &j in parents.iter().skip(pi + 1) {
                if !g.adjacent_ix(i, j) {
                    pdag.orient(i, k);
                    pdag.orient(j, k);
                }
            }
        }
    }
    pdag.meek_closure();
    let names: Vec<String> = g.nodes().iter().map(|n| n.0.clone()).collect();
    Ok(pdag.to_graph(GraphKind::CPDAG, &names)?)
}

/// Latent CPDAG of a DAG: latent ADMG with all bidirected edges deleted
/// (the practical rule for subsets that break causal sufficiency), then the
/// CPDAG of the remaining DAG.
pub fn latent_cpdag(g: &Graph, keep: &BTreeSet<NodeId>) -> Result<Graph, ProjectionError> {
    if g.kind() != GraphKind::DAG {
        return Err(ProjectionError::WrongKind {
            op: "latent_cpdag",
            expected: "DAG",
            got: g.kind(),
        });
    }
    let admg = latent_admg(g, keep)?;
    let mut dag = Graph::new(GraphKind::DAG, keep.iter().cloned())?;
    for e in admg.edges() {
        if (e.mark_a, e.mark_b) == (Mark::Tail, Mark::Arrow) {
            dag.add_directed(e.a.as_str(), e.b.as_str())?;
        } else if (e.mark_a, e.mark_b) == (Mark::Arrow, Mark::Tail) {
            dag.add_directed(e.b.as_str(), e.a.as_str())?;
        }
    }
    dag_to_cpdag(&dag)
}

/// PAG of a MAG's Markov equivalence class via oracle-FCI: the MAG supplies
/// the skeleton and an m-separation oracle for separating sets.
pub fn mag_to_pag(m: &Graph) -> Result<Graph, ProjectionError> {
    if m.kind() != GraphKind::MAG {
        return Err(ProjectionError::WrongKind {
            op: "mag_to_pag",
            expected: "MAG",
            got: m.kind(),
        });
    }
    let names: Vec<String> = m.nodes().iter().map(|n| n.0.clone()).collect();
    let n = names.len();
    let mut adjacent = Vec::new();
    let mut sepsets = BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if m.adjacent_ix(i, j) {
                adjacent.push((i, j));
            } else {
                let sep = find_sepset(m, i, j, &names)
                    .expect("non-adjacent MAG nodes are m-separable by maximality");
                sepsets.insert((i, j), sep);
            }
        }
    }
    let mut builder = PagBuilder::new(n, &adjacent, sepsets);
    builder.orient();
    Ok(builder.into_graph(&names)?)
}

/// Smallest (then lexicographically first) separating set, by subset
/// enumeration over the remaining nodes.
fn find_sepset(g: &Graph, i: usize, j: usize, names: &[String]) -> Option<Vec<usize>> {
    let others: Vec<usize> = (0..names.len()).filter(|&v| v != i && v != j).collect();
    for size in 0..=others.len() {
        let mut found = None;
        for_each_combination(others.len(), size, &mut |combo| {
            if found.is_some() {
                return;
            }
            let candidate: Vec<usize> = combo.iter().map(|&c| others[c]).collect();
            let q = PathQuery::new(
                &names[i],
                &names[j],
                candidate.iter().map(|&v| names[v].as_str()),
            );
            if is_m_separated(g, &q).unwrap_or(false) {
                found = Some(candidate);
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Calls `f` with every size-k index combination of 0..n in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        f(&combo);
        if k == 0 {
            return;
        }
        // advance to the next combination
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if combo[pos] + (k - pos) < n {
                combo[pos] += 1;
                for q in (pos + 1)..k {
                    combo[q] = combo[q - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Latent PAG of a DAG: the PAG of the latent MAG's equivalence class.
pub fn latent_pag(g: &Graph, keep: &BTreeSet<NodeId>) -> Result<Graph, ProjectionError> {
    let m = latent_mag(g, keep)?;
    mag_to_pag(&m)
}

/// Projects a CPDAG onto `keep` by taking a consistent DAG extension,
/// projecting it with `latent_cpdag`, and re-completing.
pub fn project_cpdag(c: &Graph, keep: &BTreeSet<NodeId>) -> Result<Graph, ProjectionError> {
    if c.kind() != GraphKind::CPDAG {
        return Err(ProjectionError::WrongKind {
            op: "project_cpdag",
            expected: "CPDAG",
            got: c.kind(),
        });
    }
    let ext = consistent_extension(c)?;
    latent_cpdag(&ext, keep)
}

/// A DAG from the equivalence class a CPDAG describes (Dor-Tarsi). For
/// non-extendable inputs a deterministic acyclic fallback orientation is
/// used.
pub fn consistent_extension(c: &Graph) -> Result<Graph, ProjectionError> {
    if c.kind() != GraphKind::CPDAG {
        return Err(ProjectionError::WrongKind {
            op: "consistent_extension",
            expected: "CPDAG",
            got: c.kind(),
        });
    }
    let n = c.node_count();
    let mut pdag = Pdag::new(n);
    for e in c.edges() {
        let i = c.idx(e.a.as_str())?;
        let j = c.idx(e.b.as_str())?;
        match (e.mark_a, e.mark_b) {
            (Mark::Tail, Mark::Tail) => pdag.add_undirected(i, j),
            (Mark::Tail, Mark::Arrow) => {
                pdag.add_undirected(i, j);
                pdag.orient(i, j);
            }
            (Mark::Arrow, Mark::Tail) => {
                pdag.add_undirected(i, j);
                pdag.orient(j, i);
            }
            _ => unreachable!("CPDAG edges carry tail/arrow marks only"),
        }
    }
    let ext = pdag.consistent_extension();
    let names: Vec<String> = c.nodes().iter().map(|x| x.0.clone()).collect();
    Ok(ext.to_graph(GraphKind::DAG, &names)?)
}
