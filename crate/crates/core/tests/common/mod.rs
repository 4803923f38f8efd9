//! Independent test oracles. Everything here recomputes expected values from
//! first principles over the public `Graph` surface (edge lists only), so the
//! implementations under test share no traversal code with these checks.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use selfcompat::graph::{Edge, Graph, GraphKind, Mark, NodeId};
use selfcompat::scm::LinearScm;
use std::collections::{BTreeMap, BTreeSet};

/// Adjacency view rebuilt from the public edge list: (neighbor, mark at the
/// current node, mark at the neighbor).
pub struct EdgeView {
    pub names: Vec<NodeId>,
    pub adj: Vec<Vec<(usize, Mark, Mark)>>,
}

impl EdgeView {
    pub fn new(g: &Graph) -> Self {
        let names: Vec<NodeId> = g.nodes().to_vec();
        let index: BTreeMap<&NodeId, usize> =
            names.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut adj = vec![Vec::new(); names.len()];
        for Edge {
            a,
            b,
            mark_a,
            mark_b,
        } in g.edges()
        {
            let ia = index[&a];
            let ib = index[&b];
            adj[ia].push((ib, mark_a, mark_b));
            adj[ib].push((ia, mark_b, mark_a));
        }
        EdgeView { names, adj }
    }

    pub fn idx(&self, name: &str) -> usize {
        self.names.iter().position(|n| n.as_str() == name).unwrap()
    }

    /// Ancestor mask via directed edges, including the seeds.
    pub fn ancestors(&self, seeds: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut stack = seeds.to_vec();
        for &s in seeds {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for &(w, mark_here, mark_there) in &self.adj[v] {
                // w -> v means arrow at v, tail at w.
                if mark_here == Mark::Arrow && mark_there == Mark::Tail && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

/// Exhaustive path-based m-connection: enumerates every simple path and
/// classifies each interior node by the collider rule.
pub fn brute_force_m_connected(g: &Graph, x: &str, y: &str, z: &BTreeSet<NodeId>) -> bool {
    let view = EdgeView::new(g);
    let xi = view.idx(x);
    let yi = view.idx(y);
    let z_mask: Vec<bool> = view
        .names
        .iter()
        .map(|n| z.contains(n))
        .collect();
    let z_seeds: Vec<usize> = (0..view.names.len()).filter(|&v| z_mask[v]).collect();
    let anc_z = view.ancestors(&z_seeds);
    let mut on_path = vec![false; view.names.len()];
    on_path[xi] = true;
    // Path entries: (node, mark of the entering edge at that node).
    let mut stack_path: Vec<(usize, Mark)> = Vec::new();
    dfs_paths(&view, xi, yi, &z_mask, &anc_z, &mut on_path, &mut stack_path)
}

fn dfs_paths(
    view: &EdgeView,
    v: usize,
    target: usize,
    z: &[bool],
    anc_z: &[bool],
    on_path: &mut Vec<bool>,
    path: &mut Vec<(usize, Mark)>,
) -> bool {
    for &(w, mark_here, mark_there) in &view.adj[v] {
        if on_path[w] {
            continue;
        }
        // v is interior iff the path already has an entry for it.
        if let Some(&(node, in_mark)) = path.last() {
            debug_assert_eq!(node, v);
            let collider = in_mark == Mark::Arrow && mark_here == Mark::Arrow;
            let open = if collider { anc_z[v] } else { !z[v] };
            if !open {
                continue;
            }
        }
        if w == target {
            return true;
        }
        on_path[w] = true;
        path.push((w, mark_there));
        if dfs_paths(view, w, target, z, anc_z, on_path, path) {
            return true;
        }
        path.pop();
        on_path[w] = false;
    }
    false
}

/// d-separation on DAGs via the moralized ancestral subgraph.
pub fn moral_separation(g: &Graph, x: &str, y: &str, z: &BTreeSet<NodeId>) -> bool {
    let view = EdgeView::new(g);
    let xi = view.idx(x);
    let yi = view.idx(y);
    let mut seeds = vec![xi, yi];
    for c in z {
        seeds.push(view.idx(c.as_str()));
    }
    let keep = view.ancestors(&seeds);
    let n = view.names.len();
    // Undirected moral graph on the ancestral set.
    let mut und = vec![vec![false; n]; n];
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        if !keep[v] {
            continue;
        }
        for &(w, mark_here, mark_there) in &view.adj[v] {
            if !keep[w] {
                continue;
            }
            und[v][w] = true;
            und[w][v] = true;
            if mark_here == Mark::Arrow && mark_there == Mark::Tail {
                parents[v].push(w);
            }
        }
    }
    // Marry parents of a common child.
    #[allow(clippy::needless_range_loop)]
    for v in 0..n {
        for (i, &p) in parents[v].iter().enumerate() {
            for &q in parents[v].iter().skip(i + 1) {
                und[p][q] = true;
                und[q][p] = true;
            }
        }
    }
    // Remove Z and test connectivity.
    let z_mask: Vec<bool> = view.names.iter().map(|nm| z.contains(nm)).collect();
    let mut seen = vec![false; n];
    let mut stack = vec![xi];
    seen[xi] = true;
    while let Some(v) = stack.pop() {
        if v == yi {
            return false; // connected => not separated
        }
        for w in 0..n {
            if und[v][w] && keep[w] && !z_mask[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    true
}

/// CPDAG by brute force: enumerate every acyclic orientation of the skeleton
/// with the same unshielded colliders and mark edges compelled iff all
/// members agree.
pub fn cpdag_by_enumeration(dag: &Graph) -> Graph {
    let view = EdgeView::new(dag);
    let n = view.names.len();
    let mut skeleton: Vec<(usize, usize)> = Vec::new();
    let mut orig_dir: Vec<bool> = Vec::new(); // true = a -> b for pairs (a < b)
    for e in dag.edges() {
        let a = view.idx(e.a.as_str());
        let b = view.idx(e.b.as_str());
        skeleton.push((a, b));
        orig_dir.push(e.mark_a == Mark::Tail);
    }
    let adj = |a: usize, b: usize| skeleton.iter().any(|&(x, y)| (x, y) == (a.min(b), a.max(b)));
    let v_structs = |dirs: &[bool]| -> BTreeSet<(usize, usize, usize)> {
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, &(a, b)) in skeleton.iter().enumerate() {
            if dirs[k] {
                parents[b].push(a);
            } else {
                parents[a].push(b);
            }
        }
        let mut out = BTreeSet::new();
        for (c, ps) in parents.iter().enumerate() {
            for (i, &p) in ps.iter().enumerate() {
                for &q in ps.iter().skip(i + 1) {
                    if !adj(p, q) {
                        out.insert((p.min(q), c, p.max(q)));
                    }
                }
            }
        }
        out
    };
    let acyclic = |dirs: &[bool]| -> bool {
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, &(a, b)) in skeleton.iter().enumerate() {
            if dirs[k] {
                children[a].push(b);
            } else {
                children[b].push(a);
            }
        }
        // DFS cycle check.
        let mut state = vec![0u8; n];
        fn visit(v: usize, children: &[Vec<usize>], state: &mut [u8]) -> bool {
            state[v] = 1;
            for &c in &children[v] {
                match state[c] {
                    0 => {
                        if !visit(c, children, state) {
                            return false;
                        }
                    }
                    1 => return false,
                    _ => {}
                }
            }
            state[v] = 2;
            true
        }
        (0..n).all(|v| state[v] != 0 || visit(v, &children, &mut state))
    };

    let reference = v_structs(&orig_dir);
    let e = skeleton.len();
    let mut always_forward = vec![true; e];
    let mut always_backward = vec![true; e];
    for mask in 0..(1u32 << e) {
        let dirs: Vec<bool> = (0..e).map(|k| mask >> k & 1 == 1).collect();
        if !acyclic(&dirs) || v_structs(&dirs) != reference {
            continue;
        }
        for k in 0..e {
            if dirs[k] {
                always_backward[k] = false;
            } else {
                always_forward[k] = false;
            }
        }
    }
    let names: Vec<&str> = view.names.iter().map(|n| n.as_str()).collect();
    let mut out = Graph::new(GraphKind::CPDAG, names.iter().copied()).unwrap();
    for (k, &(a, b)) in skeleton.iter().enumerate() {
        if always_forward[k] {
            out.add_directed(names[a], names[b]).unwrap();
        } else if always_backward[k] {
            out.add_directed(names[b], names[a]).unwrap();
        } else {
            out.add_undirected(names[a], names[b]).unwrap();
        }
    }
    out
}

/// Population regression coefficient of `treatment` in the regression of
/// `outcome` on {treatment} u controls, from the SCM's exact covariance.
pub fn population_beta(
    scm: &LinearScm,
    treatment: &str,
    outcome: &str,
    controls: &BTreeSet<NodeId>,
) -> f64 {
    let order = scm.node_order();
    let pos = |name: &str| order.iter().position(|n| n.as_str() == name).unwrap();
    let sigma = scm.covariance();
    let mut idx = vec![pos(treatment)];
    for c in controls {
        idx.push(pos(c.as_str()));
    }
    let o = pos(outcome);
    let k = idx.len();
    let a = DMatrix::from_fn(k, k, |i, j| sigma[(idx[i], idx[j])]);
    let b = DVector::from_fn(k, |i, _| sigma[(idx[i], o)]);
    let solved = a.lu().solve(&b).expect("regression system is solvable");
    solved[0]
}

/// Random node names X0..X{n-1}.
pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("X{i}")).collect()
}

/// Random DAG over n nodes with the given edge probability.
pub fn random_dag_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let names = names(n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut position = vec![0; n];
    for (pos, &v) in order.iter().enumerate() {
        position[v] = pos;
    }
    let mut g = Graph::new(GraphKind::DAG, names.iter().map(|s| s.as_str())).unwrap();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                let (a, b) = if position[i] < position[j] { (i, j) } else { (j, i) };
                g.add_directed(&names[a], &names[b]).unwrap();
            }
        }
    }
    g
}

/// Random mixed graph of the requested kind, for interchange and separation
/// tests. MAG/PAG outputs here are structurally legal but not necessarily
/// valid members of their class.
pub fn random_graph_of_kind<R: Rng>(kind: GraphKind, n: usize, p: f64, rng: &mut R) -> Graph {
    match kind {
        GraphKind::DAG => random_dag_graph(n, p, rng),
        GraphKind::CPDAG => {
            let dag = random_dag_graph(n, p, rng);
            let names = names(n);
            let mut g = Graph::new(GraphKind::CPDAG, names.iter().map(|s| s.as_str())).unwrap();
            for e in dag.edges() {
                if rng.gen::<bool>() {
                    g.add_directed(e.a.as_str(), e.b.as_str()).unwrap();
                } else {
                    g.add_undirected(e.a.as_str(), e.b.as_str()).unwrap();
                }
            }
            g
        }
        GraphKind::ADMG => {
            let dag = random_dag_graph(n, p, rng);
            let names = names(n);
            let mut g = Graph::new(GraphKind::ADMG, names.iter().map(|s| s.as_str())).unwrap();
            for e in dag.edges() {
                g.add_directed(e.a.as_str(), e.b.as_str()).unwrap();
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen::<f64>() < p / 2.0 {
                        let _ = g.add_bidirected(&names[i], &names[j]);
                    }
                }
            }
            g
        }
        GraphKind::MAG => {
            let dag = random_dag_graph(n, p, rng);
            let names = names(n);
            let mut g = Graph::new(GraphKind::MAG, names.iter().map(|s| s.as_str())).unwrap();
            for e in dag.edges() {
                if rng.gen::<f64>() < 0.3 {
                    g.add_bidirected(e.a.as_str(), e.b.as_str()).unwrap();
                } else {
                    g.add_directed(e.a.as_str(), e.b.as_str()).unwrap();
                }
            }
            g
        }
        GraphKind::PAG => {
            let dag = random_dag_graph(n, p, rng);
            let names = names(n);
            let mut g = Graph::new(GraphKind::PAG, names.iter().map(|s| s.as_str())).unwrap();
            let marks = [Mark::Tail, Mark::Arrow, Mark::Circle];
            for e in dag.edges() {
                loop {
                    let ma = marks[rng.gen_range(0..3)];
                    let mb = marks[rng.gen_range(0..3)];
                    if (ma, mb) == (Mark::Tail, Mark::Tail) {
                        continue;
                    }
                    g.add_edge(e.a.as_str(), e.b.as_str(), ma, mb).unwrap();
                    break;
                }
            }
            g
        }
    }
}

/// Uniformly random subset of the graph's nodes with the given size.
pub fn random_subset<R: Rng>(g: &Graph, size: usize, rng: &mut R) -> BTreeSet<NodeId> {
    let mut idx: Vec<usize> = (0..g.node_count()).collect();
    for i in 0..size {
        let j = rng.gen_range(i..idx.len());
        idx.swap(i, j);
    }
    idx[..size]
        .iter()
        .map(|&i| g.nodes()[i].clone())
        .collect()
}

/// PAG by brute force: enumerate every structurally valid MAG on the same
/// skeleton, keep those with identical m-separation statements, and mark an
/// endpoint non-circle exactly when every class member agrees on it.
pub fn pag_by_enumeration(mag: &Graph) -> Graph {
    use selfcompat::separation::{is_m_separated, PathQuery};

    let view = EdgeView::new(mag);
    let n = view.names.len();
    let skeleton: Vec<(usize, usize)> = mag
        .edges()
        .iter()
        .map(|e| (view.idx(e.a.as_str()), view.idx(e.b.as_str())))
        .collect();
    let names: Vec<&str> = view.names.iter().map(|nm| nm.as_str()).collect();

    let all_mseps = |g: &Graph| -> Vec<bool> {
        let mut out = Vec::new();
        for x in 0..n {
            for y in (x + 1)..n {
                let others: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                for mask in 0..(1usize << others.len()) {
                    let z: BTreeSet<NodeId> = others
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &v)| view.names[v].clone())
                        .collect();
                    let q = PathQuery {
                        x: view.names[x].clone(),
                        y: view.names[y].clone(),
                        conditioning: z,
                    };
                    out.push(is_m_separated(g, &q).unwrap());
                }
            }
        }
        out
    };
    let reference = all_mseps(mag);

    let e = skeleton.len();
    // Orientation code per edge: 0 = a -> b, 1 = b -> a, 2 = a <-> b.
    let mut member_marks: Vec<Vec<(Mark, Mark)>> = Vec::new();
    let mut codes = vec![0u8; e];
    loop {
        let mut g = Graph::new(GraphKind::MAG, names.iter().copied()).unwrap();
        let mut marks = Vec::with_capacity(e);
        for (k, &(a, b)) in skeleton.iter().enumerate() {
            let (ma, mb) = match codes[k] {
                0 => (Mark::Tail, Mark::Arrow),
                1 => (Mark::Arrow, Mark::Tail),
                _ => (Mark::Arrow, Mark::Arrow),
            };
            g.add_edge(names[a], names[b], ma, mb).unwrap();
            marks.push((ma, mb));
        }
        if g.validate().is_empty() && all_mseps(&g) == reference {
            member_marks.push(marks);
        }
        // next assignment
        let mut pos = 0;
        loop {
            if pos == e {
                let mut out = Graph::new(GraphKind::PAG, names.iter().copied()).unwrap();
                assert!(!member_marks.is_empty(), "class must contain the input MAG");
                for (k, &(a, b)) in skeleton.iter().enumerate() {
                    let first = member_marks[0][k];
                    let ma = if member_marks.iter().all(|m| m[k].0 == first.0) {
                        first.0
                    } else {
                        Mark::Circle
                    };
                    let mb = if member_marks.iter().all(|m| m[k].1 == first.1) {
                        first.1
                    } else {
                        Mark::Circle
                    };
                    out.add_edge(names[a], names[b], ma, mb).unwrap();
                }
                return out;
            }
            if codes[pos] < 2 {
                codes[pos] += 1;
                break;
            }
            codes[pos] = 0;
            pos += 1;
        }
    }
}
