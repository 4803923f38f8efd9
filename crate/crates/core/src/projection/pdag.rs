//! Mutable partially directed graph used while orienting CPDAGs.
//!
//! `end[i][j]` stores the mark at `j` on the edge between `i` and `j`
//! (None = no edge). Only Tail/Arrow marks appear here.

use crate::graph::{Graph, GraphError, GraphKind, Mark};

#[derive(Debug, Clone)]
pub(crate) struct Pdag {
    n: usize,
    end: Vec<Vec<Option<Mark>>>,
}

impl Pdag {
    pub fn new(n: usize) -> Self {
        Pdag {
            n,
            end: vec![vec![None; n]; n],
        }
    }

    pub fn add_undirected(&mut self, i: usize, j: usize) {
        self.end[i][j] = Some(Mark::Tail);
        self.end[j][i] = Some(Mark::Tail);
    }

    /// Turns the edge between i and j into i -> j.
    pub fn orient(&mut self, i: usize, j: usize) {
        debug_assert!(self.end[i][j].is_some());
        self.end[i][j] = Some(Mark::Arrow);
        self.end[j][i] = Some(Mark::Tail);
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.end[i][j].is_some()
    }

    pub fn is_directed(&self, i: usize, j: usize) -> bool {
        self.end[i][j] == Some(Mark::Arrow) && self.end[j][i] == Some(Mark::Tail)
    }

    pub fn is_undirected(&self, i: usize, j: usize) -> bool {
        self.end[i][j] == Some(Mark::Tail) && self.end[j][i] == Some(Mark::Tail)
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.is_adjacent(i, j)).collect()
    }

    /// Meek orientation rules R1-R3 applied to a fixpoint. Starting from a
    /// pattern whose only oriented edges are unshielded colliders, R1-R3
    /// suffice to reach the CPDAG; R4 fires only under background knowledge.
    ///
    /// Orientations that would close a directed cycle are skipped: they can
    /// only arise downstream of conflicting collider claims, and the output
    /// must stay acyclic for the projection and score layers.
    pub fn meek_closure(&mut self) {
        loop {
            let mut changed = false;
            for a in 0..self.n {
                for b in 0..self.n {
                    if a == b || !self.is_directed(a, b) {
                        continue;
                    }
                    // R1: a -> b, b - c, a and c non-adjacent  =>  b -> c.
                    for c in 0..self.n {
                        if c != a && self.is_undirected(b, c) && !self.is_adjacent(a, c) {
                            changed |= self.orient_if_acyclic(b, c);
                        }
                    }
                    // R2: a -> b -> c with a - c  =>  a -> c.
                    for c in 0..self.n {
                        if c != a && self.is_directed(b, c) && self.is_undirected(a, c) {
                            changed |= self.orient_if_acyclic(a, c);
                        }
                    }
                }
            }
            // R3: a - b with a - c -> b, a - d -> b, c and d non-adjacent  =>  a -> b.
            for a in 0..self.n {
                for b in 0..self.n {
                    if a == b || !self.is_undirected(a, b) {
                        continue;
                    }
                    let into_b: Vec<usize> = (0..self.n)
                        .filter(|&c| c != a && self.is_directed(c, b) && self.is_undirected(a, c))
                        .collect();
                    let found = into_b.iter().enumerate().any(|(k, &c)| {
                        into_b[k + 1..].iter().any(|&d| !self.is_adjacent(c, d))
                    });
                    if found {
                        changed |= self.orient_if_acyclic(a, b);
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn orient_if_acyclic(&mut self, i: usize, j: usize) -> bool {
        if self.has_directed_path(j, i) {
            return false;
        }
        self.orient(i, j);
        true
    }

    /// Dor-Tarsi consistent extension: orient all undirected edges without
    /// creating new v-structures or cycles. For inputs that are not valid
    /// CPDAGs (e.g. conflicted sample-PC outputs) a deterministic fallback
    /// orients the smallest remaining undirected edge acyclically.
    pub fn consistent_extension(&self) -> Pdag {
        let mut work = self.clone();
        let mut alive: Vec<bool> = vec![true; self.n];
        let mut remaining = self.n;
        while remaining > 0 {
            let mut sink = None;
            'candidates: for x in 0..self.n {
                if !alive[x] {
                    continue;
                }
                let nb: Vec<usize> = work
                    .neighbors(x)
                    .into_iter()
                    .filter(|&j| alive[j])
                    .collect();
                if nb.iter().any(|&j| work.is_directed(x, j)) {
                    continue;
                }
                for &u in nb.iter().filter(|&&u| work.is_undirected(x, u)) {
                    for &w in &nb {
                        if w != u && !work.is_adjacent(u, w) {
                            continue 'candidates;
                        }
                    }
                }
                sink = Some(x);
                break;
            }
            match sink {
                Some(x) => {
                    let nb = work.neighbors(x);
                    for u in nb {
                        if alive[u] && work.is_undirected(x, u) {
                            work.orient(u, x);
                        }
                    }
                    alive[x] = false;
                    remaining -= 1;
                }
                None => {
                    // Not extendable as a CPDAG; orient one edge without
                    // introducing a directed cycle and retry.
                    let mut done = false;
                    'scan: for i in 0..self.n {
                        for j in (i + 1)..self.n {
                            if alive[i] && alive[j] && work.is_undirected(i, j) {
                                if work.has_directed_path(j, i) {
                                    work.orient(j, i);
                                } else {
                                    work.orient(i, j);
                                }
                                done = true;
                                break 'scan;
                            }
                        }
                    }
                    if !done {
                        // Only directed edges left among live nodes.
                        break;
                    }
                }
            }
        }
        work
    }

    fn has_directed_path(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for w in (0..self.n).filter(|&w| self.is_directed(v, w)) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    pub fn to_graph(&self, kind: GraphKind, names: &[String]) -> Result<Graph, GraphError> {
        let mut g = Graph::new(kind, names.iter().map(|s| s.as_str()))?;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.is_directed(i, j) {
                    g.add_directed(&names[i], &names[j])?;
                } else if self.is_directed(j, i) {
                    g.add_directed(&names[j], &names[i])?;
                } else if self.is_undirected(i, j) {
                    g.add_undirected(&names[i], &names[j])?;
                }
            }
        }
        Ok(g)
    }
}
