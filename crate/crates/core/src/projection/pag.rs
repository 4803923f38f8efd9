//! Oracle-FCI orientation: skeleton plus separating sets in, PAG out.
//!
//! Implements the arrowhead/tail rules for the no-selection-bias case:
//! unshielded-collider orientation followed by R1-R4 and R8-R10 applied to a
//! fixpoint. Completeness is exercised by fixtures and randomized
//! cross-checks rather than proved here.

use crate::graph::{Graph, GraphError, GraphKind, Mark};
use std::collections::BTreeMap;

/// Endpoint matrix: `end[i][j]` = mark at `j` on edge i - j, None = no edge.
pub(crate) struct PagBuilder {
    n: usize,
    end: Vec<Vec<Option<Mark>>>,
    sepsets: BTreeMap<(usize, usize), Vec<usize>>,
}

impl PagBuilder {
    /// `adjacent` lists the skeleton; `sepsets` maps each non-adjacent pair
    /// (i < j) to a separating set.
    pub fn new(
        n: usize,
        adjacent: &[(usize, usize)],
        sepsets: BTreeMap<(usize, usize), Vec<usize>>,
    ) -> Self {
        let mut end = vec![vec![None; n]; n];
        for &(i, j) in adjacent {
            end[i][j] = Some(Mark::Circle);
            end[j][i] = Some(Mark::Circle);
        }
        PagBuilder { n, end, sepsets }
    }

    fn is_adj(&self, i: usize, j: usize) -> bool {
        self.end[i][j].is_some()
    }

    fn mark_at(&self, i: usize, j: usize) -> Option<Mark> {
        // mark at j on edge i-j
        self.end[i][j]
    }

    fn set_mark(&mut self, i: usize, j: usize, m: Mark) -> bool {
        if self.end[i][j] == Some(m) {
            return false;
        }
        debug_assert_eq!(self.end[i][j], Some(Mark::Circle), "only circles are refined");
        self.end[i][j] = Some(m);
        true
    }

    fn sepset_contains(&self, i: usize, j: usize, v: usize) -> bool {
        let key = if i < j { (i, j) } else { (j, i) };
        self.sepsets
            .get(&key)
            .map(|s| s.contains(&v))
            .unwrap_or(false)
    }

    fn is_fully_directed(&self, i: usize, j: usize) -> bool {
        self.mark_at(j, i) == Some(Mark::Tail) && self.mark_at(i, j) == Some(Mark::Arrow)
    }

    fn arrow_into(&self, i: usize, j: usize) -> bool {
        // edge i *-> j
        self.mark_at(i, j) == Some(Mark::Arrow)
    }

    pub fn orient(&mut self) {
        self.orient_unshielded_colliders();
        loop {
            let mut changed = false;
            changed |= self.rule_r1();
            changed |= self.rule_r2();
            changed |= self.rule_r3();
            changed |= self.rule_r4();
            changed |= self.rule_r8();
            changed |= self.rule_r9();
            changed |= self.rule_r10();
            if !changed {
                break;
            }
        }
    }

    fn orient_unshielded_colliders(&mut self) {
        for k in 0..self.n {
            for i in 0..self.n {
                for j in (i + 1)..self.n {
                    if i == k || j == k || !self.is_adj(i, k) || !self.is_adj(j, k) {
                        continue;
                    }
                    if self.is_adj(i, j) || self.sepset_contains(i, j, k) {
                        continue;
                    }
                    self.set_mark(i, k, Mark::Arrow);
                    self.set_mark(j, k, Mark::Arrow);
                }
            }
        }
    }

    /// R1: a *-> b o-* c with a, c non-adjacent  =>  b -> c.
    fn rule_r1(&mut self) -> bool {
        let mut changed = false;
        for b in 0..self.n {
            for a in 0..self.n {
                if a == b || !self.arrow_into(a, b) {
                    continue;
                }
                for c in 0..self.n {
                    if c == a || c == b || !self.is_adj(b, c) || self.is_adj(a, c) {
                        continue;
                    }
                    if self.mark_at(c, b) == Some(Mark::Circle) {
                        changed |= self.set_mark(c, b, Mark::Tail);
                        if self.mark_at(b, c) == Some(Mark::Circle) {
                            changed |= self.set_mark(b, c, Mark::Arrow);
                        }
                    }
                }
            }
        }
        changed
    }

    /// R2: a -> b *-> c or a *-> b -> c, with a *-o c  =>  a *-> c.
    fn rule_r2(&mut self) -> bool {
        let mut changed = false;
        for a in 0..self.n {
            for c in 0..self.n {
                if a == c || self.mark_at(a, c) != Some(Mark::Circle) {
                    continue;
                }
                for b in 0..self.n {
                    if b == a || b == c {
                        continue;
                    }
                    let chain1 = self.is_fully_directed(a, b) && self.arrow_into(b, c);
                    let chain2 = self.arrow_into(a, b) && self.is_fully_directed(b, c);
                    if chain1 || chain2 {
                        changed |= self.set_mark(a, c, Mark::Arrow);
                        break;
                    }
                }
            }
        }
        changed
    }

    /// R3: a *-> b <-* c, a *-o d o-* c, a, c non-adjacent, d *-o b  =>  d *-> b.
    fn rule_r3(&mut self) -> bool {
        let mut changed = false;
        for b in 0..self.n {
            for d in 0..self.n {
                if d == b || self.mark_at(d, b) != Some(Mark::Circle) {
                    continue;
                }
                'pairs: for a in 0..self.n {
                    if a == b || a == d || !self.arrow_into(a, b) {
                        continue;
                    }
                    if self.mark_at(a, d) != Some(Mark::Circle) {
                        continue;
                    }
                    for c in 0..self.n {
                        if c == a || c == b || c == d || self.is_adj(a, c) {
                            continue;
                        }
                        if self.arrow_into(c, b) && self.mark_at(c, d) == Some(Mark::Circle) {
                            changed |= self.set_mark(d, b, Mark::Arrow);
                            break 'pairs;
                        }
                    }
                }
            }
        }
        changed
    }

    /// R4: discriminating path <d, .., a, b, c> for b with b o-* c. If b lies
    /// in sepset(d, c) orient b -> c, else orient a <-> b <-> c.
    fn rule_r4(&mut self) -> bool {
        let mut changed = false;
        for b in 0..self.n {
            for c in 0..self.n {
                if b == c || self.mark_at(c, b) != Some(Mark::Circle) {
                    continue;
                }
                let parents_c: Vec<bool> = (0..self.n)
                    .map(|v| v != b && v != c && self.is_fully_directed(v, c))
                    .collect();
                if let Some((d, a)) = self.find_discriminating(b, c, &parents_c) {
                    if self.sepset_contains(d, c, b) {
                        changed |= self.set_mark(c, b, Mark::Tail);
                        if self.mark_at(b, c) == Some(Mark::Circle) {
                            changed |= self.set_mark(b, c, Mark::Arrow);
                        }
                    } else {
                        for (u, v) in [(a, b), (b, a), (b, c), (c, b)] {
                            if self.mark_at(u, v) == Some(Mark::Circle) {
                                changed |= self.set_mark(u, v, Mark::Arrow);
                            }
                        }
                    }
                }
            }
        }
        changed
    }

    /// Searches for a discriminating path ending < .., a, b, c >; returns (d, a).
    fn find_discriminating(&self, b: usize, c: usize, parents_c: &[bool]) -> Option<(usize, usize)> {
        // Walk backwards from b along colliders that are parents of c.
        for a in 0..self.n {
            if a == b || a == c || !parents_c[a] || !self.arrow_into(a, b) {
                continue;
            }
            let mut on_path = vec![false; self.n];
            on_path[b] = true;
            on_path[c] = true;
            on_path[a] = true;
            if let Some(d) = self.extend_discriminating(a, b, c, parents_c, &mut on_path) {
                return Some((d, a));
            }
        }
        None
    }

    /// `v` is the current innermost collider; looks further away from c for
    /// the path origin d (non-adjacent to c).
    fn extend_discriminating(
        &self,
        v: usize,
        _b: usize,
        c: usize,
        parents_c: &[bool],
        on_path: &mut Vec<bool>,
    ) -> Option<usize> {
        for d in 0..self.n {
            if on_path[d] || !self.arrow_into(d, v) {
                continue;
            }
            if !self.is_adj(d, c) {
                return Some(d);
            }
            // d is adjacent to c: it can serve as another interior collider
            // only if it is a parent of c and the edge v *-> d has an
            // arrowhead at d as well (collider at d needs arrows on both sides).
            if parents_c[d] && self.arrow_into(v, d) {
                on_path[d] = true;
                if let Some(res) = self.extend_discriminating(d, _b, c, parents_c, on_path) {
                    on_path[d] = false;
                    return Some(res);
                }
                on_path[d] = false;
            }
        }
        None
    }

    /// R8: a -> b -> c with a o-> c  =>  a -> c (tail at a).
    fn rule_r8(&mut self) -> bool {
        let mut changed = false;
        for a in 0..self.n {
            for c in 0..self.n {
                if a == c
                    || self.mark_at(c, a) != Some(Mark::Circle)
                    || self.mark_at(a, c) != Some(Mark::Arrow)
                {
                    continue;
                }
                for b in 0..self.n {
                    if b != a
                        && b != c
                        && self.is_fully_directed(a, b)
                        && self.is_fully_directed(b, c)
                    {
                        changed |= self.set_mark(c, a, Mark::Tail);
                        break;
                    }
                }
            }
        }
        changed
    }

    /// R9: a o-> c with an uncovered possibly directed path a, b, .., c where
    /// b is non-adjacent to c  =>  tail at a.
    fn rule_r9(&mut self) -> bool {
        let mut changed = false;
        for a in 0..self.n {
            for c in 0..self.n {
                if a == c
                    || self.mark_at(c, a) != Some(Mark::Circle)
                    || self.mark_at(a, c) != Some(Mark::Arrow)
                {
                    continue;
                }
                for b in 0..self.n {
                    if b == a || b == c || !self.is_adj(a, b) || self.is_adj(b, c) {
                        continue;
                    }
                    if self.mark_at(b, a) == Some(Mark::Arrow) {
                        continue; // first step must be possibly directed out of a
                    }
                    let mut on_path = vec![false; self.n];
                    on_path[a] = true;
                    on_path[b] = true;
                    if self.uncovered_pd_path(a, b, c, &mut on_path) {
                        changed |= self.set_mark(c, a, Mark::Tail);
                        break;
                    }
                }
            }
        }
        changed
    }

    /// Extends an uncovered possibly directed path prev -> cur towards target.
    fn uncovered_pd_path(
        &self,
        prev: usize,
        cur: usize,
        target: usize,
        on_path: &mut Vec<bool>,
    ) -> bool {
        if cur == target {
            return true;
        }
        for next in 0..self.n {
            if on_path[next] || !self.is_adj(cur, next) {
                continue;
            }
            if self.mark_at(next, cur) == Some(Mark::Arrow) {
                continue; // arrowhead at cur: not possibly directed
            }
            if self.is_adj(prev, next) {
                continue; // covered triple
            }
            on_path[next] = true;
            if self.uncovered_pd_path(cur, next, target, on_path) {
                on_path[next] = false;
                return true;
            }
            on_path[next] = false;
        }
        false
    }

    /// R10: a o-> c, b -> c <- d, uncovered possibly directed paths p1: a .. b
    /// and p2: a .. d whose first nodes differ and are non-adjacent  =>  tail at a.
    fn rule_r10(&mut self) -> bool {
        let mut changed = false;
        for a in 0..self.n {
            'next_c: for c in 0..self.n {
                if a == c
                    || self.mark_at(c, a) != Some(Mark::Circle)
                    || self.mark_at(a, c) != Some(Mark::Arrow)
                {
                    continue;
                }
                let into_c: Vec<usize> = (0..self.n)
                    .filter(|&v| v != a && v != c && self.is_fully_directed(v, c))
                    .collect();
                for &b in &into_c {
                    for &d in &into_c {
                        if b == d {
                            continue;
                        }
                        for mu in self.pd_first_steps(a, b) {
                            for om in self.pd_first_steps(a, d) {
                                if mu != om && !self.is_adj(mu, om) && mu != c && om != c {
                                    changed |= self.set_mark(c, a, Mark::Tail);
                                    continue 'next_c;
                                }
                            }
                        }
                    }
                }
            }
        }
        changed
    }

    /// First nodes of uncovered possibly directed paths from a to target.
    fn pd_first_steps(&self, a: usize, target: usize) -> Vec<usize> {
        let mut firsts = Vec::new();
        if a == target {
            return firsts;
        }
        for mu in 0..self.n {
            if mu == a || !self.is_adj(a, mu) || self.mark_at(mu, a) == Some(Mark::Arrow) {
                continue;
            }
            if mu == target {
                firsts.push(mu);
                continue;
            }
            let mut on_path = vec![false; self.n];
            on_path[a] = true;
            on_path[mu] = true;
            if self.uncovered_pd_path(a, mu, target, &mut on_path) {
                firsts.push(mu);
            }
        }
        firsts
    }

    pub fn into_graph(self, names: &[String]) -> Result<Graph, GraphError> {
        let mut g = Graph::new(GraphKind::PAG, names.iter().map(|s| s.as_str()))?;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if let (Some(mj), Some(mi)) = (self.end[i][j], self.end[j][i]) {
                    g.add_edge(&names[i], &names[j], mi, mj)?;
                }
            }
        }
        Ok(g)
    }
}
