//! Directed multigraphs given by successor lists, with the structural tests
//! needed for transition matrices: strong connectivity, period, primitivity.

use num_integer::Integer;
use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

/// A directed multigraph on `0..n`. Repeated successors are parallel edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digraph {
    succ: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(succ: Vec<Vec<usize>>) -> Self {
        let n = succ.len();
        assert!(
            succ.iter().flatten().all(|&j| j < n),
            "successor index out of range"
        );
        Digraph { succ }
    }

    /// From a dense 0/1 (or nonnegative integer) matrix, row = source.
    pub fn from_matrix(m: &[Vec<u32>]) -> Self {
        let succ = m
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .flat_map(|(j, &c)| std::iter::repeat_n(j, c as usize))
                    .collect()
            })
            .collect();
        Digraph::new(succ)
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn multiplicity(&self, i: usize, j: usize) -> usize {
        self.succ[i].iter().filter(|&&k| k == j).count()
    }

    pub fn to_matrix(&self) -> Vec<Vec<u32>> {
        let n = self.len();
        let mut m = vec![vec![0u32; n]; n];
        for (i, row) in self.succ.iter().enumerate() {
            for &j in row {
                m[i][j] += 1;
            }
        }
        m
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (i, row) in self.succ.iter().enumerate() {
            for &j in row {
                pred[j].push(i);
            }
        }
        pred
    }

    pub fn transpose(&self) -> Digraph {
        Digraph {
            succ: self.predecessors(),
        }
    }

    /// Subgraph induced on `keep` (in the given order), reindexed.
    pub fn induced(&self, keep: &[usize]) -> Digraph {
        let mut index = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        let succ = keep
            .iter()
            .map(|&old| {
                self.succ[old]
                    .iter()
                    .filter(|&&j| index[j] != usize::MAX)
                    .map(|&j| index[j])
                    .collect()
            })
            .collect();
        Digraph { succ }
    }

    /// Vertices lying on bi-infinite paths: repeatedly drop vertices with no
    /// incoming or no outgoing edge. Returned in increasing order.
    pub fn essential_vertices(&self) -> Vec<usize> {
        let n = self.len();
        let pred = self.predecessors();
        let mut alive = vec![true; n];
        let mut indeg: Vec<usize> = pred.iter().map(Vec::len).collect();
        let mut outdeg: Vec<usize> = self.succ.iter().map(Vec::len).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0 || outdeg[i] == 0).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for &w in &self.succ[v] {
                if alive[w] {
                    indeg[w] -= 1;
                    if indeg[w] == 0 {
                        stack.push(w);
                    }
                }
            }
            for &u in &pred[v] {
                if alive[u] {
                    outdeg[u] -= 1;
                    if outdeg[u] == 0 {
                        stack.push(u);
                    }
                }
            }
        }
        (0..n).filter(|&i| alive[i]).collect()
    }

    /// Strongly connected components, each sorted, listed by smallest vertex.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(self.len(), self.edge_count());
        let nodes: Vec<_> = (0..self.len()).map(|_| g.add_node(())).collect();
        for (i, row) in self.succ.iter().enumerate() {
            for &j in row {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
        let mut comps: Vec<Vec<usize>> = kosaraju_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }

    /// A component carries a cycle when it has more than one vertex or a self-loop.
    pub fn is_cyclic_component(&self, comp: &[usize]) -> bool {
        comp.len() > 1 || self.succ[comp[0]].contains(&comp[0])
    }

    /// One strongly connected component covering every vertex.
    pub fn is_transitive(&self) -> bool {
        !self.is_empty() && {
            let comps = self.sccs();
            comps.len() == 1 && self.is_cyclic_component(&comps[0])
        }
    }

    /// Period (gcd of cycle lengths) of an irreducible graph; `None` if reducible.
    pub fn period(&self) -> Option<usize> {
        if !self.is_transitive() {
            return None;
        }
        let n = self.len();
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.succ[v] {
                if level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let mut g = 0usize;
        for (v, row) in self.succ.iter().enumerate() {
            for &w in row {
                let diff = (level[v] + 1).abs_diff(level[w]);
                g = g.gcd(&diff);
            }
        }
        Some(g)
    }

    /// Least `M` with every entry of `Q^M` positive, searching `M ≤ cap`.
    pub fn positive_power_exponent(&self, cap: usize) -> Option<usize> {
        let n = self.len();
        if n == 0 {
            return None;
        }
        let blocks = n.div_ceil(64);
        let base: Vec<Vec<u64>> = self
            .succ
            .iter()
            .map(|row| {
                let mut bits = vec![0u64; blocks];
                for &j in row {
                    bits[j / 64] |= 1 << (j % 64);
                }
                bits
            })
            .collect();
        let full = |row: &[u64]| (0..n).all(|j| row[j / 64] >> (j % 64) & 1 == 1);
        let mut power = base.clone();
        for m in 1..=cap {
            if power.iter().all(|r| full(r)) {
                return Some(m);
            }
            if m == cap {
                break;
            }
            let next: Vec<Vec<u64>> = power
                .iter()
                .map(|row| {
                    let mut acc = vec![0u64; blocks];
                    for j in 0..n {
                        if row[j / 64] >> (j % 64) & 1 == 1 {
                            for (a, b) in acc.iter_mut().zip(&base[j]) {
                                *a |= b;
                            }
                        }
                    }
                    acc
                })
                .collect();
            if next == power {
                return None;
            }
            power = next;
        }
        None
    }

    /// Primitivity test with the search stopped at Wielandt's cap `(s−1)²+1`.
    /// Returns the primitivity exponent when primitive.
    pub fn primitivity(&self) -> Option<usize> {
        let s = self.len();
        if s == 0 {
            return None;
        }
        self.positive_power_exponent((s - 1) * (s - 1) + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_is_primitive_with_exponent_two() {
        let g = Digraph::from_matrix(&[vec![1, 1], vec![1, 0]]);
        assert!(g.is_transitive());
        assert_eq!(g.primitivity(), Some(2));
        assert_eq!(g.period(), Some(1));
    }

    #[test]
    fn two_cycle_is_transitive_not_primitive() {
        let g = Digraph::from_matrix(&[vec![0, 1], vec![1, 0]]);
        assert!(g.is_transitive());
        assert_eq!(g.primitivity(), None);
        assert_eq!(g.period(), Some(2));
    }

    #[test]
    fn full_shift_exponent_one() {
        let g = Digraph::from_matrix(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(g.primitivity(), Some(1));
    }

    #[test]
    fn reducible_and_isolated() {
        let g = Digraph::from_matrix(&[vec![1, 1], vec![0, 1]]);
        assert!(!g.is_transitive());
        assert_eq!(g.sccs(), vec![vec![0], vec![1]]);
        let single = Digraph::from_matrix(&[vec![0]]);
        assert!(!single.is_transitive());
    }

    #[test]
    fn pruning_removes_dead_ends() {
        // 0 <-> 1 cycle, 2 is a sink reached from 1, 3 a source into 0
        let g = Digraph::new(vec![vec![1], vec![0, 2], vec![], vec![0]]);
        assert_eq!(g.essential_vertices(), vec![0, 1]);
    }

    #[test]
    fn wielandt_extremal_matrix() {
        // the Wielandt matrix attains (s-1)^2 + 1
        for s in 2..=6usize {
            let mut succ: Vec<Vec<usize>> = (0..s).map(|i| vec![(i + 1) % s]).collect();
            succ[s - 1].push(1);
            let g = Digraph::new(succ);
            assert_eq!(g.primitivity(), Some((s - 1) * (s - 1) + 1), "s = {s}");
        }
    }
}
