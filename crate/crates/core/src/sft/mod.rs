//! Shifts of finite type: higher-block recoding into vertex shifts, language
//! slices, and periodic points.

pub mod automaton;
pub mod graph;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{lyndon_words, Alphabet, ForbiddenSet, Word};

pub use automaton::PatternAutomaton;
pub use graph::Digraph;

/// Default cap on the number of states of a recoded shift.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// A shift of finite type given by a minimal forbidden set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftSpec {
    forbidden: ForbiddenSet,
}

impl SftSpec {
    pub fn new(forbidden: ForbiddenSet) -> Self {
        SftSpec { forbidden }
    }

    /// The full shift on `alphabet`.
    pub fn full(alphabet: &Alphabet) -> Self {
        SftSpec::new(ForbiddenSet::empty(alphabet))
    }

    pub fn from_words(alphabet: &Alphabet, words: &[&str]) -> Result<Self> {
        let parsed = words
            .iter()
            .map(|w| alphabet.parse_word(w))
            .collect::<Result<Vec<_>>>()?;
        Ok(SftSpec::new(ForbiddenSet::new(alphabet, parsed)?))
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.forbidden.alphabet()
    }

    pub fn forbidden(&self) -> &ForbiddenSet {
        &self.forbidden
    }

    /// Smallest order presenting the shift as a nearest-neighbour graph.
    pub fn default_order(&self) -> usize {
        self.forbidden.max_len().saturating_sub(1).max(1)
    }

    pub fn automaton(&self) -> PatternAutomaton {
        PatternAutomaton::new(&self.forbidden)
    }

    /// Recode on blocks of length `order`, keeping only states on bi-infinite paths.
    pub fn recode(&self, order: usize, cap: usize) -> Result<VertexShift> {
        let min = self.default_order();
        if order < min {
            return Err(Error::InvalidOrder { order, min });
        }
        let aut = self.automaton();
        let k = self.alphabet().size() as u8;

        // locally admissible blocks in lexicographic order, with automaton state
        let mut blocks: Vec<(Vec<u8>, usize)> = Vec::new();
        let mut stack: Vec<(Vec<u8>, usize)> = vec![(Vec::new(), aut.root())];
        while let Some((w, s)) = stack.pop() {
            if w.len() == order {
                if blocks.len() >= cap {
                    return Err(Error::CapExceeded { what: "state", cap });
                }
                blocks.push((w, s));
                continue;
            }
            for a in (0..k).rev() {
                if let Some(t) = aut.step(s, a) {
                    let mut v = w.clone();
                    v.push(a);
                    stack.push((v, t));
                }
            }
        }
        let index: HashMap<&[u8], usize> = blocks
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (w.as_slice(), i))
            .collect();
        let succ: Vec<Vec<usize>> = blocks
            .iter()
            .map(|(w, s)| {
                (0..k)
                    .filter(|&a| aut.step(*s, a).is_some())
                    .map(|a| {
                        let mut b = w[1..].to_vec();
                        b.push(a);
                        index[b.as_slice()]
                    })
                    .collect()
            })
            .collect();
        let raw = Digraph::new(succ);
        let keep = raw.essential_vertices();
        if keep.is_empty() {
            return Err(Error::EmptyShift);
        }
        let graph = raw.induced(&keep);
        let states = keep.iter().map(|&i| Word::new(blocks[i].0.clone())).collect();
        Ok(VertexShift::from_parts(self.alphabet().clone(), order, states, graph))
    }

    /// Recode at the default order and state cap.
    pub fn vertex_shift(&self) -> Result<VertexShift> {
        self.recode(self.default_order(), DEFAULT_STATE_CAP)
    }

    /// Length-`n` words of the language, lexicographically ordered. An empty
    /// shift has empty slices.
    pub fn language_slice(&self, n: usize, cap: usize) -> Result<Vec<Word>> {
        self.automaton()
            .language_slice(n, cap)
            .ok_or(Error::CapExceeded { what: "slice", cap })
    }

    pub fn contains(&self, w: &[u8]) -> bool {
        self.automaton().contains(w)
    }

    /// Orbits of minimal period `p`, by testing every Lyndon word of length `p`
    /// for cyclic avoidance. Independent of the graph presentation.
    pub fn periodic_orbits(&self, p: usize) -> Vec<PeriodicOrbit> {
        let aut = self.automaton();
        lyndon_words(self.alphabet().size(), p)
            .into_iter()
            .filter(|w| aut.avoids_cyclically(w))
            .map(|w| PeriodicOrbit { period_word: w })
            .collect()
    }
}

/// Orbit of a periodic point, stored as its least rotation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    period_word: Word,
}

impl PeriodicOrbit {
    /// Orbit of `w^∞`; the representative is the least rotation of the primitive root.
    pub fn of(w: &Word) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::EmptyPeriodWord);
        }
        let root = Word::from(&w[..w.primitive_root_len()]);
        Ok(PeriodicOrbit {
            period_word: root.least_rotation(),
        })
    }

    pub fn period_word(&self) -> &Word {
        &self.period_word
    }

    pub fn period(&self) -> usize {
        self.period_word.len()
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        self.period_word.display(alphabet)
    }
}

/// Vertex shift on the admissible blocks of one length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexShift {
    alphabet: Alphabet,
    order: usize,
    states: Vec<Word>,
    graph: Digraph,
    index: HashMap<Word, usize>,
}

impl VertexShift {
    fn from_parts(alphabet: Alphabet, order: usize, states: Vec<Word>, graph: Digraph) -> Self {
        let index = states.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        VertexShift {
            alphabet,
            order,
            states,
            graph,
            index,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn states(&self) -> &[Word] {
        &self.states
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_index(&self, block: &[u8]) -> Option<usize> {
        self.index.get(&Word::from(block)).copied()
    }

    pub fn transition_matrix(&self) -> Vec<Vec<u32>> {
        self.graph.to_matrix()
    }

    pub fn is_transitive(&self) -> bool {
        self.graph.is_transitive()
    }

    /// Least `M` with `Q^M > 0`, searched up to `(s−1)²+1`.
    pub fn primitivity(&self) -> Option<usize> {
        self.graph.primitivity()
    }

    /// Path of states spelling `w`, if `w` is in the language.
    pub fn path(&self, w: &[u8]) -> Option<Vec<usize>> {
        let f = self.order;
        if w.len() < f {
            return None;
        }
        let mut path = vec![self.state_index(&w[..f])?];
        for i in 1..=w.len() - f {
            let next = self.state_index(&w[i..i + f])?;
            if !self.graph.successors(*path.last().unwrap()).contains(&next) {
                return None;
            }
            path.push(next);
        }
        Some(path)
    }

    /// States whose block begins with `w` (for `|w| ≤ order`).
    pub fn states_with_prefix(&self, w: &[u8]) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.starts_with(w))
            .map(|(i, _)| i)
            .collect()
    }

    /// Labels of length-`n` paths, lexicographically ordered.
    pub fn language_slice(&self, n: usize, cap: usize) -> Result<Vec<Word>> {
        let f = self.order;
        if n <= f {
            let set: BTreeSet<Word> = self.states.iter().map(|s| Word::from(&s[..n])).collect();
            if set.len() > cap {
                return Err(Error::CapExceeded { what: "slice", cap });
            }
            return Ok(set.into_iter().collect());
        }
        let mut out = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            let mut word = s.letters().to_vec();
            self.extend_paths(i, n, &mut word, &mut out, cap)?;
        }
        out.sort();
        Ok(out)
    }

    fn extend_paths(
        &self,
        state: usize,
        n: usize,
        word: &mut Vec<u8>,
        out: &mut Vec<Word>,
        cap: usize,
    ) -> Result<()> {
        if word.len() == n {
            if out.len() >= cap {
                return Err(Error::CapExceeded { what: "slice", cap });
            }
            out.push(Word::new(word.clone()));
            return Ok(());
        }
        for &t in self.graph.successors(state) {
            word.push(*self.states[t].last().unwrap());
            self.extend_paths(t, n, word, out, cap)?;
            word.pop();
        }
        Ok(())
    }

    /// Number of points of period `p` (not necessarily minimal): `tr(Q^p)`.
    pub fn periodic_count(&self, p: usize) -> BigUint {
        assert!(p >= 1, "period must be positive");
        trace_power(&self.graph, p)
    }

    /// Orbits of minimal period exactly `p`, as least rotations in
    /// lexicographic order. Closed walks are enumerated with necklace pruning
    /// so that each orbit is produced once, by its Lyndon rotation.
    pub fn enumerate_min_periodic(&self, p: usize, cap: usize) -> Result<Vec<PeriodicOrbit>> {
        assert!(p >= 1, "period must be positive");
        let mut out = Vec::new();
        let mut label = Vec::with_capacity(p);
        for s in 0..self.len() {
            label.clear();
            label.push(self.states[s][0]);
            self.lyndon_walks(s, s, p, 1, &mut label, &mut out, cap)?;
        }
        out.sort();
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn lyndon_walks(
        &self,
        start: usize,
        state: usize,
        p: usize,
        per: usize,
        label: &mut Vec<u8>,
        out: &mut Vec<PeriodicOrbit>,
        cap: usize,
    ) -> Result<()> {
        if label.len() == p {
            if per == p && self.graph.successors(state).contains(&start) {
                if out.len() >= cap {
                    return Err(Error::CapExceeded { what: "orbit", cap });
                }
                out.push(PeriodicOrbit {
                    period_word: Word::from(label.as_slice()),
                });
            }
            return Ok(());
        }
        let i = label.len();
        let mut tried = BTreeSet::new();
        for &t in self.graph.successors(state) {
            if !tried.insert(t) {
                continue;
            }
            let a = self.states[t][0];
            let b = label[i - per];
            let next_per = match a.cmp(&b) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => per,
                std::cmp::Ordering::Greater => i + 1,
            };
            label.push(a);
            self.lyndon_walks(start, t, p, next_per, label, out, cap)?;
            label.pop();
        }
        Ok(())
    }

    /// Adjacency text: a header mapping indices to blocks, then `i: j,k,...`.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "alphabet: {}", self.alphabet).unwrap();
        writeln!(out, "order: {}", self.order).unwrap();
        for (i, s) in self.states.iter().enumerate() {
            writeln!(out, "state {i} = {}", s.display(&self.alphabet)).unwrap();
        }
        for i in 0..self.len() {
            let succ: Vec<String> = self.graph.successors(i).iter().map(|j| j.to_string()).collect();
            writeln!(out, "{i}: {}", succ.join(",")).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": 1,
            "alphabet": self.alphabet.symbols().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "order": self.order,
            "states": self.states.iter().map(|s| s.display(&self.alphabet)).collect::<Vec<_>>(),
            "successors": (0..self.len()).map(|i| self.graph.successors(i).to_vec()).collect::<Vec<_>>(),
        })
    }
}

/// `tr(Q^p)` by counting closed walks, in `u128` with a bignum fallback.
pub fn trace_power(g: &Digraph, p: usize) -> BigUint {
    match trace_power_u128(g, p) {
        Some(t) => BigUint::from(t),
        None => trace_power_big(g, p),
    }
}

fn trace_power_u128(g: &Digraph, p: usize) -> Option<u128> {
    let n = g.len();
    let mut total: u128 = 0;
    for s in 0..n {
        let mut cur = vec![0u128; n];
        cur[s] = 1;
        for _ in 0..p {
            let mut next = vec![0u128; n];
            for (i, &c) in cur.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &j in g.successors(i) {
                    next[j] = next[j].checked_add(c)?;
                }
            }
            cur = next;
        }
        total = total.checked_add(cur[s])?;
    }
    Some(total)
}

fn trace_power_big(g: &Digraph, p: usize) -> BigUint {
    let n = g.len();
    let mut total = BigUint::from(0u32);
    for s in 0..n {
        let mut cur = vec![BigUint::from(0u32); n];
        cur[s] = BigUint::from(1u32);
        for _ in 0..p {
            let mut next = vec![BigUint::from(0u32); n];
            for (i, c) in cur.iter().enumerate() {
                for &j in g.successors(i) {
                    next[j] += c;
                }
            }
            cur = next;
        }
        total += &cur[s];
    }
    total
}

/// Möbius function.
pub fn mobius(mut n: usize) -> i64 {
    let mut result = 1i64;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            result = -result;
        }
        d += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(words: &[&str]) -> SftSpec {
        SftSpec::from_words(&Alphabet::binary(), words).unwrap()
    }

    fn orbits(words: &[&str]) -> Vec<PeriodicOrbit> {
        words.iter().map(|w| PeriodicOrbit::of(&Word::binary(w)).unwrap()).collect()
    }

    #[test]
    fn golden_mean_recoding() {
        let v = binary(&["11"]).recode(1, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(v.states(), &[Word::binary("0"), Word::binary("1")]);
        assert_eq!(v.transition_matrix(), vec![vec![1, 1], vec![1, 0]]);
    }

    #[test]
    fn full_shift_recoding() {
        let v = SftSpec::full(&Alphabet::binary()).recode(1, 10).unwrap();
        assert_eq!(v.transition_matrix(), vec![vec![1, 1], vec![1, 1]]);
    }

    #[test]
    fn forbid_111_at_order_two() {
        let v = binary(&["111"]).recode(2, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(v.len(), 4);
        // 8 glued words of length 3, only 111 rejected
        assert_eq!(v.graph().edge_count(), 7);
        assert_eq!(v.state_index(&[1, 1]).map(|i| v.graph().successors(i).len()), Some(1));
    }

    #[test]
    fn order_and_cap_errors() {
        let spec = binary(&["111"]);
        assert_eq!(spec.recode(1, 100), Err(Error::InvalidOrder { order: 1, min: 2 }));
        assert_eq!(
            SftSpec::full(&Alphabet::binary()).recode(4, 8),
            Err(Error::CapExceeded { what: "state", cap: 8 })
        );
        assert_eq!(binary(&["0", "1"]).vertex_shift(), Err(Error::EmptyShift));
        assert!(binary(&["0", "1"]).language_slice(3, 10).unwrap().is_empty());
    }

    #[test]
    fn dead_states_pruned() {
        // with 01 forbidden both letters survive (points ...1100...)
        let v = binary(&["01"]).vertex_shift().unwrap();
        assert_eq!(v.len(), 2);
        let w = binary(&["00", "01"]).vertex_shift().unwrap();
        assert_eq!(w.states(), &[Word::binary("1")]);
    }

    #[test]
    fn trace_values() {
        let g = binary(&["11"]).vertex_shift().unwrap();
        assert_eq!(g.periodic_count(1), BigUint::from(1u32));
        assert_eq!(g.periodic_count(2), BigUint::from(3u32));
        let full = SftSpec::full(&Alphabet::binary()).vertex_shift().unwrap();
        assert_eq!(full.periodic_count(3), BigUint::from(8u32));
        assert_eq!(full.periodic_count(130), BigUint::from(2u32).pow(130));
    }

    #[test]
    fn minimal_period_orbits() {
        let g = binary(&["11"]).vertex_shift().unwrap();
        assert_eq!(g.enumerate_min_periodic(2, 100).unwrap(), orbits(&["01"]));
        assert_eq!(g.enumerate_min_periodic(3, 100).unwrap(), orbits(&["001"]));
        assert_eq!(g.enumerate_min_periodic(1, 100).unwrap(), orbits(&["0"]));
        let full = SftSpec::full(&Alphabet::binary()).vertex_shift().unwrap();
        assert_eq!(full.enumerate_min_periodic(1, 100).unwrap(), orbits(&["0", "1"]));
    }

    #[test]
    fn language_slices() {
        let gm = binary(&["11"]);
        let words = |v: Vec<Word>| v.iter().map(|w| w.display(&Alphabet::binary())).collect::<Vec<_>>();
        assert_eq!(words(gm.language_slice(2, 100).unwrap()), ["00", "01", "10"]);
        assert_eq!(SftSpec::full(&Alphabet::binary()).language_slice(3, 100).unwrap().len(), 8);
        let h3 = binary(&["11", "1001"]);
        let slice = words(h3.language_slice(4, 100).unwrap());
        assert_eq!(slice, ["0000", "0001", "0010", "0100", "0101", "1000", "1010"]);
        let v = h3.vertex_shift().unwrap();
        assert_eq!(words(v.language_slice(4, 100).unwrap()), slice);
    }

    #[test]
    fn orbit_canonical_form() {
        let o = PeriodicOrbit::of(&Word::binary("1010")).unwrap();
        assert_eq!(o.period_word(), &Word::binary("01"));
        assert_eq!(o.period(), 2);
        assert_eq!(PeriodicOrbit::of(&Word::empty()), Err(Error::EmptyPeriodWord));
    }

    #[test]
    fn adjacency_export() {
        let v = binary(&["11"]).vertex_shift().unwrap();
        assert_eq!(
            v.to_adjacency_text(),
            "alphabet: 0 1\norder: 1\nstate 0 = 0\nstate 1 = 1\n0: 0,1\n1: 0\n"
        );
        assert_eq!(v.to_json()["successors"], serde_json::json!([[0, 1], [0]]));
    }

    #[test]
    fn mobius_values() {
        let mu: Vec<i64> = (1..=10).map(mobius).collect();
        assert_eq!(mu, [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }
}
