//! Pattern automaton for a forbidden set: a deterministic automaton whose
//! accepted words are exactly the words avoiding every forbidden word.
//!
//! The automaton stays small when forbidden words are long (its size is the
//! total pattern length), which the higher-block recoding does not.

use std::collections::VecDeque;

use crate::words::{ForbiddenSet, Word};

use super::graph::Digraph;

const DEAD: u32 = u32::MAX;

/// Aho–Corasick automaton over the prefixes of the forbidden words, with
/// transitions into a complete forbidden word removed.
#[derive(Clone, Debug)]
pub struct PatternAutomaton {
    k: usize,
    next: Vec<u32>,
    depth: Vec<usize>,
    core: Vec<usize>,
    in_core: Vec<bool>,
    max_len: usize,
}

impl PatternAutomaton {
    pub fn new(forbidden: &ForbiddenSet) -> Self {
        Self::from_patterns(
            forbidden.alphabet().size(),
            forbidden.words().map(|w| w.letters()),
        )
    }

    /// Patterns need not be minimal; any state whose label ends in a pattern is dead.
    pub fn from_patterns<'a>(k: usize, patterns: impl IntoIterator<Item = &'a [u8]>) -> Self {
        let mut child: Vec<u32> = vec![DEAD; k];
        let mut depth = vec![0usize];
        let mut terminal = vec![false];
        let mut max_len = 0;
        for p in patterns {
            max_len = max_len.max(p.len());
            let mut node = 0usize;
            for &a in p {
                let slot = node * k + a as usize;
                if child[slot] == DEAD {
                    child[slot] = depth.len() as u32;
                    child.extend(std::iter::repeat_n(DEAD, k));
                    depth.push(depth[node] + 1);
                    terminal.push(false);
                }
                node = child[slot] as usize;
            }
            terminal[node] = true;
        }
        let n = depth.len();
        let mut next = vec![0u32; n * k];
        let mut fail = vec![0usize; n];
        let mut queue = VecDeque::new();
        for a in 0..k {
            let c = child[a];
            if c == DEAD {
                next[a] = 0;
            } else {
                next[a] = c;
                fail[c as usize] = 0;
                queue.push_back(c as usize);
            }
        }
        while let Some(u) = queue.pop_front() {
            terminal[u] = terminal[u] || terminal[fail[u]];
            for a in 0..k {
                let c = child[u * k + a];
                if c == DEAD {
                    next[u * k + a] = next[fail[u] * k + a];
                } else {
                    fail[c as usize] = next[fail[u] * k + a] as usize;
                    next[u * k + a] = c;
                    queue.push_back(c as usize);
                }
            }
        }
        for t in next.iter_mut() {
            if terminal[*t as usize] {
                *t = DEAD;
            }
        }
        for (u, &is_term) in terminal.iter().enumerate() {
            if is_term {
                next[u * k..(u + 1) * k].fill(DEAD);
            }
        }
        let mut aut = PatternAutomaton {
            k,
            next,
            depth,
            core: Vec::new(),
            in_core: vec![false; n],
            max_len,
        };
        aut.core = aut.full_graph().essential_vertices();
        for &s in &aut.core {
            aut.in_core[s] = true;
        }
        aut
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn state_count(&self) -> usize {
        self.depth.len()
    }

    pub fn max_pattern_len(&self) -> usize {
        self.max_len
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn step(&self, state: usize, letter: u8) -> Option<usize> {
        match self.next[state * self.k + letter as usize] {
            DEAD => None,
            t => Some(t as usize),
        }
    }

    /// Run from `state`; `None` once a forbidden word is completed.
    pub fn run(&self, state: usize, w: &[u8]) -> Option<usize> {
        w.iter().try_fold(state, |s, &a| self.step(s, a))
    }

    /// True iff no forbidden word occurs in `w`.
    pub fn avoids(&self, w: &[u8]) -> bool {
        self.run(0, w).is_some()
    }

    /// True iff no forbidden word occurs in the bi-infinite periodic word `c^∞`.
    pub fn avoids_cyclically(&self, c: &[u8]) -> bool {
        assert!(!c.is_empty(), "empty period word");
        // the state after reading one period depends only on the state before,
        // so the boundary states eventually cycle
        let mut seen = std::collections::HashSet::new();
        let mut s = 0usize;
        loop {
            if !seen.insert(s) {
                return true;
            }
            match self.run(s, c) {
                Some(t) => s = t,
                None => return false,
            }
        }
    }

    fn full_graph(&self) -> Digraph {
        let succ = (0..self.state_count())
            .map(|u| {
                self.next[u * self.k..(u + 1) * self.k]
                    .iter()
                    .filter(|&&t| t != DEAD)
                    .map(|&t| t as usize)
                    .collect()
            })
            .collect();
        Digraph::new(succ)
    }

    /// States lying on bi-infinite paths, in increasing order.
    pub fn core(&self) -> &[usize] {
        &self.core
    }

    pub fn in_core(&self, state: usize) -> bool {
        self.in_core[state]
    }

    /// Transition graph restricted to the core (parallel edges kept).
    pub fn core_graph(&self) -> Digraph {
        self.full_graph().induced(&self.core)
    }

    /// Membership in the language of the shift: some bi-infinite path reads `w`.
    pub fn contains(&self, w: &[u8]) -> bool {
        let mut current: Vec<usize> = self.core.clone();
        for &a in w {
            let mut next: Vec<usize> = current
                .iter()
                .filter_map(|&s| self.step(s, a))
                .filter(|&t| self.in_core[t])
                .collect();
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        !current.is_empty()
    }

    /// All words of length `n` in the language, lexicographically ordered.
    pub fn language_slice(&self, n: usize, cap: usize) -> Option<Vec<Word>> {
        let mut out = Vec::new();
        let mut word = Vec::with_capacity(n);
        if self.core.is_empty() {
            return Some(out);
        }
        let start = self.core.clone();
        if self.slice_dfs(&start, n, &mut word, &mut out, cap) {
            Some(out)
        } else {
            None
        }
    }

    /// Number of length-`n` words in the language; `None` past `cap`.
    pub fn count_slice(&self, n: usize, cap: u64) -> Option<u64> {
        if self.core.is_empty() {
            return Some(0);
        }
        let mut count = 0u64;
        let mut stack: Vec<(Vec<usize>, usize)> = vec![(self.core.clone(), 0)];
        while let Some((states, len)) = stack.pop() {
            if len == n {
                count += 1;
                if count > cap {
                    return None;
                }
                continue;
            }
            for a in 0..self.k as u8 {
                let next = self.step_set(&states, a);
                if !next.is_empty() {
                    stack.push((next, len + 1));
                }
            }
        }
        Some(count)
    }

    /// States reached from `states` on `a`, restricted to the core; sorted.
    pub fn step_set(&self, states: &[usize], a: u8) -> Vec<usize> {
        let mut next: Vec<usize> = states
            .iter()
            .filter_map(|&s| self.step(s, a))
            .filter(|&t| self.in_core[t])
            .collect();
        next.sort_unstable();
        next.dedup();
        next
    }

    fn slice_dfs(
        &self,
        states: &[usize],
        n: usize,
        word: &mut Vec<u8>,
        out: &mut Vec<Word>,
        cap: usize,
    ) -> bool {
        if word.len() == n {
            if out.len() >= cap {
                return false;
            }
            out.push(Word::new(word.clone()));
            return true;
        }
        for a in 0..self.k as u8 {
            let mut next: Vec<usize> = states
                .iter()
                .filter_map(|&s| self.step(s, a))
                .filter(|&t| self.in_core[t])
                .collect();
            if next.is_empty() {
                continue;
            }
            next.sort_unstable();
            next.dedup();
            word.push(a);
            let ok = self.slice_dfs(&next, n, word, out, cap);
            word.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}
