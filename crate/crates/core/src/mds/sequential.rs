//! Classic one-vertex-at-a-time greedy.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::DominatingSet;
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    /// Not yet dominated.
    White,
    /// Dominated by a neighbor in the set.
    Grey,
    /// In the set.
    Black,
}

/// Coloring and spans of a greedy run in progress. `span[v]` counts the white
/// vertices in the closed neighborhood of `v`.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub color: Vec<Color>,
    pub span: Vec<u32>,
    pub round: u32,
    white: usize,
    heap: BinaryHeap<(u32, Reverse<u32>)>,
}

impl SolverState {
    pub fn new(g: &Graph) -> Self {
        let span: Vec<u32> = (0..g.n() as u32).map(|v| g.degree(v) as u32 + 1).collect();
        let heap = span.iter().enumerate().map(|(v, &s)| (s, Reverse(v as u32))).collect();
        Self { color: alloc::vec![Color::White; g.n()], span, round: 0, white: g.n(), heap }
    }

    pub fn white_count(&self) -> usize {
        self.white
    }

    /// Adds the max-span vertex (smallest id on ties) and returns it, or
    /// `None` once everything is dominated.
    pub fn step(&mut self, g: &Graph) -> Option<u32> {
        while let Some((s, Reverse(v))) = self.heap.pop() {
            let current = self.span[v as usize];
            if current == 0 {
                continue;
            }
            if current != s {
                self.heap.push((current, Reverse(v)));
                continue;
            }
            self.admit(g, v);
            self.round += 1;
            return Some(v);
        }
        None
    }

    fn admit(&mut self, g: &Graph, v: u32) {
        if self.color[v as usize] == Color::White {
            self.cover(g, v);
        }
        self.color[v as usize] = Color::Black;
        for &u in g.neighbors(v) {
            if self.color[u as usize] == Color::White {
                self.cover(g, u);
                self.color[u as usize] = Color::Grey;
            }
        }
    }

    /// `u` stops being white: every closed neighbor loses one from its span.
    fn cover(&mut self, g: &Graph, u: u32) {
        self.white -= 1;
        self.color[u as usize] = Color::Grey;
        self.span[u as usize] -= 1;
        for &x in g.neighbors(u) {
            self.span[x as usize] -= 1;
        }
    }
}

pub fn greedy_sequential(g: &Graph) -> DominatingSet {
    let mut state = SolverState::new(g);
    let mut picked = Vec::new();
    while let Some(v) = state.step(g) {
        picked.push(v);
    }
    DominatingSet::new(picked, g.n()).expect("greedy picks are distinct and in range")
}

#[cfg(test)]
mod tests {
    use super::super::{brute_force_mds, is_dominating};
    use super::*;
    use crate::graph::{generate_er, path};
    use proptest::prelude::*;

    #[test]
    fn path4_tie_goes_to_lower_id() {
        // After 1 joins only 3 is white; 2 and 3 both have span 1.
        let s = greedy_sequential(&path(4));
        assert_eq!(s.vertices(), &[1, 2]);
        assert_eq!(brute_force_mds(&path(4)).unwrap().len(), 2);
    }

    proptest! {
        #[test]
        fn state_invariants(n in 1usize..30, p in 0.0f64..0.6, seed: u64) {
            let g = generate_er(n, p, seed).unwrap();
            let mut st = SolverState::new(&g);
            let mut last_white = st.white_count();
            let mut picked = Vec::new();
            while let Some(v) = st.step(&g) {
                picked.push(v);
                prop_assert!(st.white_count() < last_white);
                last_white = st.white_count();
                for x in 0..n as u32 {
                    let span = st.span[x as usize];
                    prop_assert!(span as usize <= g.degree(x) + 1);
                    if st.color[x as usize] == Color::Black {
                        prop_assert_eq!(span, 0);
                    }
                }
            }
            prop_assert_eq!(st.white_count(), 0);
            let s = DominatingSet::new(picked, n).unwrap();
            prop_assert!(is_dominating(&g, &s).unwrap().dominating);
        }
    }
}
