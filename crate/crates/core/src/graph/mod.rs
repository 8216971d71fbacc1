//! Undirected simple graphs on dense labels `0..n`.

mod generate;
mod iso;

use alloc::vec::Vec;

use thiserror::Error;

use crate::crypto::{self, Digest};

pub use generate::{complete, cycle, empty, generate_ba, generate_er, path, star};
pub use iso::{make_instance_pool, make_isomorph, VertexPermutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid parameter: {0}")]
    Parameter(&'static str),
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    VertexOutOfRange { u: u32, v: u32, n: u32 },
    #[error("self-loop on vertex {0}")]
    SelfLoop(u32),
    #[error("mapping is not a permutation of 0..{0}")]
    NotAPermutation(usize),
}

/// Immutable adjacency structure with sorted, duplicate-free neighbor lists.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphProperties {
    pub n: u64,
    pub m: u64,
    pub delta_min: u32,
    pub delta_max: u32,
    pub avg_degree: f64,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) collapse; self-loops and out-of-range endpoints are errors.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        let n32 = u32::try_from(n).map_err(|_| GraphError::Parameter("n exceeds u32"))?;
        let mut degree = alloc::vec![0usize; n];
        for &(u, v) in edges {
            if u >= n32 || v >= n32 {
                return Err(GraphError::VertexOutOfRange { u, v, n: n32 });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = alloc::vec![0u32; offsets[n]];
        for &(u, v) in edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        Ok(Self::compact(n, offsets, neighbors))
    }

    /// Sorts and dedups each list, then squeezes out the gaps.
    fn compact(n: usize, offsets: Vec<usize>, mut neighbors: Vec<u32>) -> Self {
        let mut out_offsets = Vec::with_capacity(n + 1);
        out_offsets.push(0);
        let mut write = 0;
        for v in 0..n {
            let (start, end) = (offsets[v], offsets[v + 1]);
            neighbors[start..end].sort_unstable();
            let mut last = None;
            for i in start..end {
                let x = neighbors[i];
                if last != Some(x) {
                    neighbors[write] = x;
                    write += 1;
                    last = Some(x);
                }
            }
            out_offsets.push(write);
        }
        neighbors.truncate(write);
        Self { offsets: out_offsets, neighbors }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: u32) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        (u as usize) < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n() as u32)
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        (0..self.n() as u32).map(|v| self.degree(v)).collect()
    }

    pub fn properties(&self) -> GraphProperties {
        let n = self.n();
        let (mut lo, mut hi) = (u32::MAX, 0u32);
        for v in 0..n as u32 {
            let d = self.degree(v) as u32;
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if n == 0 {
            lo = 0;
        }
        let m = self.m() as u64;
        GraphProperties {
            n: n as u64,
            m,
            delta_min: lo,
            delta_max: hi,
            avg_degree: if n == 0 { 0.0 } else { 2.0 * m as f64 / n as f64 },
        }
    }

    /// Compact binary form hashed for instance signatures: `n` (u32 BE),
    /// `m` (u64 BE), then each edge `u < v` as two u32 BE values.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * self.m());
        out.extend_from_slice(&(self.n() as u32).to_be_bytes());
        out.extend_from_slice(&(self.m() as u64).to_be_bytes());
        for (u, v) in self.edges() {
            out.extend_from_slice(&u.to_be_bytes());
            out.extend_from_slice(&v.to_be_bytes());
        }
        out
    }

    pub fn digest(&self) -> Digest {
        crypto::hash(&self.canonical_bytes())
    }
}

impl core::fmt::Debug for Graph {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n(), self.m())
    }
}

pub fn properties(g: &Graph) -> GraphProperties {
    g.properties()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn check_invariants(g: &Graph) {
        let mut total = 0;
        for v in 0..g.n() as u32 {
            let nb = g.neighbors(v);
            total += nb.len();
            assert!(nb.windows(2).all(|w| w[0] < w[1]), "sorted and unique");
            assert!(!nb.contains(&v));
            for &u in nb {
                assert!(g.neighbors(u).contains(&v), "symmetric");
            }
        }
        assert_eq!(total, 2 * g.m());
    }

    #[test]
    fn from_edges_normalizes() {
        let g = Graph::from_edges(4, &[(1, 0), (0, 1), (2, 3), (3, 2), (1, 2)]).unwrap();
        assert_eq!(g.m(), 3);
        assert_eq!(g.neighbors(1), &[0, 2]);
        check_invariants(&g);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(Graph::from_edges(3, &[(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert!(matches!(
            Graph::from_edges(3, &[(0, 3)]),
            Err(GraphError::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn k4_properties() {
        let p = complete(4).properties();
        assert_eq!((p.n, p.m, p.delta_min, p.delta_max), (4, 6, 3, 3));
    }

    #[test]
    fn star_properties() {
        let p = star(5).properties();
        assert_eq!((p.delta_min, p.delta_max, p.m), (1, 5, 5));
        assert!(p.delta_min as f64 <= p.avg_degree && p.avg_degree <= p.delta_max as f64);
    }

    #[test]
    fn ba_edge_count_matches_construction() {
        // Seed clique on 3 vertices contributes C(3,2) edges, each of the
        // remaining 97 vertices attaches with 3.
        let p = generate_ba(100, 3, 11).unwrap().properties();
        assert_eq!(p.m, 3 * 97 + 3);
        assert_eq!(p.n, 100);
    }

    #[test]
    fn canonical_bytes_depend_on_edges() {
        let a = path(4);
        let b = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 3)]).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), path(4).digest());
        check_invariants(&a);
    }
}
