//! Vertex relabelings and isomorphic instance pools.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError};

/// A bijection on `0..n`. Applied to a graph, vertex `v` is renamed
/// `mapping[v]`; the inverse therefore maps the relabeled copy back onto the
/// original, i.e. `(a, b)` is an edge of the copy iff
/// `(inverse[a], inverse[b])` is an edge of the original.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexPermutation {
    mapping: Vec<u32>,
}

impl VertexPermutation {
    pub fn new(mapping: Vec<u32>) -> Result<Self, GraphError> {
        let n = mapping.len();
        let mut seen = alloc::vec![false; n];
        for &x in &mapping {
            let slot = seen.get_mut(x as usize).ok_or(GraphError::NotAPermutation(n))?;
            if *slot {
                return Err(GraphError::NotAPermutation(n));
            }
            *slot = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self { mapping: (0..n as u32).collect() }
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut mapping: Vec<u32> = (0..n as u32).collect();
        mapping.shuffle(rng);
        Self { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, v: u32) -> u32 {
        self.mapping[v as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        let mut inv = alloc::vec![0u32; self.mapping.len()];
        for (v, &image) in self.mapping.iter().enumerate() {
            inv[image as usize] = v as u32;
        }
        Self { mapping: inv }
    }

    /// The graph with every vertex `v` renamed to `self.apply(v)`.
    pub fn relabel(&self, g: &Graph) -> Graph {
        assert_eq!(g.n(), self.len(), "permutation size must match the graph");
        let edges: Vec<(u32, u32)> =
            g.edges().map(|(u, v)| (self.apply(u), self.apply(v))).collect();
        Graph::from_edges(g.n(), &edges).expect("relabeling preserves validity")
    }

    /// Maps a vertex set through the permutation, sorted.
    pub fn map_set(&self, vertices: &[u32]) -> Vec<u32> {
        let mut out: Vec<u32> = vertices.iter().map(|&v| self.apply(v)).collect();
        out.sort_unstable();
        out
    }
}

/// A uniformly random relabeled copy of `g` and the relabeling used.
pub fn make_isomorph(g: &Graph, seed: u64) -> (Graph, VertexPermutation) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perm = VertexPermutation::random(g.n(), &mut rng);
    (perm.relabel(g), perm)
}

/// `z` isomorphs with independently drawn relabelings.
pub fn make_instance_pool(
    g: &Graph,
    z: usize,
    seed: u64,
) -> Result<Vec<(Graph, VertexPermutation)>, GraphError> {
    if z == 0 {
        return Err(GraphError::Parameter("instance count z must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..z).map(|_| make_isomorph(g, rng.random())).collect())
}

#[cfg(test)]
mod tests {
    use super::super::{generate_ba, path};
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn hand_checked_path_relabel() {
        let perm = VertexPermutation::new(vec![2, 0, 1]).unwrap();
        let g = perm.relabel(&path(3));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn identity_is_noop() {
        let g = generate_ba(50, 2, 1).unwrap();
        assert_eq!(VertexPermutation::identity(50).relabel(&g), g);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(VertexPermutation::new(vec![0, 0, 1]).is_err());
        assert!(VertexPermutation::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn pool_shares_properties_and_is_deterministic() {
        let g = generate_ba(1000, 3, 5).unwrap();
        let pool = make_instance_pool(&g, 16, 77).unwrap();
        assert_eq!(pool.len(), 16);
        let p = g.properties();
        for (h, _) in &pool {
            assert_eq!(h.properties(), p);
        }
        assert_eq!(pool, make_instance_pool(&g, 16, 77).unwrap());
        assert!(make_instance_pool(&g, 0, 1).is_err());
    }

    proptest! {
        #[test]
        fn isomorph_round_trip(n in 2usize..40, attach in 1usize..3, gseed: u64, seed: u64) {
            prop_assume!(n > attach);
            let g = generate_ba(n, attach, gseed).unwrap();
            let (h, perm) = make_isomorph(&g, seed);
            prop_assert_eq!(perm.inverse().relabel(&h), g.clone());
            let mut a = g.degree_sequence();
            let mut b = h.degree_sequence();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
            let inv = perm.inverse();
            for (x, y) in h.edges() {
                prop_assert!(g.has_edge(inv.apply(x), inv.apply(y)));
            }
        }
    }
}
