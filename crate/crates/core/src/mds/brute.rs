use alloc::vec::Vec;

use super::{DominatingSet, MdsError};
use crate::graph::Graph;

pub const BRUTE_FORCE_MAX_N: usize = 25;

/// A minimum dominating set by enumerating subsets in increasing size; the
/// first hit in colexicographic order is returned.
pub fn brute_force_mds(g: &Graph) -> Result<DominatingSet, MdsError> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(MdsError::TooLarge { n, max: BRUTE_FORCE_MAX_N });
    }
    if n == 0 {
        return DominatingSet::new(Vec::new(), 0);
    }
    let closed: Vec<u32> = (0..n as u32)
        .map(|v| g.neighbors(v).iter().fold(1u32 << v, |acc, &u| acc | (1 << u)))
        .collect();
    let full: u32 = (1u32 << n) - 1;
    for size in 1..=n {
        let mut subset: u32 = (1u32 << size) - 1;
        while subset <= full {
            let mut covered = 0u32;
            let mut bits = subset;
            while bits != 0 {
                covered |= closed[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            if covered == full {
                let vertices = (0..n as u32).filter(|&v| subset & (1 << v) != 0).collect();
                return DominatingSet::new(vertices, n);
            }
            // Gosper's hack: next integer with the same popcount.
            let c = subset & subset.wrapping_neg();
            let r = subset + c;
            if r == 0 || r > full {
                break;
            }
            subset = (((r ^ subset) >> 2) / c) | r;
        }
    }
    unreachable!("the full vertex set always dominates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, empty, generate_er};
    use crate::mds::is_dominating;

    #[test]
    fn known_optima() {
        assert_eq!(brute_force_mds(&cycle(6)).unwrap().len(), 2);
        assert_eq!(brute_force_mds(&empty(5)).unwrap().vertices(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn guard() {
        assert!(matches!(brute_force_mds(&empty(26)), Err(MdsError::TooLarge { .. })));
    }

    #[test]
    fn optimum_is_dominating_and_no_larger_than_greedy() {
        for seed in 0..30 {
            let g = generate_er(12, 0.25, seed).unwrap();
            let opt = brute_force_mds(&g).unwrap();
            assert!(is_dominating(&g, &opt).unwrap().dominating);
            assert!(opt.len() <= crate::mds::greedy_sequential(&g).len());
        }
    }
}
