//! Greedy dominating-set solvers, the cardinality bound every block solution
//! must meet, coverage checking and an exhaustive oracle for small graphs.

mod brute;
mod distributed;
mod sequential;

use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{Graph, GraphProperties};

pub use brute::{brute_force_mds, BRUTE_FORCE_MAX_N};
pub use distributed::{
    greedy_distributed, greedy_distributed_with, DistributedRun, Partition, RoundReport, RoundStats,
};
pub use sequential::{greedy_sequential, Color, SolverState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MdsError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: u32, n: usize },
    #[error("vertex {0} listed more than once")]
    Duplicate(u32),
    #[error("set was built for n = {set_n} but the graph has n = {graph_n}")]
    SizeMismatch { set_n: usize, graph_n: usize },
    #[error("partition leaves vertices unassigned: {0:?}")]
    PartitionGap(Vec<u32>),
    #[error("vertex {0} assigned to more than one worker")]
    PartitionOverlap(u32),
    #[error("partition needs at least one worker")]
    NoWorkers,
    #[error("exhaustive search limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
}

/// A sorted, duplicate-free vertex set tied to the `n` it was computed for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DominatingSet {
    vertices: Vec<u32>,
    graph_n: usize,
}

impl DominatingSet {
    pub fn new(mut vertices: Vec<u32>, graph_n: usize) -> Result<Self, MdsError> {
        vertices.sort_unstable();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(MdsError::Duplicate(w[0]));
        }
        if let Some(&v) = vertices.last() {
            if v as usize >= graph_n {
                return Err(MdsError::VertexOutOfRange { vertex: v, n: graph_n });
            }
        }
        Ok(Self { vertices, graph_n })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn graph_n(&self) -> usize {
        self.graph_n
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// The size target `k = n(1 + ln(1 + δ)) / (1 + δ)`. Solutions qualify when
/// `|S| <= k`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CardinalityBound {
    pub k: f64,
}

impl CardinalityBound {
    pub fn admits(&self, size: usize) -> bool {
        size as f64 <= self.k
    }
}

pub fn compute_bound(props: &GraphProperties) -> CardinalityBound {
    bound_for(props.n, props.delta_min)
}

pub fn bound_for(n: u64, delta_min: u32) -> CardinalityBound {
    let d = delta_min as f64;
    CardinalityBound { k: n as f64 * (1.0 + libm::log(1.0 + d)) / (1.0 + d) }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coverage {
    pub dominating: bool,
    pub uncovered: Vec<u32>,
}

/// Visited-set sweep: mark every member and its neighbors, then report any
/// vertex left unmarked.
pub fn is_dominating(g: &Graph, s: &DominatingSet) -> Result<Coverage, MdsError> {
    if s.graph_n != g.n() {
        return Err(MdsError::SizeMismatch { set_n: s.graph_n, graph_n: g.n() });
    }
    Ok(coverage(g, &s.vertices))
}

/// Coverage of an arbitrary in-range vertex list. Panics on out-of-range ids;
/// use [`is_dominating`] for untrusted input.
pub fn coverage(g: &Graph, vertices: &[u32]) -> Coverage {
    let mut visited = alloc::vec![false; g.n()];
    let mut count = 0usize;
    let mut mark = |v: u32, visited: &mut Vec<bool>| {
        if !visited[v as usize] {
            visited[v as usize] = true;
            count += 1;
        }
    };
    for &v in vertices {
        mark(v, &mut visited);
        for &u in g.neighbors(v) {
            mark(u, &mut visited);
        }
    }
    let uncovered: Vec<u32> = if count == g.n() {
        Vec::new()
    } else {
        (0..g.n() as u32).filter(|&v| !visited[v as usize]).collect()
    };
    Coverage { dominating: uncovered.is_empty(), uncovered }
}
