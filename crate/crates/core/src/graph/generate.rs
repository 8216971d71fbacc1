//! Seeded synthetic graph generators and small named families.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError};

/// Barabási–Albert preferential attachment.
///
/// Vertices `0..attach` start as a clique. Every later vertex draws `attach`
/// distinct targets with probability proportional to current degree (uniform
/// while the graph still has no edges), so `m = attach·(n − attach) + C(attach, 2)`.
pub fn generate_ba(n: usize, attach: usize, seed: u64) -> Result<Graph, GraphError> {
    if attach < 1 || n <= attach {
        return Err(GraphError::Parameter("BA requires n > attach >= 1"));
    }
    if n > u32::MAX as usize {
        return Err(GraphError::Parameter("n exceeds u32"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(attach * n);
    // Each edge endpoint appears once per incident edge; a uniform draw from
    // this list is a degree-proportional draw over vertices.
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * attach * n);
    for u in 0..attach as u32 {
        for v in u + 1..attach as u32 {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut targets: Vec<u32> = Vec::with_capacity(attach);
    for v in attach as u32..n as u32 {
        targets.clear();
        if v as usize == attach {
            targets.extend(0..attach as u32);
        } else {
            while targets.len() < attach {
                let t = if endpoints.is_empty() {
                    rng.random_range(0..v)
                } else {
                    endpoints[rng.random_range(0..endpoints.len())]
                };
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Graph::from_edges(n, &edges)
}

/// Erdős–Rényi `G(n, p)` using geometric skipping over the pair sequence, so
/// sparse graphs cost `O(n + m)` rather than `O(n²)`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(GraphError::Parameter("edge probability must lie in [0, 1]"));
    }
    if n > u32::MAX as usize {
        return Err(GraphError::Parameter("n exceeds u32"));
    }
    if p == 0.0 || n < 2 {
        return Ok(empty(n));
    }
    if p == 1.0 {
        return Ok(complete(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_q = libm::log(1.0 - p);
    let mut edges = Vec::new();
    // Pairs (v, w) with w < v enumerated row by row.
    let (mut v, mut w): (i64, i64) = (1, -1);
    let n = n as i64;
    while v < n {
        let r: f64 = rng.random();
        w += 1 + libm::floor(libm::log(1.0 - r) / log_q) as i64;
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            edges.push((w as u32, v as u32));
        }
    }
    Graph::from_edges(n as usize, &edges)
}

pub fn empty(n: usize) -> Graph {
    Graph::from_edges(n, &[]).expect("no edges")
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges).expect("valid")
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (v - 1, v)).collect();
    Graph::from_edges(n, &edges).expect("valid")
}

pub fn cycle(n: usize) -> Graph {
    let mut edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (v - 1, v)).collect();
    if n > 2 {
        edges.push((n as u32 - 1, 0));
    }
    Graph::from_edges(n, &edges).expect("valid")
}

/// Center `0` joined to leaves `1..=leaves`.
pub fn star(leaves: usize) -> Graph {
    let edges: Vec<(u32, u32)> = (1..=leaves as u32).map(|v| (0, v)).collect();
    Graph::from_edges(leaves + 1, &edges).expect("valid")
}
