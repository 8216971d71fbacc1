//! Benchmark sweep over BA graphs: wall-clock block generation (pool
//! solve) and verification, plus the lookup table built from them.
//!
//! Results are split in two. [`BenchRow::values`] holds what the solver
//! produced and is identical on every rerun; [`BenchRow::timing_values`]
//! holds the measured times and censoring, which are not.

use std::time::Instant;

use scalowork_core::clock::Clock;
use scalowork_core::graph::{generate_ba, Graph, GraphError};
use scalowork_core::mds::{compute_bound, is_dominating};
use scalowork_core::pool::{run_pool_solve, PartitionStrategy, PoolConfig, PoolError};
use scalowork_core::scheduler::{LookupRow, LookupTable, ScheduleError};
use thiserror::Error;

use crate::report::{f6, to_csv};
use crate::{RayonExecutor, SystemClock};

/// Largest edge count attempted unless raised; a BA graph costs roughly
/// 20 bytes per edge in memory.
pub const DEFAULT_MAX_EDGES: u64 = 50_000_000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark parameters: {0}")]
    Parameter(String),
    #[error("n={n}, degree={degree} needs about {edges} edges, above the limit of {limit}")]
    TooLarge { n: usize, degree: usize, edges: u64, limit: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub nodes: Vec<usize>,
    pub degrees: Vec<usize>,
    pub workers: Vec<usize>,
    pub cutoff_ms: u64,
    pub seed: u64,
    pub max_edges: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            nodes: vec![10_000, 100_000],
            degrees: vec![50],
            workers: vec![1, 8],
            cutoff_ms: 15 * 60 * 1000,
            seed: 0,
            max_edges: DEFAULT_MAX_EDGES,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let positive = |xs: &[usize]| !xs.is_empty() && xs.iter().all(|&x| x > 0);
        if !positive(&self.nodes) || !positive(&self.degrees) || !positive(&self.workers) || self.cutoff_ms == 0 {
            return Err(BenchError::Parameter("node counts, degrees, workers and cutoff must be positive".into()));
        }
        for &n in &self.nodes {
            for &degree in &self.degrees {
                let attach = attach_for(degree);
                if attach >= n {
                    return Err(BenchError::Parameter(format!("degree {degree} needs more than {n} vertices")));
                }
                let edges = (n as u64).saturating_mul(attach as u64);
                if edges > self.max_edges {
                    return Err(BenchError::TooLarge { n, degree, edges, limit: self.max_edges });
                }
            }
        }
        Ok(())
    }
}

/// Edges each new BA vertex attaches for a target average degree.
pub fn attach_for(degree: usize) -> usize {
    (degree / 2).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub degree: usize,
    pub workers: usize,
    pub m: usize,
    pub delta_min: u32,
    pub rounds: u32,
    pub solution_size: usize,
    pub bound: f64,
    pub within_bound: bool,
    pub dominating: bool,
    pub generation_ms: f64,
    pub verification_ms: f64,
    /// The cutoff stopped the solver before it finished.
    pub censored: bool,
}

impl BenchRow {
    pub const FIELDS: [&'static str; 10] =
        ["n", "degree", "workers", "m", "delta_min", "rounds", "solution_size", "bound", "within_bound", "dominating"];
    pub const TIMING_FIELDS: [&'static str; 6] =
        ["n", "degree", "workers", "generation_ms", "verification_ms", "censored"];

    pub fn values(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.degree.to_string(),
            self.workers.to_string(),
            self.m.to_string(),
            self.delta_min.to_string(),
            self.rounds.to_string(),
            self.solution_size.to_string(),
            f6(self.bound),
            self.within_bound.to_string(),
            self.dominating.to_string(),
        ]
    }

    pub fn timing_values(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.degree.to_string(),
            self.workers.to_string(),
            format!("{:.3}", self.generation_ms),
            format!("{:.3}", self.verification_ms),
            self.censored.to_string(),
        ]
    }
}

pub fn results_csv(rows: &[BenchRow]) -> String {
    to_csv(&BenchRow::FIELDS, rows.iter().map(BenchRow::values))
}

pub fn timings_csv(rows: &[BenchRow]) -> String {
    to_csv(&BenchRow::TIMING_FIELDS, rows.iter().map(BenchRow::timing_values))
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Times one pool solve of `g` with `workers` miners on as many threads,
/// then the verifier's work on the result: hashing the instance for its
/// signature check, the bound test and the coverage sweep.
pub fn measure(g: &Graph, degree: usize, workers: usize, cutoff_ms: u64) -> Result<BenchRow, BenchError> {
    let exec = RayonExecutor::new(workers)?;
    let clock = SystemClock::new();
    let config = PoolConfig::new(0, workers, PartitionStrategy::Contiguous);
    let started = Instant::now();
    let deadline = clock.now_ms().saturating_add(cutoff_ms);
    let solved = run_pool_solve(g, &config, &exec, &clock, deadline)?;
    let generation_ms = ms_since(started);

    let started = Instant::now();
    let digest = g.digest();
    let props = g.properties();
    let bound = compute_bound(&props);
    let within_bound = bound.admits(solved.set.len());
    let dominating = is_dominating(g, &solved.set).is_ok_and(|c| c.dominating);
    let verification_ms = ms_since(started);
    std::hint::black_box(digest);

    Ok(BenchRow {
        n: g.n(),
        degree,
        workers,
        m: g.m(),
        delta_min: props.delta_min,
        rounds: solved.rounds,
        solution_size: solved.set.len(),
        bound: bound.k,
        within_bound,
        dominating,
        generation_ms,
        verification_ms,
        censored: !solved.completed || generation_ms > cutoff_ms as f64,
    })
}

/// One row per (n, degree, workers), in that nesting order. The graph for
/// each (n, degree) is generated once from the seed and shared across
/// worker counts.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (i, &n) in cfg.nodes.iter().enumerate() {
        for (k, &degree) in cfg.degrees.iter().enumerate() {
            let seed = cfg.seed ^ ((i as u64) << 32 | k as u64);
            let g = generate_ba(n, attach_for(degree), seed)?;
            for &workers in &cfg.workers {
                rows.push(measure(&g, degree, workers, cfg.cutoff_ms)?);
            }
        }
    }
    Ok(rows)
}

/// Lookup rows from uncensored measurements: τ is generation plus
/// verification, rounded up to whole milliseconds.
pub fn lookup_rows(rows: &[BenchRow]) -> Vec<LookupRow> {
    rows.iter()
        .filter(|r| !r.censored && r.m > 0)
        .map(|r| LookupRow {
            n: r.n as u64,
            m: r.m as u64,
            tau_ms: ((r.generation_ms + r.verification_ms).ceil() as u64).max(1),
        })
        .collect()
}

/// Measures every instance and builds the table. Instances the solver
/// cannot handle are skipped with a warning on stderr.
pub fn build_lookup(instances: &[Graph], workers: usize, cutoff_ms: u64, multiplier: f64) -> Result<LookupTable, BenchError> {
    let mut rows = Vec::new();
    for (i, g) in instances.iter().enumerate() {
        match measure(g, 0, workers, cutoff_ms) {
            Ok(row) if !row.censored && row.m > 0 => rows.extend(lookup_rows(&[row])),
            Ok(_) => eprintln!("warning: benchmark instance {i} skipped (censored or edgeless)"),
            Err(e) => eprintln!("warning: benchmark instance {i} skipped: {e}"),
        }
    }
    Ok(LookupTable::new(rows, multiplier)?)
}

pub fn lookup_csv(table: &LookupTable) -> String {
    to_csv(
        &["n", "m", "tau_ms"],
        table.rows().iter().map(|r| vec![r.n.to_string(), r.m.to_string(), r.tau_ms.to_string()]),
    )
}

pub fn parse_lookup_csv(text: &str, multiplier: f64) -> Result<LookupTable, BenchError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| BenchError::Parameter(e.to_string()))?;
        let field = |i: usize| -> Result<u64, BenchError> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| BenchError::Parameter(format!("lookup row {rec:?}: field {i}")))
        };
        rows.push(LookupRow { n: field(0)?, m: field(1)?, tau_ms: field(2)? });
    }
    Ok(LookupTable::new(rows, multiplier)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        BenchConfig { nodes: vec![300, 600], degrees: vec![6, 10], workers: vec![1, 2], ..Default::default() }
    }

    #[test]
    fn one_row_per_combination_and_stable_results() {
        let a = run_benchmark(&small()).unwrap();
        assert_eq!(a.len(), 2 * 2 * 2);
        assert!(a.iter().all(|r| r.dominating && r.within_bound && !r.censored));
        let b = run_benchmark(&small()).unwrap();
        assert_eq!(results_csv(&a), results_csv(&b));
        assert_eq!(a[0].solution_size, a[1].solution_size);
        assert_eq!(timings_csv(&a).lines().count(), 9);
    }

    #[test]
    fn size_guard_and_parameters() {
        let huge = BenchConfig { nodes: vec![5_000_000], ..Default::default() };
        assert!(matches!(huge.validate(), Err(BenchError::TooLarge { .. })));
        let raised = BenchConfig { max_edges: u64::MAX, ..huge };
        assert!(raised.validate().is_ok());
        assert!(BenchConfig { workers: vec![], ..small() }.validate().is_err());
        assert!(BenchConfig { nodes: vec![10], degrees: vec![50], ..small() }.validate().is_err());
    }

    #[test]
    fn lookup_from_measurements() {
        let graphs: Vec<Graph> = [400, 200].iter().map(|&n| generate_ba(n, 3, 1).unwrap()).collect();
        let table = build_lookup(&graphs, 1, 60_000, 1.5).unwrap();
        assert_eq!(table.rows().iter().map(|r| r.n).collect::<Vec<_>>(), vec![200, 400]);
        let text = lookup_csv(&table);
        assert_eq!(parse_lookup_csv(&text, 1.5).unwrap(), table);
        assert!(build_lookup(&[], 1, 1, 1.5).is_err());
    }

    #[test]
    fn cutoff_marks_censored() {
        let g = generate_ba(2_000, 5, 4).unwrap();
        let row = measure(&g, 10, 1, 1).unwrap();
        if !row.censored {
            assert!(row.generation_ms <= 1.0);
        }
        assert!(row.dominating);
    }
}
