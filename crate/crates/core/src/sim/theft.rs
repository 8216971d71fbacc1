use alloc::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{config_err, SimError};
use crate::clock::{Clock, ManualClock};
use crate::exec::Sequential;
use crate::graph::{generate_ba, make_instance_pool, Graph};
use crate::mds::{coverage, greedy_sequential};
use crate::pool::{run_pool_solve_paced, PartitionStrategy, PoolConfig, RoundPace};

/// Largest instance the exhaustive mapping search accepts.
pub const THEFT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheftConfig {
    pub n: usize,
    pub z: u64,
    /// Candidate mappings the thief can test per millisecond.
    pub checks_per_ms: u64,
    /// Search deadline; by default the modeled honest solve time times
    /// `multiplier`.
    pub deadline_ms: Option<u64>,
    pub pace: RoundPace,
    pub miners: usize,
    pub multiplier: f64,
}

impl Default for TheftConfig {
    fn default() -> Self {
        Self {
            n: 8,
            z: 16,
            checks_per_ms: 1_000,
            deadline_ms: None,
            pace: RoundPace { round_ms: 20, setup_ns_per_item: 2_000 },
            miners: 4,
            multiplier: crate::scheduler::DEFAULT_MULTIPLIER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheftOutcome {
    pub n: usize,
    /// n!, the mappings an exhaustive search may have to try.
    pub search_space: f64,
    pub budget: u64,
    pub examined: u64,
    /// Victim and thief drew the same instance.
    pub same_instance: bool,
    pub success: bool,
    /// log10 of the relabelings that keep every degree class in place.
    pub ambiguity_log10: f64,
}

/// Rearranges `xs` into the next permutation in lexicographic order;
/// false (and sorted ascending) after the last one.
pub fn next_permutation(xs: &mut [u32]) -> bool {
    let Some(i) = (1..xs.len()).rev().find(|&i| xs[i - 1] < xs[i]) else {
        xs.reverse();
        return false;
    };
    let j = (i..xs.len()).rev().find(|&j| xs[j] > xs[i - 1]).expect("xs[i] qualifies");
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

fn maps_onto(a: &Graph, b: &Graph, pi: &[u32]) -> bool {
    a.edges().all(|(u, v)| b.has_edge(pi[u as usize], pi[v as usize]))
}

pub fn degree_ambiguity_log10(g: &Graph) -> f64 {
    let mut classes: BTreeMap<usize, u32> = BTreeMap::new();
    for v in 0..g.n() as u32 {
        *classes.entry(g.degree(v)).or_default() += 1;
    }
    classes.values().map(|&c| libm::lgamma(f64::from(c) + 1.0)).sum::<f64>() / core::f64::consts::LN_10
}

/// A lazy pool copies the victim's published solution and searches, in
/// lexicographic order, for a relabeling of the victim's instance onto its
/// own within the deadline.
pub fn run_solution_theft(seed: u64, cfg: &TheftConfig) -> Result<TheftOutcome, SimError> {
    if cfg.n > THEFT_MAX_N {
        return Err(SimError::Config(alloc::format!(
            "theft search is limited to n <= {THEFT_MAX_N}, got {}",
            cfg.n
        )));
    }
    if cfg.n < 4 || cfg.z == 0 || cfg.miners == 0 {
        return Err(config_err("theft needs n >= 4, z >= 1 and a miner"));
    }
    let g = generate_ba(cfg.n, 2, seed)?;
    let pool = make_instance_pool(&g, cfg.z as usize, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e57);
    let victim_j = rng.random_range(0..cfg.z) as usize;
    let thief_j = rng.random_range(0..cfg.z) as usize;
    let (victim, _) = &pool[victim_j];
    let (own, _) = &pool[thief_j];

    let deadline = match cfg.deadline_ms {
        Some(d) => d,
        None => {
            let clock = ManualClock::new(0);
            let config = PoolConfig::new(0, cfg.miners, PartitionStrategy::Contiguous);
            run_pool_solve_paced(own, &config, &Sequential, &clock, u64::MAX, |_, _| true, cfg.pace)
                .map_err(|e| SimError::Config(alloc::format!("{e}")))?;
            libm::ceil(clock.now_ms() as f64 * cfg.multiplier) as u64
        }
    };
    let budget = deadline.saturating_mul(cfg.checks_per_ms);
    let stolen = greedy_sequential(victim);
    let search_space = (1..=cfg.n).map(|k| k as f64).product();
    let ambiguity_log10 = degree_ambiguity_log10(&g);

    let same_instance = victim_j == thief_j;
    let mut examined = 0;
    let mut success = false;
    if same_instance {
        success = coverage(own, stolen.vertices()).dominating;
    } else {
        let mut pi: alloc::vec::Vec<u32> = (0..cfg.n as u32).collect();
        while examined < budget {
            examined += 1;
            if maps_onto(victim, own, &pi) {
                let mapped: alloc::vec::Vec<u32> = stolen.vertices().iter().map(|&v| pi[v as usize]).collect();
                success = coverage(own, &mapped).dominating;
                break;
            }
            if !next_permutation(&mut pi) {
                break;
            }
        }
    }
    Ok(TheftOutcome { n: cfg.n, search_space, budget, examined, same_instance, success, ambiguity_log10 })
}
