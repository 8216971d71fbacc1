//! Pool orchestration: splitting the instance among miners, tracking who
//! reported each round, flagging free riders and paying out the reward.

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clock::Clock;
use crate::exec::Executor;
use crate::graph::{Graph, VertexPermutation};
use crate::protocol::Solver;
use crate::mds::{greedy_distributed_with, DominatingSet, MdsError, Partition, RoundReport};

pub const DEFAULT_FREE_RIDER_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoolError {
    #[error("a pool needs at least one miner")]
    NoMiners,
    #[error(transparent)]
    Solver(#[from] MdsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartitionStrategy {
    #[default]
    Contiguous,
    DegreeBalanced,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolConfig {
    pub pool_id: u32,
    pub manager: String,
    pub miners: Vec<String>,
    pub strategy: PartitionStrategy,
}

impl PoolConfig {
    pub fn new(pool_id: u32, miners: usize, strategy: PartitionStrategy) -> Self {
        Self {
            pool_id,
            manager: alloc::format!("pool{pool_id}-manager"),
            miners: (0..miners).map(|i| alloc::format!("pool{pool_id}-miner{i}")).collect(),
            strategy,
        }
    }

    /// The same pool with the listed miners (by index) removed.
    pub fn without(&self, flagged: &[u32]) -> Self {
        let miners = self
            .miners
            .iter()
            .enumerate()
            .filter(|(i, _)| !flagged.contains(&(*i as u32)))
            .map(|(_, m)| m.clone())
            .collect();
        Self { miners, ..self.clone() }
    }
}

pub fn partition_vertices(g: &Graph, miners: usize, strategy: PartitionStrategy) -> Partition {
    match strategy {
        PartitionStrategy::Contiguous => Partition::contiguous(g.n(), miners),
        PartitionStrategy::DegreeBalanced => Partition::degree_balanced(g, miners),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinerRecord {
    pub assigned: u64,
    pub reported: u32,
    pub missed: u32,
    pub admitted: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContributionLedger {
    pub rounds: u32,
    pub miners: Vec<MinerRecord>,
}

impl ContributionLedger {
    pub fn from_reports(partition: &Partition, rounds: u32, reports: &[RoundReport]) -> Self {
        let mut miners: Vec<MinerRecord> = (0..partition.workers())
            .map(|w| MinerRecord { assigned: partition.vertices_of(w).len() as u64, ..Default::default() })
            .collect();
        for r in reports {
            let rec = &mut miners[r.worker as usize];
            if r.responded {
                rec.reported += 1;
            } else {
                rec.missed += 1;
            }
            rec.admitted += u64::from(r.admitted);
        }
        Self { rounds, miners }
    }

    pub fn missed_fraction(&self, miner: usize) -> f64 {
        if self.rounds == 0 {
            0.0
        } else {
            f64::from(self.miners[miner].missed) / f64::from(self.rounds)
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoolSolve {
    pub set: DominatingSet,
    pub ledger: ContributionLedger,
    pub rounds: u32,
    /// False when the deadline cut the run short; the set is then padded
    /// with the vertices still uncovered.
    pub completed: bool,
}

pub fn run_pool_solve<E: Executor, C: Clock>(
    g: &Graph,
    config: &PoolConfig,
    exec: &E,
    clock: &C,
    deadline_ms: u64,
) -> Result<PoolSolve, PoolError> {
    run_pool_solve_with(g, config, exec, clock, deadline_ms, |_, _| true)
}

/// `responds(round, miner)` models which miners answer in each round.
pub fn run_pool_solve_with<E, C, R>(
    g: &Graph,
    config: &PoolConfig,
    exec: &E,
    clock: &C,
    deadline_ms: u64,
    responds: R,
) -> Result<PoolSolve, PoolError>
where
    E: Executor,
    C: Clock,
    R: Fn(u32, u32) -> bool + Sync,
{
    run_pool_solve_paced(g, config, exec, clock, deadline_ms, responds, RoundPace::default())
}

/// Modeled cost of a pool run, charged to the clock as rounds start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoundPace {
    /// Per round, mostly message latency between manager and miners.
    pub round_ms: u64,
    /// One-off local work per vertex and edge endpoint, split across miners.
    pub setup_ns_per_item: u64,
}

impl RoundPace {
    pub fn setup_ms(&self, g: &Graph, miners: usize) -> u64 {
        let items = (g.n() + 2 * g.m()) as u64;
        (items * self.setup_ns_per_item).div_ceil(miners.max(1) as u64 * 1_000_000)
    }
}

/// A round starts only if, after its modeled cost, the clock is still
/// before the deadline.
pub fn run_pool_solve_paced<E, C, R>(
    g: &Graph,
    config: &PoolConfig,
    exec: &E,
    clock: &C,
    deadline_ms: u64,
    responds: R,
    pace: RoundPace,
) -> Result<PoolSolve, PoolError>
where
    E: Executor,
    C: Clock,
    R: Fn(u32, u32) -> bool + Sync,
{
    if config.miners.is_empty() {
        return Err(PoolError::NoMiners);
    }
    let partition = partition_vertices(g, config.miners.len(), config.strategy);
    let setup = pace.setup_ms(g, config.miners.len());
    let keep_going = |round: u32| {
        let cost = pace.round_ms + if round == 1 { setup } else { 0 };
        if clock.now_ms().saturating_add(cost) >= deadline_ms {
            return false;
        }
        clock.charge(cost);
        true
    };
    let run = greedy_distributed_with(g, &partition, exec, responds, keep_going)?;
    let ledger = ContributionLedger::from_reports(&partition, run.rounds, &run.reports);
    Ok(PoolSolve { set: run.set, ledger, rounds: run.rounds, completed: run.completed })
}

/// Miner indices whose missed-round fraction exceeds `threshold`.
pub fn detect_free_riders(ledger: &ContributionLedger, threshold: f64) -> Vec<u32> {
    (0..ledger.miners.len())
        .filter(|&i| ledger.missed_fraction(i) > threshold)
        .map(|i| i as u32)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payouts {
    pub miners: Vec<u64>,
    pub manager: u64,
    /// Nobody earned a share, so the whole reward sits with the manager.
    pub escrowed: bool,
}

impl Payouts {
    pub fn total(&self) -> u64 {
        self.miners.iter().sum::<u64>() + self.manager
    }
}

/// Splits `reward` in proportion to assigned vertices times reported rounds.
/// Flagged miners get nothing and the manager keeps the rounding remainder.
pub fn distribute_reward(reward: u64, ledger: &ContributionLedger, flagged: &[u32]) -> Payouts {
    let weights: Vec<u128> = ledger
        .miners
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if flagged.contains(&(i as u32)) {
                0
            } else {
                u128::from(m.assigned) * u128::from(m.reported)
            }
        })
        .collect();
    let total: u128 = weights.iter().sum();
    if total == 0 {
        return Payouts { miners: alloc::vec![0; weights.len()], manager: reward, escrowed: true };
    }
    let miners: Vec<u64> =
        weights.iter().map(|&w| (u128::from(reward) * w / total) as u64).collect();
    let manager = reward - miners.iter().sum::<u64>();
    Payouts { miners, manager, escrowed: false }
}

/// A pool acting as the block generator's solver. Attempt 0 works on the
/// instance as given; later attempts (only when `explore` is set) solve a
/// seeded relabeling and map the set back.
pub struct PoolSolver<'a, E, C> {
    pub config: PoolConfig,
    pub pace: RoundPace,
    pub explore: bool,
    /// Miner indices that never answer.
    pub silent: Vec<u32>,
    exec: &'a E,
    clock: &'a C,
    /// The most recent run, for the ledger and round count.
    pub last: Option<PoolSolve>,
}

impl<'a, E: Executor, C: Clock> PoolSolver<'a, E, C> {
    pub fn new(config: PoolConfig, exec: &'a E, clock: &'a C) -> Self {
        Self { config, pace: RoundPace::default(), explore: false, silent: Vec::new(), exec, clock, last: None }
    }

    pub fn with_pace(mut self, pace: RoundPace) -> Self {
        self.pace = pace;
        self
    }
}

impl<E: Executor, C: Clock> Solver for PoolSolver<'_, E, C> {
    fn solve(&mut self, g: &Graph, attempt: u32, deadline_ms: u64) -> Option<DominatingSet> {
        let run = |h: &Graph| {
            let silent = &self.silent;
            let responds = |_, w: u32| !silent.contains(&w);
            run_pool_solve_paced(h, &self.config, self.exec, self.clock, deadline_ms, responds, self.pace).ok()
        };
        let solved = if attempt == 0 {
            run(g)?
        } else {
            let seed = (u64::from(self.config.pool_id) << 32) | u64::from(attempt);
            let perm = VertexPermutation::random(g.n(), &mut ChaCha8Rng::seed_from_u64(seed));
            let mut solved = run(&perm.relabel(g))?;
            let back = perm.inverse().map_set(solved.set.vertices());
            solved.set = DominatingSet::new(back, g.n()).ok()?;
            solved
        };
        let out = solved.set.clone();
        self.last = Some(solved);
        Some(out)
    }

    fn deterministic(&self) -> bool {
        !self.explore
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ManualClock;
    use crate::exec::Sequential;
    use crate::graph::{cycle, generate_ba, star};
    use crate::mds::{greedy_distributed, is_dominating};
    use alloc::vec;
    use proptest::prelude::*;

    fn ledger(rows: &[(u64, u32, u32)]) -> ContributionLedger {
        let rounds = rows.first().map(|r| r.1 + r.2).unwrap_or(0);
        ContributionLedger {
            rounds,
            miners: rows
                .iter()
                .map(|&(assigned, reported, missed)| MinerRecord { assigned, reported, missed, admitted: 0 })
                .collect(),
        }
    }

    #[test]
    fn partitions() {
        let g = crate::graph::path(10);
        let p = partition_vertices(&g, 1, PartitionStrategy::Contiguous);
        assert_eq!(p.vertices_of(0).len(), 10);
        let p = partition_vertices(&g, 2, PartitionStrategy::Contiguous);
        assert_eq!(p.vertices_of(0), &[0, 1, 2, 3, 4]);
        assert_eq!(p.vertices_of(1), &[5, 6, 7, 8, 9]);
    }

    #[test]
    fn single_miner_star() {
        let clock = ManualClock::new(0);
        let cfg = PoolConfig::new(0, 1, PartitionStrategy::Contiguous);
        let out = run_pool_solve(&star(5), &cfg, &Sequential, &clock, 1000).unwrap();
        assert_eq!(out.set.vertices(), &[0]);
        assert_eq!(out.ledger.miners[0].reported, out.rounds);
        assert_eq!(out.ledger.miners[0].missed, 0);
    }

    #[test]
    fn four_miners_on_cycle6() {
        let clock = ManualClock::new(0);
        let cfg = PoolConfig::new(0, 4, PartitionStrategy::Contiguous);
        let out = run_pool_solve(&cycle(6), &cfg, &Sequential, &clock, 1000).unwrap();
        assert_eq!(out.set.vertices(), &[0, 3]);
        let assigned: u64 = out.ledger.miners.iter().map(|m| m.assigned).sum();
        assert_eq!(assigned, 6);
    }

    #[test]
    fn silent_miner_is_the_only_one_missing() {
        let g = generate_ba(400, 3, 6).unwrap();
        let clock = ManualClock::new(0);
        let cfg = PoolConfig::new(0, 4, PartitionStrategy::Contiguous);
        let out = run_pool_solve_with(&g, &cfg, &Sequential, &clock, 1, |_, m| m != 1).unwrap();
        for (i, rec) in out.ledger.miners.iter().enumerate() {
            assert_eq!(rec.reported + rec.missed, out.rounds);
            assert_eq!(rec.missed, if i == 1 { out.rounds } else { 0 });
        }
        assert_eq!(detect_free_riders(&out.ledger, DEFAULT_FREE_RIDER_THRESHOLD), vec![1]);
        let pay = distribute_reward(1000, &out.ledger, &[1]);
        assert_eq!(pay.miners[1], 0);
        assert_eq!(pay.total(), 1000);
    }

    #[test]
    fn deadline_returns_padded_best_effort() {
        let g = generate_ba(2000, 2, 3).unwrap();
        let clock = ManualClock::new(5);
        let cfg = PoolConfig::new(0, 2, PartitionStrategy::Contiguous);
        let out = run_pool_solve(&g, &cfg, &Sequential, &clock, 5).unwrap();
        assert!(!out.completed);
        assert_eq!(out.rounds, 0);
        assert_eq!(out.set.len(), 2000);
    }

    #[test]
    fn free_rider_thresholds() {
        assert!(detect_free_riders(&ledger(&[(5, 20, 0), (5, 20, 0)]), 0.1).is_empty());
        assert_eq!(detect_free_riders(&ledger(&[(5, 20, 0), (5, 0, 20)]), 0.1), vec![1]);
        assert!(detect_free_riders(&ledger(&[(5, 20, 0), (5, 19, 1)]), 0.1).is_empty());
    }

    #[test]
    fn reward_examples() {
        let pay = distribute_reward(100, &ledger(&[(5, 10, 0), (5, 10, 0)]), &[]);
        assert_eq!((pay.miners.clone(), pay.manager), (vec![50, 50], 0));
        let pay = distribute_reward(100, &ledger(&[(5, 10, 0), (5, 10, 0)]), &[1]);
        assert_eq!(pay.miners, vec![100, 0]);
        let pay = distribute_reward(100, &ledger(&[(50, 4, 0), (30, 4, 0), (20, 4, 0)]), &[]);
        assert_eq!(pay.miners, vec![50, 30, 20]);
        let pay = distribute_reward(100, &ledger(&[(1, 3, 0), (1, 3, 0), (1, 3, 0)]), &[]);
        assert_eq!((pay.miners.clone(), pay.manager), (vec![33, 33, 33], 1));
        let pay = distribute_reward(70, &ledger(&[(5, 10, 0)]), &[0]);
        assert!(pay.escrowed);
        assert_eq!(pay.manager, 70);
    }

    #[test]
    fn repartition_after_flagging_still_dominates() {
        let g = generate_ba(300, 2, 9).unwrap();
        let cfg = PoolConfig::new(3, 5, PartitionStrategy::DegreeBalanced).without(&[0, 2]);
        assert_eq!(cfg.miners.len(), 3);
        let p = partition_vertices(&g, cfg.miners.len(), cfg.strategy);
        let run = greedy_distributed(&g, &p, &Sequential).unwrap();
        assert!(is_dominating(&g, &run.set).unwrap().dominating);
    }

    proptest! {
        #[test]
        fn payouts_conserve(reward in 0u64..1_000_000_000, rows in prop::collection::vec((0u64..1000, 0u32..50, 0u32..50), 1..8), flag_mask: u8) {
            let l = ContributionLedger {
                rounds: 100,
                miners: rows.iter().map(|&(a, r, m)| MinerRecord { assigned: a, reported: r, missed: m, admitted: 0 }).collect(),
            };
            let flagged: Vec<u32> = (0..rows.len() as u32).filter(|i| flag_mask & (1 << i) != 0).collect();
            let pay = distribute_reward(reward, &l, &flagged);
            prop_assert_eq!(pay.total(), reward);
            for (i, rec) in l.miners.iter().enumerate() {
                if rec.reported == 0 || flagged.contains(&(i as u32)) {
                    prop_assert_eq!(pay.miners[i], 0);
                }
            }
        }
    }

    #[test]
    fn paced_run_stops_before_the_deadline() {
        let g = generate_ba(300, 3, 4).unwrap();
        let cfg = PoolConfig::new(0, 4, PartitionStrategy::Contiguous);
        let pace = RoundPace { round_ms: 10, setup_ns_per_item: 0 };
        let full = run_pool_solve(&g, &cfg, &Sequential, &ManualClock::new(0), u64::MAX).unwrap();
        assert!(full.rounds > 3);
        let clock = ManualClock::new(0);
        let cut = run_pool_solve_paced(&g, &cfg, &Sequential, &clock, 35, |_, _| true, pace).unwrap();
        assert_eq!(cut.rounds, 3);
        assert_eq!(clock.now_ms(), 30);
        assert!(!cut.completed);
        assert!(is_dominating(&g, &cut.set).unwrap().dominating);
    }

    #[test]
    fn setup_cost_is_split_across_miners() {
        let g = star(999);
        let pace = RoundPace { round_ms: 0, setup_ns_per_item: 1_000_000 };
        // 1000 vertices plus 2 * 999 endpoints.
        assert_eq!(pace.setup_ms(&g, 1), 2998);
        assert_eq!(pace.setup_ms(&g, 4), 750);
    }

    #[test]
    fn pool_solver_relabels_on_later_attempts() {
        let g = generate_ba(200, 3, 9).unwrap();
        let clock = ManualClock::new(0);
        let mut solver = PoolSolver::new(PoolConfig::new(3, 2, PartitionStrategy::Contiguous), &Sequential, &clock);
        assert!(solver.deterministic());
        let first = solver.solve(&g, 0, u64::MAX).unwrap();
        let direct = greedy_distributed(&g, &partition_vertices(&g, 2, PartitionStrategy::Contiguous), &Sequential).unwrap();
        assert_eq!(first, direct.set);
        for attempt in 1..4 {
            let s = solver.solve(&g, attempt, u64::MAX).unwrap();
            assert!(is_dominating(&g, &s).unwrap().dominating);
            assert_eq!(solver.last.as_ref().unwrap().set, s);
        }
    }
}
