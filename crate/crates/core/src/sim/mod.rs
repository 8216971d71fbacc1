//! Deterministic epoch-level simulation of pools, committee and utility
//! companies, plus the closed-form attack and storage models.

mod honest;
mod selfish;
mod theft;
mod world;

use alloc::string::String;

use num_rational::Ratio;
use thiserror::Error;

use crate::committee::{CommitteeError, HardnessPolicy};
use crate::graph::{generate_ba, generate_er, star, Graph, GraphError, GraphProperties};
use crate::pool::RoundPace;
use crate::scheduler::ScheduleError;

pub use honest::{run_honest, EpochRecord, RunMetrics};
pub use selfish::{run_selfish, SelfishOutcome};
pub use theft::{degree_ambiguity_log10, next_permutation, run_solution_theft, TheftConfig, TheftOutcome, THEFT_MAX_N};
pub use world::NetworkModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Committee(#[from] CommitteeError),
}

fn config_err(what: &str) -> SimError {
    SimError::Config(String::from(what))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphModel {
    Ba { n: usize, attach: usize },
    Er { n: usize, p: f64 },
    Star { leaves: usize },
}

impl GraphModel {
    pub fn n(&self) -> usize {
        match *self {
            GraphModel::Ba { n, .. } | GraphModel::Er { n, .. } => n,
            GraphModel::Star { leaves } => leaves + 1,
        }
    }

    /// Same family at a different size.
    pub fn with_n(&self, n: usize) -> Self {
        match *self {
            GraphModel::Ba { attach, .. } => GraphModel::Ba { n, attach },
            GraphModel::Er { p, .. } => GraphModel::Er { n, p },
            GraphModel::Star { .. } => GraphModel::Star { leaves: n.saturating_sub(1) },
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Graph, GraphError> {
        match *self {
            GraphModel::Ba { n, attach } => generate_ba(n, attach, seed),
            GraphModel::Er { n, p } => generate_er(n, p, seed),
            GraphModel::Star { leaves } => Ok(star(leaves)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdversaryMode {
    #[default]
    None,
    SelfishMining,
    ReplayAttack,
    SolutionTheft,
    FreeRider,
}

impl AdversaryMode {
    pub const ALL: [AdversaryMode; 5] = [
        AdversaryMode::None,
        AdversaryMode::SelfishMining,
        AdversaryMode::ReplayAttack,
        AdversaryMode::SolutionTheft,
        AdversaryMode::FreeRider,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AdversaryMode::None => "none",
            AdversaryMode::SelfishMining => "selfish-mining",
            AdversaryMode::ReplayAttack => "replay-attack",
            AdversaryMode::SolutionTheft => "solution-theft",
            AdversaryMode::FreeRider => "free-rider",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdversaryConfig {
    pub mode: AdversaryMode,
    /// Share of total solver time held by the adversary.
    pub lambda: f64,
    /// Transaction fee targeted by a replay.
    pub fee: u64,
}

impl AdversaryConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(config_err("lambda must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub pools: usize,
    pub miners_per_pool: usize,
    /// Leading miners of every pool that never answer.
    pub free_riders: usize,
    pub epochs: u32,
    pub z: u64,
    pub graph: GraphModel,
    pub eta_ms: u64,
    pub f: u64,
    pub w: usize,
    pub c_m: usize,
    pub utilities: usize,
    pub reward: u64,
    pub puzzle_fee: u64,
    pub transactions: usize,
    pub pace: RoundPace,
    pub verify_ns_per_item: u64,
    pub multiplier: f64,
    pub hardness: HardnessPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            pools: 4,
            miners_per_pool: 4,
            free_riders: 0,
            epochs: 20,
            z: 16,
            graph: GraphModel::Ba { n: 200, attach: 5 },
            eta_ms: 50,
            f: crate::chain::DEFAULT_CONFIRMATION_DEPTH,
            w: 6,
            c_m: 4,
            utilities: 3,
            reward: 1000,
            puzzle_fee: 10,
            transactions: 4,
            pace: RoundPace { round_ms: 20, setup_ns_per_item: 2_000 },
            verify_ns_per_item: 500,
            multiplier: crate::scheduler::DEFAULT_MULTIPLIER,
            hardness: HardnessPolicy::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.pools == 0 {
            return Err(config_err("at least one pool"));
        }
        if self.epochs == 0 {
            return Err(config_err("at least one epoch"));
        }
        if self.miners_per_pool == 0 || self.free_riders >= self.miners_per_pool {
            return Err(config_err("every pool needs an answering miner"));
        }
        if self.z == 0 {
            return Err(config_err("z must be positive"));
        }
        if self.c_m == 0 || self.utilities == 0 {
            return Err(config_err("committee and utility registry must be non-empty"));
        }
        if self.multiplier.is_nan() || self.multiplier <= 1.0 {
            return Err(ScheduleError::Multiplier(self.multiplier).into());
        }
        if self.graph.n() < 2 {
            return Err(config_err("graphs need at least two vertices"));
        }
        self.graph.with_n(self.graph.n()).generate(0)?;
        Ok(())
    }
}

/// Expected payoff of replaying a block for fee `fee` against the reward
/// `rd` lost with probability `1 - lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayPayoff {
    pub payoff: f64,
    pub profitable: bool,
}

/// `lambda` is read as the nearest simple fraction p/q, so decimal inputs
/// sit exactly on their boundary and the flag always agrees with the sign
/// of the payoff.
pub fn replay_payoff(lambda: f64, fee: u64, rd: u64) -> Result<ReplayPayoff, SimError> {
    if !(0.0..=0.5).contains(&lambda) {
        return Err(config_err("lambda must lie in [0, 0.5]"));
    }
    let ratio = Ratio::<i64>::approximate_float(lambda).ok_or_else(|| config_err("lambda is not representable"))?;
    let (p, q) = (i128::from(*ratio.numer()), i128::from(*ratio.denom()));
    // q * payoff = p F - (q - p) rd
    let scaled = p * i128::from(fee) - (q - p) * i128::from(rd);
    Ok(ReplayPayoff { payoff: scaled as f64 / q as f64, profitable: p > 0 && scaled > 0 })
}

/// Edge copies stored network-wide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageReport {
    pub scalowork: f64,
    pub chrisimos: f64,
    pub difference: f64,
}

pub fn storage_for(pools: u64, n: u64, m: u64, delta: u32) -> StorageReport {
    let (k, n, m, d) = (pools as f64, n as f64, m as f64, f64::from(delta));
    let scalowork = 2.0 * k * m;
    let chrisimos = k * (2.0 * m + d * (n - 1.0) / 2.0) + m;
    StorageReport { scalowork, chrisimos, difference: chrisimos - scalowork }
}

pub fn storage_accounting(pools: u64, props: &GraphProperties) -> Result<StorageReport, SimError> {
    if pools == 0 {
        return Err(config_err("at least one pool"));
    }
    Ok(storage_for(pools, props.n, props.m, props.delta_min))
}
