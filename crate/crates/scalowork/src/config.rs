//! TOML configuration shared by `simulate` (scenario fields) and
//! `mine` (the `[epoch]` table). Every field is optional; omitted ones keep
//! the library defaults.
//!
//! ```toml
//! scenario = "selfish-mining"
//! seeds = [1, 2, 3]
//! pools = 4
//! epochs = 50
//! lambda = [0.25, 0.45]
//!
//! [graph]
//! model = "ba"
//! n = 200
//! degree = 10
//! ```

use std::path::Path;

use scalowork_core::committee::HardnessPolicy;
use scalowork_core::crypto::Digest;
use scalowork_core::pool::RoundPace;
use scalowork_core::protocol::EpochParams;
use scalowork_core::sim::{GraphModel, SimConfig, SimError, TheftConfig};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn invalid(what: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(what.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Honest,
    FreeRider,
    SelfishMining,
    ReplayAttack,
    SolutionTheft,
    StorageAccounting,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Honest,
        Scenario::FreeRider,
        Scenario::SelfishMining,
        Scenario::ReplayAttack,
        Scenario::SolutionTheft,
        Scenario::StorageAccounting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Honest => "honest",
            Scenario::FreeRider => "free-rider",
            Scenario::SelfishMining => "selfish-mining",
            Scenario::ReplayAttack => "replay-attack",
            Scenario::SolutionTheft => "solution-theft",
            Scenario::StorageAccounting => "storage-accounting",
        }
    }

    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        Self::ALL.into_iter().find(|s| s.name() == name).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|s| s.name()).collect();
            invalid(format!("unknown scenario {name:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    /// `ba`, `er` or `star`.
    pub model: String,
    pub n: usize,
    /// Target average degree; BA attaches `degree / 2` edges per vertex and
    /// ER uses `p = degree / (n - 1)`.
    pub degree: Option<f64>,
    pub attach: Option<usize>,
    pub p: Option<f64>,
}

impl GraphSection {
    pub fn model(&self) -> Result<GraphModel, ConfigError> {
        graph_model(&self.model, self.n, self.degree, self.attach, self.p)
    }
}

/// Resolves model name and size parameters into a generator.
pub fn graph_model(
    model: &str,
    n: usize,
    degree: Option<f64>,
    attach: Option<usize>,
    p: Option<f64>,
) -> Result<GraphModel, ConfigError> {
    match model {
        "ba" => {
            let attach = match (attach, degree) {
                (Some(a), _) => a,
                (None, Some(d)) if d >= 1.0 => ((d / 2.0).round() as usize).max(1),
                _ => return Err(invalid("ba needs attach or a degree of at least 1")),
            };
            Ok(GraphModel::Ba { n, attach })
        }
        "er" => {
            let p = match (p, degree) {
                (Some(p), _) => p,
                (None, Some(d)) if n >= 2 => (d / (n - 1) as f64).min(1.0),
                _ => return Err(invalid("er needs p or a degree")),
            };
            Ok(GraphModel::Er { n, p })
        }
        "star" => Ok(GraphModel::Star { leaves: n.saturating_sub(1) }),
        other => Err(invalid(format!("unknown graph model {other:?}; expected ba, er or star"))),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardnessSection {
    pub min_n: Option<u64>,
    pub max_n: Option<u64>,
    pub min_avg_degree: Option<f64>,
    pub max_avg_degree: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheftSection {
    pub n: Option<usize>,
    pub z: Option<u64>,
    pub checks_per_ms: Option<u64>,
    pub deadline_ms: Option<u64>,
    pub miners: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochSection {
    pub committee_size: Option<usize>,
    pub z: Option<u64>,
    pub reward: Option<u64>,
    pub t_max_ms: Option<u64>,
    pub start_ms: Option<u64>,
    pub puzzle_fee: Option<u64>,
    pub instance_addr: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub seeds: Option<Vec<u64>>,
    pub pools: Option<usize>,
    pub miners_per_pool: Option<usize>,
    pub free_riders: Option<usize>,
    pub epochs: Option<u32>,
    pub z: Option<u64>,
    pub eta_ms: Option<u64>,
    pub f: Option<u64>,
    pub w: Option<usize>,
    pub c_m: Option<usize>,
    pub utilities: Option<usize>,
    pub reward: Option<u64>,
    pub puzzle_fee: Option<u64>,
    pub transactions: Option<usize>,
    pub round_ms: Option<u64>,
    pub setup_ns_per_item: Option<u64>,
    pub verify_ns_per_item: Option<u64>,
    pub multiplier: Option<f64>,
    /// Adversary share of solver time.
    pub lambda: Option<OneOrMany<f64>>,
    /// Fee a replay targets.
    pub fee: Option<OneOrMany<u64>>,
    /// Reward forfeited when a replay fails.
    pub rd: Option<OneOrMany<u64>>,
    pub graph: Option<GraphSection>,
    pub hardness: Option<HardnessSection>,
    pub theft: Option<TheftSection>,
    pub epoch: Option<EpochSection>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn scenario(&self) -> Result<Option<Scenario>, ConfigError> {
        self.scenario.as_deref().map(Scenario::parse).transpose()
    }

    /// Configured seeds, or `fallback` alone.
    pub fn seeds_or(&self, fallback: u64) -> Vec<u64> {
        match &self.seeds {
            Some(s) if !s.is_empty() => s.clone(),
            _ => vec![fallback],
        }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda.as_ref().map_or_else(|| vec![0.25], OneOrMany::to_vec)
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let d = SimConfig::default();
        let hardness = match &self.hardness {
            None => d.hardness,
            Some(h) => HardnessPolicy::new(
                h.min_n.unwrap_or(d.hardness.min_n),
                h.max_n.unwrap_or(d.hardness.max_n),
                h.min_avg_degree.unwrap_or(d.hardness.min_avg_degree),
                h.max_avg_degree.unwrap_or(d.hardness.max_avg_degree),
            )
            .map_err(SimError::from)?,
        };
        let cfg = SimConfig {
            pools: self.pools.unwrap_or(d.pools),
            miners_per_pool: self.miners_per_pool.unwrap_or(d.miners_per_pool),
            free_riders: self.free_riders.unwrap_or(d.free_riders),
            epochs: self.epochs.unwrap_or(d.epochs),
            z: self.z.unwrap_or(d.z),
            graph: self.graph.as_ref().map(GraphSection::model).transpose()?.unwrap_or(d.graph),
            eta_ms: self.eta_ms.unwrap_or(d.eta_ms),
            f: self.f.unwrap_or(d.f),
            w: self.w.unwrap_or(d.w),
            c_m: self.c_m.unwrap_or(d.c_m),
            utilities: self.utilities.unwrap_or(d.utilities),
            reward: self.reward.unwrap_or(d.reward),
            puzzle_fee: self.puzzle_fee.unwrap_or(d.puzzle_fee),
            transactions: self.transactions.unwrap_or(d.transactions),
            pace: RoundPace {
                round_ms: self.round_ms.unwrap_or(d.pace.round_ms),
                setup_ns_per_item: self.setup_ns_per_item.unwrap_or(d.pace.setup_ns_per_item),
            },
            verify_ns_per_item: self.verify_ns_per_item.unwrap_or(d.verify_ns_per_item),
            multiplier: self.multiplier.unwrap_or(d.multiplier),
            hardness,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn theft_config(&self) -> TheftConfig {
        let d = TheftConfig::default();
        let t = self.theft.clone().unwrap_or_default();
        TheftConfig {
            n: t.n.unwrap_or(d.n),
            z: t.z.or(self.z).unwrap_or(d.z),
            checks_per_ms: t.checks_per_ms.unwrap_or(d.checks_per_ms),
            deadline_ms: t.deadline_ms.or(d.deadline_ms),
            pace: RoundPace {
                round_ms: self.round_ms.unwrap_or(d.pace.round_ms),
                setup_ns_per_item: self.setup_ns_per_item.unwrap_or(d.pace.setup_ns_per_item),
            },
            miners: t.miners.or(self.miners_per_pool).unwrap_or(d.miners),
            multiplier: self.multiplier.unwrap_or(d.multiplier),
        }
    }

    /// Parameters for a local single epoch building on `(prev, prev_id)`.
    pub fn epoch_params(&self, prev: Digest, prev_id: u64) -> EpochParams {
        let d = EpochParams::default();
        let e = self.epoch.clone().unwrap_or_default();
        EpochParams {
            committee_size: e.committee_size.unwrap_or(d.committee_size),
            z: e.z.unwrap_or(d.z),
            reward: e.reward.unwrap_or(d.reward),
            t_max_ms: e.t_max_ms.unwrap_or(d.t_max_ms),
            start_ms: e.start_ms.unwrap_or(d.start_ms),
            prev_hash: prev,
            prev_instance_id: prev_id,
            instance_addr: e.instance_addr.unwrap_or(d.instance_addr),
        }
    }

    pub fn epoch_puzzle_fee(&self) -> u64 {
        self.epoch.as_ref().and_then(|e| e.puzzle_fee).unwrap_or(10)
    }
}
