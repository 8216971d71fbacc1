//! Runs a configured scenario over its seeds and renders the results.

use scalowork_core::sim::{replay_payoff, run_honest, run_selfish, run_solution_theft, storage_accounting};

use crate::config::{ConfigError, ConfigFile, OneOrMany, Scenario};
use crate::report::{f6, metrics_csv, selfish_csv, storage_csv, theft_csv, to_csv};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioOutput {
    pub csv: String,
    /// Per seed, for scenarios that build a chain.
    pub chain_logs: Vec<(u64, String)>,
}

impl ScenarioOutput {
    /// Chain logs of all seeds; with several seeds each is introduced by a
    /// `# seed` comment, which the log parser skips.
    pub fn joined_chain_logs(&self) -> String {
        if self.chain_logs.len() == 1 {
            return self.chain_logs[0].1.clone();
        }
        self.chain_logs.iter().map(|(seed, log)| format!("# seed {seed}\n{log}")).collect()
    }
}

pub fn run_scenario(scenario: Scenario, cfg: &ConfigFile, seeds: &[u64]) -> Result<ScenarioOutput, ConfigError> {
    let mut chain_logs = Vec::new();
    let csv = match scenario {
        Scenario::Honest | Scenario::FreeRider => {
            let mut sim = cfg.sim_config()?;
            if scenario == Scenario::FreeRider && cfg.free_riders.is_none() {
                sim.free_riders = 1;
                sim.validate()?;
            }
            let mut runs = Vec::new();
            for &seed in seeds {
                let m = run_honest(seed, &sim)?;
                chain_logs.push((seed, m.chain_log.clone()));
                runs.push((seed, m));
            }
            metrics_csv(runs.iter().map(|(s, m)| (*s, m)))
        }
        Scenario::SelfishMining => {
            let sim = cfg.sim_config()?;
            let mut runs = Vec::new();
            for lambda in cfg.lambdas() {
                for &seed in seeds {
                    let o = run_selfish(seed, &sim, lambda)?;
                    chain_logs.push((seed, o.metrics.chain_log.clone()));
                    runs.push((seed, lambda, o));
                }
            }
            selfish_csv(runs.iter().map(|(s, l, o)| (*s, *l, o)))
        }
        Scenario::ReplayAttack => {
            let fees = cfg.fee.as_ref().map_or_else(|| vec![300], OneOrMany::to_vec);
            let rds = cfg.rd.as_ref().map_or_else(|| vec![100], OneOrMany::to_vec);
            let mut rows = Vec::new();
            for lambda in cfg.lambdas() {
                for &rd in &rds {
                    for &fee in &fees {
                        let r = replay_payoff(lambda, fee, rd)?;
                        rows.push(vec![f6(lambda), fee.to_string(), rd.to_string(), f6(r.payoff), r.profitable.to_string()]);
                    }
                }
            }
            to_csv(&["lambda", "fee", "rd", "payoff", "profitable"], rows)
        }
        Scenario::SolutionTheft => {
            let theft = cfg.theft_config();
            let runs = seeds
                .iter()
                .map(|&s| run_solution_theft(s, &theft).map(|o| (s, o)))
                .collect::<Result<Vec<_>, _>>()?;
            theft_csv(runs.iter().map(|(s, o)| (*s, o)))
        }
        Scenario::StorageAccounting => {
            let sim = cfg.sim_config()?;
            let props = sim.graph.generate(seeds.first().copied().unwrap_or(0)).map_err(Into::<scalowork_core::sim::SimError>::into)?.properties();
            let pools = sim.pools as u64;
            let r = storage_accounting(pools, &props)?;
            storage_csv(pools, props.n, props.m, props.delta_min, &r)
        }
    };
    Ok(ScenarioOutput { csv, chain_logs })
}
