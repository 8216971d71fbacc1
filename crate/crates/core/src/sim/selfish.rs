use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::honest::{committed_records, pairs_colliding, race, record_for, Candidate, RunMetrics};
use super::world::World;
use super::{config_err, SimConfig, SimError};
use crate::chain::work_done;
use crate::crypto::{Digest, KeyPair};
use crate::protocol::{select_instance_index, Block};

#[derive(Debug, Clone, PartialEq)]
pub struct SelfishOutcome {
    pub metrics: RunMetrics,
    /// Blocks the adversary found (all withheld at first).
    pub adversary_blocks: u32,
    /// Committed blocks mined by the adversary.
    pub adversary_wins: u32,
    pub releases: u32,
    /// Released blocks the honest verifier turned down.
    pub rejected_reveals: u32,
    pub max_private_lead: u32,
    /// Releases whose private chain was heavier and deeper than `f`; these
    /// would have reverted committed blocks had late blocks been admitted.
    pub heavier_deep_releases: u32,
    /// A committed block was reverted on the honest chain.
    pub overtake: bool,
}

struct Private {
    base: (Digest, u64),
    base_cumulative: f64,
    blocks: Vec<Block>,
    work: f64,
}

/// One adversary holding share `lambda` of solver time against
/// `cfg.pools` honest pools. The adversary mines on its private tip,
/// withholds, and releases the whole private chain just before the
/// deadline whenever its lead over the public chain has shrunk below one
/// honest block; a private chain that falls behind is abandoned.
pub fn run_selfish(seed: u64, cfg: &SimConfig, lambda: f64) -> Result<SelfishOutcome, SimError> {
    if !(0.0..0.5).contains(&lambda) {
        return Err(config_err("lambda must lie in [0, 0.5)"));
    }
    let adversary = KeyPair::from_seed(b"adversary");
    let adv_id = cfg.pools as u32;
    let mut world = World::new(cfg, seed, core::slice::from_ref(&adversary))?;
    let mut records = BTreeMap::new();
    let mut out = SelfishOutcome {
        metrics: RunMetrics {
            records: Vec::new(),
            epochs_run: 0,
            failed_epochs: 0,
            reversions: 0,
            max_reorg_depth: 0,
            chain_log: Default::default(),
        },
        adversary_blocks: 0,
        adversary_wins: 0,
        releases: 0,
        rejected_reveals: 0,
        max_private_lead: 0,
        heavier_deep_releases: 0,
        overtake: false,
    };
    let mut private: Option<Private> = None;
    let cap = 2 * (cfg.epochs + cfg.f as u32) + 8;
    let mut epoch = 0;
    while world.chain.committed_height() < u64::from(cfg.epochs) && epoch < cap {
        epoch += 1;
        let Some(ep) = world.open_epoch(epoch)? else {
            out.metrics.failed_epochs += 1;
            continue;
        };
        let prev = world.tip();
        let mut candidates = Vec::new();
        let mut indices = Vec::new();
        let mut within = 0;
        for p in 0..cfg.pools {
            let received = ep.start + world.net.delay(&mut world.rng);
            let sent = world.net.delay(&mut world.rng);
            let mined = world.mine(&ep, p as u32, &world.managers[p], prev, received, None);
            let Ok(block) = mined.block else { continue };
            indices.push(select_instance_index(&block.header.merkle_root, &prev.0, cfg.z));
            if mined.completed && mined.finished_at <= ep.deadline {
                within += 1;
            }
            candidates.push(Candidate {
                arrival: mined.finished_at + sent,
                pool: p as u32,
                block,
                generation_ms: mined.finished_at - mined.received_at,
                ledger: mined.ledger,
            });
        }

        let received = ep.start + world.net.delay(&mut world.rng);
        if lambda > 0.0 {
            let budget = (lambda * ep.descriptor.t_max_ms as f64) as u64;
            let parent = private
                .as_ref()
                .map_or(prev, |p| p.blocks.last().map_or(p.base, |b| (b.hash(), b.header.instance_id)));
            let mined = world.mine(&ep, adv_id, &adversary, parent, received, Some(received + budget));
            if let Ok(block) = mined.block {
                out.adversary_blocks += 1;
                let priv_chain = private.get_or_insert_with(|| Private {
                    base: prev,
                    base_cumulative: world.chain.tip().cumulative,
                    blocks: Vec::new(),
                    work: 0.0,
                });
                priv_chain.work += work_done(&block.header).unwrap_or(0.0);
                priv_chain.blocks.push(block);
            }
        }

        // Decide on release with the honest best of this epoch in view.
        let honest = race(&world, &ep, &mut candidates);
        let honest_wd = honest.winner.map_or(0.0, |w| work_done(&candidates[w].block.header).unwrap_or(0.0));
        let release_at = ep.deadline - 1;
        if let Some(p) = private.take() {
            let public_cum = world.chain.tip().cumulative + honest_wd;
            let private_cum = p.base_cumulative + p.work;
            let lead = private_cum - public_cum;
            if lead > 0.0 && lead < honest_wd.max(f64::MIN_POSITIVE) {
                out.releases += 1;
                let public_height = world.chain.height() + u64::from(honest.winner.is_some());
                let fork = world.chain.get(&p.base.0).map_or(0, |e| e.height);
                if public_height.saturating_sub(fork) > cfg.f {
                    out.heavier_deep_releases += 1;
                }
                for block in p.blocks {
                    candidates.push(Candidate {
                        arrival: release_at,
                        pool: adv_id,
                        block,
                        generation_ms: 0,
                        ledger: None,
                    });
                }
            } else if lead > 0.0 {
                out.max_private_lead = out.max_private_lead.max(p.blocks.len() as u32);
                private = Some(p);
            }
        }
        let outcome = if candidates.iter().any(|c| c.pool == adv_id) {
            let o = race(&world, &ep, &mut candidates);
            out.rejected_reveals += candidates
                .iter()
                .zip(&o.results)
                .filter(|(c, r)| c.pool == adv_id && r.is_err())
                .count() as u32;
            o
        } else {
            honest
        };
        world.now = ep.deadline;
        let Some(w) = outcome.winner else {
            out.metrics.failed_epochs += 1;
            continue;
        };
        let (_, depth) = world.commit(&candidates[w].block);
        let mut rec = record_for(&world, &ep, &candidates[w], outcome.forks, depth);
        rec.index_collisions = pairs_colliding(&indices);
        rec.pools_within_tmax = within;
        records.insert(rec.digest, rec);
    }
    let stats = world.chain.stats();
    let committed = committed_records(&world, records, cfg.epochs);
    out.adversary_wins = committed.iter().filter(|r| r.winner == adv_id).count() as u32;
    out.overtake = stats.reverted_committed > 0;
    out.metrics = RunMetrics {
        records: committed,
        epochs_run: epoch,
        failed_epochs: out.metrics.failed_epochs,
        reversions: stats.reverted_committed,
        max_reorg_depth: stats.max_depth,
        chain_log: world.chain.render_log_through(world.chain.committed_height().min(u64::from(cfg.epochs))),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::GraphModel;

    fn cfg(epochs: u32) -> SimConfig {
        SimConfig { pools: 2, miners_per_pool: 2, epochs, z: 4, graph: GraphModel::Ba { n: 60, attach: 3 }, ..Default::default() }
    }

    #[test]
    fn zero_share_never_mines() {
        let o = run_selfish(2, &cfg(8), 0.0).unwrap();
        assert_eq!(o.adversary_blocks, 0);
        assert_eq!(o.adversary_wins, 0);
        assert_eq!(o.metrics.records.len(), 8);
    }

    #[test]
    fn strong_adversary_never_reverts_committed_blocks() {
        for seed in 0..3 {
            let o = run_selfish(seed, &cfg(40), 0.45).unwrap();
            assert!(o.adversary_blocks > 0);
            assert_eq!(o.metrics.reversions, 0);
            assert!(!o.overtake);
            assert_eq!(o.metrics.records.len(), 40);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(run_selfish(9, &cfg(6), 0.25).unwrap(), run_selfish(9, &cfg(6), 0.25).unwrap());
    }

    #[test]
    fn rejects_majority_share() {
        assert!(run_selfish(0, &cfg(1), 0.5).is_err());
    }
}
