use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::world::World;
use super::{SimConfig, SimError};
use crate::crypto::Digest;
use crate::pool::{detect_free_riders, distribute_reward, ContributionLedger, DEFAULT_FREE_RIDER_THRESHOLD};
use crate::protocol::{select_instance_index, Block, EpochVerifier, RejectReason};

/// One committed block.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub height: u64,
    pub epoch: u32,
    pub instance_id: u64,
    pub digest: Digest,
    pub winner: u32,
    pub solution_size: usize,
    pub bound: f64,
    pub work_done: f64,
    pub t_max_ms: u64,
    pub generation_ms: u64,
    pub verification_ms: u64,
    pub forks_observed: u32,
    pub reorg_depth: u64,
    pub payout_manager: u64,
    pub payout_miners: u64,
    pub flagged_miners: u32,
    /// Pool pairs that drew the same instance index.
    pub index_collisions: u32,
    pub pools_within_tmax: u32,
    pub pools: u32,
}

impl EpochRecord {
    pub const FIELDS: [&'static str; 19] = [
        "height",
        "epoch",
        "instance_id",
        "digest",
        "winner",
        "solution_size",
        "bound",
        "work_done",
        "t_max_ms",
        "generation_ms",
        "verification_ms",
        "forks_observed",
        "reorg_depth",
        "payout_manager",
        "payout_miners",
        "flagged_miners",
        "index_collisions",
        "pools_within_tmax",
        "pools",
    ];

    pub fn values(&self) -> Vec<String> {
        Vec::from([
            self.height.to_string(),
            self.epoch.to_string(),
            self.instance_id.to_string(),
            self.digest.to_hex(),
            self.winner.to_string(),
            self.solution_size.to_string(),
            alloc::format!("{:.6}", self.bound),
            alloc::format!("{:.6}", self.work_done),
            self.t_max_ms.to_string(),
            self.generation_ms.to_string(),
            self.verification_ms.to_string(),
            self.forks_observed.to_string(),
            self.reorg_depth.to_string(),
            self.payout_manager.to_string(),
            self.payout_miners.to_string(),
            self.flagged_miners.to_string(),
            self.index_collisions.to_string(),
            self.pools_within_tmax.to_string(),
            self.pools.to_string(),
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub records: Vec<EpochRecord>,
    pub epochs_run: u32,
    pub failed_epochs: u32,
    pub reversions: u64,
    pub max_reorg_depth: u64,
    /// The reported prefix of the adopted chain, genesis first.
    pub chain_log: String,
}

impl RunMetrics {
    pub fn collisions(&self) -> u64 {
        self.records.iter().map(|r| u64::from(r.index_collisions)).sum()
    }

    /// Pool pairs per epoch over `z`, summed over the records.
    pub fn expected_collisions(&self, z: u64) -> f64 {
        self.records.iter().map(|r| f64::from(r.pools) * f64::from(r.pools.saturating_sub(1)) / 2.0 / z as f64).sum()
    }
}

pub(super) struct Candidate {
    pub arrival: u64,
    pub pool: u32,
    pub block: Block,
    pub generation_ms: u64,
    pub ledger: Option<ContributionLedger>,
}

pub(super) struct EpochOutcome {
    pub winner: Option<usize>,
    pub forks: u32,
    /// Per candidate, in sorted order.
    pub results: Vec<Result<(), RejectReason>>,
}

/// Feeds candidates to a verifier in arrival order; the last accepted one
/// is the best.
pub(super) fn race(world: &World, ep: &super::world::OpenEpoch, candidates: &mut [Candidate]) -> EpochOutcome {
    candidates.sort_by_key(|c| (c.arrival, c.pool));
    let ctx = world.verify_context(ep);
    let mut verifier = EpochVerifier::new();
    let mut winner = None;
    let mut forks = 0;
    let mut results = Vec::with_capacity(candidates.len());
    for (i, c) in candidates.iter().enumerate() {
        let r = verifier.verify(&c.block, &ctx, c.arrival);
        match r {
            Ok(()) => {
                if winner.is_some() {
                    forks += 1;
                }
                winner = Some(i);
            }
            Err(RejectReason::NotImproving) => forks += 1,
            Err(_) => {}
        }
        results.push(r);
    }
    EpochOutcome { winner, forks, results }
}

pub(super) fn pairs_colliding(indices: &[u64]) -> u32 {
    let mut count = 0;
    for (i, a) in indices.iter().enumerate() {
        count += indices[i + 1..].iter().filter(|b| *b == a).count() as u32;
    }
    count
}

pub(super) fn record_for(
    world: &World,
    ep: &super::world::OpenEpoch,
    c: &Candidate,
    forks: u32,
    reorg_depth: u64,
) -> EpochRecord {
    let (payout_manager, payout_miners, flagged) = match &c.ledger {
        Some(ledger) => {
            let flagged = detect_free_riders(ledger, DEFAULT_FREE_RIDER_THRESHOLD);
            let p = distribute_reward(world.cfg.reward, ledger, &flagged);
            (p.manager, p.miners.iter().sum(), flagged.len() as u32)
        }
        None => (world.cfg.reward, 0, 0),
    };
    let entry = world.chain.get(&c.block.hash()).expect("committed");
    EpochRecord {
        height: entry.height,
        epoch: ep.number,
        instance_id: ep.approval.instance_id,
        digest: entry.digest,
        winner: c.pool,
        solution_size: entry.solution_size,
        bound: ep.descriptor.bound().k,
        work_done: entry.work_done,
        t_max_ms: ep.descriptor.t_max_ms,
        generation_ms: c.generation_ms,
        verification_ms: ep.verify_ms,
        forks_observed: forks,
        reorg_depth,
        payout_manager,
        payout_miners,
        flagged_miners: flagged,
        index_collisions: 0,
        pools_within_tmax: 0,
        pools: world.cfg.pools as u32,
    }
}

/// Keeps only the records of committed blocks, in chain order.
pub(super) fn committed_records(world: &World, mut by_digest: BTreeMap<Digest, EpochRecord>, limit: u32) -> Vec<EpochRecord> {
    let committed = world.chain.committed_height().min(u64::from(limit));
    world
        .chain
        .adopted()
        .iter()
        .filter(|e| e.height >= 1 && e.height <= committed)
        .filter_map(|e| by_digest.remove(&e.digest))
        .collect()
}

/// All pools honest. Runs until `epochs` blocks are buried `f` deep, so
/// every reported block is committed.
pub fn run_honest(seed: u64, cfg: &SimConfig) -> Result<RunMetrics, SimError> {
    let mut world = World::new(cfg, seed, &[])?;
    let mut records = BTreeMap::new();
    let mut failed = 0;
    let cap = 2 * (cfg.epochs + cfg.f as u32) + 8;
    let mut epoch = 0;
    while world.chain.committed_height() < u64::from(cfg.epochs) && epoch < cap {
        epoch += 1;
        let Some(ep) = world.open_epoch(epoch)? else {
            failed += 1;
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
        let outcome = race(&world, &ep, &mut candidates);
        world.now = ep.deadline;
        let Some(w) = outcome.winner else {
            failed += 1;
            continue;
        };
        let (_, depth) = world.commit(&candidates[w].block);
        let mut rec = record_for(&world, &ep, &candidates[w], outcome.forks, depth);
        rec.index_collisions = pairs_colliding(&indices);
        rec.pools_within_tmax = within;
        records.insert(rec.digest, rec);
    }
    let stats = world.chain.stats();
    Ok(RunMetrics {
        records: committed_records(&world, records, cfg.epochs),
        epochs_run: epoch,
        failed_epochs: failed,
        reversions: stats.reverted_committed,
        max_reorg_depth: stats.max_depth,
        chain_log: world.chain.render_log_through(world.chain.committed_height().min(u64::from(cfg.epochs))),
    })
}
