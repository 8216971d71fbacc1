//! State shared by the scenarios: participants, chain, committee rotation,
//! utility selection and the per-epoch pipeline up to block generation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SimConfig, SimError};
use crate::chain::{BlockSummary, ChainState, Insertion};
use crate::clock::{Clock, ManualClock};
use crate::committee::{approve, check_hardness, derive_committee, select_utility, IdIssuer, UtilityEntry};
use crate::committee::Approval;
use crate::crypto::{CachedVerifier, Digest, KeyPair, PublicKey, Signature};
use crate::exec::Sequential;
use crate::graph::Graph;
use crate::pool::{run_pool_solve_paced, ContributionLedger, PartitionStrategy, PoolConfig, PoolSolver};
use crate::protocol::{
    generate_block, publish_instances, Block, EpochInfo, GenerateError, GenerateOptions, MemoryStore, MinerContext,
    ProblemDescriptor, RewardTransaction, Transaction, VerifyContext,
};
use crate::scheduler::{LookupRow, LookupTable};

/// Every message is delivered after a uniform delay in `[0, eta_ms]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkModel {
    pub eta_ms: u64,
}

impl NetworkModel {
    pub fn delay(&self, rng: &mut impl Rng) -> u64 {
        rng.random_range(0..=self.eta_ms)
    }
}

pub(super) struct OpenEpoch {
    pub number: u32,
    pub descriptor: ProblemDescriptor,
    pub sig_descriptor: Signature,
    pub approval: Approval,
    pub reward_tx: RewardTransaction,
    pub committee: Vec<PublicKey>,
    pub store: MemoryStore,
    pub mempool: Vec<Transaction>,
    pub start: u64,
    pub deadline: u64,
    pub verify_ms: u64,
}

impl OpenEpoch {
    pub fn miner_context<'a>(&'a self, manager: &'a PublicKey, prev: (Digest, u64), fee: u64) -> MinerContext<'a> {
        MinerContext {
            descriptor: &self.descriptor,
            sig_descriptor: &self.sig_descriptor,
            instance_id: self.approval.instance_id,
            committee: &self.committee,
            committee_signers: &self.approval.signers,
            sig_committee: &self.approval.signature,
            reward_tx: &self.reward_tx,
            prev_hash: prev.0,
            prev_instance_id: prev.1,
            manager,
            puzzle_fee: fee,
        }
    }
}

pub(super) struct Mined {
    pub block: Result<Block, GenerateError>,
    pub received_at: u64,
    pub finished_at: u64,
    pub ledger: Option<ContributionLedger>,
    pub completed: bool,
}

pub(super) struct World {
    pub cfg: SimConfig,
    pub seed: u64,
    pub rng: ChaCha8Rng,
    pub net: NetworkModel,
    pub chain: ChainState,
    pub ids: IdIssuer,
    pub epochs: BTreeMap<u64, EpochInfo>,
    /// Keys that may be asked to approve: bootstrap members and managers.
    pub signers: Vec<KeyPair>,
    pub bootstrap: Vec<PublicKey>,
    pub managers: Vec<KeyPair>,
    pub utilities: Vec<KeyPair>,
    pub registry: Vec<UtilityEntry>,
    pub miners_of: BTreeMap<Digest, PublicKey>,
    pub lookup: LookupTable,
    pub sigs: CachedVerifier,
    pub now: u64,
}

impl World {
    pub fn new(cfg: &SimConfig, seed: u64, extra: &[KeyPair]) -> Result<Self, SimError> {
        cfg.validate()?;
        let bootstrap_keys: Vec<KeyPair> =
            (0..cfg.c_m).map(|i| KeyPair::from_seed(format!("bootstrap-{i}").as_bytes())).collect();
        let managers: Vec<KeyPair> =
            (0..cfg.pools).map(|i| KeyPair::from_seed(format!("pool-{i}").as_bytes())).collect();
        let utilities: Vec<KeyPair> =
            (0..cfg.utilities).map(|i| KeyPair::from_seed(format!("utility-{i}").as_bytes())).collect();
        let registry = utilities
            .iter()
            .enumerate()
            .map(|(i, k)| UtilityEntry { identity: format!("utility-{i}"), pk: k.public().clone() })
            .collect();
        let bootstrap = bootstrap_keys.iter().map(|k| k.public().clone()).collect();
        let mut signers = bootstrap_keys;
        signers.extend(managers.iter().cloned());
        signers.extend(extra.iter().cloned());
        Ok(Self {
            lookup: calibrate(cfg, seed)?,
            cfg: cfg.clone(),
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            net: NetworkModel { eta_ms: cfg.eta_ms },
            chain: ChainState::new(cfg.f),
            ids: IdIssuer::default(),
            epochs: BTreeMap::new(),
            signers,
            bootstrap,
            managers,
            utilities,
            registry,
            miners_of: BTreeMap::new(),
            sigs: CachedVerifier::new(),
            now: 0,
        })
    }

    pub fn tip(&self) -> (Digest, u64) {
        let t = self.chain.tip();
        (t.digest, t.instance_id)
    }

    /// Miners of the adopted chain, oldest first.
    pub fn chain_miners(&self) -> Vec<PublicKey> {
        self.chain.adopted().iter().skip(1).map(|e| self.miners_of[&e.digest].clone()).collect()
    }

    /// Committee, utility, descriptor, approval and instances for the next
    /// epoch. `None` when the hardness gate refuses the graph; the epoch
    /// then passes without a block.
    pub fn open_epoch(&mut self, number: u32) -> Result<Option<OpenEpoch>, SimError> {
        let cfg = &self.cfg;
        let (tip, _) = self.tip();
        let committee = derive_committee(&self.chain_miners(), cfg.w, cfg.c_m, &self.bootstrap);
        let entry = select_utility(&self.registry, &tip)?;
        let utility = self.utilities.iter().find(|k| *k.public() == entry.pk).expect("registry built from keys");
        let graph_seed = self.rng.next_u64();
        let g = cfg.graph.generate(graph_seed)?;
        let props = g.properties();
        let t_max = self.lookup.estimate_tmax(props.n, props.m);
        let descriptor = ProblemDescriptor::for_graph(
            &props,
            cfg.reward,
            utility.public().clone(),
            cfg.z,
            format!("sim://{}/{number}", self.seed),
            t_max,
        );
        let start = self.now;
        if check_hardness(&descriptor, &cfg.hardness).is_err() {
            self.now = start + t_max;
            return Ok(None);
        }
        let h = descriptor.hash();
        let sig_descriptor = utility.sign(&h.0);
        let signers: Vec<&KeyPair> = self.signers.iter().filter(|k| committee.members.contains(k.public())).collect();
        let approval = approve(&descriptor, &committee, &signers, &mut self.ids)?;
        let reward_tx = RewardTransaction {
            descriptor_hash: h,
            instance_id: approval.instance_id,
            amount: cfg.reward,
            timelock_ms: t_max,
            broadcast_at_ms: start,
            committee: committee.members.clone(),
            utility_pk: utility.public().clone(),
        };
        let mut store = MemoryStore::new();
        for (j, (inst, sig, _)) in publish_instances(&g, &h, cfg.z, utility, graph_seed)?.into_iter().enumerate() {
            store.insert(h, j as u64, inst, sig);
        }
        self.epochs.insert(approval.instance_id, EpochInfo { start_ms: start, committee: committee.members.clone() });
        let mempool = (0..cfg.transactions)
            .map(|i| Transaction::Transfer {
                payload: format!("epoch {number} transfer {i}").into_bytes(),
                fee: self.rng.random_range(1..100),
            })
            .collect();
        let verify_ms = modeled_ms(&g, self.cfg.verify_ns_per_item, 1);
        Ok(Some(OpenEpoch {
            number,
            descriptor,
            sig_descriptor,
            approval,
            reward_tx,
            committee: committee.members,
            store,
            mempool,
            start,
            deadline: start + t_max,
            verify_ms,
        }))
    }

    /// One pool's attempt at the epoch, building on `prev`. `stop_at` cuts
    /// the pool's time budget short of the deadline.
    pub fn mine(
        &self,
        ep: &OpenEpoch,
        pool_id: u32,
        manager: &KeyPair,
        prev: (Digest, u64),
        received_at: u64,
        stop_at: Option<u64>,
    ) -> Mined {
        let clock = ManualClock::new(received_at);
        let config = PoolConfig::new(pool_id, self.cfg.miners_per_pool, PartitionStrategy::Contiguous);
        let mut solver = PoolSolver::new(config, &Sequential, &clock).with_pace(self.cfg.pace);
        solver.silent = (0..self.cfg.free_riders as u32).collect();
        let opts = GenerateOptions { tx_budget_bytes: 1 << 20, improve_until_ms: stop_at };
        let ctx = ep.miner_context(manager.public(), prev, self.cfg.puzzle_fee);
        let block = generate_block(&ctx, &ep.mempool, &ep.store, &mut solver, &clock, &self.sigs, &opts);
        let last = solver.last.take();
        Mined {
            block,
            received_at,
            finished_at: clock.now_ms(),
            completed: last.as_ref().is_some_and(|s| s.completed),
            ledger: last.map(|s| s.ledger),
        }
    }

    pub fn verify_context<'a>(&'a self, ep: &'a OpenEpoch) -> VerifyContext<'a> {
        VerifyContext { store: &ep.store, epochs: &self.epochs, chain: &self.chain, sigs: &self.sigs }
    }

    /// Adds an accepted block; returns how deep a reorg it caused.
    pub fn commit(&mut self, block: &Block) -> (Insertion, u64) {
        let before = self.chain.stats().max_depth;
        self.miners_of.insert(block.hash(), block.header.miner.clone());
        let summary = BlockSummary::of(block, true).expect("accepted blocks are non-empty");
        let status = self.chain.insert(summary);
        (status, self.chain.stats().max_depth.saturating_sub(before))
    }
}

fn modeled_ms(g: &Graph, ns_per_item: u64, split: u64) -> u64 {
    ((g.n() + 2 * g.m()) as u64 * ns_per_item).div_ceil(split.max(1) * 1_000_000)
}

/// Honest end-to-end time on reference graphs at half, equal and double
/// the configured size: receive the reward, solve, deliver, verify.
fn calibrate(cfg: &SimConfig, seed: u64) -> Result<LookupTable, SimError> {
    let n = cfg.graph.n();
    let mut rows = Vec::new();
    for (i, size) in [n / 2, n, 2 * n].into_iter().enumerate() {
        let Ok(g) = cfg.graph.with_n(size).generate(seed ^ (0xca11_b4a7 + i as u64)) else { continue };
        let clock = ManualClock::new(0);
        let config = PoolConfig::new(0, cfg.miners_per_pool, PartitionStrategy::Contiguous);
        let silent = cfg.free_riders as u32;
        run_pool_solve_paced(&g, &config, &Sequential, &clock, u64::MAX, |_, w| w >= silent, cfg.pace)
            .map_err(|e| SimError::Config(format!("calibration: {e}")))?;
        let tau = clock.now_ms() + 2 * cfg.eta_ms + modeled_ms(&g, cfg.verify_ns_per_item, 1);
        rows.push(LookupRow { n: g.n() as u64, m: (g.m() as u64).max(1), tau_ms: tau.max(1) });
    }
    Ok(LookupTable::new(rows, cfg.multiplier)?)
}
