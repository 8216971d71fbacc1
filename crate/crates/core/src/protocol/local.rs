//! A self-contained epoch: utility, committee, descriptor, approval, signed
//! instances and the verifier-side records, all derived from one seed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::generate::{MinerContext, Solver};
use super::store::{publish_instances, MemoryStore};
use super::verify::{EpochInfo, VerifyContext};
use super::{ProblemDescriptor, RewardTransaction};
use crate::committee::{approve, Approval, CommitteeWindow, IdIssuer};
use crate::crypto::{Digest, KeyPair, PublicKey, SigVerifier, Signature};
use crate::graph::{Graph, VertexPermutation};
use crate::mds::{greedy_sequential, DominatingSet};

#[derive(Debug, Clone)]
pub struct EpochParams {
    pub committee_size: usize,
    pub z: u64,
    pub reward: u64,
    pub t_max_ms: u64,
    pub start_ms: u64,
    pub prev_hash: Digest,
    pub prev_instance_id: u64,
    pub instance_addr: String,
}

impl Default for EpochParams {
    fn default() -> Self {
        Self {
            committee_size: 3,
            z: 4,
            reward: 1000,
            t_max_ms: 60_000,
            start_ms: 0,
            prev_hash: Digest::ZERO,
            prev_instance_id: 0,
            instance_addr: String::from("local"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocalEpoch {
    pub utility: KeyPair,
    pub committee_keys: Vec<KeyPair>,
    pub committee: CommitteeWindow,
    pub descriptor: ProblemDescriptor,
    pub sig_descriptor: Signature,
    pub approval: Approval,
    pub reward_tx: RewardTransaction,
    pub store: MemoryStore,
    /// Relabelings kept by the utility, indexed by `j`.
    pub permutations: Vec<VertexPermutation>,
    pub epochs: BTreeMap<u64, EpochInfo>,
    pub chain: BTreeMap<Digest, u64>,
    pub prev_hash: Digest,
    pub prev_instance_id: u64,
}

impl LocalEpoch {
    /// Builds the epoch for `g`. `descriptor_override` lets fixtures publish
    /// a descriptor that disagrees with the instances.
    pub fn build(
        g: &Graph,
        seed: u64,
        params: &EpochParams,
        descriptor_override: Option<&dyn Fn(&mut ProblemDescriptor)>,
    ) -> Self {
        let utility = KeyPair::from_seed(format!("utility-{seed}").as_bytes());
        let committee_keys: Vec<KeyPair> = (0..params.committee_size)
            .map(|i| KeyPair::from_seed(format!("committee-{seed}-{i}").as_bytes()))
            .collect();
        let committee = CommitteeWindow {
            w: params.committee_size,
            c_m: params.committee_size,
            members: committee_keys.iter().map(|k| k.public().clone()).collect(),
        };
        let mut descriptor = ProblemDescriptor::for_graph(
            &g.properties(),
            params.reward,
            utility.public().clone(),
            params.z,
            params.instance_addr.clone(),
            params.t_max_ms,
        );
        if let Some(f) = descriptor_override {
            f(&mut descriptor);
        }
        let descriptor_hash = descriptor.hash();
        let sig_descriptor = utility.sign(&descriptor_hash.0);
        let mut ids = IdIssuer::resume(params.prev_instance_id);
        let signers: Vec<&KeyPair> = committee_keys.iter().collect();
        let approval = approve(&descriptor, &committee, &signers, &mut ids).expect("full committee signs");
        let reward_tx = RewardTransaction {
            descriptor_hash,
            instance_id: approval.instance_id,
            amount: params.reward,
            timelock_ms: params.t_max_ms,
            broadcast_at_ms: params.start_ms,
            committee: committee.members.clone(),
            utility_pk: utility.public().clone(),
        };
        let mut store = MemoryStore::new();
        let mut permutations = Vec::new();
        let published = publish_instances(g, &descriptor_hash, params.z, &utility, seed)
            .expect("z >= 1");
        for (j, (h, sig, perm)) in published.into_iter().enumerate() {
            store.insert(descriptor_hash, j as u64, h, sig);
            permutations.push(perm);
        }
        let mut epochs = BTreeMap::new();
        epochs.insert(
            approval.instance_id,
            EpochInfo { start_ms: params.start_ms, committee: committee.members.clone() },
        );
        let mut chain = BTreeMap::new();
        chain.insert(params.prev_hash, params.prev_instance_id);
        Self {
            utility,
            committee_keys,
            committee,
            descriptor,
            sig_descriptor,
            approval,
            reward_tx,
            store,
            permutations,
            epochs,
            chain,
            prev_hash: params.prev_hash,
            prev_instance_id: params.prev_instance_id,
        }
    }

    pub fn deadline_ms(&self) -> u64 {
        self.reward_tx.broadcast_at_ms + self.descriptor.t_max_ms
    }

    pub fn miner_context<'a>(&'a self, manager: &'a PublicKey, puzzle_fee: u64) -> MinerContext<'a> {
        MinerContext {
            descriptor: &self.descriptor,
            sig_descriptor: &self.sig_descriptor,
            instance_id: self.approval.instance_id,
            committee: &self.committee.members,
            committee_signers: &self.approval.signers,
            sig_committee: &self.approval.signature,
            reward_tx: &self.reward_tx,
            prev_hash: self.prev_hash,
            prev_instance_id: self.prev_instance_id,
            manager,
            puzzle_fee,
        }
    }

    pub fn verify_context<'a>(&'a self, sigs: &'a dyn SigVerifier) -> VerifyContext<'a> {
        VerifyContext { store: &self.store, epochs: &self.epochs, chain: &self.chain, sigs }
    }
}

/// Single-threaded greedy; every attempt gives the same set.
#[derive(Debug, Clone, Copy, Default)]
pub struct SequentialGreedy;

impl Solver for SequentialGreedy {
    fn solve(&mut self, g: &Graph, _attempt: u32, _deadline_ms: u64) -> Option<DominatingSet> {
        Some(greedy_sequential(g))
    }
}
