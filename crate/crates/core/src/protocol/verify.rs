//! Block verification for one epoch.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use super::{approval_message, select_instance_index, transactions_root, Block, BlockHeader};
use crate::committee::quorum;
use crate::crypto::{aggregate_verify, Digest, PublicKey, SigVerifier};
use crate::mds::coverage;

use super::store::{instance_message, InstanceStore};

/// Why a block was refused. The numeric codes are stable and double as
/// process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectReason {
    MerkleMismatch,
    Deadline,
    StaleId,
    NotImproving,
    BadDescriptorSig,
    BadCommitteeSig,
    BadInstanceSig,
    Uncovered,
    BoundMismatch,
    BoundExceeded,
    InstanceMismatch,
    InstanceUnavailable,
    MalformedSolution,
    PuzzleFee,
    UnknownParent,
}

impl RejectReason {
    pub const ALL: [RejectReason; 15] = [
        RejectReason::MerkleMismatch,
        RejectReason::Deadline,
        RejectReason::StaleId,
        RejectReason::NotImproving,
        RejectReason::BadDescriptorSig,
        RejectReason::BadCommitteeSig,
        RejectReason::BadInstanceSig,
        RejectReason::Uncovered,
        RejectReason::BoundMismatch,
        RejectReason::BoundExceeded,
        RejectReason::InstanceMismatch,
        RejectReason::InstanceUnavailable,
        RejectReason::MalformedSolution,
        RejectReason::PuzzleFee,
        RejectReason::UnknownParent,
    ];

    pub fn code(self) -> u8 {
        10 + Self::ALL.iter().position(|&r| r == self).expect("listed") as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            RejectReason::MerkleMismatch => "merkle-mismatch",
            RejectReason::Deadline => "deadline",
            RejectReason::StaleId => "stale-id",
            RejectReason::NotImproving => "not-improving",
            RejectReason::BadDescriptorSig => "bad-descriptor-signature",
            RejectReason::BadCommitteeSig => "bad-committee-signature",
            RejectReason::BadInstanceSig => "bad-instance-signature",
            RejectReason::Uncovered => "uncovered",
            RejectReason::BoundMismatch => "bound-mismatch",
            RejectReason::BoundExceeded => "bound-exceeded",
            RejectReason::InstanceMismatch => "instance-mismatch",
            RejectReason::InstanceUnavailable => "instance-unavailable",
            RejectReason::MalformedSolution => "malformed-solution",
            RejectReason::PuzzleFee => "puzzle-fee",
            RejectReason::UnknownParent => "unknown-parent",
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.iter().copied().find(|r| r.code() == code)
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What verifiers know about an approved instance id: when its epoch began
/// (the reward broadcast) and which committee approved it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochInfo {
    pub start_ms: u64,
    pub committee: Vec<PublicKey>,
}

pub trait EpochRegistry {
    fn epoch(&self, instance_id: u64) -> Option<&EpochInfo>;
}

impl EpochRegistry for BTreeMap<u64, EpochInfo> {
    fn epoch(&self, instance_id: u64) -> Option<&EpochInfo> {
        self.get(&instance_id)
    }
}

pub trait ChainView {
    /// Instance id recorded in a known block's header; genesis reports 0.
    fn instance_id_of(&self, block: &Digest) -> Option<u64>;
}

impl ChainView for BTreeMap<Digest, u64> {
    fn instance_id_of(&self, block: &Digest) -> Option<u64> {
        self.get(block).copied()
    }
}

#[derive(Clone, Copy)]
pub struct VerifyContext<'a> {
    pub store: &'a dyn InstanceStore,
    pub epochs: &'a dyn EpochRegistry,
    pub chain: &'a dyn ChainView,
    pub sigs: &'a dyn SigVerifier,
}

impl VerifyContext<'_> {
    /// Rule (i) of chain validity: the committee approval is well formed and
    /// carries a quorum of the committee on record for the id.
    pub fn committee_valid(&self, header: &BlockHeader) -> bool {
        let Some(epoch) = self.epochs.epoch(header.instance_id) else {
            return false;
        };
        let signers = &header.committee_signers;
        let mut sorted: Vec<&PublicKey> = signers.iter().collect();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != signers.len()
            || signers.len() < quorum(epoch.committee.len())
            || !signers.iter().all(|s| epoch.committee.contains(s))
        {
            return false;
        }
        let msg = approval_message(header.instance_id, &header.descriptor.hash());
        aggregate_verify(&header.sig_committee, &[&msg], signers, self.sigs).unwrap_or(false)
    }

    /// Every check, in order. `past_size` of `None` means nothing has been
    /// accepted yet this epoch.
    pub fn check(&self, block: &Block, now_ms: u64, past_size: Option<usize>) -> Result<(), RejectReason> {
        let h = &block.header;
        match transactions_root(&block.transactions) {
            Ok(root) if root == h.merkle_root => {}
            _ => return Err(RejectReason::MerkleMismatch),
        }
        let mut fees = block.puzzle_fees();
        match (fees.next(), fees.next()) {
            (Some(super::Transaction::PuzzleFee { manager, .. }), None) if *manager == h.miner => {}
            _ => return Err(RejectReason::PuzzleFee),
        }

        let epoch = self.epochs.epoch(h.instance_id).ok_or(RejectReason::BadCommitteeSig)?;
        if now_ms >= epoch.start_ms.saturating_add(h.descriptor.t_max_ms) {
            return Err(RejectReason::Deadline);
        }
        let parent_id = self.chain.instance_id_of(&h.prev_hash).ok_or(RejectReason::UnknownParent)?;
        if h.instance_id <= parent_id {
            return Err(RejectReason::StaleId);
        }
        if past_size.is_some_and(|best| best <= h.solution.len()) {
            return Err(RejectReason::NotImproving);
        }

        let descriptor_hash = h.descriptor.hash();
        if !self.sigs.verify(&h.descriptor.utility_pk, &descriptor_hash.0, &h.sig_descriptor) {
            return Err(RejectReason::BadDescriptorSig);
        }
        if !self.committee_valid(h) {
            return Err(RejectReason::BadCommitteeSig);
        }

        if h.instance_addr != h.descriptor.instance_addr {
            return Err(RejectReason::InstanceMismatch);
        }
        let j = select_instance_index(&h.merkle_root, &h.prev_hash, h.descriptor.z);
        let (g, sig) = self.store.fetch(&descriptor_hash, j).ok_or(RejectReason::InstanceUnavailable)?;
        let msg = instance_message(&descriptor_hash, j, &g.digest());
        if !self.sigs.verify(&h.descriptor.utility_pk, &msg, &sig) {
            return Err(RejectReason::BadInstanceSig);
        }
        if !h.descriptor.matches(&g.properties()) {
            return Err(RejectReason::InstanceMismatch);
        }

        if h.solution.graph_n() != g.n() {
            return Err(RejectReason::MalformedSolution);
        }
        let bound = h.descriptor.bound();
        if h.bound.to_bits() != bound.k.to_bits() {
            return Err(RejectReason::BoundMismatch);
        }
        if !bound.admits(h.solution.len()) {
            return Err(RejectReason::BoundExceeded);
        }
        if !coverage(&g, h.solution.vertices()).dominating {
            return Err(RejectReason::Uncovered);
        }
        Ok(())
    }
}

/// Per-epoch verifier state: the best size accepted so far and the block
/// that achieved it, committed when the epoch ends.
#[derive(Debug, Clone, Default)]
pub struct EpochVerifier {
    past_size: Option<usize>,
    best: Option<Block>,
}

impl EpochVerifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn past_size(&self) -> Option<usize> {
        self.past_size
    }

    pub fn best(&self) -> Option<&Block> {
        self.best.as_ref()
    }

    /// Accepts only blocks strictly smaller than everything accepted before.
    pub fn verify(&mut self, block: &Block, ctx: &VerifyContext<'_>, now_ms: u64) -> Result<(), RejectReason> {
        ctx.check(block, now_ms, self.past_size)?;
        self.past_size = Some(block.header.solution.len());
        self.best = Some(block.clone());
        Ok(())
    }

    /// Ends the epoch: returns the cached best block and resets to `∞`.
    pub fn finish_epoch(&mut self) -> Option<Block> {
        self.past_size = None;
        self.best.take()
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::tests_support::{epoch, honest_block, manager};
    use super::super::*;
    use super::*;
    use crate::clock::{Clock, ManualClock};
    use crate::crypto::{DirectVerifier, KeyPair};
    use crate::graph::{path, star};
    use crate::mds::DominatingSet;
    use alloc::sync::Arc;
    use alloc::vec;

    fn reject(fx: &LocalEpoch, block: &Block) -> Result<(), RejectReason> {
        let mut v = EpochVerifier::new();
        v.verify(block, &fx.verify_context(&DirectVerifier), fx.reward_tx.broadcast_at_ms + 1)
    }

    /// Swaps the solution for a different in-range set of the same size.
    fn with_solution(block: &Block, vertices: Vec<u32>) -> Block {
        let mut b = block.clone();
        b.header.solution = DominatingSet::new(vertices, b.header.solution.graph_n()).unwrap();
        b
    }

    #[test]
    fn honest_block_accepted_and_cached() {
        let fx = epoch();
        let block = honest_block(&fx);
        assert_eq!(block.header.solution.len(), 1);
        let mut v = EpochVerifier::new();
        let ctx = fx.verify_context(&DirectVerifier);
        v.verify(&block, &ctx, 10).unwrap();
        assert_eq!(v.past_size(), Some(1));
        assert_eq!(v.finish_epoch(), Some(block));
        assert_eq!(v.past_size(), None);
    }

    #[test]
    fn solution_maps_back_to_the_original_center() {
        let fx = epoch();
        let block = honest_block(&fx);
        let j = select_instance_index(&block.header.merkle_root, &fx.prev_hash, fx.descriptor.z);
        let perm = &fx.permutations[j as usize];
        let original = perm.inverse().map_set(block.header.solution.vertices());
        assert_eq!(original, vec![0]);
    }

    #[test]
    fn merkle_mismatch() {
        let fx = epoch();
        let mut b = honest_block(&fx);
        b.transactions.push(Transaction::Transfer { payload: vec![9], fee: 1 });
        assert_eq!(reject(&fx, &b), Err(RejectReason::MerkleMismatch));
    }

    #[test]
    fn deadline() {
        let fx = epoch();
        let b = honest_block(&fx);
        let ctx = fx.verify_context(&DirectVerifier);
        let mut v = EpochVerifier::new();
        assert_eq!(v.verify(&b, &ctx, fx.deadline_ms()), Err(RejectReason::Deadline));
        assert_eq!(v.verify(&b, &ctx, fx.deadline_ms() + 5), Err(RejectReason::Deadline));
        assert!(v.verify(&b, &ctx, fx.deadline_ms() - 1).is_ok());
    }

    #[test]
    fn stale_id() {
        let fx = epoch();
        let b = honest_block(&fx);
        let mut chain = fx.chain.clone();
        chain.insert(fx.prev_hash, b.header.instance_id);
        let ctx = VerifyContext { chain: &chain, ..fx.verify_context(&DirectVerifier) };
        assert_eq!(EpochVerifier::new().verify(&b, &ctx, 1), Err(RejectReason::StaleId));
    }

    #[test]
    fn not_improving_on_equal_size() {
        let fx = epoch();
        let first = honest_block(&fx);
        let other = KeyPair::from_seed(b"second pool");
        let clock = ManualClock::new(0);
        let second = generate_block(
            &fx.miner_context(other.public(), 7),
            &[],
            &fx.store,
            &mut SequentialGreedy,
            &clock,
            &DirectVerifier,
            &GenerateOptions::default(),
        )
        .unwrap();
        assert_eq!(second.header.solution.len(), first.header.solution.len());
        let ctx = fx.verify_context(&DirectVerifier);
        let mut v = EpochVerifier::new();
        v.verify(&first, &ctx, 1).unwrap();
        assert_eq!(v.verify(&second, &ctx, 2), Err(RejectReason::NotImproving));
        assert_eq!(v.best(), Some(&first));
    }

    #[test]
    fn bad_descriptor_signature() {
        let fx = epoch();
        let mut b = honest_block(&fx);
        b.header.sig_descriptor = b.header.sig_descriptor.tampered();
        assert_eq!(reject(&fx, &b), Err(RejectReason::BadDescriptorSig));
    }

    #[test]
    fn bad_committee_signature() {
        let fx = epoch();
        let mut b = honest_block(&fx);
        let mut parts = b.header.sig_committee.parts().to_vec();
        parts[1] = parts[1].tampered();
        b.header.sig_committee = crate::crypto::AggregateSignature::from_parts(parts);
        assert_eq!(reject(&fx, &b), Err(RejectReason::BadCommitteeSig));

        let mut short = honest_block(&fx);
        short.header.committee_signers.truncate(1);
        short.header.sig_committee =
            crate::crypto::AggregateSignature::from_parts(short.header.sig_committee.parts()[..1].to_vec());
        assert_eq!(reject(&fx, &short), Err(RejectReason::BadCommitteeSig));
    }

    #[test]
    fn bad_instance_signature() {
        let mut fx = epoch();
        let b = honest_block(&fx);
        let h = fx.descriptor.hash();
        let j = select_instance_index(&b.header.merkle_root, &fx.prev_hash, fx.descriptor.z);
        let (g, sig) = fx.store.fetch(&h, j).unwrap();
        fx.store.insert(h, j, g, sig.tampered());
        assert_eq!(reject(&fx, &b), Err(RejectReason::BadInstanceSig));
    }

    #[test]
    fn uncovered() {
        let fx = epoch();
        let b = honest_block(&fx);
        let center = b.header.solution.vertices()[0];
        let leaf = (center + 1) % 6;
        assert_eq!(reject(&fx, &with_solution(&b, vec![leaf])), Err(RejectReason::Uncovered));
    }

    #[test]
    fn instance_problems() {
        let mut fx = epoch();
        let b = honest_block(&fx);
        let h = fx.descriptor.hash();
        let j = select_instance_index(&b.header.merkle_root, &fx.prev_hash, fx.descriptor.z);

        let mut moved = b.clone();
        moved.header.instance_addr.push('x');
        assert_eq!(reject(&fx, &moved), Err(RejectReason::InstanceMismatch));

        let wrong = Arc::new(path(6));
        let sig = fx.utility.sign(&instance_message(&h, j, &wrong.digest()));
        fx.store.insert(h, j, wrong, sig);
        assert_eq!(reject(&fx, &b), Err(RejectReason::InstanceMismatch));

        fx.store.remove(&h, j);
        assert_eq!(reject(&fx, &b), Err(RejectReason::InstanceUnavailable));
    }

    #[test]
    fn bound_and_shape_checks() {
        let fx = epoch();
        let b = honest_block(&fx);
        let mut skewed = b.clone();
        skewed.header.bound += 0.5;
        assert_eq!(reject(&fx, &skewed), Err(RejectReason::BoundMismatch));

        // k for the 5-leaf star is 6 (1 + ln 2) / 2 ≈ 5.08, so 6 vertices exceed it.
        assert_eq!(reject(&fx, &with_solution(&b, (0..6).collect())), Err(RejectReason::BoundExceeded));

        let mut resized = b.clone();
        resized.header.solution = DominatingSet::new(vec![0], 7).unwrap();
        assert_eq!(reject(&fx, &resized), Err(RejectReason::MalformedSolution));
    }

    #[test]
    fn puzzle_fee_and_parent() {
        let fx = epoch();
        let b = honest_block(&fx);
        let mut twice = b.clone();
        twice.transactions.push(b.transactions[0].clone());
        twice.header.merkle_root = transactions_root(&twice.transactions).unwrap();
        assert_eq!(reject(&fx, &twice), Err(RejectReason::PuzzleFee));

        let mut orphan = b.clone();
        orphan.header.prev_hash = crate::crypto::hash(b"nowhere");
        assert_eq!(reject(&fx, &orphan), Err(RejectReason::UnknownParent));

        let mut foreign = b.clone();
        foreign.header.miner = KeyPair::from_seed(b"someone else").public().clone();
        assert_eq!(reject(&fx, &foreign), Err(RejectReason::PuzzleFee));
    }

    #[test]
    fn reason_codes_are_distinct_and_stable() {
        let mut codes: Vec<u8> = RejectReason::ALL.iter().map(|r| r.code()).collect();
        assert_eq!(RejectReason::MerkleMismatch.code(), 10);
        assert_eq!(RejectReason::Uncovered.code(), 17);
        codes.dedup();
        assert_eq!(codes.len(), RejectReason::ALL.len());
        for r in RejectReason::ALL {
            assert_eq!(RejectReason::from_code(r.code()), Some(r));
        }
    }

    #[test]
    fn generate_rejects_bad_inputs() {
        let fx = epoch();
        let m = manager();
        let clock = ManualClock::new(0);
        let opts = GenerateOptions::default();
        let tampered = fx.sig_descriptor.tampered();
        let mut ctx = fx.miner_context(m.public(), 1);
        ctx.sig_descriptor = &tampered;
        assert_eq!(
            generate_block(&ctx, &[], &fx.store, &mut SequentialGreedy, &clock, &DirectVerifier, &opts),
            Err(GenerateError::BadDescriptorSig)
        );

        let mut ctx = fx.miner_context(m.public(), 1);
        ctx.prev_instance_id = ctx.instance_id;
        assert!(matches!(
            generate_block(&ctx, &[], &fx.store, &mut SequentialGreedy, &clock, &DirectVerifier, &opts),
            Err(GenerateError::StaleId { .. })
        ));

        let bumped = |d: &mut ProblemDescriptor| d.n += 1;
        let off = LocalEpoch::build(&star(5), 1, &EpochParams::default(), Some(&bumped));
        assert!(matches!(
            generate_block(&off.miner_context(m.public(), 1), &[], &off.store, &mut SequentialGreedy, &clock, &DirectVerifier, &opts),
            Err(GenerateError::InstanceMismatch(_))
        ));
    }

    struct Oversized;
    impl Solver for Oversized {
        fn solve(&mut self, g: &crate::graph::Graph, _: u32, _: u64) -> Option<DominatingSet> {
            DominatingSet::new((0..g.n() as u32).collect(), g.n()).ok()
        }
    }

    /// Each attempt costs 10 ms; attempt `a` drops `a` vertices from the
    /// all-vertex set while it still dominates the star.
    struct Shrinking<'a> {
        clock: &'a ManualClock,
    }
    impl Solver for Shrinking<'_> {
        fn solve(&mut self, g: &crate::graph::Graph, attempt: u32, _: u64) -> Option<DominatingSet> {
            self.clock.advance(10);
            let center = (0..g.n() as u32).max_by_key(|&v| g.degree(v)).unwrap();
            let keep = g.n().saturating_sub(attempt as usize).max(1);
            let mut vs: Vec<u32> = core::iter::once(center)
                .chain((0..g.n() as u32).filter(|&v| v != center))
                .take(keep)
                .collect();
            vs.sort_unstable();
            DominatingSet::new(vs, g.n()).ok()
        }
        fn deterministic(&self) -> bool {
            false
        }
    }

    #[test]
    fn deterministic_solver_over_bound_aborts() {
        let fx = epoch();
        let m = manager();
        let clock = ManualClock::new(0);
        let got = generate_block(
            &fx.miner_context(m.public(), 1),
            &[],
            &fx.store,
            &mut Oversized,
            &clock,
            &DirectVerifier,
            &GenerateOptions::default(),
        );
        assert_eq!(got, Err(GenerateError::Abort { best: Some(6) }));
    }

    #[test]
    fn improvement_mode_keeps_the_smallest_in_time() {
        let fx = epoch();
        let m = manager();
        let clock = ManualClock::new(0);
        let first = generate_block(
            &fx.miner_context(m.public(), 1),
            &[],
            &fx.store,
            &mut Shrinking { clock: &clock },
            &clock,
            &DirectVerifier,
            &GenerateOptions::default(),
        )
        .unwrap();
        // Attempt 0 keeps all 6 vertices (over k); attempt 1 keeps 5.
        assert_eq!(first.header.solution.len(), 5);
        assert_eq!(clock.now_ms(), 20);

        let clock = ManualClock::new(0);
        let improved = generate_block(
            &fx.miner_context(m.public(), 1),
            &[],
            &fx.store,
            &mut Shrinking { clock: &clock },
            &clock,
            &DirectVerifier,
            &GenerateOptions { tx_budget_bytes: 0, improve_until_ms: Some(1000) },
        )
        .unwrap();
        assert_eq!(improved.header.solution.len(), 1);
        assert_eq!(reject(&fx, &improved), Ok(()));
    }

    #[test]
    fn mempool_selection_by_fee_density() {
        let small_cheap = Transaction::Transfer { payload: vec![0; 4], fee: 4 };
        let big_rich = Transaction::Transfer { payload: vec![0; 100], fee: 50 };
        let tiny_rich = Transaction::Transfer { payload: vec![], fee: 30 };
        let pool = vec![small_cheap.clone(), big_rich.clone(), tiny_rich.clone()];
        let all = select_transactions(&pool, 1 << 20);
        assert_eq!(all, vec![tiny_rich.clone(), big_rich, small_cheap.clone()]);
        let limited = select_transactions(&pool, tiny_rich.to_bytes().len() + small_cheap.to_bytes().len());
        assert_eq!(limited, vec![tiny_rich, small_cheap]);
        assert!(select_transactions(&pool, 0).is_empty());
    }
}
