//! Block generation for a pool manager.

use alloc::vec::Vec;

use thiserror::Error;

use super::store::{instance_message, InstanceStore};
use super::{
    approval_message, select_instance_index, transactions_root, Block, BlockHeader,
    ProblemDescriptor, RewardTransaction, Transaction,
};
use crate::clock::Clock;
use crate::committee::quorum;
use crate::crypto::{aggregate_verify, AggregateSignature, Digest, PublicKey, SigVerifier, Signature};
use crate::graph::Graph;
use crate::mds::{coverage, DominatingSet};

/// Produces dominating sets for a pool.
pub trait Solver {
    /// One attempt on `g`. Attempt 0 works on the instance as given; later
    /// attempts may randomize. Implementations driving a simulated clock
    /// advance it by the time the attempt takes.
    fn solve(&mut self, g: &Graph, attempt: u32, deadline_ms: u64) -> Option<DominatingSet>;

    /// True when every attempt on the same graph returns the same set.
    fn deterministic(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("descriptor signature does not verify under the utility key")]
    BadDescriptorSig,
    #[error("committee approval is invalid or short of quorum")]
    BadCommitteeSig,
    #[error("instance id {id} does not exceed the previous block's {prev}")]
    StaleId { id: u64, prev: u64 },
    #[error("instance {0} is not available from the store")]
    InstanceUnavailable(u64),
    #[error("instance {0} carries an invalid utility signature")]
    BadInstanceSig(u64),
    #[error("instance {0} does not match the descriptor's properties")]
    InstanceMismatch(u64),
    #[error("no dominating set within the bound before the deadline (best size {best:?})")]
    Abort { best: Option<usize> },
}

/// Everything a pool manager holds when the epoch opens.
#[derive(Debug, Clone, Copy)]
pub struct MinerContext<'a> {
    pub descriptor: &'a ProblemDescriptor,
    pub sig_descriptor: &'a Signature,
    pub instance_id: u64,
    pub committee: &'a [PublicKey],
    pub committee_signers: &'a [PublicKey],
    pub sig_committee: &'a AggregateSignature,
    pub reward_tx: &'a RewardTransaction,
    pub prev_hash: Digest,
    pub prev_instance_id: u64,
    pub manager: &'a PublicKey,
    pub puzzle_fee: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GenerateOptions {
    pub tx_budget_bytes: usize,
    /// Keep trying for smaller sets until this time instead of stopping at
    /// the first one within the bound.
    pub improve_until_ms: Option<u64>,
}

/// Greedy by fee per encoded byte, highest first, within `budget` bytes.
/// Ties keep mempool order.
pub fn select_transactions(mempool: &[Transaction], budget: usize) -> Vec<Transaction> {
    let mut order: Vec<(usize, u64, usize)> = mempool
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.is_puzzle_fee())
        .map(|(i, t)| (i, t.fee(), t.to_bytes().len()))
        .collect();
    // Compare fee_a / size_a against fee_b / size_b without division.
    order.sort_by(|a, b| {
        (u128::from(b.1) * a.2 as u128).cmp(&(u128::from(a.1) * b.2 as u128)).then(a.0.cmp(&b.0))
    });
    let mut used = 0;
    let mut out = Vec::new();
    for (i, _, size) in order {
        if used + size <= budget {
            used += size;
            out.push(mempool[i].clone());
        }
    }
    out
}

/// Runs block generation for one epoch: check the approval, pick the
/// instance from the block's own Merkle root, solve until a set within the
/// bound is found (or, with `improve_until_ms`, until that time), and
/// assemble the block.
pub fn generate_block(
    ctx: &MinerContext<'_>,
    mempool: &[Transaction],
    store: &dyn InstanceStore,
    solver: &mut dyn Solver,
    clock: &dyn Clock,
    sigs: &dyn SigVerifier,
    opts: &GenerateOptions,
) -> Result<Block, GenerateError> {
    let desc = ctx.descriptor;
    let descriptor_hash = desc.hash();
    if !sigs.verify(&desc.utility_pk, &descriptor_hash.0, ctx.sig_descriptor) {
        return Err(GenerateError::BadDescriptorSig);
    }
    let msg = approval_message(ctx.instance_id, &descriptor_hash);
    let signers_ok = ctx.committee_signers.len() >= quorum(ctx.committee.len())
        && ctx.committee_signers.iter().all(|s| ctx.committee.contains(s));
    if !signers_ok
        || !aggregate_verify(ctx.sig_committee, &[&msg], ctx.committee_signers, sigs).unwrap_or(false)
    {
        return Err(GenerateError::BadCommitteeSig);
    }
    if ctx.instance_id <= ctx.prev_instance_id {
        return Err(GenerateError::StaleId { id: ctx.instance_id, prev: ctx.prev_instance_id });
    }

    let mut transactions = Vec::with_capacity(mempool.len() + 1);
    transactions.push(Transaction::PuzzleFee {
        reward_tx: ctx.reward_tx.hash(),
        manager: ctx.manager.clone(),
        amount: ctx.puzzle_fee,
    });
    transactions.extend(select_transactions(mempool, opts.tx_budget_bytes));
    let merkle_root = transactions_root(&transactions).expect("puzzle fee is always present");

    let j = select_instance_index(&merkle_root, &ctx.prev_hash, desc.z);
    let (g, sig) = store.fetch(&descriptor_hash, j).ok_or(GenerateError::InstanceUnavailable(j))?;
    if !sigs.verify(&desc.utility_pk, &instance_message(&descriptor_hash, j, &g.digest()), &sig) {
        return Err(GenerateError::BadInstanceSig(j));
    }
    if !desc.matches(&g.properties()) {
        return Err(GenerateError::InstanceMismatch(j));
    }

    let bound = desc.bound();
    let deadline = ctx.reward_tx.broadcast_at_ms.saturating_add(desc.t_max_ms);
    let stop_at = opts.improve_until_ms.map_or(deadline, |t| t.min(deadline));
    let mut best: Option<DominatingSet> = None;
    let mut smallest: Option<usize> = None;
    let mut attempt = 0u32;
    while clock.now_ms() < stop_at {
        if best.is_some() && opts.improve_until_ms.is_none() {
            break;
        }
        let found = solver.solve(&g, attempt, stop_at);
        attempt += 1;
        let Some(s) = found else { break };
        smallest = Some(smallest.map_or(s.len(), |b| b.min(s.len())));
        let finished_in_time = clock.now_ms() < stop_at;
        let improves = best.as_ref().is_none_or(|b| s.len() < b.len());
        if finished_in_time
            && improves
            && s.graph_n() == g.n()
            && bound.admits(s.len())
            && coverage(&g, s.vertices()).dominating
        {
            best = Some(s);
        }
        if solver.deterministic() {
            break;
        }
    }
    let solution = best.ok_or(GenerateError::Abort { best: smallest })?;

    let header = BlockHeader {
        prev_hash: ctx.prev_hash,
        merkle_root,
        solution,
        bound: bound.k,
        descriptor: desc.clone(),
        instance_id: ctx.instance_id,
        instance_addr: desc.instance_addr.clone(),
        sig_descriptor: ctx.sig_descriptor.clone(),
        committee_signers: ctx.committee_signers.to_vec(),
        sig_committee: ctx.sig_committee.clone(),
        timestamp_ms: clock.now_ms(),
        miner: ctx.manager.clone(),
    };
    Ok(Block { header, transactions })
}
