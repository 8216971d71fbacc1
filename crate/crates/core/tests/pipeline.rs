//! End-to-end paths through the public API: instance pool to accepted block to chain.

use proptest::prelude::*;
use scalowork_core::chain::{parse_log, work_done, BlockSummary, ChainState, Insertion};
use scalowork_core::clock::ManualClock;
use scalowork_core::crypto::{DirectVerifier, KeyPair};
use scalowork_core::exec::Sequential;
use scalowork_core::graph::{generate_ba, generate_er, make_isomorph};
use scalowork_core::mds::{coverage, greedy_distributed, greedy_sequential, Partition};
use scalowork_core::protocol::{
    deserialize_block, generate_block, serialize_block, EpochParams, GenerateOptions, LocalEpoch, RejectReason,
    SequentialGreedy, Transaction,
};

fn mine(fx: &LocalEpoch) -> scalowork_core::protocol::Block {
    let manager = KeyPair::from_seed(b"pipeline");
    let mempool = [Transaction::Transfer { payload: b"hello".to_vec(), fee: 2 }];
    generate_block(
        &fx.miner_context(manager.public(), 3),
        &mempool,
        &fx.store,
        &mut SequentialGreedy,
        &ManualClock::new(fx.reward_tx.broadcast_at_ms),
        &DirectVerifier,
        &GenerateOptions { tx_budget_bytes: 1 << 16, improve_until_ms: None },
    )
    .unwrap()
}

#[test]
fn mined_block_survives_the_wire_and_extends_the_chain() {
    let g = generate_ba(150, 4, 9).unwrap();
    let fx = LocalEpoch::build(&g, 9, &EpochParams { z: 6, ..Default::default() }, None);
    let block = mine(&fx);

    let decoded = deserialize_block(&serialize_block(&block)).unwrap();
    assert_eq!(decoded, block);
    assert_eq!(fx.verify_context(&DirectVerifier).check(&decoded, fx.deadline_ms() - 1, None), Ok(()));

    let mut chain = ChainState::new(2);
    let mut parented = decoded.clone();
    parented.header.prev_hash = chain.genesis();
    assert_eq!(chain.insert(BlockSummary::of(&parented, true).unwrap()), Insertion::Adopted);
    assert_eq!(chain.height(), 1);

    let log = parse_log(&chain.render_log()).unwrap();
    assert_eq!(log.len(), 2);
    assert!((log[1].work_done - work_done(&parented.header).unwrap()).abs() < 1e-6 * log[1].work_done);
}

#[test]
fn a_block_accepted_once_cannot_be_beaten_by_itself() {
    let fx = LocalEpoch::build(&generate_er(90, 0.08, 3).unwrap(), 3, &EpochParams::default(), None);
    let block = mine(&fx);
    let size = block.header.solution.len();
    let ctx = fx.verify_context(&DirectVerifier);
    assert_eq!(ctx.check(&block, 0, Some(size + 1)), Ok(()));
    assert_eq!(ctx.check(&block, 0, Some(size)), Err(RejectReason::NotImproving));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relabelled_solutions_dominate_the_isomorph(n in 2usize..120, p in 0.01f64..0.5, seed in any::<u64>()) {
        let g = generate_er(n, p, seed).unwrap();
        let s = greedy_sequential(&g);
        let (h, perm) = make_isomorph(&g, seed ^ 0x5eed);
        prop_assert!(coverage(&h, &perm.map_set(s.vertices())).dominating);
        prop_assert_eq!(greedy_sequential(&h).len() > 0, n > 0);
    }

    #[test]
    fn partitioning_never_breaks_domination(n in 1usize..200, attach in 1usize..5, workers in 1usize..9, seed in any::<u64>()) {
        let g = generate_ba(n.max(attach + 1), attach, seed).unwrap();
        for part in [Partition::contiguous(g.n(), workers), Partition::degree_balanced(&g, workers)] {
            let run = greedy_distributed(&g, &part, &Sequential).unwrap();
            prop_assert!(coverage(&g, run.set.vertices()).dominating);
            prop_assert!(run.rounds as usize <= g.n());
        }
    }
}
