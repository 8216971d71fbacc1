//! Problem descriptors, transactions and blocks, their canonical encoding,
//! and the block generation and verification procedures.

mod generate;
mod local;
mod store;
mod verify;

use alloc::string::String;
use alloc::vec::Vec;

use crate::codec::{DecodeError, Decoder, Encoder};
use crate::crypto::{self, AggregateSignature, CryptoError, Digest, PublicKey, Signature};
use crate::graph::GraphProperties;
use crate::mds::{bound_for, CardinalityBound, DominatingSet};

pub use generate::{
    generate_block, select_transactions, GenerateError, GenerateOptions, MinerContext, Solver,
};
pub use local::{EpochParams, LocalEpoch, SequentialGreedy};
pub use store::{instance_message, publish_instances, InstanceStore, MemoryStore};
pub use verify::{
    ChainView, EpochInfo, EpochRegistry, EpochVerifier, RejectReason, VerifyContext,
};

/// The audited problem statement `P_G` for one epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemDescriptor {
    pub reward: u64,
    pub utility_pk: PublicKey,
    pub n: u64,
    pub m: u64,
    pub delta_min: u32,
    pub delta_max: u32,
    pub z: u64,
    pub instance_addr: String,
    pub t_max_ms: u64,
}

impl ProblemDescriptor {
    pub fn for_graph(
        props: &GraphProperties,
        reward: u64,
        utility_pk: PublicKey,
        z: u64,
        instance_addr: String,
        t_max_ms: u64,
    ) -> Self {
        Self {
            reward,
            utility_pk,
            n: props.n,
            m: props.m,
            delta_min: props.delta_min,
            delta_max: props.delta_max,
            z,
            instance_addr,
            t_max_ms,
        }
    }

    pub fn encode_into(&self, e: &mut Encoder) {
        e.u64(self.reward)
            .hex(self.utility_pk.as_bytes())
            .u64(self.n)
            .u64(self.m)
            .u64(u64::from(self.delta_min))
            .u64(u64::from(self.delta_max))
            .u64(self.z)
            .str(&self.instance_addr)
            .u64(self.t_max_ms);
    }

    pub fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let desc = Self {
            reward: d.u64()?,
            utility_pk: public_key(d)?,
            n: d.u64()?,
            m: d.u64()?,
            delta_min: small(d, "delta_min")?,
            delta_max: small(d, "delta_max")?,
            z: d.u64()?,
            instance_addr: d.str()?,
            t_max_ms: d.u64()?,
        };
        if desc.z == 0 || desc.t_max_ms == 0 {
            return Err(DecodeError::Malformed { offset: d.offset(), what: "z and t_max must be positive" });
        }
        Ok(desc)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        self.encode_into(&mut e);
        e.finish()
    }

    pub fn from_bytes(raw: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Decoder::new(raw);
        let desc = Self::decode_from(&mut d)?;
        d.finish()?;
        Ok(desc)
    }

    /// `H(P_G)`.
    pub fn hash(&self) -> Digest {
        crypto::hash(&self.to_bytes())
    }

    pub fn bound(&self) -> CardinalityBound {
        bound_for(self.n, self.delta_min)
    }

    pub fn avg_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.m as f64 / self.n as f64
        }
    }

    pub fn matches(&self, props: &GraphProperties) -> bool {
        self.n == props.n
            && self.m == props.m
            && self.delta_min == props.delta_min
            && self.delta_max == props.delta_max
    }
}

/// Message the committee signs to approve a descriptor: `id ‖ H(P_G)`.
pub fn approval_message(instance_id: u64, descriptor_hash: &Digest) -> [u8; 40] {
    let mut msg = [0u8; 40];
    msg[..8].copy_from_slice(&instance_id.to_be_bytes());
    msg[8..].copy_from_slice(&descriptor_hash.0);
    msg
}

/// The time-locked reward `τ_reward` the utility locks for the epoch. It is
/// claimable by the pool holding the smallest dominating set once the
/// timelock expires; the signers listed must all co-sign a spend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardTransaction {
    pub descriptor_hash: Digest,
    pub instance_id: u64,
    pub amount: u64,
    pub timelock_ms: u64,
    pub broadcast_at_ms: u64,
    pub committee: Vec<PublicKey>,
    pub utility_pk: PublicKey,
}

impl RewardTransaction {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        e.hex(&self.descriptor_hash.0)
            .u64(self.instance_id)
            .u64(self.amount)
            .u64(self.timelock_ms)
            .u64(self.broadcast_at_ms)
            .u64(self.committee.len() as u64);
        for pk in &self.committee {
            e.hex(pk.as_bytes());
        }
        e.hex(self.utility_pk.as_bytes());
        e.finish()
    }

    pub fn from_bytes(raw: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Decoder::new(raw);
        let descriptor_hash = digest(&mut d)?;
        let instance_id = d.u64()?;
        let amount = d.u64()?;
        let timelock_ms = d.u64()?;
        let broadcast_at_ms = d.u64()?;
        let count = d.count()?;
        let committee = (0..count).map(|_| public_key(&mut d)).collect::<Result<_, _>>()?;
        let utility_pk = public_key(&mut d)?;
        d.finish()?;
        Ok(Self { descriptor_hash, instance_id, amount, timelock_ms, broadcast_at_ms, committee, utility_pk })
    }

    pub fn hash(&self) -> Digest {
        crypto::hash(&self.to_bytes())
    }

    /// Whether the reward may be claimed at `now_ms`.
    pub fn unlocked(&self, now_ms: u64) -> bool {
        now_ms >= self.broadcast_at_ms.saturating_add(self.timelock_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transaction {
    /// An ordinary pre-validated payment; only its size and fee matter here.
    Transfer { payload: Vec<u8>, fee: u64 },
    /// `τ_{rd,M}`: binds the block to its pool manager and the epoch reward.
    PuzzleFee { reward_tx: Digest, manager: PublicKey, amount: u64 },
}

const TX_TRANSFER: u64 = 0;
const TX_PUZZLE_FEE: u64 = 1;

impl Transaction {
    pub fn encode_into(&self, e: &mut Encoder) {
        match self {
            Transaction::Transfer { payload, fee } => {
                e.u64(TX_TRANSFER).bytes(payload).u64(*fee);
            }
            Transaction::PuzzleFee { reward_tx, manager, amount } => {
                e.u64(TX_PUZZLE_FEE).hex(&reward_tx.0).hex(manager.as_bytes()).u64(*amount);
            }
        }
    }

    pub fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let offset = d.offset();
        match d.u64()? {
            TX_TRANSFER => Ok(Transaction::Transfer { payload: d.bytes()?.to_vec(), fee: d.u64()? }),
            TX_PUZZLE_FEE => Ok(Transaction::PuzzleFee {
                reward_tx: digest(d)?,
                manager: public_key(d)?,
                amount: d.u64()?,
            }),
            _ => Err(DecodeError::Malformed { offset, what: "transaction tag" }),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        self.encode_into(&mut e);
        e.finish()
    }

    pub fn fee(&self) -> u64 {
        match self {
            Transaction::Transfer { fee, .. } => *fee,
            Transaction::PuzzleFee { .. } => 0,
        }
    }

    pub fn is_puzzle_fee(&self) -> bool {
        matches!(self, Transaction::PuzzleFee { .. })
    }
}

pub fn transactions_root(txs: &[Transaction]) -> Result<Digest, CryptoError> {
    let leaves: Vec<Vec<u8>> = txs.iter().map(Transaction::to_bytes).collect();
    crypto::merkle_root(&leaves)
}

/// `j = H(MR ‖ h_prev) mod z`, the digest read as a big-endian integer.
pub fn select_instance_index(merkle_root: &Digest, prev_hash: &Digest, z: u64) -> u64 {
    crypto::hash_concat(&[&merkle_root.0, &prev_hash.0]).reduce_mod(z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockHeader {
    pub prev_hash: Digest,
    pub merkle_root: Digest,
    pub solution: DominatingSet,
    pub bound: f64,
    pub descriptor: ProblemDescriptor,
    pub instance_id: u64,
    pub instance_addr: String,
    pub sig_descriptor: Signature,
    pub committee_signers: Vec<PublicKey>,
    pub sig_committee: AggregateSignature,
    pub timestamp_ms: u64,
    pub miner: PublicKey,
}

impl BlockHeader {
    pub fn encode_into(&self, e: &mut Encoder) {
        e.hex(&self.prev_hash.0).hex(&self.merkle_root.0);
        e.u64(self.solution.graph_n() as u64);
        let mut packed = Vec::with_capacity(4 * self.solution.len());
        for v in self.solution.vertices() {
            packed.extend_from_slice(&v.to_be_bytes());
        }
        e.bytes(&packed);
        e.u64(self.bound.to_bits());
        self.descriptor.encode_into(e);
        e.u64(self.instance_id).str(&self.instance_addr).hex(self.sig_descriptor.as_bytes());
        e.u64(self.committee_signers.len() as u64);
        for pk in &self.committee_signers {
            e.hex(pk.as_bytes());
        }
        e.u64(self.sig_committee.len() as u64);
        for sig in self.sig_committee.parts() {
            e.hex(sig.as_bytes());
        }
        e.u64(self.timestamp_ms).hex(self.miner.as_bytes());
    }

    pub fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let prev_hash = digest(d)?;
        let merkle_root = digest(d)?;
        let n_offset = d.offset();
        let graph_n = usize::try_from(d.u64()?)
            .map_err(|_| DecodeError::Malformed { offset: n_offset, what: "graph size" })?;
        let set_offset = d.offset();
        let packed = d.bytes()?;
        if packed.len() % 4 != 0 {
            return Err(DecodeError::Malformed { offset: set_offset, what: "solution width" });
        }
        let vertices: Vec<u32> = packed
            .chunks_exact(4)
            .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DecodeError::Malformed { offset: set_offset, what: "solution not strictly sorted" });
        }
        let solution = DominatingSet::new(vertices, graph_n)
            .map_err(|_| DecodeError::Malformed { offset: set_offset, what: "solution vertex" })?;
        let bound = f64::from_bits(d.u64()?);
        let descriptor = ProblemDescriptor::decode_from(d)?;
        let instance_id = d.u64()?;
        let instance_addr = d.str()?;
        let sig_descriptor = signature(d)?;
        let signers = d.count()?;
        let committee_signers = (0..signers).map(|_| public_key(d)).collect::<Result<_, _>>()?;
        let parts = d.count()?;
        let sigs = (0..parts).map(|_| signature(d)).collect::<Result<_, _>>()?;
        let timestamp_ms = d.u64()?;
        let miner = public_key(d)?;
        Ok(Self {
            prev_hash,
            merkle_root,
            solution,
            bound,
            descriptor,
            instance_id,
            instance_addr,
            sig_descriptor,
            committee_signers,
            sig_committee: AggregateSignature::from_parts(sigs),
            timestamp_ms,
            miner,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        self.encode_into(&mut e);
        e.finish()
    }

    /// Block identity: the digest of the canonical header bytes.
    pub fn hash(&self) -> Digest {
        crypto::hash(&self.to_bytes())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub header: BlockHeader,
    pub transactions: Vec<Transaction>,
}

impl Block {
    pub fn hash(&self) -> Digest {
        self.header.hash()
    }

    pub fn puzzle_fees(&self) -> impl Iterator<Item = &Transaction> {
        self.transactions.iter().filter(|t| t.is_puzzle_fee())
    }
}

pub fn serialize_block(block: &Block) -> Vec<u8> {
    let mut e = Encoder::new();
    block.header.encode_into(&mut e);
    e.u64(block.transactions.len() as u64);
    for tx in &block.transactions {
        tx.encode_into(&mut e);
    }
    e.finish()
}

pub fn deserialize_block(raw: &[u8]) -> Result<Block, DecodeError> {
    let mut d = Decoder::new(raw);
    let header = BlockHeader::decode_from(&mut d)?;
    let count = d.count()?;
    let transactions = (0..count).map(|_| Transaction::decode_from(&mut d)).collect::<Result<_, _>>()?;
    d.finish()?;
    Ok(Block { header, transactions })
}

fn digest(d: &mut Decoder<'_>) -> Result<Digest, DecodeError> {
    let offset = d.offset();
    let raw = d.hex()?;
    Digest::from_slice(&raw).map_err(|_| DecodeError::Malformed { offset, what: "digest" })
}

fn public_key(d: &mut Decoder<'_>) -> Result<PublicKey, DecodeError> {
    let offset = d.offset();
    let raw = d.hex()?;
    PublicKey::from_bytes(&raw).map_err(|_| DecodeError::Malformed { offset, what: "public key" })
}

fn signature(d: &mut Decoder<'_>) -> Result<Signature, DecodeError> {
    let offset = d.offset();
    let raw = d.hex()?;
    Signature::from_bytes(&raw).map_err(|_| DecodeError::Malformed { offset, what: "signature" })
}

fn small(d: &mut Decoder<'_>, what: &'static str) -> Result<u32, DecodeError> {
    let offset = d.offset();
    u32::try_from(d.u64()?).map_err(|_| DecodeError::Malformed { offset, what })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::crypto::KeyPair;
    use alloc::vec;
    use proptest::prelude::*;

    pub(crate) mod tests_support {
        use super::super::*;
        use crate::clock::ManualClock;
        use crate::crypto::{DirectVerifier, KeyPair};
        use crate::graph::star;

        pub fn epoch() -> LocalEpoch {
            LocalEpoch::build(&star(5), 1, &EpochParams::default(), None)
        }

        pub fn manager() -> KeyPair {
            KeyPair::from_seed(b"manager")
        }

        pub fn honest_block(fx: &LocalEpoch) -> Block {
            let m = manager();
            let clock = ManualClock::new(fx.reward_tx.broadcast_at_ms);
            let mempool = alloc::vec![
                Transaction::Transfer { payload: alloc::vec![1, 2, 3], fee: 5 },
                Transaction::Transfer { payload: alloc::vec![4; 40], fee: 6 },
            ];
            generate_block(
                &fx.miner_context(m.public(), 7),
                &mempool,
                &fx.store,
                &mut SequentialGreedy,
                &clock,
                &DirectVerifier,
                &GenerateOptions { tx_budget_bytes: 1 << 20, improve_until_ms: None },
            )
            .unwrap()
        }
    }

    #[test]
    fn index_modulo_one_is_zero() {
        assert_eq!(select_instance_index(&crypto::hash(b"a"), &crypto::hash(b"b"), 1), 0);
    }

    #[test]
    fn index_regression_vector() {
        let j = select_instance_index(&crypto::hash(b"merkle"), &crypto::hash(b"prev"), 16);
        let expect = crypto::hash_concat(&[&crypto::hash(b"merkle").0, &crypto::hash(b"prev").0]).0[31] % 16;
        assert_eq!(j, u64::from(expect));
        assert_eq!(j, 5);
    }

    #[test]
    fn indices_spread_uniformly() {
        // Pools differing only in the manager named by the puzzle fee.
        let prev = crypto::hash(b"tip");
        let z = 16u64;
        let trials = 16_000;
        let mut counts = [0u64; 16];
        for i in 0..trials {
            let fee = Transaction::PuzzleFee {
                reward_tx: crypto::hash(b"reward"),
                manager: KeyPair::from_seed(b"fixed").public().clone(),
                amount: i,
            };
            let mr = transactions_root(&[fee]).unwrap();
            counts[select_instance_index(&mr, &prev, z) as usize] += 1;
        }
        let expected = trials as f64 / z as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected) * (c as f64 - expected) / expected).sum();
        // Critical value for 15 degrees of freedom at the 1% level.
        assert!(chi2 < 30.578, "chi-square {chi2}");
    }

    #[test]
    fn block_round_trip_and_canonical() {
        let fx = tests_support::epoch();
        let block = tests_support::honest_block(&fx);
        let bytes = serialize_block(&block);
        let back = deserialize_block(&bytes).unwrap();
        assert_eq!(back, block);
        assert_eq!(serialize_block(&back), bytes);
    }

    #[test]
    fn truncated_block_reports_offset() {
        let fx = tests_support::epoch();
        let bytes = serialize_block(&tests_support::honest_block(&fx));
        for cut in [0usize, 3, 70, bytes.len() / 2, bytes.len() - 1] {
            let err = deserialize_block(&bytes[..cut]).unwrap_err();
            assert!(err.offset() <= cut, "cut {cut}: {err}");
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(deserialize_block(&extra), Err(DecodeError::Trailing { .. })));
    }

    #[test]
    fn descriptor_round_trip_and_hash() {
        let fx = tests_support::epoch();
        let d = fx.descriptor.clone();
        assert_eq!(ProblemDescriptor::from_bytes(&d.to_bytes()).unwrap(), d);
        let mut other = d.clone();
        other.reward += 1;
        assert_ne!(other.hash(), d.hash());
    }

    #[test]
    fn reward_tx_round_trip() {
        let fx = tests_support::epoch();
        let r = fx.reward_tx.clone();
        assert_eq!(RewardTransaction::from_bytes(&r.to_bytes()).unwrap(), r);
        assert!(!r.unlocked(r.broadcast_at_ms));
        assert!(r.unlocked(r.broadcast_at_ms + r.timelock_ms));
    }

    #[test]
    fn approval_message_layout() {
        let h = crypto::hash(b"p");
        let msg = approval_message(7, &h);
        assert_eq!(&msg[..8], &[0, 0, 0, 0, 0, 0, 0, 7]);
        assert_eq!(&msg[8..], &h.0);
    }

    proptest! {
        #[test]
        fn transactions_round_trip(payload in prop::collection::vec(any::<u8>(), 0..64), fee: u64, amount: u64) {
            let txs = vec![
                Transaction::Transfer { payload, fee },
                Transaction::PuzzleFee { reward_tx: crypto::hash(b"r"), manager: KeyPair::from_seed(b"m").public().clone(), amount },
            ];
            for tx in txs {
                let bytes = tx.to_bytes();
                let mut d = Decoder::new(&bytes);
                prop_assert_eq!(Transaction::decode_from(&mut d).unwrap(), tx);
                prop_assert!(d.finish().is_ok());
            }
        }
    }
}
