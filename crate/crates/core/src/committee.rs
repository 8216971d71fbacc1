//! Auditing committee: membership from the recent chain, utility selection,
//! the hardness gate and quorum approval of descriptors.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use thiserror::Error;

use crate::codec::Encoder;
use crate::crypto::{self, aggregate, AggregateSignature, Digest, KeyPair, PublicKey, SigVerifier, Signature};
use crate::protocol::{approval_message, ProblemDescriptor};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommitteeError {
    #[error("no utility company is registered")]
    EmptyRegistry,
    #[error("{have} committee signatures, quorum is {need}")]
    NoQuorum { have: usize, need: usize },
    #[error("registry line {line}: {what}")]
    Registry { line: usize, what: &'static str },
    #[error("hardness band {0} has min above max")]
    Band(&'static str),
}

/// Signatures needed out of a committee of `size`: `⌈2·size/3⌉`.
pub fn quorum(size: usize) -> usize {
    (2 * size).div_ceil(3)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitteeWindow<T = PublicKey> {
    pub w: usize,
    pub c_m: usize,
    pub members: Vec<T>,
}

/// Committee for the next epoch given the miners of the adopted chain,
/// oldest first (genesis excluded).
///
/// Until the chain holds `w` blocks the bootstrap committee serves. After
/// that, members are the distinct miners of the last `w` blocks, keeping the
/// `c_m` most recent, listed in the order they last appear in the window.
pub fn derive_committee<T: Clone + PartialEq>(
    chain_miners: &[T],
    w: usize,
    c_m: usize,
    bootstrap: &[T],
) -> CommitteeWindow<T> {
    if chain_miners.len() < w || w == 0 {
        let members = bootstrap.iter().take(c_m).cloned().collect();
        return CommitteeWindow { w, c_m, members };
    }
    let window = &chain_miners[chain_miners.len() - w..];
    let mut newest_first: Vec<T> = Vec::new();
    for m in window.iter().rev() {
        if newest_first.len() == c_m {
            break;
        }
        if !newest_first.contains(m) {
            newest_first.push(m.clone());
        }
    }
    newest_first.reverse();
    CommitteeWindow { w, c_m, members: newest_first }
}

/// Issues strictly increasing instance ids, starting at 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IdIssuer {
    last: u64,
}

impl IdIssuer {
    pub fn resume(last: u64) -> Self {
        Self { last }
    }

    pub fn last(&self) -> u64 {
        self.last
    }

    pub fn issue(&mut self) -> u64 {
        self.last += 1;
        self.last
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Approval {
    pub instance_id: u64,
    pub signers: Vec<PublicKey>,
    pub signature: AggregateSignature,
}

/// Members in `signers` sign `id ‖ H(P_G)` for a fresh id. Keys outside the
/// committee are ignored. Fails without consuming an id if fewer than a
/// quorum of members sign.
pub fn approve(
    descriptor: &ProblemDescriptor,
    committee: &CommitteeWindow,
    signers: &[&KeyPair],
    ids: &mut IdIssuer,
) -> Result<Approval, CommitteeError> {
    let members: Vec<&KeyPair> = signers
        .iter()
        .copied()
        .filter(|kp| committee.members.contains(kp.public()))
        .collect();
    let need = quorum(committee.members.len());
    if members.is_empty() || members.len() < need {
        return Err(CommitteeError::NoQuorum { have: members.len(), need });
    }
    let instance_id = ids.issue();
    let msg = approval_message(instance_id, &descriptor.hash());
    let sigs: Vec<Signature> = members.iter().map(|kp| kp.sign(&msg)).collect();
    Ok(Approval {
        instance_id,
        signers: members.iter().map(|kp| kp.public().clone()).collect(),
        signature: aggregate(&sigs).expect("at least one signer"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardnessPolicy {
    pub min_n: u64,
    pub max_n: u64,
    pub min_avg_degree: f64,
    pub max_avg_degree: f64,
}

impl Default for HardnessPolicy {
    /// Accepts everything.
    fn default() -> Self {
        Self { min_n: 0, max_n: u64::MAX, min_avg_degree: 0.0, max_avg_degree: f64::INFINITY }
    }
}

impl HardnessPolicy {
    pub fn new(min_n: u64, max_n: u64, min_avg_degree: f64, max_avg_degree: f64) -> Result<Self, CommitteeError> {
        if min_n > max_n {
            return Err(CommitteeError::Band("n"));
        }
        if !(min_avg_degree <= max_avg_degree) {
            return Err(CommitteeError::Band("average degree"));
        }
        Ok(Self { min_n, max_n, min_avg_degree, max_avg_degree })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HardnessFailure {
    #[error("too few vertices")]
    TooSmall,
    #[error("too many vertices")]
    TooLarge,
    #[error("average degree too low")]
    TooSparse,
    #[error("average degree too high")]
    TooDense,
}

pub fn check_hardness(descriptor: &ProblemDescriptor, policy: &HardnessPolicy) -> Result<(), HardnessFailure> {
    if descriptor.n < policy.min_n {
        return Err(HardnessFailure::TooSmall);
    }
    if descriptor.n > policy.max_n {
        return Err(HardnessFailure::TooLarge);
    }
    let d = descriptor.avg_degree();
    if d < policy.min_avg_degree {
        return Err(HardnessFailure::TooSparse);
    }
    if d > policy.max_avg_degree {
        return Err(HardnessFailure::TooDense);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityEntry {
    pub identity: String,
    pub pk: PublicKey,
}

/// Registered utility companies. Text form: one `identity hex-pk` per line,
/// `#` comments, and an optional final `signature hex-sig` line signed by
/// the registry operator over the entries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UtilityRegistry {
    pub entries: Vec<UtilityEntry>,
    pub signature: Option<Signature>,
}

impl UtilityRegistry {
    pub fn parse(text: &str) -> Result<Self, CommitteeError> {
        let mut reg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if reg.signature.is_some() {
                return Err(CommitteeError::Registry { line: line_no, what: "entry after signature" });
            }
            let mut parts = line.split_whitespace();
            let (Some(first), Some(second), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(CommitteeError::Registry { line: line_no, what: "expected two fields" });
            };
            if first == "signature" {
                let sig = Signature::from_hex(second)
                    .map_err(|_| CommitteeError::Registry { line: line_no, what: "bad signature" })?;
                reg.signature = Some(sig);
                continue;
            }
            let pk = PublicKey::from_hex(second)
                .map_err(|_| CommitteeError::Registry { line: line_no, what: "bad public key" })?;
            reg.entries.push(UtilityEntry { identity: String::from(first), pk });
        }
        Ok(reg)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{} {}", e.identity, e.pk.to_hex());
        }
        if let Some(sig) = &self.signature {
            let _ = writeln!(out, "signature {}", sig.to_hex());
        }
        out
    }

    fn signing_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        e.u64(self.entries.len() as u64);
        for entry in &self.entries {
            e.str(&entry.identity).hex(entry.pk.as_bytes());
        }
        e.finish()
    }

    pub fn sign(&mut self, operator: &KeyPair) {
        self.signature = Some(operator.sign(&self.signing_bytes()));
    }

    pub fn verify(&self, operator: &PublicKey, sigs: &dyn SigVerifier) -> bool {
        self.signature.as_ref().is_some_and(|s| sigs.verify(operator, &self.signing_bytes(), s))
    }
}

/// Uniform choice of the epoch's utility, seeded by the previous block hash.
pub fn select_utility<'a>(registry: &'a [UtilityEntry], seed: &Digest) -> Result<&'a UtilityEntry, CommitteeError> {
    if registry.is_empty() {
        return Err(CommitteeError::EmptyRegistry);
    }
    let idx = crypto::hash_concat(&[b"utility", &seed.0]).reduce_mod(registry.len() as u64);
    Ok(&registry[idx as usize])
}
