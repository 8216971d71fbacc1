//! Scheme-tagged keys and signatures.
//!
//! Public keys and signatures are opaque byte strings whose first byte names
//! the scheme, so another backend (for instance a pairing-based one) can be
//! added without touching the protocol types. Aggregation is the ordered
//! concatenation of the constituent signatures; an aggregate verifies iff
//! every constituent does.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use super::{hash, wots, CryptoError, Digest};

pub const SCHEME_WOTS: u8 = 0x01;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PublicKey(Vec<u8>);

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Signature(Vec<u8>);

fn check_tagged(raw: &[u8], body_len: usize, what: &'static str) -> Result<(), CryptoError> {
    match raw.first() {
        None => Err(CryptoError::Decode { what, detail: "empty" }),
        Some(&SCHEME_WOTS) if raw.len() == 1 + body_len => Ok(()),
        Some(&SCHEME_WOTS) => Err(CryptoError::Decode { what, detail: "wrong length" }),
        Some(&tag) => Err(CryptoError::UnknownScheme(tag)),
    }
}

impl PublicKey {
    pub fn from_bytes(raw: &[u8]) -> Result<Self, CryptoError> {
        check_tagged(raw, 32, "public key")?;
        Ok(Self(raw.to_vec()))
    }

    pub fn from_hex(s: &str) -> Result<Self, CryptoError> {
        let raw = hex::decode(s.trim())
            .map_err(|_| CryptoError::Decode { what: "public key", detail: "hex" })?;
        Self::from_bytes(&raw)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn verify(&self, msg: &[u8], sig: &Signature) -> bool {
        match (self.0.first(), sig.0.first()) {
            (Some(&SCHEME_WOTS), Some(&SCHEME_WOTS)) => {
                let pk: [u8; 32] = self.0[1..].try_into().expect("length checked on decode");
                wots::verify(&pk, msg, &sig.0[1..])
            }
            _ => false,
        }
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.to_hex();
        write!(f, "PublicKey({}..)", &h[..h.len().min(12)])
    }
}

impl Signature {
    pub fn from_bytes(raw: &[u8]) -> Result<Self, CryptoError> {
        check_tagged(raw, wots::SIG_LEN, "signature")?;
        Ok(Self(raw.to_vec()))
    }

    pub fn from_hex(s: &str) -> Result<Self, CryptoError> {
        let raw = hex::decode(s.trim())
            .map_err(|_| CryptoError::Decode { what: "signature", detail: "hex" })?;
        Self::from_bytes(&raw)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    /// Flips one bit of the signature body. Test fixtures use this to forge.
    pub fn tampered(&self) -> Self {
        let mut raw = self.0.clone();
        let last = raw.len() - 1;
        raw[last] ^= 1;
        Self(raw)
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({} bytes)", self.0.len())
    }
}

#[derive(Clone)]
pub struct KeyPair {
    seed: [u8; 32],
    public: PublicKey,
}

impl KeyPair {
    /// Deterministic key generation from arbitrary seed bytes.
    pub fn from_seed(seed: &[u8]) -> Self {
        let seed = hash(seed).0;
        let mut public = Vec::with_capacity(33);
        public.push(SCHEME_WOTS);
        public.extend_from_slice(&wots::public_key(&seed));
        Self { seed, public: PublicKey(public) }
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn sign(&self, msg: &[u8]) -> Signature {
        let mut raw = Vec::with_capacity(1 + wots::SIG_LEN);
        raw.push(SCHEME_WOTS);
        raw.extend_from_slice(&wots::sign(&self.seed, msg));
        Signature(raw)
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair").field("public", &self.public).finish_non_exhaustive()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct AggregateSignature {
    parts: Vec<Signature>,
}

impl AggregateSignature {
    pub fn parts(&self) -> &[Signature] {
        &self.parts
    }

    pub fn from_parts(parts: Vec<Signature>) -> Self {
        Self { parts }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

pub fn aggregate(sigs: &[Signature]) -> Result<AggregateSignature, CryptoError> {
    if sigs.is_empty() {
        return Err(CryptoError::Empty);
    }
    Ok(AggregateSignature { parts: sigs.to_vec() })
}

/// Verifies an aggregate against its signers.
///
/// `messages` is either a single message signed by every key or one message
/// per key, in key order.
pub fn aggregate_verify(
    agg: &AggregateSignature,
    messages: &[&[u8]],
    pks: &[PublicKey],
    verifier: &dyn SigVerifier,
) -> Result<bool, CryptoError> {
    if messages.len() != 1 && messages.len() != pks.len() {
        return Err(CryptoError::LengthMismatch { messages: messages.len(), keys: pks.len() });
    }
    if pks.is_empty() || agg.parts.len() != pks.len() {
        return Ok(false);
    }
    Ok(pks.iter().zip(&agg.parts).enumerate().all(|(i, (pk, sig))| {
        let msg = if messages.len() == 1 { messages[0] } else { messages[i] };
        verifier.verify(pk, msg, sig)
    }))
}

/// Signature verification strategy.
pub trait SigVerifier {
    fn verify(&self, pk: &PublicKey, msg: &[u8], sig: &Signature) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DirectVerifier;

impl SigVerifier for DirectVerifier {
    fn verify(&self, pk: &PublicKey, msg: &[u8], sig: &Signature) -> bool {
        pk.verify(msg, sig)
    }
}

/// Memoizes verification outcomes keyed by a digest of (key, message, signature).
#[derive(Debug, Default)]
pub struct CachedVerifier {
    seen: RefCell<BTreeMap<Digest, bool>>,
}

impl CachedVerifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.seen.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.borrow().is_empty()
    }
}

impl SigVerifier for CachedVerifier {
    fn verify(&self, pk: &PublicKey, msg: &[u8], sig: &Signature) -> bool {
        let key = super::hash_concat(&[
            &(pk.0.len() as u32).to_be_bytes(),
            &pk.0,
            &(msg.len() as u32).to_be_bytes(),
            msg,
            &sig.0,
        ]);
        if let Some(&hit) = self.seen.borrow().get(&key) {
            return hit;
        }
        let ok = pk.verify(msg, sig);
        self.seen.borrow_mut().insert(key, ok);
        ok
    }
}
