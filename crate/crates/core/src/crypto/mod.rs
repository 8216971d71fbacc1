//! Hashing, Merkle roots, and the aggregatable signature interface.

mod merkle;
mod sig;
mod wots;

use core::fmt;

use sha2::{Digest as _, Sha256};
use thiserror::Error;

pub use merkle::merkle_root;
pub use sig::{
    aggregate, aggregate_verify, AggregateSignature, CachedVerifier, DirectVerifier, KeyPair,
    PublicKey, SigVerifier, Signature, SCHEME_WOTS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("malformed {what}: {detail}")]
    Decode { what: &'static str, detail: &'static str },
    #[error("unknown signature scheme tag {0:#04x}")]
    UnknownScheme(u8),
    #[error("{messages} messages for {keys} public keys")]
    LengthMismatch { messages: usize, keys: usize },
    #[error("cannot aggregate an empty signature list")]
    Empty,
    #[error("merkle root of an empty transaction list")]
    EmptyTree,
}

/// A 256-bit SHA-256 digest.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const ZERO: Digest = Digest([0; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> alloc::string::String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, CryptoError> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s.trim(), &mut out)
            .map_err(|_| CryptoError::Decode { what: "digest", detail: "expected 64 hex chars" })?;
        Ok(Digest(out))
    }

    pub fn from_slice(raw: &[u8]) -> Result<Self, CryptoError> {
        let arr: [u8; 32] = raw
            .try_into()
            .map_err(|_| CryptoError::Decode { what: "digest", detail: "expected 32 bytes" })?;
        Ok(Digest(arr))
    }

    /// The digest read as a big-endian unsigned integer, reduced mod `modulus`.
    pub fn reduce_mod(&self, modulus: u64) -> u64 {
        assert!(modulus > 0, "modulus must be positive");
        let m = modulus as u128;
        self.0.iter().fold(0u128, |acc, &b| ((acc << 8) | b as u128) % m) as u64
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub fn hash(bytes: &[u8]) -> Digest {
    Digest(Sha256::digest(bytes).into())
}

/// Hash of the plain concatenation of several byte strings.
pub fn hash_concat(parts: &[&[u8]]) -> Digest {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    Digest(h.finalize().into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn empty_input_matches_sha256_vector() {
        assert_eq!(
            hash(b"").to_hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            hash(b"abc").to_hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn hash_is_deterministic_and_suffix_sensitive() {
        for len in 0..200usize {
            let x: Vec<u8> = (0..len).map(|i| (i * 31 + len) as u8).collect();
            assert_eq!(hash(&x), hash(&x));
            let mut y = x.clone();
            y.push(0);
            assert_ne!(hash(&x), hash(&y));
        }
    }

    #[test]
    fn reduce_mod_matches_small_cases() {
        let mut d = Digest::ZERO;
        d.0[31] = 37;
        assert_eq!(d.reduce_mod(16), 5);
        d.0[30] = 1; // 256 + 37 = 293
        assert_eq!(d.reduce_mod(16), 293 % 16);
        assert_eq!(d.reduce_mod(1), 0);
    }

    #[test]
    fn hex_round_trip() {
        let d = hash(b"x");
        assert_eq!(Digest::from_hex(&d.to_hex()).unwrap(), d);
        assert!(Digest::from_hex("abc").is_err());
    }
}
