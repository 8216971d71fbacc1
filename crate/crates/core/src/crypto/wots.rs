//! Winternitz one-time signatures over SHA-256 with w = 16.
//!
//! 64 message nibbles plus a 3-nibble checksum give 67 hash chains of length
//! 15. Keys are derived deterministically from a 32-byte seed and the public
//! key is the hash of all chain tops. Reusing a key across many messages
//! weakens unforgeability, which is acceptable for a test backend.

use alloc::vec::Vec;

use sha2::{Digest as _, Sha256};

pub(super) const CHAINS: usize = 67;
const MSG_NIBBLES: usize = 64;
const MAX_STEP: u8 = 15;
pub(super) const SIG_LEN: usize = CHAINS * 32;

fn chain_step(chain: usize, step: u8, x: &[u8; 32]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"wots-chain");
    h.update([chain as u8, step]);
    h.update(x);
    h.finalize().into()
}

fn walk(chain: usize, mut x: [u8; 32], from: u8, to: u8) -> [u8; 32] {
    for step in from..to {
        x = chain_step(chain, step, &x);
    }
    x
}

fn chain_start(seed: &[u8; 32], chain: usize) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"wots-sk");
    h.update(seed);
    h.update((chain as u32).to_be_bytes());
    h.finalize().into()
}

/// Base-16 digits of the message digest followed by the checksum digits.
fn digits(msg: &[u8]) -> [u8; CHAINS] {
    let d: [u8; 32] = Sha256::digest(msg).into();
    let mut out = [0u8; CHAINS];
    for (i, byte) in d.iter().enumerate() {
        out[2 * i] = byte >> 4;
        out[2 * i + 1] = byte & 0x0f;
    }
    let checksum: u32 = out[..MSG_NIBBLES].iter().map(|&b| (MAX_STEP - b) as u32).sum();
    out[MSG_NIBBLES] = ((checksum >> 8) & 0x0f) as u8;
    out[MSG_NIBBLES + 1] = ((checksum >> 4) & 0x0f) as u8;
    out[MSG_NIBBLES + 2] = (checksum & 0x0f) as u8;
    out
}

fn compress(tops: &[[u8; 32]]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"wots-pk");
    for t in tops {
        h.update(t);
    }
    h.finalize().into()
}

pub(super) fn public_key(seed: &[u8; 32]) -> [u8; 32] {
    let tops: Vec<[u8; 32]> =
        (0..CHAINS).map(|i| walk(i, chain_start(seed, i), 0, MAX_STEP)).collect();
    compress(&tops)
}

pub(super) fn sign(seed: &[u8; 32], msg: &[u8]) -> Vec<u8> {
    let digits = digits(msg);
    let mut out = Vec::with_capacity(SIG_LEN);
    for (i, &b) in digits.iter().enumerate() {
        out.extend_from_slice(&walk(i, chain_start(seed, i), 0, b));
    }
    out
}

pub(super) fn verify(pk: &[u8; 32], msg: &[u8], sig: &[u8]) -> bool {
    if sig.len() != SIG_LEN {
        return false;
    }
    let digits = digits(msg);
    let tops: Vec<[u8; 32]> = sig
        .chunks_exact(32)
        .zip(digits.iter())
        .enumerate()
        .map(|(i, (chunk, &b))| {
            let x: [u8; 32] = chunk.try_into().expect("chunks_exact");
            walk(i, x, b, MAX_STEP)
        })
        .collect();
    compress(&tops) == *pk
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksum_digits_cover_the_maximum() {
        // An all-zero digest nibble string maximises the checksum at 64 * 15.
        let max = 64u32 * 15;
        assert!(max < 16 * 16 * 16);
    }

    #[test]
    fn sign_verify() {
        let seed = [7u8; 32];
        let pk = public_key(&seed);
        let sig = sign(&seed, b"abc");
        assert!(verify(&pk, b"abc", &sig));
        assert!(!verify(&pk, b"abd", &sig));
        let mut bad = sig.clone();
        bad[5] ^= 0x80;
        assert!(!verify(&pk, b"abc", &bad));
    }
}
