//! Hash-based signatures: Lamport and Winternitz one-time signatures, Merkle
//! trees, and a Merkle signature scheme with stateful or stateless leaf
//! selection.

mod lamport;
mod merkle;
mod mss;
mod wots;

pub use lamport::{
    lamport_keygen, lamport_sign, lamport_verify, LamportKeypair, LamportPublicKey,
    LamportSignature,
};
pub use merkle::{merkle_build, merkle_prove, merkle_verify, MerkleProof, MerkleTree, Side};
pub use mss::{mss_verify, LeafSelection, MssSignature, MssSigner};
pub use wots::{
    wots_keygen, wots_public_from_secret, wots_sign, wots_verify, WotsKeypair, WotsParams,
    WotsSignature,
};

use thiserror::Error;

use crate::bits::BitVec;
use crate::hash::HashFunction;
use crate::wire::WireError;

#[derive(Debug, Error)]
pub enum HashSigError {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("leaf count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("index {index} out of range for {len} leaves")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("all one-time keys have been used")]
    KeysExhausted,
    #[error("invalid signature bundle: {0}")]
    InvalidBundle(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Wire(#[from] WireError),
}

/// Applies `h` to `seed` `iterations` times; zero iterations returns the seed.
pub fn hash_chain(h: &dyn HashFunction, seed: &[u8], iterations: u32) -> Vec<u8> {
    let mut value = seed.to_vec();
    for _ in 0..iterations {
        value = h.hash(&value);
    }
    value
}

/// The digest of `msg` as a bit string, MSB of the first byte at index 0.
pub fn digest_bits(h: &dyn HashFunction, msg: &[u8]) -> BitVec {
    let digest = h.hash(msg);
    BitVec::from_bytes(&digest, digest.len() * 8).expect("digest length is whole bytes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::MixHash;

    #[test]
    fn chain_identity_and_composition() {
        let h = MixHash::default();
        let s = b"seed".to_vec();
        assert_eq!(hash_chain(&h, &s, 0), s);
        assert_eq!(hash_chain(&h, &s, 2), h.hash(&h.hash(&s)));
    }

    #[test]
    fn chain_is_associative_for_small_counts() {
        let h = MixHash::new(16);
        let s = [0xa5u8; 16];
        // reference values computed by direct iteration
        let reference: Vec<Vec<u8>> = (0..=32u32)
            .scan(s.to_vec(), |cur, i| {
                let out = cur.clone();
                if i < 32 {
                    *cur = h.hash(cur);
                }
                Some(out)
            })
            .collect();
        for a in 0..=16u32 {
            for b in 0..=16u32 {
                let split = hash_chain(&h, &hash_chain(&h, &s, a), b);
                assert_eq!(split, reference[(a + b) as usize], "a={a} b={b}");
            }
        }
    }
}
