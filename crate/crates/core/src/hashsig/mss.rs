use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::lamport::{lamport_keygen, lamport_sign, lamport_verify};
use super::merkle::{merkle_build, merkle_prove, merkle_verify};
use super::{
    digest_bits, HashSigError, LamportKeypair, LamportPublicKey, LamportSignature, MerkleProof,
    MerkleTree,
};
use crate::hash::HashFunction;
use crate::wire::{self, Reader};

/// How the signer picks the one-time key for each message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafSelection {
    /// Leaves are used in order; signing fails once every leaf is spent.
    Stateful,
    /// The leaf is derived from a secret and the message, so no counter is kept.
    Stateless,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MssSignature {
    pub leaf_index: usize,
    pub ots_signature: LamportSignature,
    pub ots_public: LamportPublicKey,
    pub proof: MerkleProof,
}

impl MssSignature {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        wire::put_u64(&mut buf, self.leaf_index as u64);
        wire::put_list(&mut buf, &self.ots_signature.0);
        wire::put_list(&mut buf, &self.ots_public.lists[0]);
        wire::put_list(&mut buf, &self.ots_public.lists[1]);
        self.proof.write(&mut buf);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HashSigError> {
        let mut r = Reader::new(bytes);
        let leaf_index = usize::try_from(r.u64()?)
            .map_err(|_| HashSigError::InvalidBundle("leaf index too large".into()))?;
        let ots_signature = LamportSignature(r.list()?);
        let ots_public = LamportPublicKey::read(&mut r)?;
        let proof = MerkleProof::read(&mut r)?;
        r.finish()?;
        Ok(MssSignature {
            leaf_index,
            ots_signature,
            ots_public,
            proof,
        })
    }
}

/// Leaf content: both public lists concatenated, then the leaf index (4-byte big-endian).
fn leaf_bytes(pk: &LamportPublicKey, index: usize) -> Vec<u8> {
    let mut out = pk.concat_lists();
    wire::put_u32(&mut out, index as u32);
    out
}

/// A Merkle tree of Lamport keys sized for digests of `h`.
#[derive(Debug, Clone)]
pub struct MssSigner {
    keys: Vec<LamportKeypair>,
    tree: MerkleTree,
    selection: LeafSelection,
    next: usize,
    stateless_secret: Vec<u8>,
}

impl MssSigner {
    pub fn generate<R: RngCore + ?Sized>(
        leaves: usize,
        selection: LeafSelection,
        h: &dyn HashFunction,
        rng: &mut R,
    ) -> Result<Self, HashSigError> {
        if !leaves.is_power_of_two() || leaves > u32::MAX as usize {
            return Err(HashSigError::NotPowerOfTwo(leaves));
        }
        let msg_bits = h.output_len() * 8;
        let keys: Vec<LamportKeypair> = (0..leaves)
            .map(|_| lamport_keygen(msg_bits, h, rng))
            .collect();
        let leaf_data: Vec<Vec<u8>> = keys
            .iter()
            .enumerate()
            .map(|(i, kp)| leaf_bytes(&kp.public, i))
            .collect();
        let tree = merkle_build(&leaf_data, h)?;
        let mut stateless_secret = vec![0u8; h.output_len()];
        rng.fill_bytes(&mut stateless_secret);
        Ok(MssSigner {
            keys,
            tree,
            selection,
            next: 0,
            stateless_secret,
        })
    }

    /// Deterministic generation from a 32-byte seed.
    pub fn from_seed(
        seed: [u8; 32],
        leaves: usize,
        selection: LeafSelection,
        h: &dyn HashFunction,
    ) -> Result<Self, HashSigError> {
        Self::generate(leaves, selection, h, &mut ChaCha20Rng::from_seed(seed))
    }

    pub fn root(&self) -> &[u8] {
        self.tree.root()
    }

    pub fn tree(&self) -> &MerkleTree {
        &self.tree
    }

    pub fn leaf_count(&self) -> usize {
        self.keys.len()
    }

    pub fn selection(&self) -> LeafSelection {
        self.selection
    }

    /// Leaves still available to the stateful signer.
    pub fn remaining(&self) -> usize {
        self.keys.len() - self.next
    }

    /// `H(secret ‖ msg)`, first 8 bytes big-endian, reduced mod the leaf count.
    pub fn stateless_index(&self, msg: &[u8], h: &dyn HashFunction) -> usize {
        let d = h.hash_parts(&[&self.stateless_secret, msg]);
        let mut word = [0u8; 8];
        let n = d.len().min(8);
        word[8 - n..].copy_from_slice(&d[..n]);
        (u64::from_be_bytes(word) % self.keys.len() as u64) as usize
    }

    pub fn sign(&mut self, msg: &[u8], h: &dyn HashFunction) -> Result<MssSignature, HashSigError> {
        let index = match self.selection {
            LeafSelection::Stateful => {
                if self.next == self.keys.len() {
                    return Err(HashSigError::KeysExhausted);
                }
                self.next += 1;
                self.next - 1
            }
            LeafSelection::Stateless => self.stateless_index(msg, h),
        };
        let kp = &self.keys[index];
        if kp.msg_bits() != h.output_len() * 8 {
            return Err(HashSigError::LengthMismatch {
                expected: kp.msg_bits(),
                actual: h.output_len() * 8,
            });
        }
        let ots_signature = lamport_sign(kp, &digest_bits(h, msg))?;
        Ok(MssSignature {
            leaf_index: index,
            ots_signature,
            ots_public: kp.public.clone(),
            proof: merkle_prove(&self.tree, index)?,
        })
    }
}

/// Checks the one-time signature against the bundled key, then the bundled
/// key's leaf against `root`.
pub fn mss_verify(
    root: &[u8],
    msg: &[u8],
    sig: &MssSignature,
    h: &dyn HashFunction,
) -> Result<bool, HashSigError> {
    if sig.proof.leaf_index != sig.leaf_index {
        return Err(HashSigError::InvalidBundle(format!(
            "proof is for leaf {} but signature names leaf {}",
            sig.proof.leaf_index, sig.leaf_index
        )));
    }
    let msg_bits = h.output_len() * 8;
    if sig.ots_public.msg_bits() != msg_bits || sig.ots_public.lists[1].len() != msg_bits {
        return Err(HashSigError::InvalidBundle(format!(
            "one-time key covers {} bits, digest has {msg_bits}",
            sig.ots_public.msg_bits()
        )));
    }
    if sig.ots_signature.0.len() != msg_bits {
        return Err(HashSigError::InvalidBundle(format!(
            "signature has {} elements, digest has {msg_bits} bits",
            sig.ots_signature.0.len()
        )));
    }
    if !lamport_verify(&sig.ots_public, &digest_bits(h, msg), &sig.ots_signature, h)? {
        return Ok(false);
    }
    let leaf = leaf_bytes(&sig.ots_public, sig.leaf_index);
    Ok(merkle_verify(root, &leaf, &sig.proof, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::MixHash;

    fn signer(leaves: usize, selection: LeafSelection) -> (MixHash, MssSigner) {
        // 8-byte digests keep the Lamport keys small
        let h = MixHash::new(8);
        let s = MssSigner::from_seed([3; 32], leaves, selection, &h).unwrap();
        (h, s)
    }

    #[test]
    fn stateful_counts_up_then_exhausts() {
        let (h, mut s) = signer(4, LeafSelection::Stateful);
        let root = s.root().to_vec();
        for i in 0..4 {
            let msg = format!("message {i}");
            let sig = s.sign(msg.as_bytes(), &h).unwrap();
            assert_eq!(sig.leaf_index, i);
            assert_eq!(sig.proof.siblings.len(), 2);
            assert!(mss_verify(&root, msg.as_bytes(), &sig, &h).unwrap());
        }
        assert_eq!(s.remaining(), 0);
        assert!(matches!(s.sign(b"fifth", &h), Err(HashSigError::KeysExhausted)));
    }

    #[test]
    fn stateless_index_is_deterministic() {
        let (h, mut s) = signer(16, LeafSelection::Stateless);
        let a = s.sign(b"hello", &h).unwrap();
        let b = s.sign(b"hello", &h).unwrap();
        assert_eq!(a.leaf_index, b.leaf_index);
        assert_eq!(a.leaf_index, s.stateless_index(b"hello", &h));
        assert!(mss_verify(s.root(), b"hello", &a, &h).unwrap());
        // many messages spread over more than one leaf
        let used: std::collections::HashSet<usize> =
            (0..64).map(|i| s.stateless_index(&[i], &h)).collect();
        assert!(used.len() > 1);
    }

    #[test]
    fn tampering_fails() {
        let (h, mut s) = signer(8, LeafSelection::Stateful);
        let root = s.root().to_vec();
        let sig = s.sign(b"msg", &h).unwrap();
        assert!(!mss_verify(&root, b"msh", &sig, &h).unwrap());
        let mut bad_root = root.clone();
        bad_root[0] ^= 1;
        assert!(!mss_verify(&bad_root, b"msg", &sig, &h).unwrap());
        let mut bad_proof = sig.clone();
        bad_proof.proof.siblings[1].0[0] ^= 0x80;
        assert!(!mss_verify(&root, b"msg", &bad_proof, &h).unwrap());
        let mut bad_pk = sig.clone();
        bad_pk.ots_public.lists[0][5][0] ^= 1;
        bad_pk.ots_public.lists[1][5][0] ^= 1;
        assert!(!mss_verify(&root, b"msg", &bad_pk, &h).unwrap());
        let mut mismatched = sig.clone();
        mismatched.leaf_index = 1;
        assert!(mss_verify(&root, b"msg", &mismatched, &h).is_err());
    }

    #[test]
    fn bundle_bytes_roundtrip() {
        let (h, mut s) = signer(4, LeafSelection::Stateful);
        let sig = s.sign(b"x", &h).unwrap();
        let decoded = MssSignature::from_bytes(&sig.to_bytes()).unwrap();
        assert_eq!(decoded, sig);
        assert!(MssSignature::from_bytes(&sig.to_bytes()[1..]).is_err());
    }

    #[test]
    fn non_power_of_two_rejected() {
        let h = MixHash::new(8);
        assert!(MssSigner::from_seed([0; 32], 6, LeafSelection::Stateful, &h).is_err());
    }
}
