use std::sync::Arc;

use rand::RngCore;

use super::adapters::{kem_from_encryption, EcdhKem, LweBits, McElieceBits, StubKem, StubSig};
use super::curve::builtin_curves;
use super::{Kem, KexError, SigScheme};
use crate::codecrypt::hamming_code;
use crate::hash::{HashFunction, MixHash};
use crate::hashsig::{
    digest_bits, lamport_sign, lamport_verify, mss_verify, wots_keygen, wots_sign, wots_verify,
    LamportKeypair, LamportPublicKey, LamportSignature, LeafSelection, MssSignature, MssSigner,
    WotsParams, WotsSignature,
};
use crate::lattice::LweParams;
use crate::mq::{uov_keygen, uov_sign, uov_verify, MqSystem, UovKey, UovParams};
use crate::sigma::{fs_sign, fs_verify, DlogRelation, FsSignature, DLOG_G, DLOG_P};
use crate::wire::{self, Reader};

pub const KEM_NAMES: &[&str] = &["ecdh-toy", "lwe-toy", "mceliece-toy", "stub"];
pub const SIG_NAMES: &[&str] = &["lamport", "wots", "mss", "uov", "fs-dlog", "stub"];

const SECRET_BITS: usize = 256;

fn default_hash() -> Arc<dyn HashFunction> {
    Arc::new(MixHash::default())
}

pub fn kem_by_name(name: &str) -> Option<Box<dyn Kem>> {
    let h = default_hash();
    Some(match name {
        "ecdh-toy" => Box::new(EcdhKem::new(name, builtin_curves()[1], h).expect("fixture curve")),
        "lwe-toy" => {
            let params = LweParams::guaranteed(8, 257, 16, 3).expect("fixed parameters");
            Box::new(kem_from_encryption(name, Box::new(LweBits::new(params)), SECRET_BITS, h))
        }
        "mceliece-toy" => {
            let code = hamming_code(4).expect("fixed parameters");
            Box::new(kem_from_encryption(name, Box::new(McElieceBits::new(code)), SECRET_BITS, h))
        }
        "stub" => Box::new(StubKem::new(name, 32, 32, h)),
        _ => return None,
    })
}

pub fn sig_by_name(name: &str) -> Option<Box<dyn SigScheme>> {
    let h = default_hash();
    Some(match name {
        "lamport" => Box::new(LamportSig::new(h)),
        "wots" => Box::new(WotsSig::new(4, h)),
        "mss" => Box::new(MssSig::new(16, h)),
        "uov" => Box::new(UovSig::new(UovParams::new(8, 16, 31).expect("fixed parameters"), h)),
        "fs-dlog" => Box::new(FsDlogSig::new(h)),
        "stub" => Box::new(StubSig::new(name, 32, 64, h)),
        _ => return None,
    })
}

fn invalid<E: std::fmt::Display>(e: E) -> KexError {
    KexError::InvalidKey(e.to_string())
}

/// Lamport over the full digest of the hash. The secret key is the two
/// secret lists; signing the same key twice leaks it.
pub struct LamportSig {
    hash: Arc<dyn HashFunction>,
}

impl LamportSig {
    pub fn new(hash: Arc<dyn HashFunction>) -> Self {
        LamportSig { hash }
    }

    fn parse_secret(&self, sk: &[u8]) -> Result<LamportKeypair, KexError> {
        let mut r = Reader::new(sk);
        let l0 = r.list().map_err(invalid)?;
        let l1 = r.list().map_err(invalid)?;
        r.finish().map_err(invalid)?;
        let bits = self.hash.output_len() * 8;
        if l0.len() != bits || l1.len() != bits {
            return Err(KexError::InvalidKey(format!("expected {bits} secrets per list")));
        }
        let public = LamportPublicKey {
            lists: [
                l0.iter().map(|s| self.hash.hash(s)).collect(),
                l1.iter().map(|s| self.hash.hash(s)).collect(),
            ],
        };
        Ok(LamportKeypair {
            secret: [l0, l1],
            public,
        })
    }
}

impl SigScheme for LamportSig {
    fn name(&self) -> &str {
        "lamport"
    }

    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let kp = crate::hashsig::lamport_keygen(self.hash.output_len() * 8, self.hash.as_ref(), rng);
        let mut sk = Vec::new();
        wire::put_list(&mut sk, &kp.secret[0]);
        wire::put_list(&mut sk, &kp.secret[1]);
        Ok((kp.public.to_bytes(), sk))
    }

    fn sign(&self, sk: &[u8], msg: &[u8], _rng: &mut dyn RngCore) -> Result<Vec<u8>, KexError> {
        let kp = self.parse_secret(sk)?;
        let sig = lamport_sign(&kp, &digest_bits(self.hash.as_ref(), msg))
            .map_err(|e| KexError::SignFailure(e.to_string()))?;
        Ok(sig.to_bytes())
    }

    fn verify(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> bool {
        let (Ok(pk), Ok(sig)) = (LamportPublicKey::from_bytes(pk), LamportSignature::from_bytes(sig)) else {
            return false;
        };
        let h = self.hash.as_ref();
        lamport_verify(&pk, &digest_bits(h, msg), &sig, h).unwrap_or(false)
    }
}

/// Winternitz one-time signature over the full digest.
pub struct WotsSig {
    params: WotsParams,
    hash: Arc<dyn HashFunction>,
}

impl WotsSig {
    pub fn new(chunk_bits: u32, hash: Arc<dyn HashFunction>) -> Self {
        let params = WotsParams::new(chunk_bits, hash.output_len() * 8).expect("valid chunk width");
        WotsSig { params, hash }
    }
}

fn read_list(bytes: &[u8]) -> Result<Vec<Vec<u8>>, KexError> {
    let mut r = Reader::new(bytes);
    let list = r.list().map_err(invalid)?;
    r.finish().map_err(invalid)?;
    Ok(list)
}

fn list_bytes(list: &[Vec<u8>]) -> Vec<u8> {
    let mut buf = Vec::new();
    wire::put_list(&mut buf, list);
    buf
}

impl SigScheme for WotsSig {
    fn name(&self) -> &str {
        "wots"
    }

    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let kp = wots_keygen(self.params, self.hash.as_ref(), rng);
        Ok((list_bytes(&kp.public), list_bytes(&kp.secret)))
    }

    fn sign(&self, sk: &[u8], msg: &[u8], _rng: &mut dyn RngCore) -> Result<Vec<u8>, KexError> {
        let h = self.hash.as_ref();
        let secret = read_list(sk)?;
        wots_sign(&self.params, &secret, &digest_bits(h, msg), h)
            .map(|s| s.to_bytes())
            .map_err(|e| KexError::SignFailure(e.to_string()))
    }

    fn verify(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> bool {
        let (Ok(public), Ok(sig)) = (read_list(pk), WotsSignature::from_bytes(sig)) else {
            return false;
        };
        let h = self.hash.as_ref();
        wots_verify(&self.params, &public, &digest_bits(h, msg), &sig, h).unwrap_or(false)
    }
}

/// Stateless Merkle signatures. The secret key is a 32-byte seed from which
/// the whole tree is regenerated; the public key is the root.
pub struct MssSig {
    leaves: usize,
    hash: Arc<dyn HashFunction>,
}

impl MssSig {
    pub fn new(leaves: usize, hash: Arc<dyn HashFunction>) -> Self {
        assert!(leaves.is_power_of_two(), "leaf count must be a power of two");
        MssSig { leaves, hash }
    }

    fn signer(&self, seed: &[u8]) -> Result<MssSigner, KexError> {
        let seed: [u8; 32] = seed
            .try_into()
            .map_err(|_| KexError::InvalidKey("seed must be 32 bytes".into()))?;
        MssSigner::from_seed(seed, self.leaves, LeafSelection::Stateless, self.hash.as_ref()).map_err(invalid)
    }
}

impl SigScheme for MssSig {
    fn name(&self) -> &str {
        "mss"
    }

    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        let signer = self.signer(&seed)?;
        Ok((signer.root().to_vec(), seed.to_vec()))
    }

    fn sign(&self, sk: &[u8], msg: &[u8], _rng: &mut dyn RngCore) -> Result<Vec<u8>, KexError> {
        let mut signer = self.signer(sk)?;
        signer
            .sign(msg, self.hash.as_ref())
            .map(|s| s.to_bytes())
            .map_err(|e| KexError::SignFailure(e.to_string()))
    }

    fn verify(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> bool {
        let Ok(sig) = MssSignature::from_bytes(sig) else {
            return false;
        };
        sig.leaf_index < self.leaves && mss_verify(pk, msg, &sig, self.hash.as_ref()).unwrap_or(false)
    }
}

/// Unbalanced oil and vinegar. Signatures carry one byte per variable.
pub struct UovSig {
    params: UovParams,
    hash: Arc<dyn HashFunction>,
}

impl UovSig {
    pub fn new(params: UovParams, hash: Arc<dyn HashFunction>) -> Self {
        assert!(params.field.q() <= 256, "field elements must fit in a byte");
        UovSig { params, hash }
    }
}

impl SigScheme for UovSig {
    fn name(&self) -> &str {
        "uov"
    }

    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let key = uov_keygen(self.params, rng);
        Ok((key.public.to_bytes(), key.to_bytes()))
    }

    fn sign(&self, sk: &[u8], msg: &[u8], rng: &mut dyn RngCore) -> Result<Vec<u8>, KexError> {
        let key = UovKey::from_bytes(sk).map_err(invalid)?;
        let sig = uov_sign(&key, msg, self.hash.as_ref(), rng).map_err(|e| KexError::SignFailure(e.to_string()))?;
        Ok(sig.into_iter().map(|x| x as u8).collect())
    }

    fn verify(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> bool {
        let Ok(public) = MqSystem::from_bytes(pk) else {
            return false;
        };
        if sig.len() != public.n() {
            return false;
        }
        let sig: Vec<u32> = sig.iter().map(|&b| u32::from(b)).collect();
        uov_verify(&public, msg, &sig, self.hash.as_ref()).unwrap_or(false)
    }
}

/// Fiat-Shamir transformed Schnorr identification over the fixed group.
/// Keys are 8-byte big-endian integers.
pub struct FsDlogSig {
    rel: DlogRelation,
    hash: Arc<dyn HashFunction>,
}

impl FsDlogSig {
    pub fn new(hash: Arc<dyn HashFunction>) -> Self {
        FsDlogSig {
            rel: DlogRelation::new(DLOG_P, DLOG_G).expect("fixed group"),
            hash,
        }
    }
}

fn read_u64(b: &[u8]) -> Option<u64> {
    Some(u64::from_be_bytes(b.try_into().ok()?))
}

impl SigScheme for FsDlogSig {
    fn name(&self) -> &str {
        "fs-dlog"
    }

    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let (x, y) = self.rel.keygen(rng);
        Ok((y.to_be_bytes().to_vec(), x.to_be_bytes().to_vec()))
    }

    fn sign(&self, sk: &[u8], msg: &[u8], rng: &mut dyn RngCore) -> Result<Vec<u8>, KexError> {
        let x = read_u64(sk)
            .filter(|&x| x < self.rel.order)
            .ok_or_else(|| KexError::InvalidKey("secret must be 8 bytes below the group order".into()))?;
        let y = self.rel.public_for(x);
        Ok(fs_sign(&self.rel, &x, &y, msg, self.hash.as_ref(), rng).to_bytes())
    }

    fn verify(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> bool {
        let (Some(y), Ok(sig)) = (read_u64(pk), FsSignature::from_bytes(sig)) else {
            return false;
        };
        fs_verify(&self.rel, &y, msg, &sig, self.hash.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn every_name_resolves() {
        for name in KEM_NAMES {
            assert_eq!(kem_by_name(name).unwrap().name(), *name);
        }
        for name in SIG_NAMES {
            assert_eq!(sig_by_name(name).unwrap().name(), *name);
        }
        assert!(kem_by_name("nope").is_none());
        assert!(sig_by_name("nope").is_none());
    }

    #[test]
    fn kem_contract() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for name in KEM_NAMES {
            let kem = kem_by_name(name).unwrap();
            for _ in 0..200 {
                let (pk, sk) = kem.keypair(&mut rng).unwrap();
                let (ct, ss) = kem.encaps(&pk, &mut rng).unwrap();
                assert_eq!(ss.len(), MixHash::DEFAULT_OUTPUT_LEN);
                assert_eq!(kem.decaps(&sk, &ct).unwrap(), ss, "{name}");
            }
        }
    }

    #[test]
    fn sig_contract() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        for name in SIG_NAMES {
            let sig = sig_by_name(name).unwrap();
            for round in 0..3u8 {
                let (pk, sk) = sig.keypair(&mut rng).unwrap();
                let msg = [b'm', round];
                let s = sig.sign(&sk, &msg, &mut rng).unwrap();
                assert!(sig.verify(&pk, &msg, &s), "{name}");
                assert!(!sig.verify(&pk, b"other", &s), "{name}");
                let step = (s.len() / 40).max(1);
                for i in (0..s.len()).step_by(step).chain([s.len() - 1]) {
                    let mut bad = s.clone();
                    bad[i] ^= 0x01;
                    assert!(!sig.verify(&pk, &msg, &bad), "{name}: tamper at byte {i}");
                }
            }
        }
    }

    #[test]
    fn mceliece_ciphertext_is_fifteen_bits_per_secret_bit() {
        let kem = kem_by_name("mceliece-toy").unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let (pk, _) = kem.keypair(&mut rng).unwrap();
        let (ct, _) = kem.encaps(&pk, &mut rng).unwrap();
        assert_eq!(ct.len(), SECRET_BITS * 15 / 8);
    }
}
