use rand::RngCore;

use super::{hash_chain, HashSigError};
use crate::bits::BitVec;
use crate::hash::HashFunction;
use crate::wire::{self, Reader};

/// Winternitz parameters: the message is signed `chunk_bits` bits at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WotsParams {
    chunk_bits: u32,
    msg_bits: usize,
}

impl WotsParams {
    pub fn new(chunk_bits: u32, msg_bits: usize) -> Result<Self, HashSigError> {
        if !(1..=16).contains(&chunk_bits) {
            return Err(HashSigError::InvalidParams(format!(
                "chunk_bits {chunk_bits} outside 1..=16"
            )));
        }
        if msg_bits == 0 || msg_bits % chunk_bits as usize != 0 {
            return Err(HashSigError::InvalidParams(format!(
                "msg_bits {msg_bits} not a positive multiple of {chunk_bits}"
            )));
        }
        Ok(WotsParams {
            chunk_bits,
            msg_bits,
        })
    }

    pub fn chunk_bits(&self) -> u32 {
        self.chunk_bits
    }

    pub fn msg_bits(&self) -> usize {
        self.msg_bits
    }

    /// 2^w: the number of distinct chunk values, and the public-key chain length.
    pub fn chain_len(&self) -> u32 {
        1 << self.chunk_bits
    }

    pub fn message_chunks(&self) -> usize {
        self.msg_bits / self.chunk_bits as usize
    }

    /// ceil(log_{2^w}(len * (2^w - 1) + 1)): enough base-2^w digits for the largest checksum.
    pub fn checksum_chunks(&self) -> usize {
        let max = self.message_chunks() as u64 * u64::from(self.chain_len() - 1);
        let mut digits = 0;
        let mut capacity = 1u64;
        while capacity <= max {
            capacity *= u64::from(self.chain_len());
            digits += 1;
        }
        digits
    }

    pub fn total_chunks(&self) -> usize {
        self.message_chunks() + self.checksum_chunks()
    }

    /// Message chunks (first bit most significant) followed by the big-endian
    /// base-2^w checksum of `sum(2^w - 1 - v)`.
    pub fn chunk_values(&self, msg: &BitVec) -> Result<Vec<u32>, HashSigError> {
        if msg.len() != self.msg_bits {
            return Err(HashSigError::LengthMismatch {
                expected: self.msg_bits,
                actual: msg.len(),
            });
        }
        let w = self.chunk_bits as usize;
        let mut values: Vec<u32> = (0..self.message_chunks())
            .map(|j| (0..w).fold(0u32, |acc, b| (acc << 1) | msg.get(j * w + b) as u32))
            .collect();
        let max = self.chain_len() - 1;
        let mut checksum: u64 = values.iter().map(|&v| u64::from(max - v)).sum();
        let mut digits = vec![0u32; self.checksum_chunks()];
        for d in digits.iter_mut().rev() {
            *d = (checksum % u64::from(self.chain_len())) as u32;
            checksum /= u64::from(self.chain_len());
        }
        debug_assert_eq!(checksum, 0);
        values.extend(digits);
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WotsKeypair {
    pub params: WotsParams,
    pub secret: Vec<Vec<u8>>,
    pub public: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WotsSignature(pub Vec<Vec<u8>>);

impl WotsSignature {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        wire::put_list(&mut buf, &self.0);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HashSigError> {
        let mut r = Reader::new(bytes);
        let sig = WotsSignature(r.list()?);
        r.finish()?;
        Ok(sig)
    }
}

/// Public element = secret hashed 2^w times (the last list hashed once more).
pub fn wots_public_from_secret(
    params: &WotsParams,
    secret: &[Vec<u8>],
    h: &dyn HashFunction,
) -> Vec<Vec<u8>> {
    secret
        .iter()
        .map(|s| hash_chain(h, s, params.chain_len()))
        .collect()
}

pub fn wots_keygen<R: RngCore + ?Sized>(
    params: WotsParams,
    h: &dyn HashFunction,
    rng: &mut R,
) -> WotsKeypair {
    let secret: Vec<Vec<u8>> = (0..params.total_chunks())
        .map(|_| {
            let mut s = vec![0u8; h.output_len()];
            rng.fill_bytes(&mut s);
            s
        })
        .collect();
    let public = wots_public_from_secret(&params, &secret, h);
    WotsKeypair {
        params,
        secret,
        public,
    }
}

pub fn wots_sign(
    params: &WotsParams,
    secret: &[Vec<u8>],
    msg: &BitVec,
    h: &dyn HashFunction,
) -> Result<WotsSignature, HashSigError> {
    if secret.len() != params.total_chunks() {
        return Err(HashSigError::LengthMismatch {
            expected: params.total_chunks(),
            actual: secret.len(),
        });
    }
    let values = params.chunk_values(msg)?;
    Ok(WotsSignature(
        secret
            .iter()
            .zip(values)
            .map(|(s, v)| hash_chain(h, s, v))
            .collect(),
    ))
}

pub fn wots_verify(
    params: &WotsParams,
    public: &[Vec<u8>],
    msg: &BitVec,
    sig: &WotsSignature,
    h: &dyn HashFunction,
) -> Result<bool, HashSigError> {
    for len in [public.len(), sig.0.len()] {
        if len != params.total_chunks() {
            return Err(HashSigError::LengthMismatch {
                expected: params.total_chunks(),
                actual: len,
            });
        }
    }
    let values = params.chunk_values(msg)?;
    Ok(sig
        .0
        .iter()
        .zip(values)
        .zip(public)
        .all(|((s, v), p)| hash_chain(h, s, params.chain_len() - v) == *p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::MixHash;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fixture() -> (MixHash, WotsKeypair) {
        let h = MixHash::default();
        let params = WotsParams::new(4, 16).unwrap();
        let kp = wots_keygen(params, &h, &mut ChaCha20Rng::seed_from_u64(11));
        (h, kp)
    }

    #[test]
    fn parameter_arithmetic() {
        let p = WotsParams::new(4, 16).unwrap();
        assert_eq!(p.chain_len(), 16);
        assert_eq!(p.message_chunks(), 4);
        // max checksum 4 * 15 = 60 needs two base-16 digits
        assert_eq!(p.checksum_chunks(), 2);
        let p = WotsParams::new(4, 256).unwrap();
        // 64 * 15 = 960 < 16^3
        assert_eq!(p.checksum_chunks(), 3);
        let p = WotsParams::new(1, 8).unwrap();
        // 8 < 2^4
        assert_eq!(p.checksum_chunks(), 4);
        assert!(WotsParams::new(3, 16).is_err());
        assert!(WotsParams::new(0, 16).is_err());
    }

    #[test]
    fn chunk_values_and_checksum() {
        let p = WotsParams::new(4, 16).unwrap();
        let msg: BitVec = "0000_1111_0001_1000".parse().unwrap();
        // chunks 0, 15, 1, 8 -> checksum 15 + 0 + 14 + 7 = 36 = 0x24
        assert_eq!(p.chunk_values(&msg).unwrap(), vec![0, 15, 1, 8, 2, 4]);
    }

    #[test]
    fn zero_chunk_reveals_secret() {
        let (h, kp) = fixture();
        let sig = wots_sign(&kp.params, &kp.secret, &BitVec::zeros(16), &h).unwrap();
        for i in 0..4 {
            assert_eq!(sig.0[i], kp.secret[i]);
        }
    }

    #[test]
    fn roundtrip() {
        let (h, kp) = fixture();
        let msg: BitVec = "1010_0110_1111_0001".parse().unwrap();
        let sig = wots_sign(&kp.params, &kp.secret, &msg, &h).unwrap();
        assert!(wots_verify(&kp.params, &kp.public, &msg, &sig, &h).unwrap());
        let mut other = msg.clone();
        other.flip(3);
        assert!(!wots_verify(&kp.params, &kp.public, &other, &sig, &h).unwrap());
    }

    #[test]
    fn forward_forgery_is_caught_by_checksum() {
        // Raising a message chunk lets a forger hash that signature element
        // forward, but the checksum falls and its chains cannot be reversed.
        let (h, kp) = fixture();
        let p = kp.params;
        let msg: BitVec = "0011_0101_0000_1001".parse().unwrap();
        let sig = wots_sign(&p, &kp.secret, &msg, &h).unwrap();
        let values = p.chunk_values(&msg).unwrap();
        for chunk in 0..p.message_chunks() {
            if values[chunk] == p.chain_len() - 1 {
                continue;
            }
            let mut forged_msg = msg.clone();
            // set the lowest bit of the chunk that is clear: increases it
            let w = p.chunk_bits() as usize;
            let bit = (0..w).rev().map(|b| chunk * w + b).find(|&i| !msg.get(i)).unwrap();
            forged_msg.set(bit, true);
            let delta = p.chunk_values(&forged_msg).unwrap()[chunk] - values[chunk];
            let mut forged_sig = sig.clone();
            forged_sig.0[chunk] = hash_chain(&h, &sig.0[chunk], delta);
            // the advanced message chain alone would check out ...
            assert_eq!(
                hash_chain(&h, &forged_sig.0[chunk], p.chain_len() - values[chunk] - delta),
                kp.public[chunk]
            );
            // ... but the stale checksum chains do not
            assert!(!wots_verify(&p, &kp.public, &forged_msg, &forged_sig, &h).unwrap());
        }
    }

    #[test]
    fn length_errors() {
        let (h, kp) = fixture();
        assert!(wots_sign(&kp.params, &kp.secret, &BitVec::zeros(12), &h).is_err());
        let sig = wots_sign(&kp.params, &kp.secret, &BitVec::zeros(16), &h).unwrap();
        let short = WotsSignature(sig.0[..5].to_vec());
        assert!(wots_verify(&kp.params, &kp.public, &BitVec::zeros(16), &short, &h).is_err());
        assert_eq!(WotsSignature::from_bytes(&sig.to_bytes()).unwrap(), sig);
    }
}
