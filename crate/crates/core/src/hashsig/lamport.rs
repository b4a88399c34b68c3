use rand::RngCore;

use super::HashSigError;
use crate::bits::BitVec;
use crate::hash::HashFunction;
use crate::wire::{self, Reader};

/// Two lists of hashes, one per message-bit value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LamportPublicKey {
    pub lists: [Vec<Vec<u8>>; 2],
}

impl LamportPublicKey {
    pub fn msg_bits(&self) -> usize {
        self.lists[0].len()
    }

    /// `list0 ‖ list1` element bytes concatenated, no length prefixes.
    pub fn concat_lists(&self) -> Vec<u8> {
        self.lists.iter().flatten().flatten().copied().collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        wire::put_list(&mut buf, &self.lists[0]);
        wire::put_list(&mut buf, &self.lists[1]);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HashSigError> {
        let mut r = Reader::new(bytes);
        let pk = Self::read(&mut r)?;
        r.finish()?;
        Ok(pk)
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self, HashSigError> {
        let l0 = r.list()?;
        let l1 = r.list()?;
        if l0.len() != l1.len() {
            return Err(HashSigError::LengthMismatch {
                expected: l0.len(),
                actual: l1.len(),
            });
        }
        Ok(LamportPublicKey { lists: [l0, l1] })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LamportKeypair {
    pub secret: [Vec<Vec<u8>>; 2],
    pub public: LamportPublicKey,
}

impl LamportKeypair {
    pub fn msg_bits(&self) -> usize {
        self.secret[0].len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LamportSignature(pub Vec<Vec<u8>>);

impl LamportSignature {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        wire::put_list(&mut buf, &self.0);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HashSigError> {
        let mut r = Reader::new(bytes);
        let sig = LamportSignature(r.list()?);
        r.finish()?;
        Ok(sig)
    }
}

pub fn lamport_keygen<R: RngCore + ?Sized>(
    msg_bits: usize,
    h: &dyn HashFunction,
    rng: &mut R,
) -> LamportKeypair {
    assert!(msg_bits > 0, "msg_bits must be positive");
    let n = h.output_len();
    let mut draw = || {
        (0..msg_bits)
            .map(|_| {
                let mut s = vec![0u8; n];
                rng.fill_bytes(&mut s);
                s
            })
            .collect::<Vec<_>>()
    };
    let secret = [draw(), draw()];
    let public = LamportPublicKey {
        lists: [
            secret[0].iter().map(|s| h.hash(s)).collect(),
            secret[1].iter().map(|s| h.hash(s)).collect(),
        ],
    };
    LamportKeypair { secret, public }
}

/// Reveals `secret[m_i][i]` for every message bit `m_i`.
pub fn lamport_sign(kp: &LamportKeypair, msg: &BitVec) -> Result<LamportSignature, HashSigError> {
    if msg.len() != kp.msg_bits() {
        return Err(HashSigError::LengthMismatch {
            expected: kp.msg_bits(),
            actual: msg.len(),
        });
    }
    Ok(LamportSignature(
        msg.iter()
            .enumerate()
            .map(|(i, bit)| kp.secret[bit as usize][i].clone())
            .collect(),
    ))
}

pub fn lamport_verify(
    pk: &LamportPublicKey,
    msg: &BitVec,
    sig: &LamportSignature,
    h: &dyn HashFunction,
) -> Result<bool, HashSigError> {
    let bits = pk.msg_bits();
    for len in [msg.len(), sig.0.len(), pk.lists[1].len()] {
        if len != bits {
            return Err(HashSigError::LengthMismatch {
                expected: bits,
                actual: len,
            });
        }
    }
    Ok(msg
        .iter()
        .zip(&sig.0)
        .enumerate()
        .all(|(i, (bit, s))| h.hash(s) == pk.lists[bit as usize][i]))
}
