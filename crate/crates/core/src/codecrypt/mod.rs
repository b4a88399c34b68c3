//! McEliece-style encryption over small binary linear codes.
//!
//! Codes are kept in systematic form `G = [I_k | A]`, so the message is the
//! first `k` coordinates of a codeword. Decoding is by syndrome table.

mod matrix;

pub use matrix::BinaryMatrix;

use std::collections::HashMap;

use rand::seq::{index, SliceRandom};
use rand::RngCore;
use thiserror::Error;

pub use crate::bits::hamming_weight;
use crate::bits::BitVec;
use crate::wire::{self, Reader, WireError};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("word is not within the decoding radius")]
    DecodeFailure,
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Wire(#[from] WireError),
}

/// A systematic `[n, k]` binary code correcting up to `t` errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    n: usize,
    k: usize,
    t: usize,
    parity: BinaryMatrix,
    generator: BinaryMatrix,
    syndromes: HashMap<BitVec, BitVec>,
}

/// Calls `f` on every subset of `0..n` of size `size`, in lexicographic order.
fn for_each_subset(n: usize, size: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if left == 0 {
            f(cur);
            return;
        }
        for i in start..=n - left {
            cur.push(i);
            go(i + 1, n, left - 1, cur, f);
            cur.pop();
        }
    }
    if size <= n {
        go(0, n, size, &mut Vec::with_capacity(size), f);
    }
}

impl LinearCode {
    /// Builds `G = [I_k | A]` from the `k × (n-k)` block `A` and tabulates
    /// the syndrome of every error pattern of weight at most `t`. Fails if two
    /// such patterns share a syndrome.
    pub fn systematic(a: BinaryMatrix, t: usize) -> Result<Self, CodeError> {
        let k = a.rows();
        let r = a.cols();
        let n = k + r;
        if k == 0 || r == 0 {
            return Err(CodeError::InvalidParams("empty code".into()));
        }
        let mut generator = BinaryMatrix::zeros(k, n);
        for i in 0..k {
            generator.set(i, i, true);
            for j in a.row(i).iter_ones() {
                generator.set(i, k + j, true);
            }
        }
        let mut syndromes = HashMap::new();
        let mut clash = false;
        for w in 0..=t {
            for_each_subset(n, w, &mut |positions| {
                let mut e = BitVec::zeros(n);
                for &p in positions {
                    e.set(p, true);
                }
                let s = Self::syndrome_of(&a, k, &e);
                if syndromes.insert(s, e).is_some() {
                    clash = true;
                }
            });
        }
        if clash {
            return Err(CodeError::InvalidParams(format!(
                "code cannot correct {t} errors: syndromes collide"
            )));
        }
        Ok(LinearCode {
            n,
            k,
            t,
            parity: a,
            generator,
            syndromes,
        })
    }

    fn syndrome_of(a: &BinaryMatrix, k: usize, word: &BitVec) -> BitVec {
        let mut s = a.vec_mul(&word.slice(0, k));
        s.xor_assign(&word.slice(k, a.cols()));
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn generator(&self) -> &BinaryMatrix {
        &self.generator
    }

    /// The parity block `A` of `G = [I_k | A]`.
    pub fn parity_block(&self) -> &BinaryMatrix {
        &self.parity
    }

    pub fn encode(&self, m: &BitVec) -> Result<BitVec, CodeError> {
        check_len(self.k, m)?;
        Ok(self.generator.vec_mul(m))
    }

    pub fn syndrome(&self, word: &BitVec) -> Result<BitVec, CodeError> {
        check_len(self.n, word)?;
        Ok(Self::syndrome_of(&self.parity, self.k, word))
    }

    /// Corrects up to `t` errors and returns the message coordinates.
    pub fn decode(&self, word: &BitVec) -> Result<BitVec, CodeError> {
        let s = self.syndrome(word)?;
        let e = self.syndromes.get(&s).ok_or(CodeError::DecodeFailure)?;
        Ok(word.xor(e).slice(0, self.k))
    }
}

fn check_len(expected: usize, v: &BitVec) -> Result<(), CodeError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(CodeError::LengthMismatch {
            expected,
            actual: v.len(),
        })
    }
}

/// The `[2^r - 1, 2^r - 1 - r]` Hamming code with `t = 1`.
///
/// Data coordinate `i` carries the i-th smallest `r`-bit value of weight at
/// least two as its parity-check column; the parity coordinates carry the
/// unit columns.
pub fn hamming_code(r: usize) -> Result<LinearCode, CodeError> {
    if !(2..=12).contains(&r) {
        return Err(CodeError::InvalidParams(format!("r = {r} outside 2..=12")));
    }
    let columns: Vec<u64> = (1u64..1 << r).filter(|v| v.count_ones() >= 2).collect();
    let a = BinaryMatrix::from_rows(columns.iter().map(|&c| BitVec::from_u64(c, r)).collect());
    LinearCode::systematic(a, 1)
}

/// Nearest codeword by exhaustive search; ties go to the smallest message
/// read as an integer.
pub fn brute_force_decode(code: &LinearCode, word: &BitVec) -> Result<BitVec, CodeError> {
    if code.k > 20 {
        return Err(CodeError::TooLarge(format!("2^{} messages", code.k)));
    }
    check_len(code.n, word)?;
    let mut best: Option<(usize, u64)> = None;
    for m in 0..1u64 << code.k {
        let c = code.generator.vec_mul(&BitVec::from_u64(m, code.k));
        let d = hamming_weight(&c.xor(word));
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, m));
        }
    }
    Ok(BitVec::from_u64(best.expect("k >= 1").1, code.k))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McEliecePublicKey {
    pub g_prime: BinaryMatrix,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McEliecePrivateKey {
    pub s: BinaryMatrix,
    pub s_inv: BinaryMatrix,
    /// `P` as a permutation vector: coordinate `i` moves to `perm[i]`.
    pub perm: Vec<usize>,
    pub code: LinearCode,
}

impl McEliecePrivateKey {
    pub fn permutation_matrix(&self) -> BinaryMatrix {
        BinaryMatrix::permutation(&self.perm)
    }
}

fn apply_perm(x: &BitVec, perm: &[usize]) -> BitVec {
    let mut out = BitVec::zeros(x.len());
    for i in x.iter_ones() {
        out.set(perm[i], true);
    }
    out
}

fn apply_inverse_perm(x: &BitVec, perm: &[usize]) -> BitVec {
    BitVec::from_bools(&perm.iter().map(|&p| x.get(p)).collect::<Vec<_>>())
}

/// Random invertible `S` (rejection sampled) and random permutation `P`.
pub fn mceliece_keygen<R: RngCore + ?Sized>(
    code: &LinearCode,
    rng: &mut R,
) -> (McEliecePublicKey, McEliecePrivateKey) {
    let k = code.k();
    let s = loop {
        let s = BinaryMatrix::random(k, k, rng);
        if s.rank() == k {
            break s;
        }
    };
    let mut perm: Vec<usize> = (0..code.n()).collect();
    perm.shuffle(rng);
    mceliece_keygen_from_parts(code, s, perm).expect("sampled parts are valid")
}

/// Builds a keypair from explicit `S` and `P`; used to pin identity keys in tests.
pub fn mceliece_keygen_from_parts(
    code: &LinearCode,
    s: BinaryMatrix,
    perm: Vec<usize>,
) -> Result<(McEliecePublicKey, McEliecePrivateKey), CodeError> {
    let s_inv = s
        .inverse()
        .filter(|_| s.rows() == code.k())
        .ok_or_else(|| CodeError::InvalidParams("S must be an invertible k x k matrix".into()))?;
    let mut seen = vec![false; code.n()];
    let valid = perm
        .iter()
        .all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true));
    if perm.len() != code.n() || !valid {
        return Err(CodeError::InvalidParams("P is not a permutation of 0..n".into()));
    }
    let sg = s.mul(code.generator());
    let g_prime =
        BinaryMatrix::from_rows(sg.row_vecs().iter().map(|r| apply_perm(r, &perm)).collect());
    Ok((
        McEliecePublicKey {
            g_prime,
            t: code.t(),
        },
        McEliecePrivateKey {
            s,
            s_inv,
            perm,
            code: code.clone(),
        },
    ))
}

/// `c = m·G' + e` with `e` of weight exactly `t`.
pub fn mceliece_encrypt<R: RngCore + ?Sized>(
    pk: &McEliecePublicKey,
    m: &BitVec,
    rng: &mut R,
) -> Result<BitVec, CodeError> {
    check_len(pk.g_prime.rows(), m)?;
    let n = pk.g_prime.cols();
    if pk.t > n {
        return Err(CodeError::InvalidParams(format!("t = {} exceeds n = {n}", pk.t)));
    }
    let mut c = pk.g_prime.vec_mul(m);
    for i in index::sample(rng, n, pk.t) {
        c.flip(i);
    }
    Ok(c)
}

/// Undo `P`, decode to `m·S`, multiply by `S⁻¹`.
pub fn mceliece_decrypt(sk: &McEliecePrivateKey, c: &BitVec) -> Result<BitVec, CodeError> {
    check_len(sk.code.n(), c)?;
    let unpermuted = apply_inverse_perm(c, &sk.perm);
    let ms = sk.code.decode(&unpermuted)?;
    Ok(sk.s_inv.vec_mul(&ms))
}

fn put_matrix(buf: &mut Vec<u8>, m: &BinaryMatrix) {
    for row in m.row_vecs() {
        buf.extend_from_slice(&row.to_bytes());
    }
}

fn read_matrix(r: &mut Reader<'_>, rows: usize, cols: usize) -> Result<BinaryMatrix, CodeError> {
    let width = cols.div_ceil(8);
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let row = BitVec::from_bytes(r.take(width)?, cols)
            .ok_or_else(|| WireError::Invalid("nonzero row padding".into()))?;
        out.push(row);
    }
    if rows == 0 {
        return Ok(BinaryMatrix::zeros(0, cols));
    }
    Ok(BinaryMatrix::from_rows(out))
}

fn read_header(r: &mut Reader<'_>) -> Result<(usize, usize, usize), CodeError> {
    let n = r.u32()? as usize;
    let k = r.u32()? as usize;
    let t = r.u32()? as usize;
    if k == 0 || k >= n || n > 1 << 16 {
        return Err(WireError::Invalid(format!("bad dimensions n={n} k={k}")).into());
    }
    Ok((n, k, t))
}

impl McEliecePublicKey {
    /// Header `(n, k, t)` as 4-byte big-endian, then the rows of `G'` packed.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        wire::put_u32(&mut buf, self.g_prime.cols() as u32);
        wire::put_u32(&mut buf, self.g_prime.rows() as u32);
        wire::put_u32(&mut buf, self.t as u32);
        put_matrix(&mut buf, &self.g_prime);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodeError> {
        let mut r = Reader::new(bytes);
        let (n, k, t) = read_header(&mut r)?;
        let g_prime = read_matrix(&mut r, k, n)?;
        r.finish()?;
        Ok(McEliecePublicKey { g_prime, t })
    }
}

impl McEliecePrivateKey {
    /// Header `(n, k, t)`, then `A`, `S` packed by rows, then `P` as 4-byte indices.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        wire::put_u32(&mut buf, self.code.n() as u32);
        wire::put_u32(&mut buf, self.code.k() as u32);
        wire::put_u32(&mut buf, self.code.t() as u32);
        put_matrix(&mut buf, self.code.parity_block());
        put_matrix(&mut buf, &self.s);
        for &p in &self.perm {
            wire::put_u32(&mut buf, p as u32);
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodeError> {
        let mut r = Reader::new(bytes);
        let (n, k, t) = read_header(&mut r)?;
        let a = read_matrix(&mut r, k, n - k)?;
        let s = read_matrix(&mut r, k, k)?;
        let perm = (0..n)
            .map(|_| r.u32().map(|p| p as usize))
            .collect::<Result<Vec<_>, _>>()?;
        r.finish()?;
        let code = LinearCode::systematic(a, t)?;
        let (_, sk) = mceliece_keygen_from_parts(&code, s, perm)?;
        Ok(sk)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn all_messages(k: usize) -> impl Iterator<Item = BitVec> {
        (0..1u64 << k).map(move |m| BitVec::from_u64(m, k))
    }

    #[test]
    fn hamming_parameters() {
        let c = hamming_code(3).unwrap();
        assert_eq!((c.n(), c.k(), c.t()), (7, 4, 1));
        let c = hamming_code(4).unwrap();
        assert_eq!((c.n(), c.k(), c.t()), (15, 11, 1));
        assert!(hamming_code(1).is_err());
    }

    #[test]
    fn hamming_corrects_every_single_error() {
        let code = hamming_code(3).unwrap();
        for m in all_messages(4) {
            let c = code.encode(&m).unwrap();
            assert_eq!(code.decode(&c).unwrap(), m);
            for j in 0..7 {
                let mut w = c.clone();
                w.flip(j);
                assert_eq!(code.decode(&w).unwrap(), m, "m={m} j={j}");
            }
        }
    }

    #[test]
    fn syndrome_decoder_matches_brute_force_everywhere() {
        let code = hamming_code(3).unwrap();
        for w in 0..128u64 {
            let word = BitVec::from_u64(w, 7);
            assert_eq!(code.decode(&word).unwrap(), brute_force_decode(&code, &word).unwrap());
        }
    }

    #[test]
    fn brute_force_limits() {
        let code = hamming_code(5).unwrap();
        assert_eq!(code.k(), 26);
        assert!(matches!(
            brute_force_decode(&code, &BitVec::zeros(31)),
            Err(CodeError::TooLarge(_))
        ));
    }

    #[test]
    fn identity_keys_give_public_generator() {
        let code = hamming_code(3).unwrap();
        let (pk, sk) =
            mceliece_keygen_from_parts(&code, BinaryMatrix::identity(4), (0..7).collect()).unwrap();
        assert_eq!(&pk.g_prime, code.generator());
        let zero_t = McEliecePublicKey { t: 0, ..pk.clone() };
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for m in all_messages(4) {
            let c = mceliece_encrypt(&zero_t, &m, &mut rng).unwrap();
            assert_eq!(c, pk.g_prime.vec_mul(&m));
            assert_eq!(mceliece_decrypt(&sk, &c).unwrap(), code.decode(&c).unwrap());
        }
    }

    #[test]
    fn key_algebra() {
        let code = hamming_code(3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..100 {
            let (pk, sk) = mceliece_keygen(&code, &mut rng);
            assert_eq!(sk.s.rank(), 4);
            assert!(sk.s.mul(&sk.s_inv).is_identity());
            let p = sk.permutation_matrix();
            assert!(p.mul(&p.transpose()).is_identity());
            assert_eq!(pk.g_prime, sk.s.mul(code.generator()).mul(&p));
        }
    }

    #[test]
    fn public_row_space_is_permuted_code() {
        let code = hamming_code(3).unwrap();
        let (pk, sk) = mceliece_keygen(&code, &mut ChaCha20Rng::seed_from_u64(3));
        let mut public: Vec<BitVec> = all_messages(4).map(|m| pk.g_prime.vec_mul(&m)).collect();
        let mut permuted: Vec<BitVec> = all_messages(4)
            .map(|m| apply_perm(&code.encode(&m).unwrap(), &sk.perm))
            .collect();
        public.sort_by_key(BitVec::to_u64);
        permuted.sort_by_key(BitVec::to_u64);
        assert_eq!(public, permuted);
    }

    #[test]
    fn roundtrip_and_error_weight() {
        for r in [3, 4] {
            let code = hamming_code(r).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(r as u64);
            for _ in 0..20 {
                let (pk, sk) = mceliece_keygen(&code, &mut rng);
                for m in all_messages(code.k()) {
                    let c = mceliece_encrypt(&pk, &m, &mut rng).unwrap();
                    assert_eq!(hamming_weight(&c.xor(&pk.g_prime.vec_mul(&m))), 1);
                    assert_eq!(mceliece_decrypt(&sk, &c).unwrap(), m);
                }
            }
        }
    }

    #[test]
    fn fresh_errors_differ() {
        let code = hamming_code(3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (pk, _) = mceliece_keygen(&code, &mut rng);
        let m: BitVec = "1011".parse().unwrap();
        let first = mceliece_encrypt(&pk, &m, &mut rng).unwrap();
        // 1/7 chance of a repeat per draw
        assert!((0..20).any(|_| mceliece_encrypt(&pk, &m, &mut rng).unwrap() != first));
    }

    #[test]
    fn double_errors_never_panic() {
        let code = hamming_code(3).unwrap();
        let (pk, sk) = mceliece_keygen(&code, &mut ChaCha20Rng::seed_from_u64(5));
        let mut wrong = 0;
        for m in all_messages(4) {
            let c = pk.g_prime.vec_mul(&m);
            for i in 0..7 {
                for j in i + 1..7 {
                    let mut w = c.clone();
                    w.flip(i);
                    w.flip(j);
                    match mceliece_decrypt(&sk, &w) {
                        Ok(out) if out == m => {}
                        _ => wrong += 1,
                    }
                }
            }
        }
        // distance 3: two errors always land nearer another codeword
        assert_eq!(wrong, 16 * 21);
    }

    #[test]
    fn key_serialization() {
        let code = hamming_code(4).unwrap();
        let (pk, sk) = mceliece_keygen(&code, &mut ChaCha20Rng::seed_from_u64(6));
        let bytes = pk.to_bytes();
        assert_eq!(&bytes[..12], &[0, 0, 0, 15, 0, 0, 0, 11, 0, 0, 0, 1]);
        assert_eq!(bytes.len(), 12 + 11 * 2);
        assert_eq!(McEliecePublicKey::from_bytes(&bytes).unwrap(), pk);
        assert_eq!(McEliecePrivateKey::from_bytes(&sk.to_bytes()).unwrap(), sk);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(hamming_weight(&BitVec::zeros(9)), 0);
        assert_eq!(hamming_weight(&"1101".parse().unwrap()), 3);
        let a: BitVec = "10110".parse().unwrap();
        assert_eq!(hamming_weight(&a.xor(&a)), 0);
    }
}
