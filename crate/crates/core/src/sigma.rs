//! Three-move sigma protocols, the Fiat-Shamir transform, and a Schnorr-style
//! discrete-log instantiation.

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::hash::HashFunction;
use crate::lattice::is_prime;
use crate::wire;

#[derive(Debug, Error)]
pub enum SigmaError {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("malformed {0}")]
    Malformed(&'static str),
}

/// Challenges are the integers `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChallengeSpace {
    pub size: u64,
}

impl ChallengeSpace {
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.size)
    }

    pub fn contains(&self, c: u64) -> bool {
        c < self.size
    }
}

pub trait SigmaRelation {
    type Secret;
    type Public;
    type State;

    fn challenge_space(&self) -> ChallengeSpace;
    fn commit<R: RngCore + ?Sized>(
        &self,
        secret: &Self::Secret,
        public: &Self::Public,
        rng: &mut R,
    ) -> (Vec<u8>, Self::State);
    fn respond(&self, st: &Self::State, c: u64) -> Vec<u8>;
    fn check(&self, public: &Self::Public, co: &[u8], c: u64, r: &[u8]) -> bool;
    fn encode_public(&self, public: &Self::Public) -> Vec<u8>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub co: Vec<u8>,
    pub c: u64,
    pub r: Vec<u8>,
    pub accepted: bool,
}

/// One run with a verifier-chosen challenge `c`.
pub fn run_with_challenge<S: SigmaRelation, R: RngCore + ?Sized>(
    rel: &S,
    secret: &S::Secret,
    public: &S::Public,
    c: u64,
    rng: &mut R,
) -> Transcript {
    let (co, st) = rel.commit(secret, public, rng);
    let r = rel.respond(&st, c);
    let accepted = rel.check(public, &co, c, &r);
    Transcript { co, c, r, accepted }
}

/// One interactive run; the verifier draws `c` uniformly.
pub fn run_interactive<S: SigmaRelation, R: RngCore + ?Sized>(
    rel: &S,
    secret: &S::Secret,
    public: &S::Public,
    rng: &mut R,
) -> Transcript {
    let (co, st) = rel.commit(secret, public, rng);
    let c = rel.challenge_space().sample(rng);
    let r = rel.respond(&st, c);
    let accepted = rel.check(public, &co, c, &r);
    Transcript { co, c, r, accepted }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FsSignature {
    pub co: Vec<u8>,
    pub r: Vec<u8>,
}

impl FsSignature {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        wire::put_bytes(&mut buf, &self.co);
        wire::put_bytes(&mut buf, &self.r);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SigmaError> {
        let mut r = wire::Reader::new(bytes);
        let parse = |r: &mut wire::Reader<'_>| -> Result<Self, crate::wire::WireError> {
            let co = r.bytes()?.to_vec();
            let resp = r.bytes()?.to_vec();
            Ok(FsSignature { co, r: resp })
        };
        let sig = parse(&mut r).map_err(|_| SigmaError::Malformed("signature"))?;
        r.finish().map_err(|_| SigmaError::Malformed("signature"))?;
        Ok(sig)
    }
}

/// `H(public ‖ co ‖ msg)` (each length-prefixed) reduced into the challenge
/// space without bias: digests in the final partial block are rejected and
/// the hash is repeated with a counter.
pub fn fs_challenge(
    space: ChallengeSpace,
    public: &[u8],
    co: &[u8],
    msg: &[u8],
    h: &dyn HashFunction,
) -> u64 {
    let mut input = Vec::new();
    wire::put_bytes(&mut input, public);
    wire::put_bytes(&mut input, co);
    wire::put_bytes(&mut input, msg);
    let width = h.output_len().min(8) as u32;
    let range: u128 = 1u128 << (8 * width);
    let limit = range - range % u128::from(space.size);
    let mut counter = 0u32;
    loop {
        let d = if counter == 0 {
            h.hash(&input)
        } else {
            h.hash_parts(&[&input, &counter.to_be_bytes()])
        };
        let v = d[..width as usize]
            .iter()
            .fold(0u128, |acc, &b| (acc << 8) | u128::from(b));
        if v < limit {
            return (v % u128::from(space.size)) as u64;
        }
        counter += 1;
    }
}

pub fn fs_sign<S: SigmaRelation, R: RngCore + ?Sized>(
    rel: &S,
    secret: &S::Secret,
    public: &S::Public,
    msg: &[u8],
    h: &dyn HashFunction,
    rng: &mut R,
) -> FsSignature {
    let (co, st) = rel.commit(secret, public, rng);
    let c = fs_challenge(rel.challenge_space(), &rel.encode_public(public), &co, msg, h);
    FsSignature {
        r: rel.respond(&st, c),
        co,
    }
}

pub fn fs_verify<S: SigmaRelation>(
    rel: &S,
    public: &S::Public,
    msg: &[u8],
    sig: &FsSignature,
    h: &dyn HashFunction,
) -> bool {
    let c = fs_challenge(rel.challenge_space(), &rel.encode_public(public), &sig.co, msg, h);
    rel.check(public, &sig.co, c, &sig.r)
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (u128::from(acc) * u128::from(base) % u128::from(m)) as u64;
        }
        base = (u128::from(base) * u128::from(base) % u128::from(m)) as u64;
        exp >>= 1;
    }
    acc
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Multiplicative order of `g` mod prime `p`, from the factorisation of `p - 1`.
pub fn multiplicative_order(g: u64, p: u64) -> u64 {
    let mut order = p - 1;
    for f in prime_factors(p - 1) {
        while order % f == 0 && mod_pow(g, order / f, p) == 1 {
            order /= f;
        }
    }
    order
}

/// Schnorr identification in the subgroup generated by `g` mod `p`:
/// `y = g^x`, `co = g^k`, `r = k + c·x mod n`, accept iff `g^r = co·y^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DlogRelation {
    pub p: u64,
    pub g: u64,
    pub order: u64,
    space: ChallengeSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DlogState {
    k: u64,
    x: u64,
}

/// Schnorr group with a prime-order subgroup of about 2^30 elements, used by
/// the named signature instance.
pub const DLOG_P: u64 = 2_147_483_579;
pub const DLOG_G: u64 = 4;

impl DlogRelation {
    /// Challenges span `0..f` for the smallest prime factor `f` of the
    /// order, which is the whole order when it is prime.
    pub fn new(p: u64, g: u64) -> Result<Self, SigmaError> {
        let order = Self::validate(p, g)?;
        let smallest = prime_factors(order)[0];
        Self::with_challenges(p, g, smallest)
    }

    /// Challenge space `0..size`. `size` may not exceed the smallest prime
    /// factor of the order, so any two distinct challenges differ by a unit.
    pub fn with_challenges(p: u64, g: u64, size: u64) -> Result<Self, SigmaError> {
        let order = Self::validate(p, g)?;
        let smallest = prime_factors(order)[0];
        if size < 2 || size > smallest {
            return Err(SigmaError::InvalidGroup(format!(
                "challenge space {size} must lie in 2..={smallest}"
            )));
        }
        Ok(DlogRelation {
            p,
            g,
            order,
            space: ChallengeSpace { size },
        })
    }

    fn validate(p: u64, g: u64) -> Result<u64, SigmaError> {
        if p < 5 || p >= 1 << 32 || !is_prime(p) {
            return Err(SigmaError::InvalidGroup(format!("{p} is not a prime in [5, 2^32)")));
        }
        if g < 2 || g >= p {
            return Err(SigmaError::InvalidGroup(format!("generator {g} outside 2..{p}")));
        }
        let order = multiplicative_order(g, p);
        if order < 2 {
            return Err(SigmaError::InvalidGroup(format!("{g} has order {order}")));
        }
        Ok(order)
    }

    pub fn keygen<R: RngCore + ?Sized>(&self, rng: &mut R) -> (u64, u64) {
        let x = rng.gen_range(0..self.order);
        (x, self.public_for(x))
    }

    pub fn public_for(&self, x: u64) -> u64 {
        mod_pow(self.g, x, self.p)
    }

    /// Special soundness: two accepting transcripts sharing `co` with distinct
    /// challenges reveal `x = (r1 - r2) / (c1 - c2) mod n`.
    pub fn extract(&self, t1: &Transcript, t2: &Transcript) -> Option<u64> {
        if t1.co != t2.co || t1.c == t2.c || !t1.accepted || !t2.accepted {
            return None;
        }
        let n = self.order;
        let (r1, r2) = (decode_u64(&t1.r)?, decode_u64(&t2.r)?);
        let dr = (r1 + n - r2 % n) % n;
        let dc = (t1.c % n + n - t2.c % n) % n;
        let inv = mod_inverse(dc, n)?;
        Some((u128::from(dr) * u128::from(inv) % u128::from(n)) as u64)
    }
}

fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (i128::from(n), i128::from(a));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    (r == 1).then(|| t.rem_euclid(i128::from(n)) as u64)
}

fn decode_u64(b: &[u8]) -> Option<u64> {
    Some(u64::from_be_bytes(b.try_into().ok()?))
}

impl SigmaRelation for DlogRelation {
    type Secret = u64;
    type Public = u64;
    type State = DlogState;

    fn challenge_space(&self) -> ChallengeSpace {
        self.space
    }

    fn commit<R: RngCore + ?Sized>(&self, secret: &u64, _public: &u64, rng: &mut R) -> (Vec<u8>, DlogState) {
        let k = rng.gen_range(0..self.order);
        let co = mod_pow(self.g, k, self.p);
        (co.to_be_bytes().to_vec(), DlogState { k, x: *secret % self.order })
    }

    fn respond(&self, st: &DlogState, c: u64) -> Vec<u8> {
        let n = u128::from(self.order);
        let r = (u128::from(st.k) + u128::from(c) * u128::from(st.x)) % n;
        (r as u64).to_be_bytes().to_vec()
    }

    fn check(&self, public: &u64, co: &[u8], c: u64, r: &[u8]) -> bool {
        let (Some(co), Some(r)) = (decode_u64(co), decode_u64(r)) else {
            return false;
        };
        if !self.space.contains(c) || co == 0 || co >= self.p || r >= self.order || *public >= self.p {
            return false;
        }
        let lhs = mod_pow(self.g, r, self.p);
        let rhs = u128::from(co) * u128::from(mod_pow(*public, c, self.p)) % u128::from(self.p);
        u128::from(lhs) == rhs
    }

    fn encode_public(&self, public: &u64) -> Vec<u8> {
        public.to_be_bytes().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::MixHash;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn orders_by_enumeration() {
        let naive = |g: u64, p: u64| (1..p).find(|&k| mod_pow(g, k, p) == 1).unwrap();
        for (p, g) in [(23, 2), (47, 2), (101, 3), (97, 5)] {
            assert_eq!(multiplicative_order(g, p), naive(g, p));
        }
        assert_eq!(multiplicative_order(2, 23), 11);
        assert_eq!(multiplicative_order(DLOG_G, DLOG_P), (DLOG_P - 1) / 2);
    }

    #[test]
    fn group_validation() {
        assert!(DlogRelation::new(22, 2).is_err());
        assert!(DlogRelation::new(23, 1).is_err());
        // 22 = -1 has order 2, which still admits a two-element challenge space
        assert_eq!(DlogRelation::new(23, 22).unwrap().order, 2);
        assert!(DlogRelation::new(23, 23).is_err());
        assert!(DlogRelation::with_challenges(23, 2, 16).is_err());
        assert!(DlogRelation::with_challenges(47, 2, 16).is_ok());
    }

    #[test]
    fn honest_runs_accept() {
        let rel = DlogRelation::new(23, 2).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        // x = 0, y = 1
        assert!(run_interactive(&rel, &0, &1, &mut rng).accepted);
        for _ in 0..200 {
            let (x, y) = rel.keygen(&mut rng);
            let t = run_interactive(&rel, &x, &y, &mut rng);
            assert!(t.accepted);
            let co = decode_u64(&t.co).unwrap();
            let r = decode_u64(&t.r).unwrap();
            assert_eq!(mod_pow(2, r, 23), co * mod_pow(y, t.c, 23) % 23);
        }
    }

    #[test]
    fn wrong_secret_passes_one_challenge_in_sixteen() {
        let rel = DlogRelation::with_challenges(47, 2, 16).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (x, y) = rel.keygen(&mut rng);
        let wrong = (x + 5) % rel.order;
        let accepted = (0..16)
            .filter(|&c| run_with_challenge(&rel, &wrong, &y, c, &mut rng).accepted)
            .count();
        assert_eq!(accepted, 1);
    }

    #[test]
    fn replay_with_other_challenge_fails() {
        let rel = DlogRelation::new(DLOG_P, DLOG_G).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (x, y) = rel.keygen(&mut rng);
        let t = run_with_challenge(&rel, &x, &y, 7, &mut rng);
        assert!(t.accepted);
        assert!(!rel.check(&y, &t.co, 8, &t.r));
    }

    #[test]
    fn special_soundness_recovers_secret() {
        let rel = DlogRelation::new(DLOG_P, DLOG_G).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (x, y) = rel.keygen(&mut rng);
        let (co, st) = rel.commit(&x, &y, &mut rng);
        let t = |c: u64| {
            let r = rel.respond(&st, c);
            Transcript { co: co.clone(), c, accepted: rel.check(&y, &co, c, &r), r }
        };
        assert_eq!(rel.extract(&t(3), &t(1000)), Some(x));
    }

    #[test]
    fn fiat_shamir_roundtrip_and_tamper() {
        let h = MixHash::default();
        let rel = DlogRelation::new(DLOG_P, DLOG_G).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (x, y) = rel.keygen(&mut rng);
        let sig = fs_sign(&rel, &x, &y, b"hello", &h, &mut rng);
        assert!(fs_verify(&rel, &y, b"hello", &sig, &h));
        assert!(!fs_verify(&rel, &y, b"hellp", &sig, &h));
        let mut bad = sig.clone();
        bad.co[7] ^= 1;
        assert!(!fs_verify(&rel, &y, b"hello", &bad, &h));
        let again = fs_sign(&rel, &x, &y, b"hello", &h, &mut rng);
        assert_ne!(again.co, sig.co);
        let det = |seed| fs_sign(&rel, &x, &y, b"m", &h, &mut ChaCha20Rng::seed_from_u64(seed));
        assert_eq!(det(9), det(9));
        assert_eq!(FsSignature::from_bytes(&sig.to_bytes()).unwrap(), sig);
    }

    #[test]
    fn challenge_reduction_is_in_range_and_message_bound() {
        let h = MixHash::default();
        for size in [2u64, 3, 16, 1000, (1 << 40) + 3] {
            let c = fs_challenge(ChallengeSpace { size }, b"pk", b"co", b"m", &h);
            assert!(c < size);
        }
        let space = ChallengeSpace { size: 1 << 62 };
        let mut seen = std::collections::HashSet::new();
        for i in 0..2000u32 {
            assert!(seen.insert(fs_challenge(space, b"pk", b"co", &i.to_be_bytes(), &h)));
        }
    }
}
