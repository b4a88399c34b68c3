//! LWE samples, Regev bit encryption, and exhaustive SIS/SVP oracles for
//! small instances.
//!
//! The error distribution is uniform over `[-B, B]`. Residues are centered
//! into `(-q/2, q/2]`.

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::wire::{self, Reader, WireError};

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
    #[error(transparent)]
    Wire(#[from] WireError),
}

pub(crate) fn is_prime(q: u64) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

/// Representative of `x mod q` in `(-q/2, q/2]`.
pub fn centered(x: u64, q: u64) -> i64 {
    let x = x % q;
    if 2 * x > q {
        x as i64 - q as i64
    } else {
        x as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LweParams {
    pub n: usize,
    pub q: u64,
    pub m: usize,
    /// Error bound `B`: errors are uniform over `[-B, B]`.
    pub bound: u64,
}

impl LweParams {
    pub fn new(n: usize, q: u64, m: usize, bound: u64) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::InvalidParams("n must be positive".into()));
        }
        if q < 5 || q >= 1 << 31 || !is_prime(q) {
            return Err(LatticeError::InvalidParams(format!("q = {q} is not a prime in [5, 2^31)")));
        }
        if m < n {
            return Err(LatticeError::InvalidParams(format!("m = {m} < n = {n}")));
        }
        if 2 * bound >= q {
            return Err(LatticeError::InvalidParams(format!("B = {bound} too large for q = {q}")));
        }
        Ok(LweParams { n, q, m, bound })
    }

    /// Parameters for which every decryption is correct; rejects the rest.
    pub fn guaranteed(n: usize, q: u64, m: usize, bound: u64) -> Result<Self, LatticeError> {
        let p = Self::new(n, q, m, bound)?;
        if !p.is_guaranteed_correct() {
            return Err(LatticeError::InvalidParams(format!(
                "m*B = {} too large for exact decryption at q = {q}",
                m as u64 * bound
            )));
        }
        Ok(p)
    }

    /// True when the accumulated error `|E| <= m*B` can never move a
    /// ciphertext across the decision threshold for either bit:
    /// `4*floor(q/2) - 4*m*B >= q`. For odd `q` this is `4*m*B <= q - 2`,
    /// slightly stronger than `m*B < q/4`.
    pub fn is_guaranteed_correct(&self) -> bool {
        let total = self.m as u64 * self.bound;
        4 * (self.q / 2) >= self.q + 4 * total
    }

    /// Error rate `B / q`.
    pub fn alpha(&self) -> f64 {
        self.bound as f64 / self.q as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LweSample {
    pub a: Vec<u64>,
    pub b: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LweKeypair {
    pub params: LweParams,
    pub secret: Vec<u64>,
    pub public: Vec<LweSample>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LweCiphertext {
    pub a: Vec<u64>,
    pub b: u64,
}

impl LweCiphertext {
    /// Componentwise sum; decrypts to the XOR of the bits while the combined
    /// error stays inside the threshold.
    pub fn add(&self, other: &LweCiphertext, q: u64) -> LweCiphertext {
        LweCiphertext {
            a: self.a.iter().zip(&other.a).map(|(x, y)| (x + y) % q).collect(),
            b: (self.b + other.b) % q,
        }
    }
}

pub fn inner(s: &[u64], a: &[u64], q: u64) -> u64 {
    s.iter().zip(a).fold(0, |acc, (x, y)| (acc + x * y) % q)
}

pub fn sample_error<R: RngCore + ?Sized>(bound: u64, rng: &mut R) -> i64 {
    rng.gen_range(-(bound as i64)..=bound as i64)
}

fn reduce(x: i64, q: u64) -> u64 {
    x.rem_euclid(q as i64) as u64
}

/// `(a, <s, a> + e mod q)` with `a` uniform and `e` uniform in `[-B, B]`.
pub fn lwe_sample<R: RngCore + ?Sized>(
    s: &[u64],
    params: &LweParams,
    rng: &mut R,
) -> Result<LweSample, LatticeError> {
    if s.len() != params.n {
        return Err(LatticeError::LengthMismatch {
            expected: params.n,
            actual: s.len(),
        });
    }
    let a: Vec<u64> = (0..params.n).map(|_| rng.gen_range(0..params.q)).collect();
    let e = sample_error(params.bound, rng);
    let b = (inner(s, &a, params.q) + reduce(e, params.q)) % params.q;
    Ok(LweSample { a, b })
}

pub fn lwe_keygen<R: RngCore + ?Sized>(params: LweParams, rng: &mut R) -> LweKeypair {
    let secret: Vec<u64> = (0..params.n).map(|_| rng.gen_range(0..params.q)).collect();
    let public = (0..params.m)
        .map(|_| lwe_sample(&secret, &params, rng).expect("secret has length n"))
        .collect();
    LweKeypair {
        params,
        secret,
        public,
    }
}

/// Sums the selected samples and adds `bit * floor(q/2)` to `b`.
pub fn encrypt_bit_with_subset(
    params: &LweParams,
    public: &[LweSample],
    bit: bool,
    subset: &[usize],
) -> Result<LweCiphertext, LatticeError> {
    let q = params.q;
    let mut a = vec![0u64; params.n];
    let mut b = 0u64;
    for &i in subset {
        let sample = public.get(i).ok_or(LatticeError::LengthMismatch {
            expected: public.len(),
            actual: i + 1,
        })?;
        for (acc, x) in a.iter_mut().zip(&sample.a) {
            *acc = (*acc + x) % q;
        }
        b = (b + sample.b) % q;
    }
    if bit {
        b = (b + q / 2) % q;
    }
    Ok(LweCiphertext { a, b })
}

/// Encrypts under a random nonempty subset of the public samples, one fair
/// coin per sample.
pub fn lwe_encrypt_bit<R: RngCore + ?Sized>(
    params: &LweParams,
    public: &[LweSample],
    bit: bool,
    rng: &mut R,
) -> Result<LweCiphertext, LatticeError> {
    let subset = loop {
        let s: Vec<usize> = (0..public.len()).filter(|_| rng.gen::<bool>()).collect();
        if !s.is_empty() || public.is_empty() {
            break s;
        }
    };
    encrypt_bit_with_subset(params, public, bit, &subset)
}

/// 0 when the centered residue `b - <a, s>` satisfies `|d| < q/4`, else 1.
pub fn lwe_decrypt_bit(s: &[u64], ct: &LweCiphertext, q: u64) -> bool {
    let d = (ct.b + q - inner(s, &ct.a, q)) % q;
    // |d| < q/4  <=>  4|d| < q
    4 * centered(d, q).unsigned_abs() >= q
}

impl LweParams {
    fn write(&self, buf: &mut Vec<u8>) {
        wire::put_u32(buf, self.n as u32);
        wire::put_u32(buf, self.q as u32);
        wire::put_u32(buf, self.m as u32);
        wire::put_u32(buf, self.bound as u32);
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, LatticeError> {
        let n = r.u32()? as usize;
        let q = u64::from(r.u32()?);
        let m = r.u32()? as usize;
        let bound = u64::from(r.u32()?);
        if n > 1 << 12 || m > 1 << 12 {
            return Err(WireError::Invalid("dimension too large".into()).into());
        }
        Self::new(n, q, m, bound)
    }
}

fn read_vec(r: &mut Reader<'_>, len: usize, q: u64) -> Result<Vec<u64>, LatticeError> {
    (0..len)
        .map(|_| {
            let x = u64::from(r.u32()?);
            if x >= q {
                return Err(WireError::Invalid(format!("{x} not reduced mod {q}")).into());
            }
            Ok(x)
        })
        .collect()
}

impl LweKeypair {
    /// Parameters, then each sample as `n + 1` 4-byte big-endian scalars.
    pub fn public_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.params.write(&mut buf);
        for s in &self.public {
            for &x in &s.a {
                wire::put_u32(&mut buf, x as u32);
            }
            wire::put_u32(&mut buf, s.b as u32);
        }
        buf
    }

    pub fn public_from_bytes(bytes: &[u8]) -> Result<(LweParams, Vec<LweSample>), LatticeError> {
        let mut r = Reader::new(bytes);
        let params = LweParams::read(&mut r)?;
        let public = (0..params.m)
            .map(|_| {
                let a = read_vec(&mut r, params.n, params.q)?;
                let b = read_vec(&mut r, 1, params.q)?[0];
                Ok(LweSample { a, b })
            })
            .collect::<Result<Vec<_>, LatticeError>>()?;
        r.finish()?;
        Ok((params, public))
    }

    pub fn secret_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.params.write(&mut buf);
        for &x in &self.secret {
            wire::put_u32(&mut buf, x as u32);
        }
        buf
    }

    pub fn secret_from_bytes(bytes: &[u8]) -> Result<(LweParams, Vec<u64>), LatticeError> {
        let mut r = Reader::new(bytes);
        let params = LweParams::read(&mut r)?;
        let s = read_vec(&mut r, params.n, params.q)?;
        r.finish()?;
        Ok((params, s))
    }
}

/// `A` is `n × m` over `Z_q`, stored by rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SisInstance {
    pub a: Vec<Vec<u64>>,
    pub q: u64,
}

impl SisInstance {
    pub fn new(a: Vec<Vec<u64>>, q: u64) -> Result<Self, LatticeError> {
        let m = a.first().map_or(0, Vec::len);
        if a.is_empty() || m == 0 || a.iter().any(|r| r.len() != m) {
            return Err(LatticeError::InvalidParams("A must be a nonempty rectangle".into()));
        }
        if q < 2 || a.iter().flatten().any(|&x| x >= q) {
            return Err(LatticeError::InvalidParams(format!("entries must lie in [0, {q})")));
        }
        Ok(SisInstance { a, q })
    }

    pub fn random<R: RngCore + ?Sized>(n: usize, m: usize, q: u64, rng: &mut R) -> Self {
        let a = (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(0..q)).collect())
            .collect();
        SisInstance { a, q }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn m(&self) -> usize {
        self.a[0].len()
    }

    /// True when `z` is nonzero and `A·z ≡ 0 mod q`.
    pub fn is_solution(&self, z: &[i8]) -> bool {
        z.len() == self.m()
            && z.iter().any(|&x| x != 0)
            && self.a.iter().all(|row| {
                row.iter()
                    .zip(z)
                    .fold(0i64, |acc, (&x, &zi)| (acc + x as i64 * zi as i64).rem_euclid(self.q as i64))
                    == 0
            })
    }
}

/// First nonzero `z ∈ {-1, 0, 1}^m` (lexicographic, `-1 < 0 < 1`) with `A·z ≡ 0`.
pub fn sis_brute_force(inst: &SisInstance) -> Result<Option<Vec<i8>>, LatticeError> {
    let m = inst.m();
    if m > 18 {
        return Err(LatticeError::TooLarge(format!("3^{m} candidates")));
    }
    let q = inst.q as i64;
    let cols: Vec<Vec<i64>> = (0..m)
        .map(|j| inst.a.iter().map(|row| row[j] as i64).collect())
        .collect();
    let mut z = vec![-1i8; m];
    let mut acc: Vec<i64> = (0..inst.n())
        .map(|i| cols.iter().map(|c| -c[i]).sum::<i64>().rem_euclid(q))
        .collect();
    loop {
        if acc.iter().all(|&x| x == 0) && z.iter().any(|&x| x != 0) {
            return Ok(Some(z));
        }
        // odometer step: the last coordinate turns fastest
        let mut j = m;
        loop {
            if j == 0 {
                return Ok(None);
            }
            j -= 1;
            if z[j] < 1 {
                z[j] += 1;
                for (a, c) in acc.iter_mut().zip(&cols[j]) {
                    *a = (*a + c).rem_euclid(q);
                }
                break;
            }
            z[j] = -1;
            for (a, c) in acc.iter_mut().zip(&cols[j]) {
                *a = (*a - 2 * c).rem_euclid(q);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    vectors: Vec<Vec<i64>>,
}

/// Rank over the rationals by fraction-free elimination.
fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| i128::from(x)).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            let (f, g) = (m[r][c], m[rank][c]);
            if f != 0 {
                for k in 0..cols {
                    m[r][k] = m[r][k] * g - m[rank][k] * f;
                }
                let d = m[r].iter().fold(0i128, |a, &x| gcd(a, x.abs()));
                if d > 1 {
                    m[r].iter_mut().for_each(|x| *x /= d);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl LatticeBasis {
    pub fn new(vectors: Vec<Vec<i64>>) -> Result<Self, LatticeError> {
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.is_empty() || vectors.iter().any(|v| v.len() != dim) {
            return Err(LatticeError::InvalidParams("basis vectors must share a length".into()));
        }
        if rational_rank(&vectors) != vectors.len() {
            return Err(LatticeError::DependentBasis);
        }
        Ok(LatticeBasis { vectors })
    }

    pub fn vectors(&self) -> &[Vec<i64>] {
        &self.vectors
    }

    pub fn combine(&self, coeffs: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.vectors[0].len()];
        for (c, v) in coeffs.iter().zip(&self.vectors) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }
}

pub fn norm_sq(v: &[i64]) -> i64 {
    v.iter().map(|x| x * x).sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortVector {
    pub coefficients: Vec<i64>,
    pub vector: Vec<i64>,
    pub norm_sq: i64,
}

impl ShortVector {
    pub fn norm(&self) -> f64 {
        (self.norm_sq as f64).sqrt()
    }
}

/// Shortest nonzero lattice vector with coefficients in `[-bound, bound]`;
/// the lexicographically first coefficient vector wins ties.
pub fn svp_brute_force(basis: &LatticeBasis, bound: i64) -> Result<ShortVector, LatticeError> {
    let n = basis.vectors.len();
    if n > 4 || !(1..=10).contains(&bound) {
        return Err(LatticeError::TooLarge(format!("n = {n}, bound = {bound}")));
    }
    let mut coeffs = vec![-bound; n];
    let mut best: Option<ShortVector> = None;
    loop {
        if coeffs.iter().any(|&c| c != 0) {
            let v = basis.combine(&coeffs);
            let ns = norm_sq(&v);
            if best.as_ref().map_or(true, |b| ns < b.norm_sq) {
                best = Some(ShortVector {
                    coefficients: coeffs.clone(),
                    vector: v,
                    norm_sq: ns,
                });
            }
        }
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(best.expect("bound >= 1 yields a nonzero vector"));
            }
            j -= 1;
            if coeffs[j] < bound {
                coeffs[j] += 1;
                break;
            }
            coeffs[j] = -bound;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn centering_convention() {
        assert_eq!(centered(0, 7), 0);
        assert_eq!(centered(3, 7), 3);
        assert_eq!(centered(4, 7), -3);
        assert_eq!(centered(4, 8), 4);
        assert_eq!(centered(5, 8), -3);
    }

    #[test]
    fn param_validation() {
        assert!(LweParams::new(2, 100, 8, 1).is_err());
        assert!(LweParams::new(4, 97, 3, 1).is_err());
        assert!(LweParams::guaranteed(4, 97, 20, 1).is_ok());
        // m*B = 24 < 97/4, yet 4*24 = 96 > 97 - 2
        assert!(!LweParams::new(4, 97, 24, 1).unwrap().is_guaranteed_correct());
        assert!(LweParams::new(4, 97, 23, 1).unwrap().is_guaranteed_correct());
    }

    #[test]
    fn zero_error_and_zero_secret() {
        let p = LweParams::new(4, 97, 8, 0).unwrap();
        let s = vec![5, 6, 7, 8];
        let mut r = rng(1);
        for _ in 0..50 {
            let smp = lwe_sample(&s, &p, &mut r).unwrap();
            assert_eq!(smp.b, inner(&s, &smp.a, 97));
        }
        let p = LweParams::new(4, 97, 8, 3).unwrap();
        for _ in 0..200 {
            let smp = lwe_sample(&[0; 4], &p, &mut r).unwrap();
            assert!(centered(smp.b, 97).abs() <= 3);
        }
    }

    #[test]
    fn error_mean_is_near_zero() {
        let bound = 5u64;
        let mut r = rng(2);
        let n = 10_000;
        let sum: i64 = (0..n).map(|_| sample_error(bound, &mut r)).sum();
        let mean = sum as f64 / n as f64;
        let sigma = ((bound * (bound + 1)) as f64 / 3.0).sqrt();
        assert!(mean.abs() < 3.0 * sigma / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn keypair_relation_holds() {
        let p = LweParams::guaranteed(4, 97, 20, 1).unwrap();
        let kp = lwe_keygen(p, &mut rng(3));
        assert_eq!(kp.public.len(), 20);
        for s in &kp.public {
            let e = centered((s.b + 97 - inner(&kp.secret, &s.a, 97)) % 97, 97);
            assert!(e.abs() <= 1);
        }
        assert_eq!(kp, lwe_keygen(p, &mut rng(3)));
    }

    #[test]
    fn singleton_subset_and_threshold() {
        let p = LweParams::guaranteed(2, 101, 8, 3).unwrap();
        let kp = lwe_keygen(p, &mut rng(4));
        let ct = encrypt_bit_with_subset(&p, &kp.public, false, &[5]).unwrap();
        assert_eq!(ct.a, kp.public[5].a);
        assert_eq!(ct.b, kp.public[5].b);

        let zero_err = LweParams::new(2, 101, 8, 0).unwrap();
        let kp0 = lwe_keygen(zero_err, &mut rng(5));
        let ct = lwe_encrypt_bit(&zero_err, &kp0.public, true, &mut rng(6)).unwrap();
        let d = (ct.b + 101 - inner(&kp0.secret, &ct.a, 101)) % 101;
        assert_eq!(centered(d, 101), 50);

        let s = [0u64, 0];
        assert!(!lwe_decrypt_bit(&s, &LweCiphertext { a: vec![0, 0], b: 0 }, 101));
        assert!(lwe_decrypt_bit(&s, &LweCiphertext { a: vec![0, 0], b: 50 }, 101));
        // exactly q/4 ties to 1
        assert!(lwe_decrypt_bit(&s, &LweCiphertext { a: vec![0, 0], b: 25 }, 100));
        assert!(!lwe_decrypt_bit(&s, &LweCiphertext { a: vec![0, 0], b: 24 }, 100));
    }

    #[test]
    fn subsets_vary() {
        let p = LweParams::guaranteed(2, 101, 8, 3).unwrap();
        let kp = lwe_keygen(p, &mut rng(7));
        let mut r = rng(8);
        let first = lwe_encrypt_bit(&p, &kp.public, false, &mut r).unwrap();
        let differ = (0..1000).any(|_| lwe_encrypt_bit(&p, &kp.public, false, &mut r).unwrap() != first);
        assert!(differ);
    }

    #[test]
    fn guaranteed_params_always_decrypt() {
        for (n, q, m, b) in [(2, 101, 8, 3), (4, 97, 20, 1), (8, 257, 16, 3)] {
            let p = LweParams::guaranteed(n, q, m, b).unwrap();
            let mut r = rng(q);
            let kp = lwe_keygen(p, &mut r);
            for i in 0..2000 {
                let bit = i % 2 == 1;
                let ct = lwe_encrypt_bit(&p, &kp.public, bit, &mut r).unwrap();
                assert_eq!(lwe_decrypt_bit(&kp.secret, &ct, q), bit);
            }
        }
    }

    #[test]
    fn quarter_bound_alone_is_not_enough() {
        // q = 97, m*B = 24 satisfies m*B < q/4, but a bit-1 ciphertext whose
        // errors all sit at -B lands at 48 - 24 = 24 < 97/4 and reads as 0.
        let p = LweParams::new(1, 97, 24, 1).unwrap();
        let s = vec![1u64];
        let public: Vec<LweSample> = (0..24)
            .map(|i| {
                let a = vec![i as u64 % 97];
                LweSample { b: (inner(&s, &a, 97) + 96) % 97, a }
            })
            .collect();
        let all: Vec<usize> = (0..24).collect();
        let ct = encrypt_bit_with_subset(&p, &public, true, &all).unwrap();
        assert!(!lwe_decrypt_bit(&s, &ct, 97));
        assert!(!p.is_guaranteed_correct());
    }

    #[test]
    fn sum_of_zero_encryptions_decrypts_to_zero() {
        // 2*m*B = 16 and 4*16 <= 97 - 2
        let p = LweParams::guaranteed(4, 97, 8, 1).unwrap();
        let mut r = rng(9);
        let kp = lwe_keygen(p, &mut r);
        for _ in 0..500 {
            let x = lwe_encrypt_bit(&p, &kp.public, false, &mut r).unwrap();
            let y = lwe_encrypt_bit(&p, &kp.public, false, &mut r).unwrap();
            assert!(!lwe_decrypt_bit(&kp.secret, &x.add(&y, 97), 97));
        }
    }

    #[test]
    fn decision_lwe_residues_are_distinguishable() {
        // With s known, LWE residues b - <s,a> fall in [-B, B]; uniform pairs
        // land there with probability (2B+1)/q. A z-test separates the two.
        let p = LweParams::new(4, 257, 4, 2).unwrap();
        let mut r = rng(10);
        let s: Vec<u64> = (0..4).map(|_| r.gen_range(0..257)).collect();
        let trials = 2000;
        let p0 = 5.0 / 257.0;
        let z = |hits: usize| {
            let phat = hits as f64 / trials as f64;
            (phat - p0) / (p0 * (1.0 - p0) / trials as f64).sqrt()
        };
        let in_band = |a: &[u64], b: u64| centered((b + 257 - inner(&s, a, 257)) % 257, 257).abs() <= 2;
        let lwe_hits = (0..trials)
            .filter(|_| {
                let smp = lwe_sample(&s, &p, &mut r).unwrap();
                in_band(&smp.a, smp.b)
            })
            .count();
        let uniform_hits = (0..trials)
            .filter(|_| {
                let a: Vec<u64> = (0..4).map(|_| r.gen_range(0..257)).collect();
                in_band(&a, r.gen_range(0..257))
            })
            .count();
        assert!(z(lwe_hits) > 10.0);
        assert!(z(uniform_hits).abs() < 4.0);
    }

    #[test]
    fn sis_structured_instances() {
        let inst = SisInstance::new(vec![vec![1, 0, 4], vec![2, 0, 5]], 7).unwrap();
        assert!(inst.is_solution(&[0, 1, 0]));
        let z = sis_brute_force(&inst).unwrap().unwrap();
        assert!(inst.is_solution(&z));

        let inst = SisInstance::new(vec![vec![3, 1, 3], vec![2, 6, 2]], 7).unwrap();
        assert!(inst.is_solution(&[1, 0, -1]));
        // lexicographically first: -1 at j, +1 at k
        assert_eq!(sis_brute_force(&inst).unwrap(), Some(vec![-1, 0, 1]));
    }

    #[test]
    fn sis_none_and_limits() {
        // a single column of 1 mod 7: no nonzero z in {-1,0,1} works
        let inst = SisInstance::new(vec![vec![1]], 7).unwrap();
        assert_eq!(sis_brute_force(&inst).unwrap(), None);
        let big = SisInstance::random(1, 19, 7, &mut rng(11));
        assert!(matches!(sis_brute_force(&big), Err(LatticeError::TooLarge(_))));
    }

    #[test]
    fn svp_examples() {
        let id = LatticeBasis::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(svp_brute_force(&id, 3).unwrap().norm_sq, 1);
        let axis = LatticeBasis::new(vec![vec![2, 0], vec![0, 3]]).unwrap();
        let sv = svp_brute_force(&axis, 3).unwrap();
        assert_eq!(sv.norm_sq, 4);
        assert_eq!(sv.vector, vec![-2, 0]);
        let skew = LatticeBasis::new(vec![vec![1, 2], vec![2, 3]]).unwrap();
        assert_eq!(svp_brute_force(&skew, 3).unwrap().norm_sq, 1);
        assert!(matches!(
            LatticeBasis::new(vec![vec![1, 2], vec![2, 4]]),
            Err(LatticeError::DependentBasis)
        ));
        assert!(svp_brute_force(&id, 11).is_err());
    }

    #[test]
    fn key_bytes_roundtrip() {
        let p = LweParams::guaranteed(4, 97, 20, 1).unwrap();
        let kp = lwe_keygen(p, &mut rng(12));
        let (pp, public) = LweKeypair::public_from_bytes(&kp.public_bytes()).unwrap();
        assert_eq!((pp, public), (p, kp.public.clone()));
        let (sp, s) = LweKeypair::secret_from_bytes(&kp.secret_bytes()).unwrap();
        assert_eq!((sp, s), (p, kp.secret));
    }
}
