//! Multivariate quadratic systems over a small prime field, the `S∘P'∘T`
//! trapdoor composition, and unbalanced oil-and-vinegar signatures.

mod uov;

pub use uov::{hash_to_field, uov_keygen, uov_sign, uov_verify, UovKey, UovParams, MAX_SIGN_RETRIES};

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::lattice::is_prime;
use crate::wire::{self, Reader, WireError};

#[derive(Debug, Error)]
pub enum MqError {
    #[error("field size {0} is not a prime <= 31")]
    InvalidField(u32),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("no invertible vinegar draw after {0} attempts")]
    RetriesExhausted(usize),
    #[error("search space too large: {0}")]
    TooLarge(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Wire(#[from] WireError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    q: u32,
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self, MqError> {
        if q > 31 || !is_prime(u64::from(q)) {
            return Err(MqError::InvalidField(q));
        }
        Ok(PrimeField { q })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.q
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        (a + self.q - b % self.q) % self.q
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        a * b % self.q
    }

    pub fn neg(&self, a: u32) -> u32 {
        (self.q - a % self.q) % self.q
    }

    pub fn pow(&self, mut base: u32, mut exp: u32) -> u32 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a % self.q != 0).then(|| self.pow(a, self.q - 2))
    }

    pub fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.gen_range(0..self.q)
    }

    pub fn dot(&self, a: &[u32], b: &[u32]) -> u32 {
        a.iter().zip(b).fold(0, |acc, (x, y)| (acc + x * y) % self.q)
    }
}

/// Square matrix over the field, by rows.
pub type FieldMatrix = Vec<Vec<u32>>;

/// Gauss-Jordan inverse over `F_q`.
pub fn invert_matrix(f: &PrimeField, m: &FieldMatrix) -> Result<FieldMatrix, MqError> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(MqError::DimensionMismatch("matrix is not square".into()));
    }
    let mut a = m.clone();
    let mut inv: FieldMatrix = (0..n)
        .map(|i| (0..n).map(|j| u32::from(i == j)).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| a[r][c] != 0).ok_or(MqError::Singular)?;
        a.swap(c, p);
        inv.swap(c, p);
        let s = f.inv(a[c][c]).expect("pivot is nonzero");
        for j in 0..n {
            a[c][j] = f.mul(a[c][j], s);
            inv[c][j] = f.mul(inv[c][j], s);
        }
        for r in 0..n {
            let factor = a[r][c];
            if r != c && factor != 0 {
                for j in 0..n {
                    a[r][j] = f.sub(a[r][j], f.mul(factor, a[c][j]));
                    inv[r][j] = f.sub(inv[r][j], f.mul(factor, inv[c][j]));
                }
            }
        }
    }
    Ok(inv)
}

/// Solves `A x = b`; `Err(Singular)` when `A` is not invertible.
pub fn solve_linear(f: &PrimeField, a: &FieldMatrix, b: &[u32]) -> Result<Vec<u32>, MqError> {
    let inv = invert_matrix(f, a)?;
    Ok(inv.iter().map(|row| f.dot(row, b)).collect())
}

/// `α + Σ β_j x_j + Σ_{j<=k} γ_jk x_j x_k`, with `γ` packed as an upper triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadPoly {
    n: usize,
    pub alpha: u32,
    pub beta: Vec<u32>,
    gamma: Vec<u32>,
}

impl QuadPoly {
    pub fn zero(n: usize) -> Self {
        QuadPoly {
            n,
            alpha: 0,
            beta: vec![0; n],
            gamma: vec![0; n * (n + 1) / 2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn idx(&self, j: usize, k: usize) -> usize {
        let (j, k) = if j <= k { (j, k) } else { (k, j) };
        assert!(k < self.n, "variable index out of range");
        // rows 0..j hold n, n-1, ..., n-j+1 entries
        j * (2 * self.n + 1 - j) / 2 + (k - j)
    }

    /// Coefficient of `x_j x_k`; the order of `j` and `k` does not matter.
    pub fn gamma(&self, j: usize, k: usize) -> u32 {
        self.gamma[self.idx(j, k)]
    }

    pub fn set_gamma(&mut self, j: usize, k: usize, value: u32) {
        let i = self.idx(j, k);
        self.gamma[i] = value;
    }

    fn add_gamma(&mut self, f: &PrimeField, j: usize, k: usize, value: u32) {
        let i = self.idx(j, k);
        self.gamma[i] = f.add(self.gamma[i], value);
    }

    pub fn random<R: RngCore + ?Sized>(f: &PrimeField, n: usize, rng: &mut R) -> Self {
        let mut p = Self::zero(n);
        p.alpha = f.random(rng);
        p.beta.iter_mut().for_each(|b| *b = f.random(rng));
        p.gamma.iter_mut().for_each(|g| *g = f.random(rng));
        p
    }

    pub fn eval(&self, f: &PrimeField, x: &[u32]) -> u32 {
        let mut acc = f.add(self.alpha, f.dot(&self.beta, x));
        for j in 0..self.n {
            if x[j] == 0 {
                continue;
            }
            for k in j..self.n {
                acc = f.add(acc, f.mul(self.gamma(j, k), f.mul(x[j], x[k])));
            }
        }
        acc
    }

    /// `self += c * other`.
    fn add_scaled(&mut self, f: &PrimeField, other: &QuadPoly, c: u32) {
        self.alpha = f.add(self.alpha, f.mul(c, other.alpha));
        for (a, b) in self.beta.iter_mut().zip(&other.beta) {
            *a = f.add(*a, f.mul(c, *b));
        }
        for (a, b) in self.gamma.iter_mut().zip(&other.gamma) {
            *a = f.add(*a, f.mul(c, *b));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MqSystem {
    pub field: PrimeField,
    n: usize,
    polys: Vec<QuadPoly>,
}

impl MqSystem {
    pub fn new(field: PrimeField, n: usize, polys: Vec<QuadPoly>) -> Result<Self, MqError> {
        if let Some(p) = polys.iter().find(|p| p.n != n) {
            return Err(MqError::DimensionMismatch(format!(
                "polynomial over {} variables in a system over {n}",
                p.n
            )));
        }
        let q = field.q();
        let reduced = polys.iter().all(|p| {
            p.alpha < q && p.beta.iter().chain(&p.gamma).all(|&c| c < q)
        });
        if !reduced {
            return Err(MqError::InvalidParams(format!("coefficients must be reduced mod {q}")));
        }
        Ok(MqSystem { field, n, polys })
    }

    pub fn zero(field: PrimeField, n: usize, m: usize) -> Self {
        MqSystem {
            field,
            n,
            polys: vec![QuadPoly::zero(n); m],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.polys.len()
    }

    pub fn polys(&self) -> &[QuadPoly] {
        &self.polys
    }

    /// Field, `n`, `m` as 4-byte big-endian, then each polynomial's `α`,
    /// `β`, packed `γ`, one byte per coefficient.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        wire::put_u32(&mut buf, self.field.q());
        wire::put_u32(&mut buf, self.n as u32);
        wire::put_u32(&mut buf, self.m() as u32);
        for p in &self.polys {
            buf.push(p.alpha as u8);
            buf.extend(p.beta.iter().map(|&c| c as u8));
            buf.extend(p.gamma.iter().map(|&c| c as u8));
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, MqError> {
        let mut r = Reader::new(bytes);
        let sys = Self::read(&mut r)?;
        r.finish()?;
        Ok(sys)
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self, MqError> {
        let field = PrimeField::new(r.u32()?)?;
        let n = r.u32()? as usize;
        let m = r.u32()? as usize;
        if n > 256 || m > 256 {
            return Err(WireError::Invalid("system too large".into()).into());
        }
        let mut polys = Vec::with_capacity(m);
        for _ in 0..m {
            let mut p = QuadPoly::zero(n);
            let coeffs = r.take(1 + n + p.gamma.len())?;
            p.alpha = u32::from(coeffs[0]);
            for (d, &s) in p.beta.iter_mut().zip(&coeffs[1..=n]) {
                *d = u32::from(s);
            }
            for (d, &s) in p.gamma.iter_mut().zip(&coeffs[1 + n..]) {
                *d = u32::from(s);
            }
            polys.push(p);
        }
        Self::new(field, n, polys)
    }
}

pub fn eval_system(p: &MqSystem, x: &[u32]) -> Result<Vec<u32>, MqError> {
    if x.len() != p.n {
        return Err(MqError::LengthMismatch {
            expected: p.n,
            actual: x.len(),
        });
    }
    if x.iter().any(|&v| v >= p.field.q()) {
        return Err(MqError::InvalidParams("input not reduced".into()));
    }
    Ok(p.polys.iter().map(|poly| poly.eval(&p.field, x)).collect())
}

/// `x ↦ M x + c` on `F_q^d`, with `M` invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    pub field: PrimeField,
    pub matrix: FieldMatrix,
    pub offset: Vec<u32>,
}

impl AffineMap {
    pub fn new(field: PrimeField, matrix: FieldMatrix, offset: Vec<u32>) -> Result<Self, MqError> {
        let d = matrix.len();
        if offset.len() != d || matrix.iter().any(|r| r.len() != d) {
            return Err(MqError::DimensionMismatch("affine map must be square".into()));
        }
        invert_matrix(&field, &matrix)?;
        Ok(AffineMap {
            field,
            matrix,
            offset,
        })
    }

    pub fn identity(field: PrimeField, d: usize) -> Self {
        AffineMap {
            field,
            matrix: (0..d).map(|i| (0..d).map(|j| u32::from(i == j)).collect()).collect(),
            offset: vec![0; d],
        }
    }

    /// Uniform invertible matrix (rejection sampled) and uniform offset.
    pub fn random<R: RngCore + ?Sized>(field: PrimeField, d: usize, rng: &mut R) -> Self {
        loop {
            let matrix: FieldMatrix = (0..d)
                .map(|_| (0..d).map(|_| field.random(rng)).collect())
                .collect();
            if invert_matrix(&field, &matrix).is_ok() {
                let offset = (0..d).map(|_| field.random(rng)).collect();
                return AffineMap {
                    field,
                    matrix,
                    offset,
                };
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, x: &[u32]) -> Vec<u32> {
        let f = &self.field;
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, &c)| f.add(f.dot(row, x), c))
            .collect()
    }

    /// `y ↦ M⁻¹ (y - c)`.
    pub fn inverse(&self) -> AffineMap {
        let f = &self.field;
        let inv = invert_matrix(f, &self.matrix).expect("affine maps are invertible");
        let offset = inv
            .iter()
            .map(|row| f.neg(f.dot(row, &self.offset)))
            .collect();
        AffineMap {
            field: self.field,
            matrix: inv,
            offset,
        }
    }

    pub(crate) fn write(&self, buf: &mut Vec<u8>) {
        wire::put_u32(buf, self.dim() as u32);
        for row in &self.matrix {
            buf.extend(row.iter().map(|&c| c as u8));
        }
        buf.extend(self.offset.iter().map(|&c| c as u8));
    }

    pub(crate) fn read(field: PrimeField, r: &mut Reader<'_>) -> Result<Self, MqError> {
        let d = r.u32()? as usize;
        if d > 256 {
            return Err(WireError::Invalid("map too large".into()).into());
        }
        let to_vec = |s: &[u8]| -> Result<Vec<u32>, MqError> {
            s.iter()
                .map(|&c| {
                    let c = u32::from(c);
                    if c < field.q() {
                        Ok(c)
                    } else {
                        Err(WireError::Invalid("coefficient not reduced".into()).into())
                    }
                })
                .collect()
        };
        let matrix = (0..d)
            .map(|_| to_vec(r.take(d)?))
            .collect::<Result<FieldMatrix, MqError>>()?;
        let offset = to_vec(r.take(d)?)?;
        Self::new(field, matrix, offset)
    }
}

/// Expands `S ∘ central ∘ T` into a single quadratic system.
pub fn compose_trapdoor(s: &AffineMap, central: &MqSystem, t: &AffineMap) -> Result<MqSystem, MqError> {
    let f = central.field;
    if s.field != f || t.field != f {
        return Err(MqError::DimensionMismatch("maps use different fields".into()));
    }
    if t.dim() != central.n || s.dim() != central.m() {
        return Err(MqError::DimensionMismatch(format!(
            "T on F^{}, central F^{} -> F^{}, S on F^{}",
            t.dim(),
            central.n,
            central.m(),
            s.dim()
        )));
    }
    let n = central.n;
    // T(x)_j = c_j + Σ_i M_ji x_i
    let lin = |j: usize| (t.offset[j], &t.matrix[j]);
    let inner: Vec<QuadPoly> = central
        .polys
        .iter()
        .map(|p| {
            let mut out = QuadPoly::zero(n);
            out.alpha = p.alpha;
            for j in 0..n {
                let (c, row) = lin(j);
                if p.beta[j] != 0 {
                    out.alpha = f.add(out.alpha, f.mul(p.beta[j], c));
                    for i in 0..n {
                        out.beta[i] = f.add(out.beta[i], f.mul(p.beta[j], row[i]));
                    }
                }
                for k in j..n {
                    let g = p.gamma(j, k);
                    if g == 0 {
                        continue;
                    }
                    let (d, row_k) = lin(k);
                    out.alpha = f.add(out.alpha, f.mul(g, f.mul(c, d)));
                    for i in 0..n {
                        let lin_coeff = f.add(f.mul(c, row_k[i]), f.mul(d, row[i]));
                        out.beta[i] = f.add(out.beta[i], f.mul(g, lin_coeff));
                        for l in 0..n {
                            let prod = f.mul(row[i], row_k[l]);
                            if prod != 0 {
                                out.add_gamma(&f, i, l, f.mul(g, prod));
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    let polys = s
        .matrix
        .iter()
        .zip(&s.offset)
        .map(|(row, &c)| {
            let mut out = QuadPoly::zero(n);
            out.alpha = c;
            for (p, &coef) in inner.iter().zip(row) {
                if coef != 0 {
                    out.add_scaled(&f, p, coef);
                }
            }
            out
        })
        .collect();
    MqSystem::new(f, n, polys)
}

/// Every `x` with `P(x) = y`, in ascending lexicographic order.
pub fn brute_force_preimages(p: &MqSystem, y: &[u32]) -> Result<Vec<Vec<u32>>, MqError> {
    if y.len() != p.m() {
        return Err(MqError::LengthMismatch {
            expected: p.m(),
            actual: y.len(),
        });
    }
    let q = p.field.q();
    let space = (q as u64).checked_pow(p.n as u32).filter(|&s| s <= 1_000_000);
    if space.is_none() {
        return Err(MqError::TooLarge(format!("{q}^{}", p.n)));
    }
    let mut x = vec![0u32; p.n];
    let mut out = Vec::new();
    loop {
        if p.polys.iter().zip(y).all(|(poly, &yi)| poly.eval(&p.field, &x) == yi) {
            out.push(x.clone());
        }
        let mut j = p.n;
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            x[j] += 1;
            if x[j] < q {
                break;
            }
            x[j] = 0;
        }
    }
}

/// Every vector of `F_q^n` in lexicographic order.
pub fn all_vectors(q: u32, n: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (q as u64).pow(n as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![0u32; n];
        for slot in v.iter_mut().rev() {
            *slot = (idx % q as u64) as u32;
            idx /= q as u64;
        }
        v
    })
}
