use rand::RngCore;

use super::{
    compose_trapdoor, eval_system, solve_linear, AffineMap, FieldMatrix, MqError, MqSystem,
    PrimeField, QuadPoly,
};
use crate::hash::HashFunction;
use crate::wire::{self, Reader};

pub const MAX_SIGN_RETRIES: usize = 100;

/// `o` oil and `v` vinegar variables; vinegar occupy indices `0..v`, oil `v..v+o`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UovParams {
    pub o: usize,
    pub v: usize,
    pub field: PrimeField,
}

impl UovParams {
    pub fn new(o: usize, v: usize, q: u32) -> Result<Self, MqError> {
        if o == 0 || v < o {
            return Err(MqError::InvalidParams(format!("need o >= 1 and v >= o, got o={o} v={v}")));
        }
        if o + v > 64 {
            return Err(MqError::InvalidParams("at most 64 variables".into()));
        }
        Ok(UovParams {
            o,
            v,
            field: PrimeField::new(q)?,
        })
    }

    pub fn n(&self) -> usize {
        self.o + self.v
    }

    pub fn is_oil(&self, index: usize) -> bool {
        index >= self.v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UovKey {
    pub params: UovParams,
    pub central: MqSystem,
    pub t: AffineMap,
    t_inv: AffineMap,
    pub public: MqSystem,
}

impl UovKey {
    pub fn from_parts(params: UovParams, central: MqSystem, t: AffineMap) -> Result<Self, MqError> {
        if central.n() != params.n() || central.m() != params.o || t.dim() != params.n() {
            return Err(MqError::DimensionMismatch("central map or T has the wrong shape".into()));
        }
        for p in central.polys() {
            for j in params.v..params.n() {
                for k in j..params.n() {
                    if p.gamma(j, k) != 0 {
                        return Err(MqError::InvalidParams(format!(
                            "central map mixes oil variables {j} and {k}"
                        )));
                    }
                }
            }
        }
        let public = compose_trapdoor(&AffineMap::identity(params.field, params.o), &central, &t)?;
        Ok(UovKey {
            params,
            t_inv: t.inverse(),
            central,
            t,
            public,
        })
    }

    /// `o`, `v`, `q` as 4-byte big-endian, then the central system and `T`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        wire::put_u32(&mut buf, self.params.o as u32);
        wire::put_u32(&mut buf, self.params.v as u32);
        wire::put_u32(&mut buf, self.params.field.q());
        buf.extend(self.central.to_bytes());
        self.t.write(&mut buf);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, MqError> {
        let mut r = Reader::new(bytes);
        let params = UovParams::new(r.u32()? as usize, r.u32()? as usize, r.u32()?)?;
        let central = MqSystem::read(&mut r)?;
        let t = AffineMap::read(params.field, &mut r)?;
        r.finish()?;
        Self::from_parts(params, central, t)
    }
}

pub fn uov_keygen<R: RngCore + ?Sized>(params: UovParams, rng: &mut R) -> UovKey {
    let f = params.field;
    let n = params.n();
    let polys = (0..params.o)
        .map(|_| {
            let mut p = QuadPoly::random(&f, n, rng);
            for j in params.v..n {
                for k in j..n {
                    p.set_gamma(j, k, 0);
                }
            }
            p
        })
        .collect();
    let central = MqSystem::new(f, n, polys).expect("generated over n variables");
    let t = AffineMap::random(f, n, rng);
    UovKey::from_parts(params, central, t).expect("generated key satisfies the oil constraint")
}

/// Maps a message to `F_q^m` by hashing with a counter and keeping only bytes
/// below the largest multiple of `q`.
pub fn hash_to_field(msg: &[u8], m: usize, field: &PrimeField, h: &dyn HashFunction) -> Vec<u32> {
    let q = field.q();
    let limit = (256 / q) * q;
    let mut out = Vec::with_capacity(m);
    let mut counter = 0u32;
    while out.len() < m {
        let block = h.hash_parts(&[msg, &counter.to_be_bytes()]);
        for &b in &block {
            if u32::from(b) < limit && out.len() < m {
                out.push(u32::from(b) % q);
            }
        }
        counter += 1;
    }
    out
}

/// With the vinegar values fixed, each central polynomial becomes
/// `const + Σ coeff_l · oil_l`. Returns the coefficient matrix and constants.
fn linearize(key: &UovKey, vinegar: &[u32]) -> (FieldMatrix, Vec<u32>) {
    let p = &key.params;
    let f = &p.field;
    let mut matrix = Vec::with_capacity(p.o);
    let mut consts = Vec::with_capacity(p.o);
    for poly in key.central.polys() {
        let mut c = f.add(poly.alpha, f.dot(&poly.beta[..p.v], vinegar));
        for j in 0..p.v {
            for k in j..p.v {
                c = f.add(c, f.mul(poly.gamma(j, k), f.mul(vinegar[j], vinegar[k])));
            }
        }
        let row = (p.v..p.n())
            .map(|l| {
                (0..p.v).fold(poly.beta[l], |acc, j| {
                    f.add(acc, f.mul(poly.gamma(j, l), vinegar[j]))
                })
            })
            .collect();
        matrix.push(row);
        consts.push(c);
    }
    (matrix, consts)
}

pub fn uov_sign<R: RngCore + ?Sized>(
    key: &UovKey,
    msg: &[u8],
    h: &dyn HashFunction,
    rng: &mut R,
) -> Result<Vec<u32>, MqError> {
    let p = &key.params;
    let f = &p.field;
    let target = hash_to_field(msg, p.o, f, h);
    for _ in 0..MAX_SIGN_RETRIES {
        let vinegar: Vec<u32> = (0..p.v).map(|_| f.random(rng)).collect();
        let (matrix, consts) = linearize(key, &vinegar);
        let rhs: Vec<u32> = target.iter().zip(&consts).map(|(&t, &c)| f.sub(t, c)).collect();
        match solve_linear(f, &matrix, &rhs) {
            Ok(oil) => {
                let mut y = vinegar;
                y.extend(oil);
                return Ok(key.t_inv.apply(&y));
            }
            Err(MqError::Singular) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(MqError::RetriesExhausted(MAX_SIGN_RETRIES))
}

pub fn uov_verify(
    public: &MqSystem,
    msg: &[u8],
    sig: &[u32],
    h: &dyn HashFunction,
) -> Result<bool, MqError> {
    if sig.iter().any(|&s| s >= public.field.q()) {
        return Ok(false);
    }
    let y = eval_system(public, sig)?;
    Ok(y == hash_to_field(msg, public.m(), &public.field, h))
}
