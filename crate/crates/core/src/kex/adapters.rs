use std::sync::Arc;

use rand::{Rng, RngCore};

use super::curve::{point_order, scalar_mul, CurveFixture, CurveParams, Point};
use super::{Kem, KexError, SigScheme};
use crate::bits::BitVec;
use crate::codecrypt::{
    mceliece_decrypt, mceliece_encrypt, mceliece_keygen, LinearCode, McEliecePrivateKey,
    McEliecePublicKey,
};
use crate::hash::HashFunction;
use crate::lattice::{
    lwe_decrypt_bit, lwe_encrypt_bit, lwe_keygen, LweCiphertext, LweKeypair, LweParams,
};

/// A public-key scheme that encrypts one bit into a fixed-length bit string.
pub trait BitEncryption: Send + Sync {
    fn keygen(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError>;
    fn ciphertext_bits(&self) -> usize;
    fn encrypt_bit(&self, pk: &[u8], bit: bool, rng: &mut dyn RngCore) -> Result<BitVec, KexError>;
    fn decrypt_bit(&self, sk: &[u8], ct: &BitVec) -> Result<bool, KexError>;
}

/// KEM built from a [`BitEncryption`]: encapsulation encrypts `secret_bits`
/// random bits one at a time and the shared secret is the hash of those bits.
pub struct EncryptionKem {
    name: String,
    scheme: Box<dyn BitEncryption>,
    secret_bits: usize,
    hash: Arc<dyn HashFunction>,
}

pub fn kem_from_encryption(
    name: &str,
    scheme: Box<dyn BitEncryption>,
    secret_bits: usize,
    hash: Arc<dyn HashFunction>,
) -> EncryptionKem {
    assert!(secret_bits > 0, "secret_bits must be positive");
    EncryptionKem {
        name: name.to_string(),
        scheme,
        secret_bits,
        hash,
    }
}

impl EncryptionKem {
    pub fn ciphertext_len(&self) -> usize {
        (self.secret_bits * self.scheme.ciphertext_bits()).div_ceil(8)
    }
}

impl Kem for EncryptionKem {
    fn name(&self) -> &str {
        &self.name
    }

    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        self.scheme.keygen(rng)
    }

    fn encaps(&self, pk: &[u8], rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let mut secret = BitVec::zeros(0);
        let mut ct = BitVec::zeros(0);
        for _ in 0..self.secret_bits {
            let bit = rng.gen::<bool>();
            secret.push(bit);
            let c = self.scheme.encrypt_bit(pk, bit, rng)?;
            debug_assert_eq!(c.len(), self.scheme.ciphertext_bits());
            ct.extend_from(&c);
        }
        Ok((ct.to_bytes(), self.hash.hash(&secret.to_bytes())))
    }

    fn decaps(&self, sk: &[u8], ct: &[u8]) -> Result<Vec<u8>, KexError> {
        let width = self.scheme.ciphertext_bits();
        let bits = BitVec::from_bytes(ct, self.secret_bits * width).ok_or_else(|| {
            KexError::DecapsFailure(format!("ciphertext must be {} bytes", self.ciphertext_len()))
        })?;
        let mut secret = BitVec::zeros(0);
        for i in 0..self.secret_bits {
            let bit = self
                .scheme
                .decrypt_bit(sk, &bits.slice(i * width, width))
                .map_err(|e| match e {
                    KexError::DecapsFailure(_) => e,
                    other => KexError::DecapsFailure(other.to_string()),
                })?;
            secret.push(bit);
        }
        Ok(self.hash.hash(&secret.to_bytes()))
    }
}

/// Test double: the ciphertext of a bit is the bit itself.
pub struct IdentityBits;

impl BitEncryption for IdentityBits {
    fn keygen(&self, _rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        Ok((Vec::new(), Vec::new()))
    }

    fn ciphertext_bits(&self) -> usize {
        1
    }

    fn encrypt_bit(&self, _pk: &[u8], bit: bool, _rng: &mut dyn RngCore) -> Result<BitVec, KexError> {
        Ok(BitVec::from_bools(&[bit]))
    }

    fn decrypt_bit(&self, _sk: &[u8], ct: &BitVec) -> Result<bool, KexError> {
        Ok(ct.get(0))
    }
}

/// Regev encryption; each scalar of `(a, b)` takes `ceil(log2 q)` bits.
pub struct LweBits {
    params: LweParams,
}

impl LweBits {
    pub fn new(params: LweParams) -> Self {
        LweBits { params }
    }

    fn width(&self) -> usize {
        (u64::BITS - (self.params.q - 1).leading_zeros()) as usize
    }
}

impl BitEncryption for LweBits {
    fn keygen(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let kp = lwe_keygen(self.params, rng);
        Ok((kp.public_bytes(), kp.secret_bytes()))
    }

    fn ciphertext_bits(&self) -> usize {
        (self.params.n + 1) * self.width()
    }

    fn encrypt_bit(&self, pk: &[u8], bit: bool, rng: &mut dyn RngCore) -> Result<BitVec, KexError> {
        let (params, public) = LweKeypair::public_from_bytes(pk)
            .map_err(|e| KexError::InvalidKey(e.to_string()))?;
        if params != self.params {
            return Err(KexError::InvalidKey("LWE parameters differ".into()));
        }
        let ct = lwe_encrypt_bit(&params, &public, bit, rng)
            .map_err(|e| KexError::InvalidKey(e.to_string()))?;
        let mut out = BitVec::zeros(0);
        for &x in ct.a.iter().chain([&ct.b]) {
            out.extend_from(&BitVec::from_u64(x, self.width()));
        }
        Ok(out)
    }

    fn decrypt_bit(&self, sk: &[u8], ct: &BitVec) -> Result<bool, KexError> {
        let (params, s) = LweKeypair::secret_from_bytes(sk)
            .map_err(|e| KexError::InvalidKey(e.to_string()))?;
        let w = self.width();
        let mut vals = Vec::with_capacity(params.n + 1);
        for i in 0..=params.n {
            let v = ct.slice(i * w, w).to_u64();
            if v >= params.q {
                return Err(KexError::DecapsFailure(format!("scalar {v} not reduced")));
            }
            vals.push(v);
        }
        let b = vals.pop().expect("n + 1 scalars");
        Ok(lwe_decrypt_bit(&s, &LweCiphertext { a: vals, b }, params.q))
    }
}

/// McEliece with the bit repeated across the whole message block.
pub struct McElieceBits {
    code: LinearCode,
}

impl McElieceBits {
    pub fn new(code: LinearCode) -> Self {
        McElieceBits { code }
    }
}

impl BitEncryption for McElieceBits {
    fn keygen(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let (pk, sk) = mceliece_keygen(&self.code, rng);
        Ok((pk.to_bytes(), sk.to_bytes()))
    }

    fn ciphertext_bits(&self) -> usize {
        self.code.n()
    }

    fn encrypt_bit(&self, pk: &[u8], bit: bool, rng: &mut dyn RngCore) -> Result<BitVec, KexError> {
        let pk = McEliecePublicKey::from_bytes(pk).map_err(|e| KexError::InvalidKey(e.to_string()))?;
        let m = if bit {
            BitVec::ones(pk.g_prime.rows())
        } else {
            BitVec::zeros(pk.g_prime.rows())
        };
        mceliece_encrypt(&pk, &m, rng).map_err(|e| KexError::InvalidKey(e.to_string()))
    }

    fn decrypt_bit(&self, sk: &[u8], ct: &BitVec) -> Result<bool, KexError> {
        let sk = McEliecePrivateKey::from_bytes(sk).map_err(|e| KexError::InvalidKey(e.to_string()))?;
        let m = mceliece_decrypt(&sk, ct).map_err(|e| KexError::DecapsFailure(e.to_string()))?;
        match m.weight() {
            0 => Ok(false),
            w if w == m.len() => Ok(true),
            _ => Err(KexError::DecapsFailure("message bits disagree".into())),
        }
    }
}

/// ECDH as a KEM: the ciphertext is an ephemeral public point and the shared
/// secret is the hash of the shared point's x-coordinate.
pub struct EcdhKem {
    name: String,
    curve: CurveParams,
    g: Point,
    order: u64,
    hash: Arc<dyn HashFunction>,
}

impl EcdhKem {
    pub fn new(name: &str, fixture: CurveFixture, hash: Arc<dyn HashFunction>) -> Result<Self, KexError> {
        let order = point_order(&fixture.g, &fixture.curve)?;
        if order <= 2 {
            return Err(KexError::InvalidCurve(format!("base point order {order} too small")));
        }
        Ok(EcdhKem {
            name: name.to_string(),
            curve: fixture.curve,
            g: fixture.g,
            order,
            hash,
        })
    }

    fn encode(p: &Point) -> Vec<u8> {
        match *p {
            Point::Infinity => Vec::new(),
            Point::Affine { x, y } => [(x as u32).to_be_bytes(), (y as u32).to_be_bytes()].concat(),
        }
    }

    fn decode(&self, bytes: &[u8]) -> Option<Point> {
        let bytes: [u8; 8] = bytes.try_into().ok()?;
        let x = u64::from(u32::from_be_bytes(bytes[..4].try_into().unwrap()));
        let y = u64::from(u32::from_be_bytes(bytes[4..].try_into().unwrap()));
        let p = Point::Affine { x, y };
        self.curve.contains(&p).then_some(p)
    }

    fn shared(&self, k: &Point) -> Result<Vec<u8>, KexError> {
        match *k {
            Point::Infinity => Err(KexError::DecapsFailure("shared point is the identity".into())),
            Point::Affine { x, .. } => Ok(self.hash.hash(&(x as u32).to_be_bytes())),
        }
    }

    fn scalar(&self, sk: &[u8]) -> Result<u64, KexError> {
        let n = sk
            .try_into()
            .map(u64::from_be_bytes)
            .map_err(|_| KexError::InvalidKey("scalar must be 8 bytes".into()))?;
        if n == 0 || n >= self.order {
            return Err(KexError::InvalidKey("scalar out of range".into()));
        }
        Ok(n)
    }
}

impl Kem for EcdhKem {
    fn name(&self) -> &str {
        &self.name
    }

    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let n = rng.gen_range(1..self.order);
        let p = scalar_mul(n, &self.g, &self.curve)?;
        Ok((Self::encode(&p), n.to_be_bytes().to_vec()))
    }

    fn encaps(&self, pk: &[u8], rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let peer = self
            .decode(pk)
            .ok_or_else(|| KexError::InvalidKey("public key is not a curve point".into()))?;
        let e = rng.gen_range(1..self.order);
        let ct = scalar_mul(e, &self.g, &self.curve)?;
        let k = scalar_mul(e, &peer, &self.curve)?;
        Ok((Self::encode(&ct), self.shared(&k)?))
    }

    fn decaps(&self, sk: &[u8], ct: &[u8]) -> Result<Vec<u8>, KexError> {
        let n = self.scalar(sk)?;
        let peer = self
            .decode(ct)
            .ok_or_else(|| KexError::DecapsFailure("ciphertext is not a curve point".into()))?;
        self.shared(&scalar_mul(n, &peer, &self.curve)?)
    }
}

fn random_bytes(rng: &mut dyn RngCore, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    rng.fill_bytes(&mut out);
    out
}

/// `H(seed ‖ 0) ‖ H(seed ‖ 1) ‖ ...` truncated to `len` bytes.
fn expand(h: &dyn HashFunction, seed: &[u8], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let mut counter = 0u32;
    while out.len() < len {
        out.extend(h.hash_parts(&[seed, &counter.to_be_bytes()]));
        counter += 1;
    }
    out.truncate(len);
    out
}

/// Size-only KEM: random public key and ciphertext of the configured lengths,
/// secret key equal to the public key, shared secret `H(pk ‖ ct)`.
pub struct StubKem {
    name: String,
    pk_len: usize,
    ct_len: usize,
    hash: Arc<dyn HashFunction>,
}

impl StubKem {
    pub fn new(name: &str, pk_len: usize, ct_len: usize, hash: Arc<dyn HashFunction>) -> Self {
        StubKem {
            name: name.to_string(),
            pk_len,
            ct_len,
            hash,
        }
    }
}

impl Kem for StubKem {
    fn name(&self) -> &str {
        &self.name
    }

    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let pk = random_bytes(rng, self.pk_len);
        Ok((pk.clone(), pk))
    }

    fn encaps(&self, pk: &[u8], rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        if pk.len() != self.pk_len {
            return Err(KexError::InvalidKey(format!("public key must be {} bytes", self.pk_len)));
        }
        let ct = random_bytes(rng, self.ct_len);
        let ss = self.hash.hash_parts(&[pk, &ct]);
        Ok((ct, ss))
    }

    fn decaps(&self, sk: &[u8], ct: &[u8]) -> Result<Vec<u8>, KexError> {
        if ct.len() != self.ct_len {
            return Err(KexError::DecapsFailure(format!("ciphertext must be {} bytes", self.ct_len)));
        }
        Ok(self.hash.hash_parts(&[sk, ct]))
    }
}

/// Size-only signature: `sig = expand(H(pk ‖ msg))` at the configured length,
/// secret key equal to the public key. Offers no security.
pub struct StubSig {
    name: String,
    pk_len: usize,
    sig_len: usize,
    hash: Arc<dyn HashFunction>,
}

impl StubSig {
    pub fn new(name: &str, pk_len: usize, sig_len: usize, hash: Arc<dyn HashFunction>) -> Self {
        StubSig {
            name: name.to_string(),
            pk_len,
            sig_len,
            hash,
        }
    }

    fn tag(&self, key: &[u8], msg: &[u8]) -> Vec<u8> {
        let seed = self.hash.hash_parts(&[key, msg]);
        expand(self.hash.as_ref(), &seed, self.sig_len)
    }
}

impl SigScheme for StubSig {
    fn name(&self) -> &str {
        &self.name
    }

    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError> {
        let pk = random_bytes(rng, self.pk_len);
        Ok((pk.clone(), pk))
    }

    fn sign(&self, sk: &[u8], msg: &[u8], _rng: &mut dyn RngCore) -> Result<Vec<u8>, KexError> {
        Ok(self.tag(sk, msg))
    }

    fn verify(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> bool {
        pk.len() == self.pk_len && sig == self.tag(pk, msg)
    }
}
